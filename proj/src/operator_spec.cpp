#include "lpdiss/operator_spec.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lpdiss {

int OperatorSpec::spatial_dim() const {
  if (kind == Kind::elasticity) return 2;
  return fields.front().box().n;
}

int OperatorSpec::components() const {
  switch (kind) {
    case Kind::scalar: return 1;
    case Kind::elasticity: return 2;
    default: return fields.front().m();
  }
}

const DomainBox& OperatorSpec::box() const {
  static const DomainBox unit2 = DomainBox::unit(2);
  if (kind == Kind::elasticity && fields.empty()) return unit2;
  return fields.front().box();
}

OperatorSpec OperatorSpec::scalar(CoefficientField f) {
  if (f.m() != f.box().n)
    throw Error("scalar operator: matrix size must equal the spatial dimension");
  OperatorSpec op;
  op.kind = Kind::scalar;
  op.fields.push_back(std::move(f));
  return op;
}

OperatorSpec OperatorSpec::diagonal(std::vector<CoefficientField> fs) {
  if (fs.empty()) throw Error("diagonal operator: needs at least one field");
  const int n = fs.front().box().n;
  if (int(fs.size()) != n)
    throw Error("diagonal operator: needs one field per coordinate direction");
  for (const auto& f : fs)
    if (f.box().n != n || f.m() != fs.front().m())
      throw Error("diagonal operator: inconsistent fields");
  OperatorSpec op;
  op.kind = Kind::diagonal;
  op.fields = std::move(fs);
  return op;
}

OperatorSpec OperatorSpec::general2d(std::vector<CoefficientField> blocks) {
  if (blocks.size() != 4)
    throw Error("general 2d operator: needs the 2 x 2 block array (4 fields)");
  for (const auto& f : blocks)
    if (f.box().n != 2 || f.m() != blocks.front().m())
      throw Error("general 2d operator: inconsistent fields");
  OperatorSpec op;
  op.kind = Kind::general2d;
  op.fields = std::move(blocks);
  return op;
}

OperatorSpec OperatorSpec::elasticity(double nu, std::optional<DomainBox> box) {
  const ElasticityParams params(nu);  // validates nu
  OperatorSpec op;
  op.kind = Kind::elasticity;
  op.nu = nu;
  DomainBox b = box ? *box : DomainBox::unit(2);
  if (b.n != 2) throw Error("elasticity operator: the domain must be planar");
  for (const ComplexMatrix& blk : elasticity_coefficient_blocks(params))
    op.fields.push_back(CoefficientField::constant(blk, b));
  return op;
}

std::vector<ComplexMatrix> OperatorSpec::blocks_at(std::span<const double> x) const {
  switch (kind) {
    case Kind::scalar: {
      const ComplexMatrix a = fields.front().eval(x);
      const int n = a.dim();
      std::vector<ComplexMatrix> blocks;
      blocks.reserve(std::size_t(n) * n);
      for (int h = 0; h < n; ++h)
        for (int k = 0; k < n; ++k) {
          ComplexMatrix b(1);
          b.at(0, 0) = a.at(h, k);
          blocks.push_back(std::move(b));
        }
      return blocks;
    }
    case Kind::diagonal: {
      const int n = spatial_dim();
      const int m = components();
      std::vector<ComplexMatrix> blocks(std::size_t(n) * n, ComplexMatrix(m));
      for (int h = 0; h < n; ++h) blocks[std::size_t(h) * n + h] = fields[h].eval(x);
      return blocks;
    }
    case Kind::general2d:
    case Kind::elasticity: {
      std::vector<ComplexMatrix> blocks;
      blocks.reserve(4);
      for (const auto& f : fields) blocks.push_back(f.eval(x));
      return blocks;
    }
  }
  throw Error("corrupt operator spec");
}

OperatorSpec OperatorSpec::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.contains("op")) {
    const std::string op = j["op"].get<std::string>();
    if (op == "elasticity") return elasticity(j.at("nu").get<double>());
    if (op == "scalar") return scalar(field_from_json_text(j.at("field").dump()));
    if (op == "diag") {
      std::vector<CoefficientField> fs;
      for (const auto& f : j.at("fields")) fs.push_back(field_from_json_text(f.dump()));
      return diagonal(std::move(fs));
    }
    if (op == "general2d") {
      std::vector<CoefficientField> fs;
      for (const auto& row : j.at("fields"))
        for (const auto& f : row) fs.push_back(field_from_json_text(f.dump()));
      return general2d(std::move(fs));
    }
    throw Error("operator json: unknown op '" + op + "'");
  }
  // bare field object: scalar when m == n, else a one-dimensional system
  CoefficientField f = field_from_json_text(text);
  if (f.box().n == 1 && f.m() > 1) {
    std::vector<CoefficientField> fs;
    fs.push_back(std::move(f));
    return diagonal(std::move(fs));
  }
  return scalar(std::move(f));
}

OperatorSpec OperatorSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open operator file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace lpdiss
