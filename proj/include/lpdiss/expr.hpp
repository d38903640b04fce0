#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lpdiss/linalg.hpp"

namespace lpdiss {

/// Parse error with the byte offset of the offending token.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset(offset) {}
  std::size_t offset;
};

/// Arithmetic expression over variables x1..xn, named real parameters, the
/// constants pi and i, binary + - * / ^, unary -, and the functions
/// sin cos exp log sqrt abs. Values are complex.
class ExprAst {
 public:
  ExprAst() = default;

  Complex eval(std::span<const double> x,
               const std::map<std::string, double>& params = {}) const;
  std::string print() const;
  bool equals(const ExprAst& other) const;

  /// Parses per the grammar in the docs; precedence ^ > unary- > * / > + -,
  /// ^ right-associative. `params` lists the allowed parameter names.
  static ExprAst parse(const std::string& text, int n,
                       const std::vector<std::string>& params = {});

  struct Node;
  explicit ExprAst(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  const Node* root() const { return root_.get(); }

 private:
  std::shared_ptr<const Node> root_;
};

ExprAst parse_expr(const std::string& text, int n,
                   const std::vector<std::string>& params = {});

}  // namespace lpdiss
