#include "lpdiss/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace lpdiss {

enum class NodeKind { number, imag_unit, pi_const, variable, parameter, unary_minus, binary, call };

struct ExprAst::Node {
  NodeKind kind;
  double value = 0.0;       // number
  int var_index = 0;        // variable (1-based)
  std::string name;         // parameter or function name
  char op = 0;              // binary operator
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = ExprAst::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::number;
  n->value = v;
  return n;
}

struct Parser {
  const std::string& s;
  std::size_t pos = 0;
  int n_vars;
  const std::vector<std::string>& params;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr parse_expr_level() {
    NodePtr lhs = parse_term();
    while (true) {
      char c = peek();
      if (c != '+' && c != '-') break;
      ++pos;
      NodePtr rhs = parse_term();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::binary;
      n->op = c;
      n->lhs = lhs;
      n->rhs = rhs;
      lhs = n;
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (true) {
      char c = peek();
      if (c != '*' && c != '/') break;
      ++pos;
      NodePtr rhs = parse_factor();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::binary;
      n->op = c;
      n->lhs = lhs;
      n->rhs = rhs;
      lhs = n;
    }
    return lhs;
  }

  // '^' binds tighter than unary minus and is right-associative.
  NodePtr parse_factor() {
    if (peek() == '-') {
      ++pos;
      NodePtr sub = parse_factor();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::unary_minus;
      n->lhs = sub;
      return n;
    }
    NodePtr base = parse_atom();
    if (peek() == '^') {
      ++pos;
      NodePtr exp = parse_factor();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::binary;
      n->op = '^';
      n->lhs = base;
      n->rhs = exp;
      return n;
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
    const char c = s[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr_level();
      if (!consume(')')) throw ParseError("unbalanced parentheses", pos);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }

  NodePtr parse_number() {
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", pos);
    pos += std::size_t(end - begin);
    return make_number(v);
  }

  NodePtr parse_ident() {
    const std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    const std::string name = s.substr(start, pos - start);

    if (peek() == '(') {
      static const char* fns[] = {"sin", "cos", "exp", "log", "sqrt", "abs"};
      bool known = false;
      for (const char* f : fns) known = known || name == f;
      if (!known) throw ParseError("unknown function '" + name + "'", start);
      ++pos;  // '('
      NodePtr arg = parse_expr_level();
      if (!consume(')')) throw ParseError("unbalanced parentheses in call", pos);
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::call;
      n->name = name;
      n->lhs = arg;
      return n;
    }

    if (name == "i") {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::imag_unit;
      return n;
    }
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::pi_const;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t k = 1; k < name.size(); ++k)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[k]));
      if (digits) {
        const int idx = std::atoi(name.c_str() + 1);
        if (idx < 1 || idx > n_vars)
          throw ParseError("unknown variable '" + name + "'", start);
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::variable;
        n->var_index = idx;
        return n;
      }
    }
    for (const auto& p : params)
      if (p == name) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::parameter;
        n->name = name;
        return n;
      }
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

Complex eval_node(const Node* n, std::span<const double> x,
                  const std::map<std::string, double>& params) {
  switch (n->kind) {
    case NodeKind::number:
      return n->value;
    case NodeKind::imag_unit:
      return Complex(0.0, 1.0);
    case NodeKind::pi_const:
      return std::numbers::pi;
    case NodeKind::variable:
      if (n->var_index > int(x.size()))
        throw Error("expression references x" + std::to_string(n->var_index) +
                    " but the point has dimension " + std::to_string(x.size()));
      return x[n->var_index - 1];
    case NodeKind::parameter: {
      auto it = params.find(n->name);
      if (it == params.end()) throw Error("unbound parameter '" + n->name + "'");
      return it->second;
    }
    case NodeKind::unary_minus:
      return -eval_node(n->lhs.get(), x, params);
    case NodeKind::binary: {
      const Complex a = eval_node(n->lhs.get(), x, params);
      const Complex b = eval_node(n->rhs.get(), x, params);
      switch (n->op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        case '^': return std::pow(a, b);
      }
      throw Error("corrupt expression node");
    }
    case NodeKind::call: {
      const Complex a = eval_node(n->lhs.get(), x, params);
      if (n->name == "sin") return std::sin(a);
      if (n->name == "cos") return std::cos(a);
      if (n->name == "exp") return std::exp(a);
      if (n->name == "log") return std::log(a);
      if (n->name == "sqrt") return std::sqrt(a);
      if (n->name == "abs") return std::abs(a);
      throw Error("corrupt call node");
    }
  }
  throw Error("corrupt expression tree");
}

int precedence(const Node* n) {
  switch (n->kind) {
    case NodeKind::binary:
      if (n->op == '+' || n->op == '-') return 1;
      if (n->op == '*' || n->op == '/') return 2;
      return 4;  // '^'
    case NodeKind::unary_minus:
      return 3;
    default:
      return 5;
  }
}

void print_node(const Node* n, std::string& out) {
  auto child = [&](const Node* c, int min_prec) {
    const bool paren = precedence(c) < min_prec;
    if (paren) out += '(';
    print_node(c, out);
    if (paren) out += ')';
  };
  switch (n->kind) {
    case NodeKind::number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      out += buf;
      return;
    }
    case NodeKind::imag_unit: out += 'i'; return;
    case NodeKind::pi_const: out += "pi"; return;
    case NodeKind::variable: out += 'x' + std::to_string(n->var_index); return;
    case NodeKind::parameter: out += n->name; return;
    case NodeKind::unary_minus:
      out += '-';
      child(n->lhs.get(), 3);
      return;
    case NodeKind::binary: {
      const int p = precedence(n);
      if (n->op == '^') {
        // right-associative, tighter than unary minus on the left
        child(n->lhs.get(), 5);
        out += '^';
        child(n->rhs.get(), p);
      } else {
        child(n->lhs.get(), p);
        out += n->op;
        child(n->rhs.get(), p + 1);
      }
      return;
    }
    case NodeKind::call:
      out += n->name;
      out += '(';
      print_node(n->lhs.get(), out);
      out += ')';
      return;
  }
}

bool equal_nodes(const Node* a, const Node* b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::number: return a->value == b->value;
    case NodeKind::imag_unit:
    case NodeKind::pi_const: return true;
    case NodeKind::variable: return a->var_index == b->var_index;
    case NodeKind::parameter: return a->name == b->name;
    case NodeKind::unary_minus: return equal_nodes(a->lhs.get(), b->lhs.get());
    case NodeKind::binary:
      return a->op == b->op && equal_nodes(a->lhs.get(), b->lhs.get()) &&
             equal_nodes(a->rhs.get(), b->rhs.get());
    case NodeKind::call:
      return a->name == b->name && equal_nodes(a->lhs.get(), b->lhs.get());
  }
  return false;
}

}  // namespace

ExprAst ExprAst::parse(const std::string& text, int n,
                       const std::vector<std::string>& params) {
  if (text.empty()) throw ParseError("empty expression", 0);
  Parser p{text, 0, n, params};
  NodePtr root = p.parse_expr_level();
  p.skip_ws();
  if (p.pos != text.size())
    throw ParseError("trailing input after expression", p.pos);
  return ExprAst(root);
}

Complex ExprAst::eval(std::span<const double> x,
                      const std::map<std::string, double>& params) const {
  if (!root_) throw Error("empty expression tree");
  return eval_node(root_.get(), x, params);
}

std::string ExprAst::print() const {
  if (!root_) return "";
  std::string out;
  print_node(root_.get(), out);
  return out;
}

bool ExprAst::equals(const ExprAst& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return equal_nodes(root_.get(), other.root_.get());
}

ExprAst parse_expr(const std::string& text, int n,
                   const std::vector<std::string>& params) {
  return ExprAst::parse(text, n, params);
}

}  // namespace lpdiss
