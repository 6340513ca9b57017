#include "pnp/expression.hpp"

#include "pnp/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace pnp {

struct Expression::Node {
  enum class Op { num, var, neg, add, sub, mul, div, pow, sin, cos, exp, sqrt } op = Op::num;
  double value = 0.0;
  int var = 0;  // 0..4 = x1, x2, y1, y2, t
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Node::Op::add, lhs, term());
      else if (accept('-')) lhs = make(Node::Op::sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Node::Op::mul, lhs, unary());
      else if (accept('/')) lhs = make(Node::Op::div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Node::Op::pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      static const char* vars[] = {"x1", "x2", "y1", "y2", "t"};
      for (int v = 0; v < 5; ++v) {
        if (id == vars[v]) {
          auto n = std::make_shared<Node>();
          n->op = Node::Op::var;
          n->var = v;
          return n;
        }
      }
      if (id == "pi") return number(std::numbers::pi);
      Node::Op op;
      if (id == "sin") op = Node::Op::sin;
      else if (id == "cos") op = Node::Op::cos;
      else if (id == "exp") op = Node::Op::exp;
      else if (id == "sqrt") op = Node::Op::sqrt;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      if (!accept('(')) fail("expected '(' after " + id);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(op, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const ExprVars& v) {
  switch (n.op) {
    case Node::Op::num: return n.value;
    case Node::Op::var: {
      const double vals[] = {v.x1, v.x2, v.y1, v.y2, v.t};
      return vals[n.var];
    }
    case Node::Op::neg: return -eval(*n.a, v);
    case Node::Op::add: return eval(*n.a, v) + eval(*n.b, v);
    case Node::Op::sub: return eval(*n.a, v) - eval(*n.b, v);
    case Node::Op::mul: return eval(*n.a, v) * eval(*n.b, v);
    case Node::Op::div: return eval(*n.a, v) / eval(*n.b, v);
    case Node::Op::pow: return std::pow(eval(*n.a, v), eval(*n.b, v));
    case Node::Op::sin: return std::sin(eval(*n.a, v));
    case Node::Op::cos: return std::cos(eval(*n.a, v));
    case Node::Op::exp: return std::exp(eval(*n.a, v));
    case Node::Op::sqrt: return std::sqrt(eval(*n.a, v));
  }
  return 0.0;
}

bool mentions(const Node& n, int var) {
  if (n.op == Node::Op::var) return n.var == var;
  return (n.a && mentions(*n.a, var)) || (n.b && mentions(*n.b, var));
}

}  // namespace

Expression::Expression() : root_(number(0.0)), text_("0") {}

Expression Expression::constant(double v) {
  Expression e;
  e.root_ = number(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  e.text_ = buf;
  return e;
}

double Expression::operator()(const ExprVars& v) const { return eval(*root_, v); }

bool Expression::uses(const std::string& var) const {
  static const char* vars[] = {"x1", "x2", "y1", "y2", "t"};
  for (int k = 0; k < 5; ++k)
    if (var == vars[k]) return mentions(*root_, k);
  return false;
}

bool Expression::is_constant() const {
  for (int k = 0; k < 5; ++k)
    if (mentions(*root_, k)) return false;
  return true;
}

Expression parse_expression(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

}  // namespace pnp
