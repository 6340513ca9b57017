#pragma once

#include <memory>
#include <string>

namespace pnp {

struct ExprVars {
  double x1 = 0.0;
  double x2 = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
  double t = 0.0;
};

/// Interpreted arithmetic expression.
///
/// Grammar:
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | '+' unary | power
///   power  := atom ('^' unary)?          right-associative
///   atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
///   var    := x1 | x2 | y1 | y2 | t
///   func   := sin | cos | exp | sqrt
class Expression {
 public:
  struct Node;

  Expression();  // the constant 0
  static Expression constant(double v);

  double operator()(const ExprVars& v) const;
  const std::string& text() const noexcept { return text_; }
  /// True if the expression mentions the named variable.
  bool uses(const std::string& var) const;
  bool is_constant() const;

  friend Expression parse_expression(const std::string& text);

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

/// Throws ConfigError with the 1-based character position on malformed input.
Expression parse_expression(const std::string& text);

}  // namespace pnp
