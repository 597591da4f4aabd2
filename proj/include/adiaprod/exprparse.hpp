#pragma once

// Real-valued expressions of one variable t.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?        right-associative
//   primary := number | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | tan | exp | ln | sqrt | abs

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adiaprod::expr {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier };

  ParseError(Kind kind, std::size_t offset, const std::string& msg);

  Kind kind() const noexcept { return kind_; }
  /// Byte offset into the source text.
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// ln or sqrt outside their domain, or any non-finite intermediate result.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Func { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs };

struct Node {
  enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind;
  double value = 0.0;
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

class Expr {
 public:
  static Expr parse(std::string_view src);
  static Expr constant(double v);

  double eval(double t) const;
  /// Symbolic d/dt evaluated at t.
  double eval_derivative(double t) const;
  Expr derivative() const;
  bool depends_on_t() const;

  /// Fully parenthesized source text that parses back to the same tree.
  std::string print() const;

  const Node& root() const { return *root_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

}  // namespace adiaprod::expr
