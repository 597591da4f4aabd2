#include "adiaprod/exprparse.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace adiaprod::expr {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& msg)
    : std::runtime_error(msg + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

namespace {

using K = Node::Kind;

NodePtr make(K kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = K::Number;
  n->value = v;
  return n;
}

NodePtr call(Func f, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = K::Call;
  n->func = f;
  n->lhs = std::move(arg);
  return n;
}

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr FuncName kFuncs[] = {{"sin", Func::Sin}, {"cos", Func::Cos},   {"tan", Func::Tan}, {"exp", Func::Exp},
                               {"ln", Func::Ln},   {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};

std::string_view func_name(Func f) {
  for (const auto& fn : kFuncs)
    if (fn.func == f) return fn.name;
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr n = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(ParseError::Kind::Syntax, pos_, msg); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+'))
        n = make(K::Add, n, term());
      else if (accept('-'))
        n = make(K::Sub, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = make(K::Mul, n, unary());
      else if (accept('/'))
        n = make(K::Div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(K::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(K::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr literal() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail("malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    return number(std::strtod(text.c_str(), nullptr));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return make(K::Var);
    if (name == "pi") return number(std::numbers::pi);
    if (name == "e") return number(std::numbers::e);
    for (const auto& fn : kFuncs) {
      if (fn.name != name) continue;
      if (!accept('(')) fail("expected '(' after " + std::string(name));
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return call(fn.func, arg);
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const Node& n, double t) {
  switch (n.kind) {
    case K::Number: return n.value;
    case K::Var: return t;
    case K::Neg: return -eval_node(*n.lhs, t);
    case K::Add: return checked(eval_node(*n.lhs, t) + eval_node(*n.rhs, t), "+");
    case K::Sub: return checked(eval_node(*n.lhs, t) - eval_node(*n.rhs, t), "-");
    case K::Mul: return checked(eval_node(*n.lhs, t) * eval_node(*n.rhs, t), "*");
    case K::Div: return checked(eval_node(*n.lhs, t) / eval_node(*n.rhs, t), "/");
    case K::Pow: return checked(std::pow(eval_node(*n.lhs, t), eval_node(*n.rhs, t)), "^");
    case K::Call: {
      const double x = eval_node(*n.lhs, t);
      switch (n.func) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Tan: return checked(std::tan(x), "tan");
        case Func::Exp: return checked(std::exp(x), "exp");
        case Func::Ln:
          if (!(x > 0.0)) throw DomainError("ln of non-positive argument");
          return std::log(x);
        case Func::Sqrt:
          if (x < 0.0) throw DomainError("sqrt of negative argument");
          return std::sqrt(x);
        case Func::Abs: return std::abs(x);
      }
    }
  }
  return 0.0;
}

bool has_var(const Node& n) {
  if (n.kind == K::Var) return true;
  return (n.lhs && has_var(*n.lhs)) || (n.rhs && has_var(*n.rhs));
}

bool is_number(const NodePtr& n, double v) { return n->kind == K::Number && n->value == v; }

// Light folding keeps derivative trees from growing needlessly.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  return make(K::Add, a, b);
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_number(b, 0.0)) return a;
  if (is_number(a, 0.0)) return make(K::Neg, b);
  return make(K::Sub, a, b);
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  return make(K::Mul, a, b);
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_number(a, 0.0)) return number(0.0);
  if (is_number(b, 1.0)) return a;
  return make(K::Div, a, b);
}

NodePtr neg(NodePtr a) {
  if (is_number(a, 0.0)) return a;
  return make(K::Neg, a);
}

NodePtr diff(const NodePtr& n) {
  if (!has_var(*n)) return number(0.0);
  const NodePtr& u = n->lhs;
  const NodePtr& v = n->rhs;
  switch (n->kind) {
    case K::Number: return number(0.0);
    case K::Var: return number(1.0);
    case K::Neg: return neg(diff(u));
    case K::Add: return add(diff(u), diff(v));
    case K::Sub: return sub(diff(u), diff(v));
    case K::Mul: return add(mul(diff(u), v), mul(u, diff(v)));
    case K::Div: return div(sub(mul(diff(u), v), mul(u, diff(v))), make(K::Pow, v, number(2.0)));
    case K::Pow:
      if (!has_var(*v))
        return mul(mul(v, make(K::Pow, u, sub(v, number(1.0)))), diff(u));
      return mul(n, add(mul(diff(v), call(Func::Ln, u)), div(mul(v, diff(u)), u)));
    case K::Call: {
      const NodePtr du = diff(u);
      switch (n->func) {
        case Func::Sin: return mul(call(Func::Cos, u), du);
        case Func::Cos: return neg(mul(call(Func::Sin, u), du));
        case Func::Tan: return div(du, make(K::Pow, call(Func::Cos, u), number(2.0)));
        case Func::Exp: return mul(n, du);
        case Func::Ln: return div(du, u);
        case Func::Sqrt: return div(du, mul(number(2.0), n));
        case Func::Abs: return mul(div(u, n), du);
      }
    }
  }
  return number(0.0);
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case K::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case K::Var: out += 't'; return;
    case K::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case K::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: break;
  }
  const char op = n.kind == K::Add ? '+' : n.kind == K::Sub ? '-' : n.kind == K::Mul ? '*' : n.kind == K::Div ? '/' : '^';
  out += '(';
  print_node(*n.lhs, out);
  out += op;
  print_node(*n.rhs, out);
  out += ')';
}

bool same(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case K::Number: return a.value == b.value;
    case K::Var: return true;
    case K::Call: return a.func == b.func && same(*a.lhs, *b.lhs);
    case K::Neg: return same(*a.lhs, *b.lhs);
    default: return same(*a.lhs, *b.lhs) && same(*a.rhs, *b.rhs);
  }
}

}  // namespace

Expr Expr::parse(std::string_view src) { return Expr(Parser(src).parse_all()); }

Expr Expr::constant(double v) { return Expr(number(v)); }

double Expr::eval(double t) const { return eval_node(*root_, t); }

Expr Expr::derivative() const { return Expr(diff(root_)); }

double Expr::eval_derivative(double t) const { return derivative().eval(t); }

bool Expr::depends_on_t() const { return has_var(*root_); }

std::string Expr::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool operator==(const Expr& a, const Expr& b) { return same(*a.root_, *b.root_); }

}  // namespace adiaprod::expr
