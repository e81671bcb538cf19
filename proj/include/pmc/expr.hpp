#pragma once

// Expression trees for axially invariant functions F(p0, rho, N0, Nrho).
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' factor)?
//   base   := number | ident | ident '(' expr ')' | '(' expr ')'

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "pmc/error.hpp"

namespace pmc {

enum class Var { P0, Rho, N0, NRho };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Log, Sqrt, Abs };

inline std::string_view var_name(Var v) {
  switch (v) {
    case Var::P0: return "p0";
    case Var::Rho: return "rho";
    case Var::N0: return "N0";
    case Var::NRho: return "Nrho";
  }
  return "?";
}

inline std::string_view func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

inline char op_char(BinOp op) {
  switch (op) {
    case BinOp::Add: return '+';
    case BinOp::Sub: return '-';
    case BinOp::Mul: return '*';
    case BinOp::Div: return '/';
    case BinOp::Pow: return '^';
  }
  return '?';
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal { double value; };
struct Variable { Var var; };
struct Negate { NodePtr arg; };
struct Binary { BinOp op; NodePtr lhs, rhs; };
struct Call { Func func; NodePtr arg; };

struct Node {
  std::variant<Literal, Variable, Negate, Binary, Call> v;
};

inline NodePtr lit(double x) { return std::make_shared<const Node>(Node{Literal{x}}); }
inline NodePtr var(Var x) { return std::make_shared<const Node>(Node{Variable{x}}); }
inline NodePtr neg(NodePtr a) { return std::make_shared<const Node>(Node{Negate{std::move(a)}}); }
inline NodePtr bin(BinOp op, NodePtr a, NodePtr b) {
  return std::make_shared<const Node>(Node{Binary{op, std::move(a), std::move(b)}});
}
inline NodePtr call(Func f, NodePtr a) {
  return std::make_shared<const Node>(Node{Call{f, std::move(a)}});
}

/// The four invariant coordinates of a point/normal pair.
struct InvariantArgs {
  double p0 = 0, rho = 0, n0 = 0, nrho = 0;
};

/// Immutable expression. Only invariant variables are representable, so any
/// function built from a PMCExpr is unchanged by rotations about the x0-axis.
class PMCExpr {
 public:
  PMCExpr() = default;
  explicit PMCExpr(NodePtr root) : root_(std::move(root)) {}

  const NodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

  double eval(const InvariantArgs& a) const { return eval_node(*root_, a); }

  std::string to_string() const { return print(*root_); }

  bool uses(Var v) const { return uses_node(*root_, v); }

  friend bool operator==(const PMCExpr& a, const PMCExpr& b) {
    return same(a.root_, b.root_);
  }

 private:
  NodePtr root_;

  static double eval_node(const Node& n, const InvariantArgs& a);
  static std::string print(const Node& n);
  static bool uses_node(const Node& n, Var v);
  static bool same(const NodePtr& a, const NodePtr& b);
};

inline double PMCExpr::eval_node(const Node& n, const InvariantArgs& a) {
  struct Visitor {
    const InvariantArgs& a;
    double operator()(const Literal& l) const { return l.value; }
    double operator()(const Variable& v) const {
      switch (v.var) {
        case Var::P0: return a.p0;
        case Var::Rho: return a.rho;
        case Var::N0: return a.n0;
        case Var::NRho: return a.nrho;
      }
      return 0.0;
    }
    double operator()(const Negate& u) const { return -eval_node(*u.arg, a); }
    double operator()(const Binary& b) const {
      const double x = eval_node(*b.lhs, a);
      const double y = eval_node(*b.rhs, a);
      switch (b.op) {
        case BinOp::Add: return x + y;
        case BinOp::Sub: return x - y;
        case BinOp::Mul: return x * y;
        case BinOp::Div:
          if (y == 0.0) fail(ErrorKind::DomainError, "division by zero");
          return x / y;
        case BinOp::Pow: {
          const double r = std::pow(x, y);
          if (std::isnan(r)) fail(ErrorKind::DomainError, "pow of negative base");
          return r;
        }
      }
      return 0.0;
    }
    double operator()(const Call& c) const {
      const double x = eval_node(*c.arg, a);
      switch (c.func) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Exp: return std::exp(x);
        case Func::Log:
          if (x <= 0.0) fail(ErrorKind::DomainError, "log of non-positive argument");
          return std::log(x);
        case Func::Sqrt:
          if (x < 0.0) fail(ErrorKind::DomainError, "sqrt of negative argument");
          return std::sqrt(x);
        case Func::Abs: return std::abs(x);
      }
      return 0.0;
    }
  };
  return std::visit(Visitor{a}, n.v);
}

inline std::string format_number(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, end);
}

// Fully parenthesized so the printed form re-parses to the same tree.
inline std::string PMCExpr::print(const Node& n) {
  struct Visitor {
    std::string operator()(const Literal& l) const { return format_number(l.value); }
    std::string operator()(const Variable& v) const { return std::string(var_name(v.var)); }
    std::string operator()(const Negate& u) const { return "(-" + print(*u.arg) + ")"; }
    std::string operator()(const Binary& b) const {
      return "(" + print(*b.lhs) + op_char(b.op) + print(*b.rhs) + ")";
    }
    std::string operator()(const Call& c) const {
      return std::string(func_name(c.func)) + "(" + print(*c.arg) + ")";
    }
  };
  return std::visit(Visitor{}, n.v);
}

inline bool PMCExpr::uses_node(const Node& n, Var v) {
  struct Visitor {
    Var v;
    bool operator()(const Literal&) const { return false; }
    bool operator()(const Variable& x) const { return x.var == v; }
    bool operator()(const Negate& u) const { return uses_node(*u.arg, v); }
    bool operator()(const Binary& b) const { return uses_node(*b.lhs, v) || uses_node(*b.rhs, v); }
    bool operator()(const Call& c) const { return uses_node(*c.arg, v); }
  };
  return std::visit(Visitor{v}, n.v);
}

inline bool PMCExpr::same(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return a == b;
  if (a->v.index() != b->v.index()) return false;
  if (auto* x = std::get_if<Literal>(&a->v)) return x->value == std::get<Literal>(b->v).value;
  if (auto* x = std::get_if<Variable>(&a->v)) return x->var == std::get<Variable>(b->v).var;
  if (auto* x = std::get_if<Negate>(&a->v)) return same(x->arg, std::get<Negate>(b->v).arg);
  if (auto* x = std::get_if<Binary>(&a->v)) {
    const auto& y = std::get<Binary>(b->v);
    return x->op == y.op && same(x->lhs, y.lhs) && same(x->rhs, y.rhs);
  }
  const auto& x = std::get<Call>(a->v);
  const auto& y = std::get<Call>(b->v);
  return x.func == y.func && same(x.arg, y.arg);
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError(pos_, "unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = bin(BinOp::Add, lhs, term());
      else if (accept('-')) lhs = bin(BinOp::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = bin(BinOp::Mul, lhs, factor());
      else if (accept('/')) lhs = bin(BinOp::Div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    if (accept('-')) return neg(factor());
    NodePtr b = base();
    if (accept('^')) return bin(BinOp::Pow, b, factor());
    return b;
  }

  NodePtr base() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw SyntaxError(pos_, "unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw SyntaxError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw SyntaxError(start, "malformed number");
    return lit(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "p0") return var(Var::P0);
    if (name == "rho") return var(Var::Rho);
    if (name == "N0") return var(Var::N0);
    if (name == "Nrho") return var(Var::NRho);
    static constexpr Func funcs[] = {Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Abs};
    for (Func f : funcs) {
      if (name == func_name(f)) {
        if (!accept('(')) throw SyntaxError(pos_, "expected '(' after " + std::string(name));
        NodePtr arg = expr();
        if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
        return call(f, arg);
      }
    }
    throw SyntaxError(start, "unknown identifier '" + std::string(name) + "'");
  }
};

}  // namespace detail

/// Parses `source`; throws SyntaxError carrying the byte offset of the fault.
inline PMCExpr parse_pmc(std::string_view source) {
  return PMCExpr(detail::Parser(source).parse());
}

}  // namespace pmc
