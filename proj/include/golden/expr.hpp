#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "golden/errors.hpp"
#include "golden/linalg.hpp"
#include "golden/quadrat.hpp"

// Immersion component expressions: a small arithmetic language over named
// parameters, evaluated with second-order forward-mode jets.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] power)?      exponent must be an integer literal
//   primary := number | param | constant | func '(' expr ')' | '(' expr ')'
//
// constants: psi sqrt5 pi; functions: sin cos exp sqrt.

namespace golden::expr {

enum class ConstantKind { Psi, Sqrt5, Pi };
enum class Function { Sin, Cos, Exp, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal {
  Rational exact;    ///< decimal literals are exactly rational
  double value = 0;  ///< nearest double
  std::string text;  ///< token as written
};
struct Param {
  std::size_t index = 0;
  std::string name;
};
struct Constant {
  ConstantKind kind;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs, rhs;
};
struct Power {
  NodePtr base;
  int exponent = 1;
};
struct Call {
  Function fn;
  NodePtr arg;
};

struct Node {
  std::variant<Literal, Param, Constant, Negate, Binary, Power, Call> v;
};

inline bool same_structure(const NodePtr& a, const NodePtr& b);

namespace detail {

struct StructuralEq {
  const Node& other;
  bool operator()(const Literal& x) const {
    const auto* y = std::get_if<Literal>(&other.v);
    return y && y->exact == x.exact;
  }
  bool operator()(const Param& x) const {
    const auto* y = std::get_if<Param>(&other.v);
    return y && y->index == x.index && y->name == x.name;
  }
  bool operator()(const Constant& x) const {
    const auto* y = std::get_if<Constant>(&other.v);
    return y && y->kind == x.kind;
  }
  bool operator()(const Negate& x) const {
    const auto* y = std::get_if<Negate>(&other.v);
    return y && same_structure(x.operand, y->operand);
  }
  bool operator()(const Binary& x) const {
    const auto* y = std::get_if<Binary>(&other.v);
    return y && y->op == x.op && same_structure(x.lhs, y->lhs) && same_structure(x.rhs, y->rhs);
  }
  bool operator()(const Power& x) const {
    const auto* y = std::get_if<Power>(&other.v);
    return y && y->exponent == x.exponent && same_structure(x.base, y->base);
  }
  bool operator()(const Call& x) const {
    const auto* y = std::get_if<Call>(&other.v);
    return y && y->fn == x.fn && same_structure(x.arg, y->arg);
  }
};

}  // namespace detail

inline bool same_structure(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return std::visit(detail::StructuralEq{*b}, a->v);
}

/// Immutable parsed expression together with its declared parameter names.
class Expr {
 public:
  Expr(NodePtr root, std::vector<std::string> params) : root_(std::move(root)), params_(std::move(params)) {}

  const NodePtr& root() const { return root_; }
  const std::vector<std::string>& params() const { return params_; }
  std::size_t arity() const { return params_.size(); }

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.params_ == b.params_ && same_structure(a.root_, b.root_);
  }

 private:
  NodePtr root_;
  std::vector<std::string> params_;
};

namespace detail {

inline NodePtr make(auto&& alt) { return std::make_shared<const Node>(Node{std::forward<decltype(alt)>(alt)}); }

inline bool is_reserved(std::string_view name) {
  return name == "psi" || name == "sqrt5" || name == "pi" || name == "sin" || name == "cos" || name == "exp" ||
         name == "sqrt";
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& params) : s_(text), params_(params) {}

  NodePtr parse_all() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(Binary{BinaryOp::Add, lhs, term()});
      else if (accept('-'))
        lhs = make(Binary{BinaryOp::Sub, lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Binary{BinaryOp::Mul, lhs, unary()});
      else if (accept('/'))
        lhs = make(Binary{BinaryOp::Div, lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Negate{unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    const bool negative = accept('-');
    NodePtr ex = power();
    bool flip = negative;
    if (const auto* neg = std::get_if<Negate>(&ex->v)) {  // "^(-2)"
      ex = neg->operand;
      flip = !flip;
    }
    const auto* lit = std::get_if<Literal>(&ex->v);
    if (!lit || boost::multiprecision::denominator(lit->exact) != 1 || abs(lit->exact) > 1024)
      throw SyntaxError("exponent must be an integer literal", at);
    int k = static_cast<int>(boost::multiprecision::numerator(lit->exact));
    return make(Power{base, flip ? -k : k});
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      NodePtr e = expression();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return e;
    }
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    boost::multiprecision::cpp_int mant = 0;
    int scale = 0;
    bool digits = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      mant = mant * 10 + (s_[pos_++] - '0');
      digits = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        mant = mant * 10 + (s_[pos_++] - '0');
        --scale;
        digits = true;
      }
    }
    if (!digits) throw SyntaxError("malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      int sign = 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) sign = (s_[p++] == '-') ? -1 : 1;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        int e = 0;
        while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
          e = e * 10 + (s_[p++] - '0');
          if (e > 400) throw SyntaxError("exponent out of range", pos_);
        }
        scale += sign * e;
        pos_ = p;
      }
    }
    Literal lit;
    lit.text = std::string(s_.substr(start, pos_ - start));
    const boost::multiprecision::cpp_int ten_pow = boost::multiprecision::pow(boost::multiprecision::cpp_int(10), std::abs(scale));
    lit.exact = scale >= 0 ? Rational(mant * ten_pow) : Rational(mant, ten_pow);
    const char* b = lit.text.data();
    std::from_chars(b, b + lit.text.size(), lit.value);
    return make(std::move(lit));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i] == name) return make(Param{i, name});
    if (name == "psi") return make(Constant{ConstantKind::Psi});
    if (name == "sqrt5") return make(Constant{ConstantKind::Sqrt5});
    if (name == "pi") return make(Constant{ConstantKind::Pi});
    std::optional<Function> fn;
    if (name == "sin") fn = Function::Sin;
    if (name == "cos") fn = Function::Cos;
    if (name == "exp") fn = Function::Exp;
    if (name == "sqrt") fn = Function::Sqrt;
    if (!fn) throw UnknownIdentifier(name, start);
    if (!accept('(')) throw SyntaxError("expected '(' after " + name, pos_);
    NodePtr arg = expression();
    if (!accept(')')) throw SyntaxError("expected ')'", pos_);
    return make(Call{*fn, arg});
  }

  std::string_view s_;
  const std::vector<std::string>& params_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` over the parameter names `params`.
inline Expr parse(std::string_view text, std::vector<std::string> params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].empty() || detail::is_reserved(params[i]))
      throw ParseError("invalid parameter name '" + params[i] + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (params[i] == params[j]) throw ParseError("duplicate parameter name '" + params[i] + "'");
  }
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw SyntaxError("empty expression", 0);
  detail::Parser p(text, params);
  NodePtr root = p.parse_all();
  return Expr(std::move(root), std::move(params));
}

namespace detail {

inline std::string print_node(const NodePtr& n) {
  struct V {
    std::string operator()(const Literal& x) const { return x.text; }
    std::string operator()(const Param& x) const { return x.name; }
    std::string operator()(const Constant& x) const {
      switch (x.kind) {
        case ConstantKind::Psi: return "psi";
        case ConstantKind::Sqrt5: return "sqrt5";
        case ConstantKind::Pi: return "pi";
      }
      return {};
    }
    std::string operator()(const Negate& x) const { return "(-" + print_node(x.operand) + ")"; }
    std::string operator()(const Binary& x) const {
      static constexpr const char* ops[] = {" + ", " - ", " * ", " / "};
      return "(" + print_node(x.lhs) + ops[static_cast<int>(x.op)] + print_node(x.rhs) + ")";
    }
    std::string operator()(const Power& x) const {
      return "(" + print_node(x.base) + "^" + std::to_string(x.exponent) + ")";
    }
    std::string operator()(const Call& x) const {
      static constexpr const char* names[] = {"sin", "cos", "exp", "sqrt"};
      return std::string(names[static_cast<int>(x.fn)]) + "(" + print_node(x.arg) + ")";
    }
  };
  return std::visit(V{}, n->v);
}

}  // namespace detail

/// Fully parenthesized text; parsing it back yields a structurally equal Expr.
inline std::string print(const Expr& e) { return detail::print_node(e.root()); }

/// Second-order jet of a scalar function of m parameters.
struct Jet2 {
  double value = 0;
  VecD grad;
  MatD hess;

  static Jet2 constant(double v, Eigen::Index m) { return {v, VecD::Zero(m), MatD::Zero(m, m)}; }
  static Jet2 variable(double v, Eigen::Index i, Eigen::Index m) {
    Jet2 j = constant(v, m);
    j.grad(i) = 1.0;
    return j;
  }
};

/// Applies a scalar function with derivatives f', f'' at the jet's value.
inline Jet2 chain(const Jet2& u, double f, double df, double d2f) {
  return {f, df * u.grad, df * u.hess + d2f * u.grad * u.grad.transpose()};
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.value + b.value, a.grad + b.grad, a.hess + b.hess}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.value - b.value, a.grad - b.grad, a.hess - b.hess}; }
inline Jet2 operator-(const Jet2& a) { return {-a.value, -a.grad, -a.hess}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  const MatD cross = a.grad * b.grad.transpose();
  return {a.value * b.value, b.value * a.grad + a.value * b.grad,
          b.value * a.hess + a.value * b.hess + (cross + cross.transpose())};
}
inline Jet2 reciprocal(const Jet2& a) {
  if (a.value == 0.0) throw DomainError("division by zero");
  const double v = a.value;
  return chain(a, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 ipow(const Jet2& a, int k) {
  const Eigen::Index m = a.grad.size();
  if (k == 0) return Jet2::constant(1.0, m);
  if (k < 0) {
    if (a.value == 0.0) throw DomainError("negative power of zero");
    return reciprocal(ipow(a, -k));
  }
  const double v = a.value;
  const double f = std::pow(v, k);
  const double df = k * std::pow(v, k - 1);
  const double d2f = k == 1 ? 0.0 : k * (k - 1) * std::pow(v, k - 2);
  return chain(a, f, df, d2f);
}

inline Jet2 sqrt(const Jet2& a) {
  if (a.value < 0.0) throw DomainError("sqrt of negative value");
  if (a.value == 0.0) {
    if (a.grad.isZero(0.0) && a.hess.isZero(0.0)) return Jet2::constant(0.0, a.grad.size());
    throw DomainError("sqrt is not differentiable at 0");
  }
  const double r = std::sqrt(a.value);
  return chain(a, r, 0.5 / r, -0.25 / (r * a.value));
}

inline double constant_value(ConstantKind k) {
  switch (k) {
    case ConstantKind::Psi: return std::numbers::phi;
    case ConstantKind::Sqrt5: return std::sqrt(5.0);
    case ConstantKind::Pi: return std::numbers::pi;
  }
  return 0.0;
}

namespace detail {

inline Jet2 eval_node(const NodePtr& n, const VecD& point) {
  const Eigen::Index m = point.size();
  struct V {
    const VecD& pt;
    Eigen::Index m;
    Jet2 operator()(const Literal& x) const { return Jet2::constant(x.value, m); }
    Jet2 operator()(const Param& x) const {
      return Jet2::variable(pt(static_cast<Eigen::Index>(x.index)), static_cast<Eigen::Index>(x.index), m);
    }
    Jet2 operator()(const Constant& x) const { return Jet2::constant(constant_value(x.kind), m); }
    Jet2 operator()(const Negate& x) const { return -eval_node(x.operand, pt); }
    Jet2 operator()(const Binary& x) const {
      const Jet2 a = eval_node(x.lhs, pt);
      const Jet2 b = eval_node(x.rhs, pt);
      switch (x.op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
      }
      return a;
    }
    Jet2 operator()(const Power& x) const { return ipow(eval_node(x.base, pt), x.exponent); }
    Jet2 operator()(const Call& x) const {
      const Jet2 a = eval_node(x.arg, pt);
      switch (x.fn) {
        case Function::Sin: return chain(a, std::sin(a.value), std::cos(a.value), -std::sin(a.value));
        case Function::Cos: return chain(a, std::cos(a.value), -std::sin(a.value), -std::cos(a.value));
        case Function::Exp: {
          const double e = std::exp(a.value);
          return chain(a, e, e, e);
        }
        case Function::Sqrt: return sqrt(a);
      }
      return a;
    }
  };
  return std::visit(V{point, m}, n->v);
}

}  // namespace detail

/// Second-order jet of `e` at `point` (length = number of parameters).
inline Jet2 eval_jet(const Expr& e, const VecD& point) {
  if (static_cast<std::size_t>(point.size()) != e.arity())
    throw DimensionMismatch("point has " + std::to_string(point.size()) + " coordinates, expression takes " +
                            std::to_string(e.arity()));
  Jet2 j = detail::eval_node(e.root(), point);
  if (!std::isfinite(j.value) || !j.grad.allFinite() || !j.hess.allFinite())
    throw DomainError("non-finite result evaluating " + print(e));
  return j;
}

inline double eval(const Expr& e, const VecD& point) { return eval_jet(e, point).value; }

/// Exact affine form c + sum_i a_i u_i with coefficients in Q(sqrt5).
struct AffineForm {
  QuadRat constant;
  std::vector<QuadRat> coeffs;

  bool is_constant() const {
    for (const auto& a : coeffs)
      if (!a.is_zero()) return false;
    return true;
  }
};

namespace detail {

inline std::optional<AffineForm> affine_node(const NodePtr& n, std::size_t m) {
  struct V {
    std::size_t m;
    using R = std::optional<AffineForm>;
    R konst(QuadRat c) const { return AffineForm{std::move(c), std::vector<QuadRat>(m)}; }
    R operator()(const Literal& x) const { return konst(QuadRat(x.exact)); }
    R operator()(const Param& x) const {
      AffineForm f{QuadRat(0), std::vector<QuadRat>(m)};
      f.coeffs[x.index] = QuadRat(1);
      return f;
    }
    R operator()(const Constant& x) const {
      if (x.kind == ConstantKind::Psi) return konst(golden_ratio_exact());
      if (x.kind == ConstantKind::Sqrt5) return konst(QuadRat(Rational(0), Rational(1)));
      return std::nullopt;
    }
    R operator()(const Negate& x) const {
      auto a = affine_node(x.operand, m);
      if (!a) return a;
      a->constant = -a->constant;
      for (auto& c : a->coeffs) c = -c;
      return a;
    }
    R operator()(const Binary& x) const {
      auto a = affine_node(x.lhs, m);
      auto b = affine_node(x.rhs, m);
      if (!a || !b) return std::nullopt;
      switch (x.op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: {
          const QuadRat sign = x.op == BinaryOp::Add ? QuadRat(1) : QuadRat(-1);
          a->constant += sign * b->constant;
          for (std::size_t i = 0; i < m; ++i) a->coeffs[i] += sign * b->coeffs[i];
          return a;
        }
        case BinaryOp::Mul: {
          if (!a->is_constant() && !b->is_constant()) return std::nullopt;
          if (a->is_constant()) std::swap(a, b);
          const QuadRat k = b->constant;
          a->constant *= k;
          for (auto& c : a->coeffs) c *= k;
          return a;
        }
        case BinaryOp::Div: {
          if (!b->is_constant() || b->constant.is_zero()) return std::nullopt;
          const QuadRat k = b->constant;
          a->constant /= k;
          for (auto& c : a->coeffs) c /= k;
          return a;
        }
      }
      return std::nullopt;
    }
    R operator()(const Power& x) const {
      auto a = affine_node(x.base, m);
      if (!a) return a;
      if (x.exponent == 1) return a;
      if (x.exponent == 0) return konst(QuadRat(1));
      if (!a->is_constant()) return std::nullopt;
      if (x.exponent < 0 && a->constant.is_zero()) return std::nullopt;
      QuadRat r(1);
      for (int i = 0; i < std::abs(x.exponent); ++i) r *= a->constant;
      return konst(x.exponent < 0 ? QuadRat(1) / r : r);
    }
    R operator()(const Call&) const { return std::nullopt; }
  };
  return std::visit(V{m}, n->v);
}

}  // namespace detail

/// Exact affine form of `e` when it is affine with coefficients in Q(sqrt5)
/// (no transcendental calls, no pi, no products of non-constants).
inline std::optional<AffineForm> exact_affine(const Expr& e) { return detail::affine_node(e.root(), e.arity()); }

}  // namespace golden::expr
