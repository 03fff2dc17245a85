#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "golden/errors.hpp"

namespace golden {

using Rational = boost::multiprecision::cpp_rational;

/// Exact element a + b*sqrt(5) of the quadratic field Q(sqrt5).
///
/// Closed under + - * / (division by a nonzero element uses the conjugate),
/// totally ordered by the real value. The golden ratio and its conjugate are
/// both members, which is what makes the structure-level algebra exact.
class QuadRat {
 public:
  QuadRat() = default;
  QuadRat(int v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  QuadRat(long v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  QuadRat(long long v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  QuadRat(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  QuadRat(Rational a, Rational b) : a_(std::move(a)), b_(std::move(b)) {}

  const Rational& rational_part() const noexcept { return a_; }
  const Rational& sqrt5_part() const noexcept { return b_; }

  bool is_rational() const { return b_ == 0; }
  bool is_zero() const { return a_ == 0 && b_ == 0; }

  /// Algebraic conjugate a - b*sqrt5.
  QuadRat conjugate() const { return {a_, -b_}; }
  /// Field norm a^2 - 5 b^2 (rational).
  Rational norm() const { return a_ * a_ - 5 * b_ * b_; }

  /// Sign of the real value, decided exactly.
  int sign() const {
    const int sa = a_.sign();
    const int sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    // Opposite signs: compare a^2 with 5 b^2 (never equal since sqrt5 is irrational).
    return (a_ * a_ > 5 * b_ * b_) ? sa : sb;
  }

  /// Nearest double to the real value. Evaluated in 100-digit binary floating point first,
  /// so the conversion is monotone except for values closer than that precision.
  double to_double() const {
    using Big = boost::multiprecision::cpp_bin_float_100;
    const Big a = Big(boost::multiprecision::numerator(a_)) / Big(boost::multiprecision::denominator(a_));
    const Big b = Big(boost::multiprecision::numerator(b_)) / Big(boost::multiprecision::denominator(b_));
    return static_cast<double>(a + b * boost::multiprecision::sqrt(Big(5)));
  }

  QuadRat operator-() const { return {-a_, -b_}; }

  QuadRat& operator+=(const QuadRat& o) {
    a_ += o.a_;
    b_ += o.b_;
    return *this;
  }
  QuadRat& operator-=(const QuadRat& o) {
    a_ -= o.a_;
    b_ -= o.b_;
    return *this;
  }
  QuadRat& operator*=(const QuadRat& o) {
    Rational a = a_ * o.a_ + 5 * b_ * o.b_;
    Rational b = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(a);
    b_ = std::move(b);
    return *this;
  }
  QuadRat& operator/=(const QuadRat& o) {
    const Rational n = o.norm();
    if (n == 0) throw DomainError("QuadRat division by zero");
    *this *= o.conjugate();
    a_ /= n;
    b_ /= n;
    return *this;
  }

  friend QuadRat operator+(QuadRat l, const QuadRat& r) { return l += r; }
  friend QuadRat operator-(QuadRat l, const QuadRat& r) { return l -= r; }
  friend QuadRat operator*(QuadRat l, const QuadRat& r) { return l *= r; }
  friend QuadRat operator/(QuadRat l, const QuadRat& r) { return l /= r; }

  friend bool operator==(const QuadRat& l, const QuadRat& r) { return l.a_ == r.a_ && l.b_ == r.b_; }
  friend std::strong_ordering operator<=>(const QuadRat& l, const QuadRat& r) {
    const int s = (l - r).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  /// Canonical text "a+b*sqrt5", dropping zero parts; a and b are written as p or p/q.
  std::string to_string() const {
    auto rat = [](const Rational& r) { return r.str(); };
    if (b_ == 0) return rat(a_);
    std::string sq = (b_ == 1) ? "sqrt5" : (b_ == -1 ? "-sqrt5" : rat(b_) + "*sqrt5");
    if (a_ == 0) return sq;
    if (b_ > 0) return rat(a_) + "+" + sq;
    return rat(a_) + sq;
  }

  /// Parses sums of terms "r" and "s*sqrt5" (bare "sqrt5" allowed), where r
  /// and s are decimal rationals such as "-0.25" or "1.5/4".
  static QuadRat parse(std::string_view text);

  friend std::ostream& operator<<(std::ostream& os, const QuadRat& q) { return os << q.to_string(); }

 private:
  Rational a_{0};
  Rational b_{0};
};

inline QuadRat abs(const QuadRat& q) { return q.sign() < 0 ? -q : q; }
inline double to_double(const QuadRat& q) { return q.to_double(); }
inline double to_double(double d) { return d; }

namespace detail {

class QuadRatLexer {
 public:
  explicit QuadRatLexer(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    skip_ws();
    if (s_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }
  bool at_digit() {
    skip_ws();
    return pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
  }

  /// Unsigned decimal: digits [. digits]
  Rational decimal() {
    skip_ws();
    const std::size_t start = pos_;
    boost::multiprecision::cpp_int num = 0;
    boost::multiprecision::cpp_int den = 1;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      num = num * 10 + (s_[pos_++] - '0');
      any = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        num = num * 10 + (s_[pos_++] - '0');
        den *= 10;
        any = true;
      }
    }
    if (!any) throw SyntaxError("expected a decimal number", start);
    return Rational(num, den);
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline QuadRat QuadRat::parse(std::string_view text) {
  detail::QuadRatLexer lx(text);
  if (lx.done()) throw SyntaxError("empty number", 0);
  QuadRat total;
  bool first = true;
  while (!lx.done()) {
    int sign = 1;
    if (lx.accept('+')) {
    } else if (lx.accept('-')) {
      sign = -1;
    } else if (!first) {
      throw SyntaxError("expected '+' or '-'", lx.pos());
    }
    first = false;
    Rational coeff = 1;
    bool have_coeff = false;
    if (lx.at_digit()) {
      coeff = lx.decimal();
      if (lx.accept('/')) {
        const std::size_t at = lx.pos();
        Rational den = lx.decimal();
        if (den == 0) throw SyntaxError("zero denominator", at);
        coeff /= den;
      }
      have_coeff = true;
    }
    bool irrational = false;
    if (have_coeff) {
      if (lx.accept('*')) {
        if (!lx.accept_word("sqrt5")) throw SyntaxError("expected 'sqrt5'", lx.pos());
        irrational = true;
      }
    } else if (lx.accept_word("sqrt5")) {
      irrational = true;
    } else {
      throw SyntaxError("expected a number or 'sqrt5'", lx.pos());
    }
    if (irrational)
      total += QuadRat(Rational(0), sign * coeff);
    else
      total += QuadRat(sign * coeff);
  }
  return total;
}

/// (1 + sqrt5) / 2
inline QuadRat golden_ratio_exact() { return {Rational(1, 2), Rational(1, 2)}; }

}  // namespace golden

namespace Eigen {

template <>
struct NumTraits<golden::QuadRat> : GenericNumTraits<golden::QuadRat> {
  using Real = golden::QuadRat;
  using NonInteger = golden::QuadRat;
  using Nested = golden::QuadRat;
  using Literal = golden::QuadRat;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 40,
    MulCost = 120,
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
