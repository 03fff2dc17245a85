#pragma once

#include <algorithm>
#include <concepts>
#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "golden/errors.hpp"
#include "golden/quadrat.hpp"

namespace golden {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatD = Mat<double>;
using VecD = Vec<double>;
using MatQ = Mat<QuadRat>;
using VecQ = Vec<QuadRat>;

template <class S>
concept GoldenScalar = std::same_as<S, double> || std::same_as<S, QuadRat>;

template <GoldenScalar S>
inline constexpr bool is_exact_v = std::same_as<S, QuadRat>;

template <GoldenScalar S>
S sqrt5() {
  if constexpr (is_exact_v<S>)
    return QuadRat(Rational(0), Rational(1));
  else
    return std::sqrt(5.0);
}

/// The golden ratio (1 + sqrt5)/2 in scalar type S.
template <GoldenScalar S>
S golden_ratio() {
  if constexpr (is_exact_v<S>)
    return golden_ratio_exact();
  else
    return 0.5 * (1.0 + std::sqrt(5.0));
}

template <GoldenScalar S>
S abs_value(const S& x) {
  if constexpr (is_exact_v<S>)
    return abs(x);
  else
    return std::abs(x);
}

/// Max-abs entry; zero for an empty matrix.
template <class Derived>
typename Derived::Scalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  S best(0);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      S v = abs_value<S>(m(i, j));
      if (best < v) best = v;
    }
  return best;
}

/// Exact residuals must vanish; floating residuals must not exceed `tol`.
template <GoldenScalar S>
bool negligible(const S& residual, double tol) {
  if constexpr (is_exact_v<S>)
    return residual.is_zero();
  else
    return std::isfinite(residual) && residual <= tol;
}

template <GoldenScalar S>
bool is_zero_pivot(const S& v, double tol) {
  if constexpr (is_exact_v<S>)
    return v.is_zero();
  else
    return std::abs(v) <= tol;
}

/// Elementwise conversion to double.
template <class Derived>
MatD to_double_matrix(const Eigen::MatrixBase<Derived>& m) {
  MatD out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = to_double(m(i, j));
  return out;
}

/// Gauss-Jordan inverse with partial pivoting (largest magnitude). Works for
/// both scalar backends; returns nullopt for a singular matrix.
template <GoldenScalar S>
std::optional<Mat<S>> inverse(const Mat<S>& a, double tol = 0.0) {
  if (a.rows() != a.cols()) throw DimensionMismatch("inverse of a non-square matrix");
  const Eigen::Index n = a.rows();
  Mat<S> work = a;
  Mat<S> inv = Mat<S>::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    S best = abs_value<S>(work(col, col));
    for (Eigen::Index r = col + 1; r < n; ++r) {
      S v = abs_value<S>(work(r, col));
      if (best < v) {
        best = v;
        piv = r;
      }
    }
    if (is_zero_pivot<S>(best, tol)) return std::nullopt;
    work.row(col).swap(work.row(piv));
    inv.row(col).swap(inv.row(piv));
    const S d = work(col, col);
    work.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col || work(r, col) == S(0)) continue;
      const S f = work(r, col);
      work.row(r) -= f * work.row(col);
      inv.row(r) -= f * inv.row(col);
    }
  }
  return inv;
}

/// True when every leading principal minor is positive. Elimination without
/// pivoting: the k-th pivot equals minor_k / minor_{k-1}.
template <GoldenScalar S>
bool leading_minors_positive(const Mat<S>& a) {
  const Eigen::Index n = a.rows();
  Mat<S> w = a;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(S(0) < w(k, k))) return false;
    for (Eigen::Index r = k + 1; r < n; ++r) {
      const S f = w(r, k) / w(k, k);
      for (Eigen::Index c = k; c < n; ++c) w(r, c) -= f * w(k, c);
    }
  }
  return true;
}

template <GoldenScalar S>
S trace(const Mat<S>& a) {
  S t(0);
  for (Eigen::Index i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

}  // namespace golden
