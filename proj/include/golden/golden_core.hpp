#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "golden/errors.hpp"
#include "golden/linalg.hpp"

namespace golden {

/// Numerical thresholds shared by the analysis modules.
struct Tolerances {
  double structure = 1e-9;       ///< golden axioms, float backend
  double frame = 1e-9;           ///< frame-level identities
  double classification = 1e-7;  ///< invariant / anti-invariant decisions
  double angle = 1e-6;           ///< slant angle spread, radians
};

/// Symmetric positive-definite Gram matrix of an inner product.
template <GoldenScalar S>
class Metric {
 public:
  explicit Metric(Mat<S> gram) : gram_(std::move(gram)) {
    if (gram_.rows() != gram_.cols() || gram_.rows() == 0)
      throw DimensionMismatch("metric must be a non-empty square matrix");
    if (!(gram_ == gram_.transpose())) throw InvalidMetric("metric is not symmetric");
    if (!leading_minors_positive<S>(gram_)) throw InvalidMetric("metric is not positive definite");
  }

  static Metric identity(Eigen::Index n) { return Metric(Mat<S>::Identity(n, n)); }

  Eigen::Index dim() const { return gram_.rows(); }
  const Mat<S>& gram() const { return gram_; }

  template <class A, class B>
  S inner(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    return (x.transpose() * gram_ * y)(0, 0);
  }

  friend bool operator==(const Metric& l, const Metric& r) { return l.gram_ == r.gram_; }

 private:
  Mat<S> gram_;
};

/// Residuals of the golden axioms for a candidate (phi, g).
template <GoldenScalar S>
struct StructureReport {
  S axiom_residual{0};          ///< max |phi^2 - phi - I|
  S compatibility_residual{0};  ///< max |G phi - phi^T G|
  S metric_identity_residual{0};  ///< max |g(phi.,phi.) - g(phi.,.) - g(.,.)| over basis pairs
  bool pass = false;
};

template <GoldenScalar S>
StructureReport<S> verify_golden(const Mat<S>& phi, const Metric<S>& metric, double tol = Tolerances{}.structure) {
  if (phi.rows() != phi.cols() || phi.rows() != metric.dim())
    throw DimensionMismatch("phi is " + std::to_string(phi.rows()) + "x" + std::to_string(phi.cols()) +
                            ", metric is " + std::to_string(metric.dim()) + "-dimensional");
  const Eigen::Index n = phi.rows();
  const Mat<S> id = Mat<S>::Identity(n, n);
  const Mat<S>& g = metric.gram();
  StructureReport<S> r;
  r.axiom_residual = max_abs(Mat<S>(phi * phi - phi - id));
  r.compatibility_residual = max_abs(Mat<S>(g * phi - phi.transpose() * g));
  // Entry (i,j) is g(phi e_i, phi e_j) - g(phi e_i, e_j) - g(e_i, e_j).
  r.metric_identity_residual =
      max_abs(Mat<S>(phi.transpose() * g * phi - phi.transpose() * g - g));
  r.pass = negligible<S>(r.axiom_residual, tol) && negligible<S>(r.compatibility_residual, tol) &&
           negligible<S>(r.metric_identity_residual, tol);
  return r;
}

/// A (1,1)-tensor phi with phi^2 = phi + I, self-adjoint for the metric.
///
/// `checked` enforces the axioms; `unverified` skips them and exists so that
/// broken structures can be fed to the identity checks as negative controls.
template <GoldenScalar S>
class GoldenStructure {
 public:
  static GoldenStructure checked(Mat<S> phi, Metric<S> metric, double tol = Tolerances{}.structure) {
    const auto rep = verify_golden<S>(phi, metric, tol);
    if (!rep.pass)
      throw InvalidStructure("not a golden structure: |phi^2-phi-I| = " + std::to_string(to_double(rep.axiom_residual)) +
                             ", |G phi - phi^T G| = " + std::to_string(to_double(rep.compatibility_residual)));
    return GoldenStructure(std::move(phi), std::move(metric), true);
  }

  static GoldenStructure unverified(Mat<S> phi, Metric<S> metric) {
    if (phi.rows() != phi.cols() || phi.rows() != metric.dim())
      throw DimensionMismatch("phi and metric dimensions differ");
    return GoldenStructure(std::move(phi), std::move(metric), false);
  }

  const Mat<S>& phi() const { return phi_; }
  const Metric<S>& metric() const { return metric_; }
  Eigen::Index dim() const { return phi_.rows(); }
  bool verified() const { return verified_; }

 private:
  GoldenStructure(Mat<S> phi, Metric<S> metric, bool verified)
      : phi_(std::move(phi)), metric_(std::move(metric)), verified_(verified) {}

  Mat<S> phi_;
  Metric<S> metric_;
  bool verified_;
};

/// F with F^2 = I, self-adjoint for the metric.
template <GoldenScalar S>
class AlmostProductStructure {
 public:
  static AlmostProductStructure make(Mat<S> f, Metric<S> metric, double tol = Tolerances{}.structure) {
    if (f.rows() != f.cols() || f.rows() != metric.dim()) throw DimensionMismatch("F and metric dimensions differ");
    const Eigen::Index n = f.rows();
    const S inv_res = max_abs(Mat<S>(f * f - Mat<S>::Identity(n, n)));
    if (!negligible<S>(inv_res, tol))
      throw InvalidInvolution("F^2 != I (residual " + std::to_string(to_double(inv_res)) + ")");
    const S compat = max_abs(Mat<S>(metric.gram() * f - f.transpose() * metric.gram()));
    if (!negligible<S>(compat, tol))
      throw MetricIncompat("G F != F^T G (residual " + std::to_string(to_double(compat)) + ")");
    return AlmostProductStructure(std::move(f), std::move(metric));
  }

  const Mat<S>& matrix() const { return f_; }
  const Metric<S>& metric() const { return metric_; }
  Eigen::Index dim() const { return f_.rows(); }

 private:
  AlmostProductStructure(Mat<S> f, Metric<S> metric) : f_(std::move(f)), metric_(std::move(metric)) {}
  Mat<S> f_;
  Metric<S> metric_;
};

/// phi = (I + sqrt5 F) / 2
template <GoldenScalar S>
GoldenStructure<S> golden_from_product(const AlmostProductStructure<S>& f, double tol = Tolerances{}.structure) {
  const Eigen::Index n = f.dim();
  Mat<S> phi = (Mat<S>::Identity(n, n) + sqrt5<S>() * f.matrix()) / S(2);
  return GoldenStructure<S>::checked(std::move(phi), f.metric(), tol);
}

template <GoldenScalar S>
GoldenStructure<S> golden_from_product(const Mat<S>& f, const Metric<S>& metric, double tol = Tolerances{}.structure) {
  return golden_from_product<S>(AlmostProductStructure<S>::make(f, metric, tol), tol);
}

/// F = (2 phi - I) / sqrt5
template <GoldenScalar S>
AlmostProductStructure<S> product_from_golden(const GoldenStructure<S>& s, double tol = Tolerances{}.structure) {
  const Eigen::Index n = s.dim();
  Mat<S> f = (S(2) * s.phi() - Mat<S>::Identity(n, n)) / sqrt5<S>();
  return AlmostProductStructure<S>::make(std::move(f), s.metric(), tol);
}

/// Random Euclidean golden structure whose psi-eigenspace has dimension p.
///
/// F = Q diag(+1 x p, -1 x (n-p)) Q^T with Q a product of n Householder
/// reflectors drawn from a seeded generator, then phi = (I + sqrt5 F)/2.
/// Deterministic for fixed (n, p, seed).
inline GoldenStructure<double> random_golden(int n, int p, std::uint64_t seed, double tol = Tolerances{}.structure) {
  if (n <= 0) throw DimensionMismatch("dimension must be positive");
  if (p < 0 || p > n) throw BadSignature("signature p=" + std::to_string(p) + " outside [0, " + std::to_string(n) + "]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatD q = MatD::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    VecD v(n);
    for (int i = 0; i < n; ++i) v(i) = unif(rng);
    const double vv = v.squaredNorm();
    if (vv < 1e-12) continue;
    q -= (2.0 / vv) * v * (v.transpose() * q);
  }
  VecD signs(n);
  for (int i = 0; i < n; ++i) signs(i) = i < p ? 1.0 : -1.0;
  MatD f = q * signs.asDiagonal() * q.transpose();
  f = 0.5 * (f + f.transpose()).eval();
  return golden_from_product<double>(f, Metric<double>::identity(n), tol);
}

/// Bases of the two eigenspaces of a golden structure.
template <GoldenScalar S>
struct EigenSplit {
  Mat<S> psi_space;        ///< eigenvalue psi; columns g-orthonormal (float) or g-orthogonal (exact)
  Mat<S> conjugate_space;  ///< eigenvalue 1 - psi
};

namespace detail {

/// Pivoted Gram-Schmidt in the metric: picks the remaining column with the
/// largest g-norm each round. Exact: orthogonal, unnormalized. Float: orthonormal.
template <GoldenScalar S>
Mat<S> column_space_basis(const Mat<S>& cols, const Metric<S>& metric, double rel_tol) {
  const Mat<S>& g = metric.gram();
  Mat<S> work = cols;
  std::vector<Vec<S>> basis;
  std::vector<bool> used(static_cast<std::size_t>(work.cols()), false);
  S scale(0);
  for (Eigen::Index j = 0; j < work.cols(); ++j) {
    S nn = (work.col(j).transpose() * g * work.col(j))(0, 0);
    if (scale < nn) scale = nn;
  }
  for (;;) {
    Eigen::Index best = -1;
    S best_norm(0);
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      S nn = (work.col(j).transpose() * g * work.col(j))(0, 0);
      if (best < 0 || best_norm < nn) {
        best = j;
        best_norm = nn;
      }
    }
    if (best < 0) break;
    bool zero;
    if constexpr (is_exact_v<S>)
      zero = best_norm.is_zero();
    else
      zero = best_norm <= rel_tol * rel_tol * std::max(scale, 1e-300);
    if (zero) break;
    used[static_cast<std::size_t>(best)] = true;
    Vec<S> b = work.col(best);
    if constexpr (!is_exact_v<S>) b /= std::sqrt(best_norm);
    const S bb = (b.transpose() * g * b)(0, 0);
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const S c = (b.transpose() * g * work.col(j))(0, 0) / bb;
      work.col(j) -= c * b;
    }
    basis.push_back(std::move(b));
  }
  Mat<S> out(cols.rows(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = basis[k];
  return out;
}

}  // namespace detail

/// Eigenspaces for psi and 1 - psi, read off the spectral projectors
/// (phi - (1-psi) I)/sqrt5 and (psi I - phi)/sqrt5.
template <GoldenScalar S>
EigenSplit<S> golden_eigendecomp(const GoldenStructure<S>& s) {
  const Eigen::Index n = s.dim();
  const Mat<S> id = Mat<S>::Identity(n, n);
  const S psi = golden_ratio<S>();
  const S r5 = sqrt5<S>();
  const Mat<S> proj_psi = (s.phi() - (S(1) - psi) * id) / r5;
  const Mat<S> proj_conj = (psi * id - s.phi()) / r5;
  constexpr double rel_tol = 1e-8;
  return {detail::column_space_basis<S>(proj_psi, s.metric(), rel_tol),
          detail::column_space_basis<S>(proj_conj, s.metric(), rel_tol)};
}

/// Diagonal golden structure from a list of eigenvalue choices
/// (true = psi, false = 1 - psi), Euclidean metric.
template <GoldenScalar S>
GoldenStructure<S> diagonal_golden(const std::vector<bool>& psi_pattern) {
  const auto n = static_cast<Eigen::Index>(psi_pattern.size());
  Mat<S> phi = Mat<S>::Zero(n, n);
  const S psi = golden_ratio<S>();
  for (Eigen::Index i = 0; i < n; ++i) phi(i, i) = psi_pattern[static_cast<std::size_t>(i)] ? psi : S(1) - psi;
  return GoldenStructure<S>::checked(std::move(phi), Metric<S>::identity(n));
}

}  // namespace golden
