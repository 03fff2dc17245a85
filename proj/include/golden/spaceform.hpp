#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "golden/errors.hpp"
#include "golden/golden_core.hpp"
#include "golden/parallel.hpp"
#include "golden/residuals.hpp"

namespace golden {

/// Coefficients of the closed-form space-form curvature:
/// A multiplies {g(Y,Z)X - g(X,Z)Y + g(phiY,Z)phiX - g(phiX,Z)phiY},
/// B multiplies {g(phiY,Z)X - g(phiX,Z)Y + g(Y,Z)phiX - g(X,Z)phiY}.
template <GoldenScalar S>
struct CurvatureCoefficients {
  S A;
  S B;
};

template <GoldenScalar S>
CurvatureCoefficients<S> curvature_coefficients(const S& c_p, const S& c_q) {
  const S psi = golden_ratio<S>();
  const S conj = S(1) - psi;
  return {-(conj * c_p - psi * c_q) / (S(2) * sqrt5<S>()), -(conj * c_p + psi * c_q) / S(4)};
}

/// Point model of a locally golden product space form: one inner-product
/// space with constant g and phi, on which every curvature statement is
/// multilinear algebra.
class SpaceFormModel {
 public:
  SpaceFormModel(GoldenStructure<double> structure, double c_p, double c_q)
      : structure_(std::move(structure)), c_p_(c_p), c_q_(c_q) {
    const auto co = curvature_coefficients<double>(c_p, c_q);
    a_ = co.A;
    b_ = co.B;
    const Eigen::Index n = structure_.dim();
    trace_phi_ = trace<double>(structure_.phi());
    const double psi = golden_ratio<double>();
    p_ = static_cast<int>(std::lround((trace_phi_ - static_cast<double>(n) * (1 - psi)) / std::sqrt(5.0)));
    // E = L^{-T} with G = L L^T is g-orthonormal.
    const Eigen::LLT<MatD> llt(structure_.metric().gram());
    frame_ = MatD(llt.matrixU()).triangularView<Eigen::Upper>().solve(MatD::Identity(n, n));
  }

  /// Euclidean model with phi = diag(psi x p, (1-psi) x (n-p)).
  static SpaceFormModel make(int n, int p, double c_p, double c_q) {
    if (n < 1) throw DimensionMismatch("space form dimension must be positive");
    if (p < 0 || p > n) throw BadSignature("p outside [0, n]");
    std::vector<bool> pattern(static_cast<std::size_t>(n), false);
    for (int i = 0; i < p; ++i) pattern[static_cast<std::size_t>(i)] = true;
    return SpaceFormModel(diagonal_golden<double>(pattern), c_p, c_q);
  }

  Eigen::Index n() const { return structure_.dim(); }
  int p() const { return p_; }
  double c_p() const { return c_p_; }
  double c_q() const { return c_q_; }
  double A() const { return a_; }
  double B() const { return b_; }
  double trace_phi() const { return trace_phi_; }
  const GoldenStructure<double>& structure() const { return structure_; }
  const MatD& phi() const { return structure_.phi(); }
  const MatD& frame() const { return frame_; }
  double g(const VecD& x, const VecD& y) const { return structure_.metric().inner(x, y); }

  /// Ricci coefficients: S = alpha g + beta g(phi., .).
  double ricci_alpha() const { return a_ * static_cast<double>(n() - 2) + b_ * trace_phi_; }
  double ricci_beta() const { return a_ * (trace_phi_ - 1) + b_ * static_cast<double>(n() - 2); }

  VecD curvature(const VecD& x, const VecD& y, const VecD& z) const {
    check(x);
    check(y);
    check(z);
    const VecD px = phi() * x, py = phi() * y;
    const double yz = g(y, z), xz = g(x, z), pyz = g(py, z), pxz = g(px, z);
    return a_ * (yz * x - xz * y + pyz * px - pxz * py) + b_ * (pyz * x - pxz * y + yz * px - xz * py);
  }

  double ricci_framesum(const VecD& y, const VecD& z) const {
    double s = 0;
    for (Eigen::Index i = 0; i < n(); ++i) {
      const VecD e = frame_.col(i);
      s += g(curvature(e, y, z), e);
    }
    return s;
  }

  double ricci_closed(const VecD& y, const VecD& z) const {
    check(y);
    check(z);
    return ricci_alpha() * g(y, z) + ricci_beta() * g(phi() * y, z);
  }

 private:
  void check(const VecD& v) const {
    if (v.size() != n()) throw DimensionMismatch("vector length differs from space-form dimension");
  }

  GoldenStructure<double> structure_;
  double c_p_, c_q_, a_ = 0, b_ = 0, trace_phi_ = 0;
  int p_ = 0;
  MatD frame_;
};

enum class RicciPath { FrameSum, Closed };

inline const char* to_string(RicciPath p) { return p == RicciPath::FrameSum ? "framesum" : "closed"; }

inline double ricci(const SpaceFormModel& m, RicciPath path, const VecD& y, const VecD& z) {
  return path == RicciPath::FrameSum ? m.ricci_framesum(y, z) : m.ricci_closed(y, z);
}

/// (R(X,Y).S)(Z,W) = -S(R(X,Y)Z, W) - S(Z, R(X,Y)W).
inline double r_dot_s(const SpaceFormModel& m, const VecD& x, const VecD& y, const VecD& z, const VecD& w,
                      RicciPath path = RicciPath::FrameSum) {
  return -ricci(m, path, m.curvature(x, y, z), w) - ricci(m, path, z, m.curvature(x, y, w));
}

/// The printed closed form -2 beta g(R(X,Y)W, phi Z).
inline double r_dot_s_closed(const SpaceFormModel& m, const VecD& x, const VecD& y, const VecD& z, const VecD& w) {
  return -2 * m.ricci_beta() * m.g(m.curvature(x, y, w), m.phi() * z);
}

namespace detail {

struct Tuple {
  VecD x, y, z, w;
};

inline std::vector<Tuple> random_tuples(Eigen::Index n, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto draw = [&] {
    VecD v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
  };
  std::vector<Tuple> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    VecD x = draw(), y = draw(), z = draw(), w = draw();
    out.push_back({std::move(x), std::move(y), std::move(z), std::move(w)});
  }
  return out;
}

/// Runs fn on every tuple in parallel and max-reduces the maps in tuple order.
template <class Fn>
ResidualMap over_tuples(Eigen::Index n, int trials, std::uint64_t seed, Fn fn) {
  const auto tuples = random_tuples(n, trials, seed);
  const auto maps = parallel_map(tuples.size(), [&](std::size_t i) {
    ResidualMap r;
    fn(tuples[i], r);
    return r;
  });
  ResidualMap out;
  for (const auto& r : maps) out.merge_max(r);
  return out;
}

inline double vmax(const VecD& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

namespace curvature_names {
inline constexpr const char* kCommutesPhi = "R(X,Y)phiZ-phiR(X,Y)Z";
inline constexpr const char* kPhiSwap = "R(phiX,Y)Z-R(X,phiY)Z";
inline constexpr const char* kPhiPhi = "R(phiX,phiY)Z-R(phiX,Y)Z-R(X,Y)Z";
inline constexpr const char* kMetricPhiPhi = "g(R(X,Y)phiZ,phiW)-g(R(X,Y)Z,phiW)-g(R(X,Y)Z,W)";
inline constexpr const char* kMetricPhi = "g(R(X,Y)phiZ,W)-g(R(X,Y)Z,phiW)";
inline constexpr const char* kAntisymmetry = "R(X,Y)Z+R(Y,X)Z";
inline constexpr const char* kSkew = "g(R(X,Y)Z,W)+g(R(X,Y)W,Z)";
inline constexpr const char* kBianchi = "R(X,Y)Z+R(Y,Z)X+R(Z,X)Y";
inline constexpr const char* kPairSymmetry = "g(R(X,Y)Z,W)-g(R(Z,W)X,Y)";
inline constexpr const char* kRdsClosedForm = "(R.S)_def-(R.S)_closed";
inline constexpr const char* kRdsCorollary = "(R(phiX,Y).S)(phiZ,W)";
inline constexpr const char* kRdsProbe = "|(R.S)(Z,W)|";
}  // namespace curvature_names

/// The five curvature/phi commutation identities.
inline ResidualMap curvature_commutation_checks(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  using namespace curvature_names;
  const MatD& phi = m.phi();
  return detail::over_tuples(m.n(), trials, seed, [&](const detail::Tuple& t, ResidualMap& r) {
    const VecD pz = phi * t.z, pw = phi * t.w, px = phi * t.x, py = phi * t.y;
    const VecD rz = m.curvature(t.x, t.y, t.z);
    const VecD rpz = m.curvature(t.x, t.y, pz);
    r.raise(kCommutesPhi, detail::vmax(rpz - phi * rz));
    r.raise(kPhiSwap, detail::vmax(m.curvature(px, t.y, t.z) - m.curvature(t.x, py, t.z)));
    r.raise(kPhiPhi, detail::vmax(m.curvature(px, py, t.z) - m.curvature(px, t.y, t.z) - rz));
    r.raise(kMetricPhiPhi, std::abs(m.g(rpz, pw) - m.g(rz, pw) - m.g(rz, t.w)));
    r.raise(kMetricPhi, std::abs(m.g(rpz, t.w) - m.g(rz, pw)));
  });
}

/// Algebraic symmetries of a curvature tensor.
inline ResidualMap curvature_symmetry_checks(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  using namespace curvature_names;
  return detail::over_tuples(m.n(), trials, seed, [&](const detail::Tuple& t, ResidualMap& r) {
    const VecD rz = m.curvature(t.x, t.y, t.z);
    r.raise(kAntisymmetry, detail::vmax(rz + m.curvature(t.y, t.x, t.z)));
    r.raise(kSkew, std::abs(m.g(rz, t.w) + m.g(m.curvature(t.x, t.y, t.w), t.z)));
    r.raise(kBianchi, detail::vmax(rz + m.curvature(t.y, t.z, t.x) + m.curvature(t.z, t.x, t.y)));
    r.raise(kPairSymmetry, std::abs(m.g(rz, t.w) - m.g(m.curvature(t.z, t.w, t.x), t.y)));
  });
}

/// Frame-sum against closed-form Ricci, plus symmetry of the frame sum.
inline ResidualMap ricci_agreement(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  return detail::over_tuples(m.n(), trials, seed, [&](const detail::Tuple& t, ResidualMap& r) {
    const double fs = m.ricci_framesum(t.y, t.z);
    r.raise("S_framesum-S_closed", std::abs(fs - m.ricci_closed(t.y, t.z)));
    r.raise("S(Y,Z)-S(Z,Y)", std::abs(fs - m.ricci_framesum(t.z, t.y)));
  });
}

/// The four Ricci/phi identities, evaluated along both Ricci paths.
inline ResidualMap ricci_phi_checks(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  const MatD& phi = m.phi();
  return detail::over_tuples(m.n(), trials, seed, [&](const detail::Tuple& t, ResidualMap& r) {
    const VecD px = phi * t.x, py = phi * t.y, ppx = phi * px, ppy = phi * py;
    for (RicciPath path : {RicciPath::FrameSum, RicciPath::Closed}) {
      const std::string tag = std::string(" [") + to_string(path) + "]";
      auto S = [&](const VecD& a, const VecD& b) { return ricci(m, path, a, b); };
      const double sxy = S(t.x, t.y);
      r.raise("S(phi^2X,Y)-S(phiX,Y)-S(X,Y)" + tag, std::abs(S(ppx, t.y) - S(px, t.y) - sxy));
      r.raise("S(X,phi^2Y)-S(X,phiY)-S(X,Y)" + tag, std::abs(S(t.x, ppy) - S(t.x, py) - sxy));
      r.raise("S(phiX,phiY)-S(phiX,Y)-S(X,Y)" + tag, std::abs(S(px, py) - S(px, t.y) - sxy));
      r.raise("S(phiX,Y)-S(phiY,X)" + tag, std::abs(S(px, t.y) - S(py, t.x)));
    }
  });
}

struct RDotSReport {
  ResidualMap residuals;  ///< closed-form mismatch and corollary, per Ricci path
  double probe_max = 0;   ///< max |(R(X,Y).S)(Z,W)| over the trials
  bool not_semi_symmetric(double threshold = 1e-6) const { return probe_max > threshold; }
};

inline RDotSReport r_dot_s_checks(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  using namespace curvature_names;
  RDotSReport rep;
  const MatD& phi = m.phi();
  rep.residuals = detail::over_tuples(m.n(), trials, seed, [&](const detail::Tuple& t, ResidualMap& r) {
    for (RicciPath path : {RicciPath::FrameSum, RicciPath::Closed}) {
      const std::string tag = std::string(" [") + to_string(path) + "]";
      const double def = r_dot_s(m, t.x, t.y, t.z, t.w, path);
      r.raise(kRdsClosedForm + tag, std::abs(def - r_dot_s_closed(m, t.x, t.y, t.z, t.w)));
      r.raise(kRdsCorollary + tag, std::abs(r_dot_s(m, phi * t.x, t.y, phi * t.z, t.w, path)));
      r.raise(kRdsProbe + tag, std::abs(def));
    }
  });
  rep.probe_max = rep.residuals.at(std::string(kRdsProbe) + " [" + to_string(RicciPath::FrameSum) + "]");
  return rep;
}

/// The two R.S / phi identities (definitional R.S, both Ricci paths).
inline ResidualMap rs_phi_propositions(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  const MatD& phi = m.phi();
  return detail::over_tuples(m.n(), trials, seed, [&](const detail::Tuple& t, ResidualMap& r) {
    // (X1, X2, X, Y) = (x, y, z, w)
    const VecD p1 = phi * t.x, p2 = phi * t.y, pz = phi * t.z, pw = phi * t.w;
    for (RicciPath path : {RicciPath::FrameSum, RicciPath::Closed}) {
      const std::string tag = std::string(" [") + to_string(path) + "]";
      auto rs = [&](const VecD& a, const VecD& b, const VecD& c, const VecD& d) { return r_dot_s(m, a, b, c, d, path); };
      const double base = rs(t.x, t.y, t.z, t.w);
      r.raise("(R(phiX1,phiX2).S)-(R(phiX1,X2).S)-(R(X1,X2).S)" + tag,
              std::abs(rs(p1, p2, t.z, t.w) - rs(p1, t.y, t.z, t.w) - base));
      r.raise("(R(X1,X2).S)(phiX,phiY)-(R(X1,X2).S)(phiX,Y)-(R(X1,X2).S)(X,Y)" + tag,
              std::abs(rs(t.x, t.y, pz, pw) - rs(t.x, t.y, pz, t.w) - base));
    }
  });
}

struct RicciFit {
  double alpha = 0;
  double beta = 0;
  double residual = 0;  ///< max |S - alpha g - beta g(phi., .)| over the samples
  Eigen::Index rank = 0;
};

/// Least-squares fit of the frame-sum Ricci tensor against {g, g(phi., .)}.
inline RicciFit fit_ricci_coefficients(const SpaceFormModel& m, int trials = 100, std::uint64_t seed = 0) {
  const auto tuples = detail::random_tuples(m.n(), trials, seed);
  MatD a(trials, 2);
  VecD b(trials);
  for (int i = 0; i < trials; ++i) {
    const auto& t = tuples[static_cast<std::size_t>(i)];
    a(i, 0) = m.g(t.y, t.z);
    a(i, 1) = m.g(m.phi() * t.y, t.z);
    b(i) = m.ricci_framesum(t.y, t.z);
  }
  const Eigen::ColPivHouseholderQR<MatD> qr(a);
  const VecD c = qr.solve(b);
  return {c(0), c(1), detail::vmax(a * c - b), qr.rank()};
}

/// Covariant-derivative statements settled by constancy: A, B, alpha, beta are
/// numbers and g, phi are constant, so nabla R = 0 and nabla S = 0, and both
/// sides of each derivative identity are zero.
struct NablaCertificate {
  double A = 0, B = 0, alpha = 0, beta = 0;
  std::string statement;
};

inline NablaCertificate nabla_identities_certificate(const SpaceFormModel& m) {
  return {m.A(), m.B(), m.ricci_alpha(), m.ricci_beta(),
          "curvature and Ricci coefficients are point-independent constants and g, phi are parallel; "
          "hence nabla R = 0 and nabla S = 0, and (nabla_W R)(X,Y)phiZ = phi (nabla_W R)(X,Y)Z and "
          "(nabla_Z S)(phiX,Y) = (nabla_Z S)(X,phiY) hold as 0 = 0"};
}

}  // namespace golden
