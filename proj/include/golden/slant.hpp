#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "golden/errors.hpp"
#include "golden/parallel.hpp"
#include "golden/residuals.hpp"
#include "golden/submanifold.hpp"

namespace golden {

enum class SlantClass { Invariant, AntiInvariant, ProperSlant, NonSlant };

inline const char* to_string(SlantClass c) {
  switch (c) {
    case SlantClass::Invariant: return "invariant";
    case SlantClass::AntiInvariant: return "anti_invariant";
    case SlantClass::ProperSlant: return "proper_slant";
    case SlantClass::NonSlant: return "non_slant";
  }
  return "?";
}

inline bool is_slant(SlantClass c) { return c != SlantClass::NonSlant; }

struct SlantReport {
  SlantClass classification = SlantClass::NonSlant;
  double theta = 0;      ///< mean angle over all sampled directions
  double cos_theta = 1;
  double lambda = 1;     ///< cos^2 theta
  double k = 0;          ///< sin^2 theta
  double angle_spread = 0;
  double theta_min = 0;
  double theta_max = 0;
  std::size_t directions = 0;
  ResidualMap residuals;
};

inline SlantReport slant_report_from_angle(double theta, SlantClass c) {
  SlantReport r;
  r.classification = c;
  r.theta = r.theta_min = r.theta_max = theta;
  r.cos_theta = std::cos(theta);
  r.lambda = r.cos_theta * r.cos_theta;
  r.k = 1.0 - r.lambda;
  return r;
}

/// Angle between phi X and the tangent space, X in orthonormal tangent coordinates.
/// Uses g(phi X, P X) = |PX|^2, so the arccos of the definition equals
/// atan2(|QX|, |PX|), which keeps full precision near 0 and pi/2.
inline double slant_angle_at(const InducedOperators& ops, const VecD& x,
                             double tol_class = Tolerances{}.classification) {
  if (x.size() != ops.P.cols()) throw DimensionMismatch("tangent vector has wrong length");
  if (!(x.norm() > 0)) throw ZeroVector("slant angle of the zero vector");
  const double px = (ops.P * x).norm();
  const double qx = (ops.Q * x).norm();
  const double phix = std::hypot(px, qx);
  if (px <= tol_class * phix) return std::numbers::pi / 2;
  return std::atan2(qx, px);
}

namespace detail {

inline std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

inline VecD random_unit(Eigen::Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  VecD v(m);
  do {
    for (Eigen::Index i = 0; i < m; ++i) v(i) = nd(rng);
  } while (v.norm() < 1e-3);
  return v.normalized();
}

inline double max_abs_or_zero(const MatD& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

inline void require_slant(const SlantReport& r) {
  if (!is_slant(r.classification)) throw NotSlant("submanifold is not slant");
}

struct CharacterizationResidual {
  double op = 0;         ///< max |P^2 - lambda (P + I)|
  double quadratic = 0;  ///< max over unit X of |g(X, P^2 X) - lambda (g(X,X) + g(phi X, X))|
};

/// P^2 = lambda (P + I) on TM, the operator form of the slant characterization.
inline CharacterizationResidual characterization_residual(const InducedOperators& ops, const SlantReport& r,
                                                          int trials = 20, std::uint64_t seed = 0) {
  require_slant(r);
  const Eigen::Index m = ops.P.rows();
  const MatD p2 = ops.P * ops.P;
  CharacterizationResidual out;
  out.op = detail::max_abs_or_zero(p2 - r.lambda * (ops.P + MatD::Identity(m, m)));
  auto rng = detail::seeded(seed, 1);
  for (int i = 0; i < trials + m; ++i) {
    const VecD x = i < m ? VecD(VecD::Unit(m, i)) : detail::random_unit(m, rng);
    // g(phi X, X) = g(PX, X) for tangent X.
    const double v = x.dot(p2 * x) - r.lambda * (x.dot(x) + x.dot(ops.P * x));
    out.quadratic = std::max(out.quadratic, std::abs(v));
  }
  return out;
}

/// g(phi^2 X, X) - (1/lambda) g(P^2 X, X) over unit tangent X.
inline double corollary_residual(const InducedOperators& ops, const SlantReport& r, int trials = 20,
                                 std::uint64_t seed = 0) {
  require_slant(r);
  if (r.classification == SlantClass::AntiInvariant || !(r.lambda > 0))
    throw LambdaZero("lambda = cos^2 theta vanishes for an anti-invariant submanifold");
  const Eigen::Index m = ops.P.rows();
  const MatD p2 = ops.P * ops.P;
  auto rng = detail::seeded(seed, 2);
  double worst = 0;
  for (int i = 0; i < trials + m; ++i) {
    const VecD x = i < m ? VecD(VecD::Unit(m, i)) : detail::random_unit(m, rng);
    const double phi2 = x.dot(ops.P * x) + x.dot(x);
    worst = std::max(worst, std::abs(phi2 - x.dot(p2 * x) / r.lambda));
  }
  return worst;
}

/// Max over random unit pairs of
/// |g(PX,PY) - cos^2(g(X,Y) + g(X,PY))| and |g(QX,QY) - sin^2(g(X,Y) + g(PX,Y))|.
inline std::pair<double, double> lemma_pq_identities(const InducedOperators& ops, const SlantReport& r,
                                                     int trials = 100, std::uint64_t seed = 0) {
  require_slant(r);
  const Eigen::Index m = ops.P.rows();
  auto rng = detail::seeded(seed, 3);
  double cos_part = 0, sin_part = 0;
  for (int i = 0; i < trials; ++i) {
    const VecD x = detail::random_unit(m, rng), y = detail::random_unit(m, rng);
    const VecD px = ops.P * x, py = ops.P * y;
    cos_part = std::max(cos_part, std::abs(px.dot(py) - r.lambda * (x.dot(y) + x.dot(py))));
    sin_part = std::max(sin_part, std::abs((ops.Q * x).dot(ops.Q * y) - r.k * (x.dot(y) + px.dot(y))));
  }
  return {cos_part, sin_part};
}

struct TqResidual {
  double theorem = 0;  ///< max |tQ - sin^2 theta (P + I)|
  double direct = 0;   ///< max |tQ + P^2 - P - I|
};

inline TqResidual tq_identity_residual(const InducedOperators& ops, const SlantReport& r) {
  require_slant(r);
  const Eigen::Index m = ops.P.rows();
  const MatD id = MatD::Identity(m, m);
  const MatD tq = ops.t * ops.Q;
  return {detail::max_abs_or_zero(tq - r.k * (ops.P + id)),
          detail::max_abs_or_zero(tq + ops.P * ops.P - ops.P - id)};
}

/// Residual of mu^2 - lambda mu - lambda over the eigenvalues mu of P.
inline double eigenvalue_residual(const InducedOperators& ops, double lambda) {
  const Eigen::SelfAdjointEigenSolver<MatD> es(0.5 * (ops.P + ops.P.transpose()), Eigen::EigenvaluesOnly);
  double worst = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double mu = es.eigenvalues()(i);
    worst = std::max(worst, std::abs(mu * mu - lambda * mu - lambda));
  }
  return worst;
}

namespace slant_names {
inline constexpr const char* kCharacterization = "P^2-lambda(P+I)";
inline constexpr const char* kCharacterizationQuadratic = "g(X,P^2X)-lambda(g(X,X)+g(phiX,X))";
inline constexpr const char* kCorollary = "g(phi^2X,X)-g(P^2X,X)/lambda";
inline constexpr const char* kLemmaCos = "g(PX,PY)-cos^2(g(X,Y)+g(X,PY))";
inline constexpr const char* kLemmaSin = "g(QX,QY)-sin^2(g(X,Y)+g(PX,Y))";
inline constexpr const char* kTqTheorem = "tQ-sin^2(P+I)";
inline constexpr const char* kTqDirect = "tQ+P^2-P-I";
inline constexpr const char* kEigenvalues = "mu^2-lambda*mu-lambda";
}  // namespace slant_names

/// Fills every slant identity residual for one point (max-reduced into r.residuals).
inline void accumulate_slant_residuals(const InducedOperators& ops, SlantReport& r, std::uint64_t seed,
                                       int trials = 100) {
  using namespace slant_names;
  const auto ch = characterization_residual(ops, r, 20, seed);
  r.residuals.raise(kCharacterization, ch.op);
  r.residuals.raise(kCharacterizationQuadratic, ch.quadratic);
  if (r.classification != SlantClass::AntiInvariant) r.residuals.raise(kCorollary, corollary_residual(ops, r, 20, seed));
  const auto [c, s] = lemma_pq_identities(ops, r, trials, seed);
  r.residuals.raise(kLemmaCos, c);
  r.residuals.raise(kLemmaSin, s);
  const auto tq = tq_identity_residual(ops, r);
  r.residuals.raise(kTqTheorem, tq.theorem);
  r.residuals.raise(kTqDirect, tq.direct);
  r.residuals.raise(kEigenvalues, eigenvalue_residual(ops, r.lambda));
}

struct ClassifyOptions {
  double tol_angle = Tolerances{}.angle;
  double tol_class = Tolerances{}.classification;
  int random_directions = 20;
  int lemma_trials = 100;
  std::uint64_t seed = 0;
};

/// Angles over every sample point and, per point, the frame basis plus seeded
/// random directions. A spread within tol_angle makes the submanifold slant.
inline SlantReport classify(const ImmersionSpec& imm, const GoldenStructure<double>& s,
                            const std::vector<VecD>& samples, const ClassifyOptions& opt = {}) {
  if (samples.empty()) throw DimensionMismatch("no sample points");
  struct PointResult {
    InducedOperators ops;
    double lo = 0, hi = 0, sum = 0;
    std::size_t count = 0;
  };
  const auto per_point = parallel_map(samples.size(), [&](std::size_t i) {
    const auto frame = frame_at(imm, samples[i], s.metric());
    PointResult pr{induced_operators(frame, s)};
    const Eigen::Index m = frame.tangent_dim();
    auto rng = detail::seeded(opt.seed, i);
    pr.lo = std::numeric_limits<double>::infinity();
    pr.hi = -pr.lo;
    for (int d = 0; d < m + opt.random_directions; ++d) {
      const VecD x = d < m ? VecD(VecD::Unit(m, d)) : detail::random_unit(m, rng);
      const double th = slant_angle_at(pr.ops, x, opt.tol_class);
      pr.lo = std::min(pr.lo, th);
      pr.hi = std::max(pr.hi, th);
      pr.sum += th;
      ++pr.count;
    }
    return pr;
  });

  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
  std::size_t count = 0;
  for (const auto& pr : per_point) {
    lo = std::min(lo, pr.lo);
    hi = std::max(hi, pr.hi);
    sum += pr.sum;
    count += pr.count;
  }
  const double mean = sum / static_cast<double>(count);
  SlantClass c = SlantClass::NonSlant;
  if (hi - lo <= opt.tol_angle) {
    if (mean <= opt.tol_angle)
      c = SlantClass::Invariant;
    else if (std::numbers::pi / 2 - mean <= opt.tol_angle)
      c = SlantClass::AntiInvariant;
    else
      c = SlantClass::ProperSlant;
  }
  SlantReport r = slant_report_from_angle(mean, c);
  // Snap the boundary cases so lambda and k are exact there.
  if (c == SlantClass::Invariant) {
    r.lambda = 1;
    r.k = 0;
  } else if (c == SlantClass::AntiInvariant) {
    r.lambda = 0;
    r.k = 1;
  }
  r.theta_min = lo;
  r.theta_max = hi;
  r.angle_spread = hi - lo;
  r.directions = count;
  if (is_slant(c)) {
    const auto parts = parallel_map(per_point.size(), [&](std::size_t i) {
      SlantReport local = r;
      accumulate_slant_residuals(per_point[i].ops, local, opt.seed + i, opt.lemma_trials);
      return local.residuals;
    });
    for (const auto& p : parts) r.residuals.merge_max(p);
  }
  return r;
}

/// Exact slant analysis of an affine immersion in the raw tangent basis.
/// Quadratic and bilinear identities become symmetric matrices that must vanish.
struct ExactSlantReport {
  bool slant = false;
  QuadRat lambda;            ///< cos^2 theta, exact
  QuadRat k;                 ///< sin^2 theta
  ExactTangentOperators ops;
  bool characterization = false;  ///< P^2 = lambda (P + I)
  bool corollary = false;         ///< g(phi^2 X, X) = g(P^2 X, X) / lambda (false when lambda = 0)
  bool lemma_cos = false;
  bool lemma_sin = false;
  bool tq_theorem = false;        ///< tQ = k (P + I)
  bool tq_direct = false;         ///< tQ = -P^2 + P + I

  double cos_theta() const { return std::sqrt(lambda.to_double()); }
  double theta() const { return std::acos(std::min(1.0, cos_theta())); }
  bool all_identities() const { return characterization && lemma_cos && lemma_sin && tq_theorem && tq_direct; }
};

inline ExactSlantReport exact_slant(const MatQ& jac, const GoldenStructure<QuadRat>& s) {
  ExactSlantReport r;
  r.ops = exact_tangent_operators(jac, s);
  const MatQ& g = s.metric().gram();
  const MatQ& gram = r.ops.gram;
  const MatQ& P = r.ops.P;
  const Eigen::Index m = P.rows();
  const MatQ id = MatQ::Identity(m, m);
  const MatQ zero = MatQ::Zero(m, m);

  // |PX|^2 and |phi X|^2 as quadratic forms in raw coordinates.
  const MatQ pp = P.transpose() * gram * P;
  const MatQ phij = s.phi() * jac;
  const MatQ ff = phij.transpose() * g * phij;
  r.lambda = pp(0, 0) / ff(0, 0);
  r.k = QuadRat(1) - r.lambda;
  r.slant = (pp - r.lambda * ff) == zero;

  const MatQ p2 = P * P;
  r.characterization = (p2 - r.lambda * (P + id)) == zero;
  if (!r.lambda.is_zero()) r.corollary = (gram * (P + id) - gram * p2 / r.lambda) == zero;
  r.lemma_cos = (pp - r.lambda * (gram + gram * P)) == zero;
  const MatQ qq = r.ops.Q_ambient.transpose() * g * r.ops.Q_ambient;
  r.lemma_sin = (qq - r.k * (gram + P.transpose() * gram)) == zero;
  r.tq_theorem = (r.ops.tQ - r.k * (P + id)) == zero;
  r.tq_direct = (r.ops.tQ + p2 - P - id) == zero;
  return r;
}

}  // namespace golden
