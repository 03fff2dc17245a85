#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "golden/errors.hpp"
#include "golden/expr.hpp"
#include "golden/golden_core.hpp"
#include "golden/linalg.hpp"
#include "golden/residuals.hpp"

namespace golden {

struct GridAxis {
  double lo = 0;
  double hi = 0;
  int count = 1;
};

/// Sample points: the Cartesian grid (last parameter varying fastest)
/// followed by any explicit points.
struct SampleSpec {
  std::vector<GridAxis> grid;
  std::vector<VecD> extra_points;

  std::vector<VecD> points(std::size_t m) const {
    std::vector<VecD> pts;
    if (!grid.empty()) {
      if (grid.size() != m) throw DimensionMismatch("sample grid needs one axis per parameter");
      std::vector<int> idx(m, 0);
      for (;;) {
        VecD p(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
          const GridAxis& ax = grid[i];
          p(static_cast<Eigen::Index>(i)) =
              ax.count <= 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * idx[i] / static_cast<double>(ax.count - 1);
        }
        pts.push_back(std::move(p));
        std::size_t k = m;
        while (k > 0) {
          --k;
          if (++idx[k] < std::max(grid[k].count, 1)) break;
          idx[k] = 0;
          if (k == 0) return append_extra(std::move(pts), m);
        }
        if (m == 0) break;
      }
    }
    return append_extra(std::move(pts), m);
  }

 private:
  std::vector<VecD> append_extra(std::vector<VecD> pts, std::size_t m) const {
    for (const auto& p : extra_points) {
      if (static_cast<std::size_t>(p.size()) != m) throw DimensionMismatch("extra sample point has wrong length");
      pts.push_back(p);
    }
    return pts;
  }
};

/// Second-order jet of an immersion at one parameter point.
struct ImmersionJet {
  VecD position;
  MatD jacobian;             ///< n x m, column i = dx/du_i
  std::vector<VecD> second;  ///< entry i*m+j = d^2x / du_i du_j

  Eigen::Index param_dim() const { return jacobian.cols(); }
  const VecD& d2(Eigen::Index i, Eigen::Index j) const {
    return second[static_cast<std::size_t>(i * jacobian.cols() + j)];
  }
};

/// Parametric map from m parameters into n-dimensional ambient space.
class ImmersionSpec {
 public:
  ImmersionSpec(std::vector<std::string> params, std::vector<expr::Expr> components, SampleSpec samples = {})
      : params_(std::move(params)), components_(std::move(components)), samples_(std::move(samples)) {
    if (params_.empty()) throw DimensionMismatch("immersion needs at least one parameter");
    if (components_.size() <= params_.size())
      throw DimensionMismatch("immersion needs more components (" + std::to_string(components_.size()) +
                              ") than parameters (" + std::to_string(params_.size()) + ")");
    for (const auto& c : components_)
      if (c.params() != params_) throw DimensionMismatch("component parsed over different parameters");
  }

  /// Parses each component over `params`.
  static ImmersionSpec make(std::vector<std::string> params, const std::vector<std::string>& components,
                            SampleSpec samples = {}) {
    std::vector<expr::Expr> parsed;
    parsed.reserve(components.size());
    for (const auto& c : components) parsed.push_back(expr::parse(c, params));
    return ImmersionSpec(std::move(params), std::move(parsed), std::move(samples));
  }

  Eigen::Index ambient_dim() const { return static_cast<Eigen::Index>(components_.size()); }
  Eigen::Index param_dim() const { return static_cast<Eigen::Index>(params_.size()); }
  const std::vector<std::string>& params() const { return params_; }
  const std::vector<expr::Expr>& components() const { return components_; }
  const SampleSpec& samples() const { return samples_; }
  std::vector<VecD> sample_points() const { return samples_.points(params_.size()); }

  ImmersionJet jet(const VecD& u) const {
    const Eigen::Index n = ambient_dim(), m = param_dim();
    if (u.size() != m) throw DimensionMismatch("parameter point has wrong length");
    ImmersionJet j{VecD(n), MatD(n, m), std::vector<VecD>(static_cast<std::size_t>(m * m), VecD(n))};
    for (Eigen::Index k = 0; k < n; ++k) {
      const expr::Jet2 c = expr::eval_jet(components_[static_cast<std::size_t>(k)], u);
      j.position(k) = c.value;
      j.jacobian.row(k) = c.grad.transpose();
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) j.second[static_cast<std::size_t>(a * m + b)](k) = c.hess(a, b);
    }
    return j;
  }

  /// Exact constant Jacobian when every component is affine over Q(sqrt5).
  std::optional<MatQ> exact_jacobian() const {
    const Eigen::Index n = ambient_dim(), m = param_dim();
    MatQ jac(n, m);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto f = expr::exact_affine(components_[static_cast<std::size_t>(k)]);
      if (!f) return std::nullopt;
      for (Eigen::Index i = 0; i < m; ++i) jac(k, i) = f->coeffs[static_cast<std::size_t>(i)];
    }
    return jac;
  }

 private:
  std::vector<std::string> params_;
  std::vector<expr::Expr> components_;
  SampleSpec samples_;
};

/// Orthonormal tangent and normal frames at one point of an immersion.
struct TangentFrame {
  VecD point;
  MatD raw_tangents;   ///< n x m Jacobian columns
  MatD tangent_onb;    ///< n x m, g-orthonormal, same span as raw_tangents
  MatD normal_onb;     ///< n x (n-m), completes tangent_onb to a g-orthonormal basis
  MatD tangent_coords; ///< m x m upper triangular R with raw_tangents = tangent_onb * R
  Metric<double> metric;

  Eigen::Index ambient_dim() const { return raw_tangents.rows(); }
  Eigen::Index tangent_dim() const { return raw_tangents.cols(); }

  /// Max deviation of [T N]^T G [T N] from the identity.
  double gram_defect() const {
    MatD basis(ambient_dim(), ambient_dim());
    basis << tangent_onb, normal_onb;
    return max_abs(MatD(basis.transpose() * metric.gram() * basis - MatD::Identity(ambient_dim(), ambient_dim())));
  }
};

inline constexpr double kRankTolerance = 1e-8;

/// Frames from a Jacobian: modified Gram-Schmidt with one re-orthogonalization
/// pass in the metric, then completion by the standard basis vectors with the
/// largest residual norm.
inline TangentFrame frame_from_jacobian(const VecD& point, const MatD& jac, const Metric<double>& metric) {
  const Eigen::Index n = jac.rows(), m = jac.cols();
  if (metric.dim() != n) throw DimensionMismatch("metric dimension differs from ambient dimension");
  if (m >= n || m == 0) throw DimensionMismatch("need 0 < m < n");
  const MatD& g = metric.gram();

  // Rank test on G^{1/2} J (L^T J with G = L L^T has the same singular values).
  const Eigen::LLT<MatD> llt(g);
  const MatD scaled = MatD(llt.matrixU()) * jac;
  const Eigen::JacobiSVD<MatD> svd(scaled);
  const double smin = svd.singularValues()(m - 1);
  if (!(smin >= kRankTolerance))
    throw RankDeficient("Jacobian rank deficient: smallest singular value " + std::to_string(smin));

  MatD t(n, m);
  MatD r = MatD::Zero(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    VecD v = jac.col(k);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j) {
        const double c = (t.col(j).transpose() * g * v)(0, 0);
        v -= c * t.col(j);
        r(j, k) += c;
      }
    const double nv = std::sqrt((v.transpose() * g * v)(0, 0));
    r(k, k) = nv;
    t.col(k) = v / nv;
  }

  MatD basis(n, n);
  basis.leftCols(m) = t;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index filled = m; filled < n; ++filled) {
    Eigen::Index best = -1;
    double best_norm = -1;
    VecD best_vec;
    for (Eigen::Index cand = 0; cand < n; ++cand) {
      if (used[static_cast<std::size_t>(cand)]) continue;
      VecD v = VecD::Unit(n, cand);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index j = 0; j < filled; ++j) v -= (basis.col(j).transpose() * g * v)(0, 0) * basis.col(j);
      const double nv = std::sqrt((v.transpose() * g * v)(0, 0));
      if (nv > best_norm) {
        best_norm = nv;
        best = cand;
        best_vec = v;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    basis.col(filled) = best_vec / best_norm;
  }
  return TangentFrame{point, jac, t, basis.rightCols(n - m), r, metric};
}

inline TangentFrame frame_at(const ImmersionSpec& imm, const VecD& point, const Metric<double>& metric) {
  if (imm.ambient_dim() != metric.dim()) throw DimensionMismatch("immersion and metric dimensions differ");
  return frame_from_jacobian(point, imm.jet(point).jacobian, metric);
}

/// Blocks of phi in the frame [T N]: phi X = P X + Q X on tangents, phi V = t V + s V on normals.
struct InducedOperators {
  MatD P;  ///< m x m
  MatD Q;  ///< (n-m) x m
  MatD t;  ///< m x (n-m)
  MatD s;  ///< (n-m) x (n-m)
};

inline InducedOperators induced_operators(const TangentFrame& frame, const GoldenStructure<double>& s) {
  if (s.dim() != frame.ambient_dim()) throw DimensionMismatch("structure and frame dimensions differ");
  if (!(s.metric() == frame.metric)) throw MetricIncompat("structure and frame use different metrics");
  const MatD& g = frame.metric.gram();
  const MatD& T = frame.tangent_onb;
  const MatD& N = frame.normal_onb;
  const MatD gphi = g * s.phi();
  return {T.transpose() * gphi * T, N.transpose() * gphi * T, T.transpose() * gphi * N, N.transpose() * gphi * N};
}

/// Ambient reassembly error: phi T - (T P + N Q) and phi N - (T t + N s).
inline double reassembly_residual(const TangentFrame& frame, const InducedOperators& ops,
                                  const GoldenStructure<double>& s) {
  const MatD& T = frame.tangent_onb;
  const MatD& N = frame.normal_onb;
  const double tangent = max_abs(MatD(s.phi() * T - (T * ops.P + N * ops.Q)));
  const double normal = max_abs(MatD(s.phi() * N - (T * ops.t + N * ops.s)));
  return std::max(tangent, normal);
}

namespace identity_names {
inline constexpr const char* kTangentSquare = "P^2-P-I+tQ";
inline constexpr const char* kTangentMixed = "Q-QP-sQ";
inline constexpr const char* kNormalSquare = "s^2-s-I+Qt";
inline constexpr const char* kNormalMixed = "t-Pt-ts";
inline constexpr const char* kSelfAdjoint = "g(PX,Y)-g(X,PY)";
inline constexpr const char* kMetricSplit = "g(PX,PY)+g(QX,QY)-g(X,Y)-g(PX,Y)";
}  // namespace identity_names

struct IdentityReport {
  ResidualMap residuals;
  bool pass = false;
};

/// The block identities implied by phi^2 = phi + I plus the two metric
/// identities on TM, evaluated on the frame basis and `random_pairs` seeded
/// random tangent pairs.
inline IdentityReport structural_identity_residuals(const InducedOperators& ops, const TangentFrame& frame,
                                                    const GoldenStructure<double>& s, double tol_frame = 1e-9,
                                                    std::uint64_t seed = 0, int random_pairs = 20) {
  if (s.dim() != frame.ambient_dim() || ops.P.rows() != frame.tangent_dim())
    throw DimensionMismatch("operators, frame and structure disagree in dimension");
  using namespace identity_names;
  const Eigen::Index m = ops.P.rows(), k = ops.s.rows();
  const MatD im = MatD::Identity(m, m), ik = MatD::Identity(k, k);
  IdentityReport rep;
  rep.residuals.set(kTangentSquare, max_abs(MatD(ops.P * ops.P - ops.P - im + ops.t * ops.Q)));
  rep.residuals.set(kTangentMixed, max_abs(MatD(ops.Q - ops.Q * ops.P - ops.s * ops.Q)));
  rep.residuals.set(kNormalSquare, max_abs(MatD(ops.s * ops.s - ops.s - ik + ops.Q * ops.t)));
  rep.residuals.set(kNormalMixed, max_abs(MatD(ops.t - ops.P * ops.t - ops.t * ops.s)));

  // In the orthonormal frame g(X,Y) = x^T y.
  rep.residuals.set(kSelfAdjoint, max_abs(MatD(ops.P.transpose() - ops.P)));
  rep.residuals.set(kMetricSplit,
                    max_abs(MatD(ops.P.transpose() * ops.P + ops.Q.transpose() * ops.Q - im - ops.P.transpose())));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < random_pairs; ++trial) {
    VecD x(m), y(m);
    for (Eigen::Index i = 0; i < m; ++i) x(i) = nd(rng);
    for (Eigen::Index i = 0; i < m; ++i) y(i) = nd(rng);
    const VecD px = ops.P * x, py = ops.P * y, qx = ops.Q * x, qy = ops.Q * y;
    const double scale = 1.0 + x.norm() * y.norm();
    rep.residuals.raise(kSelfAdjoint, std::abs(px.dot(y) - x.dot(py)) / scale);
    rep.residuals.raise(kMetricSplit, std::abs(px.dot(py) + qx.dot(qy) - x.dot(y) - px.dot(y)) / scale);
  }
  rep.pass = rep.residuals.all_within(tol_frame);
  return rep;
}

enum class SubmanifoldKind { Invariant, AntiInvariant, Neither };

inline const char* to_string(SubmanifoldKind k) {
  switch (k) {
    case SubmanifoldKind::Invariant: return "invariant";
    case SubmanifoldKind::AntiInvariant: return "anti_invariant";
    case SubmanifoldKind::Neither: return "neither";
  }
  return "?";
}

struct InvarianceResult {
  SubmanifoldKind kind = SubmanifoldKind::Neither;
  double q_norm = 0;              ///< max |Q|
  double p_norm = 0;              ///< max |P|
  double induced_axiom_residual = 0;  ///< max |P^2 - P - I|
  bool induced_is_golden = false;     ///< (P, g) golden within tol_class
  /// Q = 0 exactly when (P, g) is golden: the invariance criterion holds at this point.
  bool criterion_consistent = false;
};

inline InvarianceResult invariance_test(const InducedOperators& ops, double tol_class = 1e-7) {
  InvarianceResult r;
  const Eigen::Index m = ops.P.rows();
  r.q_norm = max_abs(ops.Q);
  r.p_norm = max_abs(ops.P);
  r.induced_axiom_residual = max_abs(MatD(ops.P * ops.P - ops.P - MatD::Identity(m, m)));
  const double asym = max_abs(MatD(ops.P - ops.P.transpose()));
  r.induced_is_golden = r.induced_axiom_residual <= tol_class && asym <= tol_class;
  if (r.q_norm <= tol_class)
    r.kind = SubmanifoldKind::Invariant;
  else if (r.p_norm <= tol_class)
    r.kind = SubmanifoldKind::AntiInvariant;
  r.criterion_consistent = (r.kind == SubmanifoldKind::Invariant) == r.induced_is_golden;
  return r;
}

/// Exact induced operators of an affine immersion, in the raw tangent basis
/// (columns of the constant Jacobian). No normalization, so everything stays
/// in Q(sqrt5).
struct ExactTangentOperators {
  MatQ jacobian;   ///< n x m
  MatQ gram;       ///< J^T G J
  MatQ P;          ///< m x m, tangential part of phi in the raw basis
  MatQ Q_ambient;  ///< n x m, normal part of phi on raw tangents, ambient coordinates
  MatQ tQ;         ///< m x m, tangential part of phi(QX) in the raw basis
};

inline ExactTangentOperators exact_tangent_operators(const MatQ& jac, const GoldenStructure<QuadRat>& s) {
  if (jac.rows() != s.dim()) throw DimensionMismatch("Jacobian and structure dimensions differ");
  const MatQ& g = s.metric().gram();
  ExactTangentOperators r;
  r.jacobian = jac;
  r.gram = jac.transpose() * g * jac;
  const auto gram_inv = inverse<QuadRat>(r.gram);
  if (!gram_inv) throw RankDeficient("exact Jacobian is rank deficient");
  const MatQ phi_j = s.phi() * jac;
  r.P = *gram_inv * (jac.transpose() * g * phi_j);
  r.Q_ambient = phi_j - jac * r.P;
  r.tQ = *gram_inv * (jac.transpose() * g * (s.phi() * r.Q_ambient));
  return r;
}

}  // namespace golden
