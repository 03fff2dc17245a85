#pragma once

#include <vector>

#include "golden/errors.hpp"
#include "golden/submanifold.hpp"

namespace golden {

/// Gauss split of the coordinate second derivatives at one point.
struct SecondFundamentalForm {
  TangentFrame frame;
  std::vector<VecD> h;              ///< m*m entries, normal-frame coordinates of the normal part of d2x/du_i du_j
  std::vector<VecD> christoffel_t;  ///< m*m entries, tangential part in the raw tangent basis
  std::vector<VecD> tangential_onb; ///< m*m entries, tangential part in the orthonormal tangent frame

  Eigen::Index m() const { return frame.tangent_dim(); }
  Eigen::Index codim() const { return frame.normal_onb.cols(); }
  const VecD& h_raw(Eigen::Index i, Eigen::Index j) const { return h[static_cast<std::size_t>(i * m() + j)]; }
  const VecD& gamma(Eigen::Index i, Eigen::Index j) const {
    return christoffel_t[static_cast<std::size_t>(i * m() + j)];
  }

  /// h on the orthonormal tangent frame: h(E_a, E_b) with E_a = sum_i X_i (R^-1)_ia.
  VecD h_onb(Eigen::Index a, Eigen::Index b) const {
    const MatD rinv = inverse_coords();
    VecD out = VecD::Zero(codim());
    for (Eigen::Index i = 0; i < m(); ++i)
      for (Eigen::Index j = 0; j < m(); ++j) out += rinv(i, a) * rinv(j, b) * h_raw(i, j);
    return out;
  }

  MatD inverse_coords() const {
    return frame.tangent_coords.triangularView<Eigen::Upper>().solve(MatD::Identity(m(), m()));
  }
};

inline SecondFundamentalForm second_fundamental_form(const ImmersionSpec& imm, const VecD& point,
                                                     const Metric<double>& metric) {
  const ImmersionJet jet = imm.jet(point);
  if (imm.ambient_dim() != metric.dim()) throw DimensionMismatch("immersion and metric dimensions differ");
  SecondFundamentalForm sff{frame_from_jacobian(point, jet.jacobian, metric), {}, {}, {}};
  const MatD& g = metric.gram();
  const MatD& T = sff.frame.tangent_onb;
  const MatD& N = sff.frame.normal_onb;
  const auto r = sff.frame.tangent_coords.triangularView<Eigen::Upper>();
  const Eigen::Index m = jet.param_dim();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const VecD& d = jet.d2(i, j);
      VecD tan = T.transpose() * g * d;
      sff.christoffel_t.push_back(r.solve(tan));
      sff.tangential_onb.push_back(std::move(tan));
      sff.h.push_back(N.transpose() * g * d);
    }
  return sff;
}

/// A_V on the orthonormal tangent frame, from g(A_V X, Y) = g(h(X, Y), V).
class ShapeOperator {
 public:
  explicit ShapeOperator(const SecondFundamentalForm& sff) : m_(sff.m()) {
    for (Eigen::Index a = 0; a < m_; ++a)
      for (Eigen::Index b = 0; b < m_; ++b) h_onb_.push_back(sff.h_onb(a, b));
  }

  /// V in normal-frame coordinates.
  MatD operator()(const VecD& v) const {
    MatD a(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index j = 0; j < m_; ++j) a(i, j) = h_onb_[static_cast<std::size_t>(i * m_ + j)].dot(v);
    return a;
  }

  const VecD& h(Eigen::Index a, Eigen::Index b) const { return h_onb_[static_cast<std::size_t>(a * m_ + b)]; }

 private:
  Eigen::Index m_;
  std::vector<VecD> h_onb_;
};

struct GaussSplitReport {
  double tangential = 0;  ///< max |tan(phi D2x_ij) - P tan(D2x_ij) - t h_ij|
  double normal = 0;      ///< max |nor(phi D2x_ij) - Q tan(D2x_ij) - s h_ij|
  /// The split is definitional: it holds for any linear phi, golden or not.
  bool structure_independent = true;
  bool pass(double tol) const { return tangential <= tol && normal <= tol; }
};

/// Component form of the Gauss-formula split with a parallel (constant) phi.
/// Tangential parts are taken in the orthonormal frame, where P acts.
inline GaussSplitReport gauss_split_residual(const ImmersionSpec& imm, const VecD& point,
                                             const GoldenStructure<double>& s) {
  const ImmersionJet jet = imm.jet(point);
  const auto sff = second_fundamental_form(imm, point, s.metric());
  const auto ops = induced_operators(sff.frame, s);
  const MatD& g = s.metric().gram();
  const MatD& T = sff.frame.tangent_onb;
  const MatD& N = sff.frame.normal_onb;
  GaussSplitReport rep;
  const Eigen::Index m = sff.m();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const VecD phid = s.phi() * jet.d2(i, j);
      const std::size_t k = static_cast<std::size_t>(i * m + j);
      const VecD tan = T.transpose() * g * phid - ops.P * sff.tangential_onb[k] - ops.t * sff.h[k];
      const VecD nor = N.transpose() * g * phid - ops.Q * sff.tangential_onb[k] - ops.s * sff.h[k];
      rep.tangential = std::max(rep.tangential, tan.size() ? tan.cwiseAbs().maxCoeff() : 0.0);
      rep.normal = std::max(rep.normal, nor.size() ? nor.cwiseAbs().maxCoeff() : 0.0);
    }
  return rep;
}

struct InvariantConnectionReport {
  double parallel_p = 0;    ///< max |tan(phi D2x_ij) - P tan(D2x_ij)|, zero when P is parallel
  double h_commutes = 0;    ///< max |h(E_a, P E_b) - s h(E_a, E_b)|
  bool pass(double tol) const { return parallel_p <= tol && h_commutes <= tol; }
};

/// For an invariant submanifold: P is parallel and h(X, PY) = s h(X, Y).
inline InvariantConnectionReport invariant_connection_check(const ImmersionSpec& imm, const VecD& point,
                                                            const GoldenStructure<double>& s,
                                                            double tol_class = Tolerances{}.classification) {
  const ImmersionJet jet = imm.jet(point);
  const auto sff = second_fundamental_form(imm, point, s.metric());
  const auto ops = induced_operators(sff.frame, s);
  if (invariance_test(ops, tol_class).kind != SubmanifoldKind::Invariant)
    throw NotInvariant("submanifold is not invariant at this point");
  const MatD& g = s.metric().gram();
  const MatD& T = sff.frame.tangent_onb;
  const Eigen::Index m = sff.m();
  InvariantConnectionReport rep;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t k = static_cast<std::size_t>(i * m + j);
      const VecD d = T.transpose() * g * (s.phi() * jet.d2(i, j)) - ops.P * sff.tangential_onb[k];
      rep.parallel_p = std::max(rep.parallel_p, d.cwiseAbs().maxCoeff());
    }
  const ShapeOperator shape(sff);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      VecD hp = VecD::Zero(sff.codim());
      for (Eigen::Index c = 0; c < m; ++c) hp += ops.P(c, b) * shape.h(a, c);
      const VecD d = hp - ops.s * shape.h(a, b);
      if (d.size()) rep.h_commutes = std::max(rep.h_commutes, d.cwiseAbs().maxCoeff());
    }
  return rep;
}

struct AntiInvariantShapeReport {
  double max_norm = 0;  ///< max over frame vectors Y of max |A_{phi Y}|
  /// A_{phi Y} X reduces to -t h(X, Y); this is its size, an independent cross-check.
  double th_norm = 0;
  bool vanishes(double tol) const { return max_norm <= tol; }
};

/// Size of A_{phi Y} for an anti-invariant submanifold, where phi Y is normal.
inline AntiInvariantShapeReport anti_invariant_shape_vanishing(const ImmersionSpec& imm, const VecD& point,
                                                               const GoldenStructure<double>& s,
                                                               double tol_class = Tolerances{}.classification) {
  const auto sff = second_fundamental_form(imm, point, s.metric());
  const auto ops = induced_operators(sff.frame, s);
  if (invariance_test(ops, tol_class).kind != SubmanifoldKind::AntiInvariant)
    throw NotAntiInvariant("submanifold is not anti-invariant at this point");
  const ShapeOperator shape(sff);
  const Eigen::Index m = sff.m();
  AntiInvariantShapeReport rep;
  for (Eigen::Index b = 0; b < m; ++b) {
    const MatD a = shape(ops.Q.col(b));
    rep.max_norm = std::max(rep.max_norm, a.cwiseAbs().maxCoeff());
    for (Eigen::Index c = 0; c < m; ++c)
      rep.th_norm = std::max(rep.th_norm, (ops.t * shape.h(c, b)).cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace golden
