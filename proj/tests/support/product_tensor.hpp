#pragma once

#include "golden/spaceform.hpp"

namespace golden::oracle {

/// Curvature of M_p(c_p) x M_q(c_q) built from the eigenspace projectors of a
/// Euclidean golden structure: each factor contributes its own constant
/// curvature tensor. Independent of the closed-form coefficients.
class ProductTensor {
 public:
  ProductTensor(const MatD& phi, double c_p, double c_q) : phi_(phi), c_p_(c_p), c_q_(c_q) {
    const double psi = golden_ratio<double>();
    const MatD id = MatD::Identity(phi.rows(), phi.cols());
    pi_p_ = (phi - (1 - psi) * id) / std::sqrt(5.0);
    pi_q_ = (psi * id - phi) / std::sqrt(5.0);
  }

  VecD operator()(const VecD& x, const VecD& y, const VecD& z) const {
    return c_p_ * block(pi_p_, x, y, z) + c_q_ * block(pi_q_, x, y, z);
  }

  double ricci(const VecD& y, const VecD& z) const {
    double s = 0;
    for (Eigen::Index i = 0; i < phi_.rows(); ++i) {
      const VecD e = VecD::Unit(phi_.rows(), i);
      s += (*this)(e, y, z).dot(e);
    }
    return s;
  }

  double r_dot_s(const VecD& x, const VecD& y, const VecD& z, const VecD& w) const {
    return -ricci((*this)(x, y, z), w) - ricci(z, (*this)(x, y, w));
  }

  const MatD& phi() const { return phi_; }

 private:
  static VecD block(const MatD& pi, const VecD& x, const VecD& y, const VecD& z) {
    const VecD px = pi * x, py = pi * y, pz = pi * z;
    return py.dot(pz) * px - px.dot(pz) * py;
  }

  MatD phi_, pi_p_, pi_q_;
  double c_p_, c_q_;
};

}  // namespace golden::oracle
