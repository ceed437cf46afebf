// SPDX-License-Identifier: Apache-2.0
#include "sigmak/schouten.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sigmak/errors.hpp"
#include "sigmak/stereographic.hpp"

namespace sigmak {

Eigen::VectorXd SchoutenMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues();
}

SchoutenMatrix schouten_from_derivatives(int n, const FieldEval& d) {
  if (d.value <= 0.0)
    fail(ErrorCode::NonpositiveValue, "conformal factor must be positive");
  const double nm2 = n - 2;
  const double c1 = 2.0 / nm2;
  const double c2 = 2.0 / (nm2 * nm2);
  const double w1 = std::pow(d.value, -(n + 2.0) / nm2);
  const double w2 = std::pow(d.value, -2.0 * n / nm2);
  SchoutenMatrix a;
  a.m = -c1 * w1 * d.hess + (n * c2 * w2) * (d.grad * d.grad.transpose()) -
        (c2 * w2 * d.grad.squaredNorm()) *
            Eigen::MatrixXd::Identity(n, n);
  return a;
}

SchoutenMatrix schouten_flat(const ScalarField& u, const Eigen::VectorXd& p) {
  return schouten_from_derivatives(u.dim(), u.eval(p));
}

SchoutenMatrix schouten_conformal_change(const ScalarField& u, Background bg,
                                         const Eigen::VectorXd& p_stereo) {
  if (bg == Background::Flat) return schouten_flat(u, p_stereo);
  // round background: fold the chart factor into the conformal factor
  const int n = u.dim();
  const FieldEval a = u.eval(p_stereo);
  const FieldEval b = stereographic_factor(n)->eval(p_stereo);
  FieldEval prod;
  prod.value = a.value * b.value;
  prod.grad = a.grad * b.value + b.grad * a.value;
  prod.hess = a.hess * b.value + b.hess * a.value +
              a.grad * b.grad.transpose() + b.grad * a.grad.transpose();
  return schouten_from_derivatives(n, prod);
}

Eigen::VectorXd round_sphere_schouten(int n) {
  // the chart factor of the round metric, evaluated anywhere
  const FieldPtr v0 = stereographic_factor(n);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p[0] = 0.37;  // generic point; the spectrum is constant
  return schouten_flat(*v0, p).eigenvalues();
}

void radial_schouten(int n, double r, double u, double du, double d2u,
                     double& lambda_rad, double& lambda_tan) {
  if (u <= 0.0)
    fail(ErrorCode::NonpositiveValue, "conformal factor must be positive");
  if (r < 0.0) fail(ErrorCode::BadInput, "radius must be nonnegative");
  const double nm2 = n - 2;
  const double c1 = 2.0 / nm2;
  const double c2 = 2.0 / (nm2 * nm2);
  const double w1 = std::pow(u, -(n + 2.0) / nm2);
  const double w2 = std::pow(u, -2.0 * n / nm2);
  const double du_over_r = (r == 0.0) ? d2u : du / r;
  lambda_rad = -c1 * w1 * d2u + (n - 1.0) * c2 * w2 * du * du;
  lambda_tan = -c1 * w1 * du_over_r - c2 * w2 * du * du;
}

}  // namespace sigmak
