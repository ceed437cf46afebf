// SPDX-License-Identifier: Apache-2.0
#include "sigmak/bubble.hpp"

#include <cmath>

#include "sigmak/errors.hpp"
#include "sigmak/schouten.hpp"

namespace sigmak {

double bubble_kappa(int n) {
  if (n < 3) fail(ErrorCode::BadInput, "dimension must be >= 3");
  BubbleParams p;
  p.amplitude = 1.0;
  p.scale = 1.0;
  p.center = Eigen::VectorXd::Zero(n);
  const FieldPtr u = bubble_field(n, p);
  const Eigen::VectorXd lam =
      schouten_flat(*u, Eigen::VectorXd::Zero(n)).eigenvalues();
  // isotropy at the center: all eigenvalues coincide
  if ((lam.maxCoeff() - lam.minCoeff()) > 1e-12 * std::abs(lam.maxCoeff()))
    fail(ErrorCode::BadInput, "bubble center spectrum is not isotropic");
  return lam[0];
}

BubbleParams bubble_exact(const CurvatureSpec& spec, double s,
                          const Eigen::VectorXd& center) {
  if (s <= 0.0) fail(ErrorCode::BadInput, "bubble scale must be positive");
  const int n = spec.n;
  if (center.size() != 0 && static_cast<int>(center.size()) != n)
    fail(ErrorCode::BadInput, "bubble center has wrong dimension");
  // lambda(A^u) = kappa s^2 a^{-4/(n-2)} e, so f(lambda) = 1 pins a
  const double kappa = bubble_kappa(n);
  const double fe = f_eval(spec, Eigen::VectorXd::Ones(n));
  BubbleParams p;
  p.amplitude = std::pow(kappa * s * s * fe, 0.25 * (n - 2));
  p.scale = s;
  p.center = center.size() == 0 ? Eigen::VectorXd::Zero(n) : center;
  return p;
}

double bubble_tail_coefficient(int n, const BubbleParams& p) {
  if (n < 3) fail(ErrorCode::BadInput, "dimension must be >= 3");
  return p.amplitude * std::pow(p.scale, 2.0 - n);
}

}  // namespace sigmak
