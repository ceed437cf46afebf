// SPDX-License-Identifier: Apache-2.0
#include "sigmak/stereographic.hpp"

#include <cmath>

#include "sigmak/errors.hpp"

namespace sigmak {

FieldPtr stereographic_factor(int n) {
  if (n < 3) fail(ErrorCode::BadInput, "dimension must be >= 3");
  BubbleParams p;
  p.amplitude = std::pow(2.0, 0.5 * (n - 2));
  p.scale = 1.0;
  p.center = Eigen::VectorXd::Zero(n);
  return bubble_field(n, p);
}

Eigen::VectorXd stereo_project(const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size()) - 1;
  if (n < 1) fail(ErrorCode::BadInput, "sphere point has wrong dimension");
  if (std::abs(z.norm() - 1.0) > 1e-8)
    fail(ErrorCode::BadInput, "sphere point must have unit norm");
  const double denom = 1.0 - z[n];
  if (std::abs(denom) < 1e-12)
    fail(ErrorCode::SingularCenter, "projection undefined at the pole");
  return z.head(n) / denom;
}

Eigen::VectorXd stereo_unproject(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  const double t = y.squaredNorm();
  Eigen::VectorXd z(n + 1);
  z.head(n) = 2.0 * y / (t + 1.0);
  z[n] = (t - 1.0) / (t + 1.0);
  return z;
}

SphereField SphereField::from_chart(int n, FieldPtr chart_fn) {
  if (n < 3) fail(ErrorCode::BadInput, "dimension must be >= 3");
  if (!chart_fn || chart_fn->dim() != n)
    fail(ErrorCode::BadInput, "chart function has wrong dimension");
  return SphereField(n, std::move(chart_fn));
}

SphereField SphereField::push(int n, FieldPtr v_flat) {
  if (!v_flat || v_flat->dim() != n)
    fail(ErrorCode::BadInput, "flat field has wrong dimension");
  FieldPtr h = product_field(v_flat, power_field(stereographic_factor(n), -1.0));
  return SphereField(n, std::move(h));
}

SphereField SphereField::constant(int n, double a) {
  if (a <= 0.0) fail(ErrorCode::BadInput, "constant must be positive");
  return from_chart(n, constant_field(n, a));
}

FieldPtr SphereField::pull() const {
  return product_field(chart_, stereographic_factor(n_));
}

FieldPtr SphereField::antipodal_chart() const {
  // the chart transition is the unit inversion; composing with power 0
  // re-expresses the same sphere function in the opposite chart
  MoebiusParams m;
  m.center = Eigen::VectorXd::Zero(n_);
  m.radius = 1.0;
  return moebius_compose(chart_, m, 0.0);
}

double SphereField::value_at(const Eigen::VectorXd& z) const {
  if (static_cast<int>(z.size()) != n_ + 1)
    fail(ErrorCode::BadInput, "sphere point has wrong dimension");
  if (std::abs(z.norm() - 1.0) > 1e-8)
    fail(ErrorCode::BadInput, "sphere point must have unit norm");
  if (z[n_] <= 0.5) return chart_->value(z.head(n_) / (1.0 - z[n_]));
  // near the north pole switch to the antipodal chart
  return antipodal_chart()->value(z.head(n_) / (1.0 + z[n_]));
}

}  // namespace sigmak
