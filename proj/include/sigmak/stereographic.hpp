// SPDX-License-Identifier: Apache-2.0
#pragma once

// Stereographic correspondence between conformal factors on the round sphere
// and positive fields on R^n:
//   pull:  v(y) = u_sphere(P^{-1}(y)) * (2/(1+|y|^2))^{(n-2)/2}
//   push:  the inverse.
// A sphere field is stored through its pulled flat field; values near the
// north pole are read through the antipodal chart (a Kelvin transform).

#include <Eigen/Core>

#include "sigmak/field.hpp"

namespace sigmak {

// (2/(1+|y|^2))^{(n-2)/2}
FieldPtr stereographic_factor(int n);

// Projection from the north pole: S^n \ {N} -> R^n, and its inverse.
Eigen::VectorXd stereo_project(const Eigen::VectorXd& z);    // z in R^{n+1}, |z| = 1
Eigen::VectorXd stereo_unproject(const Eigen::VectorXd& y);  // y in R^n

class SphereField {
 public:
  // u_sphere given by its chart function h = u_sphere o P^{-1}.
  static SphereField from_chart(int n, FieldPtr chart_fn);
  // u_sphere with pull equal to v_flat (the push operation).
  static SphereField push(int n, FieldPtr v_flat);
  static SphereField constant(int n, double a);

  int dim() const { return n_; }

  // Pulled flat field (u_sphere o P^{-1}) * stereographic_factor.
  FieldPtr pull() const;

  // Chart function in the main chart and in the antipodal chart.
  FieldPtr chart() const { return chart_; }
  FieldPtr antipodal_chart() const;

  // Value at a point of S^n (|z| = 1, z in R^{n+1}), read through whichever
  // chart is numerically stable.
  double value_at(const Eigen::VectorXd& z) const;

 private:
  SphereField(int n, FieldPtr chart_fn) : n_(n), chart_(std::move(chart_fn)) {}

  int n_;
  FieldPtr chart_;
};

}  // namespace sigmak
