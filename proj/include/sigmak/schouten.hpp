// SPDX-License-Identifier: Apache-2.0
#pragma once

// The conformal Schouten operator of u^{4/(n-2)} |dx|^2 measured in the
// conformal frame:
//   A^u = -2/(n-2) u^{-(n+2)/(n-2)} D^2 u
//         + 2n/(n-2)^2 u^{-2n/(n-2)} du (x) du
//         - 2/(n-2)^2 u^{-2n/(n-2)} |du|^2 I.

#include <Eigen/Core>

#include "sigmak/field.hpp"

namespace sigmak {

struct SchoutenMatrix {
  Eigen::MatrixXd m;

  // Ascending eigenvalues of the symmetric matrix.
  Eigen::VectorXd eigenvalues() const;
};

// Assemble A^u from derivatives (value must be positive).
SchoutenMatrix schouten_from_derivatives(int n, const FieldEval& d);

// A^u(p) for the flat background. NonpositiveValue / Domain errors.
SchoutenMatrix schouten_flat(const ScalarField& u, const Eigen::VectorXd& p);

enum class Background { Flat, RoundSphere };

// Flat: schouten_flat. RoundSphere: u is the conformal factor against the
// round metric, given in stereographic coordinates; computed as the flat
// Schouten of the product with the chart factor.
SchoutenMatrix schouten_conformal_change(const ScalarField& u, Background bg,
                                         const Eigen::VectorXd& p_stereo);

// Eigenvalues of the round sphere's Schouten tensor in an orthonormal frame,
// computed from the conformal-change law applied to the stereographic factor
// (not assumed).
Eigen::VectorXd round_sphere_schouten(int n);

// Radial reduction: eigenvalues (lambda_rad, lambda_tan) of A^u for a radial
// field with u, u', u'' at radius r; lambda_tan has multiplicity n-1.
// r = 0 takes the symmetric limit u'/r -> u''.
void radial_schouten(int n, double r, double u, double du, double d2u,
                     double& lambda_rad, double& lambda_tan);

}  // namespace sigmak
