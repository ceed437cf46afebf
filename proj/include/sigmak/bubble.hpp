// SPDX-License-Identifier: Apache-2.0
#pragma once

// Standard bubbles u = a (1 + s^2 |x - x0|^2)^{-(n-2)/2}. Every bubble has
// constant Schouten eigenvalues kappa(n) * s^2 * a^{-4/(n-2)} * e, so for any
// curvature spec there is a closed-form amplitude making it an exact solution
// of f(lambda(A^u)) = 1.

#include <Eigen/Core>

#include "sigmak/curvature.hpp"
#include "sigmak/field.hpp"

namespace sigmak {

// The constant kappa(n): Schouten eigenvalue of the unit bubble (a = s = 1)
// at its center, computed from the operator (comes out to 2 for every n).
double bubble_kappa(int n);

// Amplitude a with f(lambda(A^u)) = 1 for the bubble of scale s at center.
BubbleParams bubble_exact(const CurvatureSpec& spec, double s,
                          const Eigen::VectorXd& center);

// Far-field coefficient c with u(r) ~ c r^{2-n}: c = a * s^{2-n}.
double bubble_tail_coefficient(int n, const BubbleParams& p);

}  // namespace sigmak
