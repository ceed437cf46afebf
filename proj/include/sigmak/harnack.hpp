// SPDX-License-Identifier: Apache-2.0
#pragma once

// Quantitative Harnack-type product bound
//   (sup_{B_R} u)(inf_{B_2R} u) <= C(n) delta^{(2-n)/2} R^{2-n}
// for positive solutions of F(A^u) = 1 on B_3R, with C(n) reconstructed from
// the two branches of the proof, and the audit machinery around it.

#include <Eigen/Core>
#include <cstdint>

#include "sigmak/curvature.hpp"
#include "sigmak/field.hpp"

#include "json.hpp"

namespace sigmak {

struct HarnackBranches {
  double main_branch = 0.0;       // 8^{n-2} r^{n-2}, r = 2^{n+6} n^4
  double low_gamma_branch = 0.0;  // (2 * 2^{n+8} n^4)^{(n-2)/2}
  double value() const;           // max of the two
};

HarnackBranches harnack_constant_branches(int n);
double harnack_constant(int n);  // = branches().value()

struct HarnackReport {
  int n = 0;
  double R = 0.0;
  double delta = 0.0;
  double sup_value = 0.0;
  double inf_value = 0.0;
  double product = 0.0;
  double bound = 0.0;
  bool pass = false;
  Eigen::VectorXd sup_point, inf_point;
  double solution_residual = 0.0;  // max |f(lambda)-1| over probe points
  bool solution_certified = false;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// sup over closed B_R(0) and inf over closed B_2R(0) by seeded sampling plus
// projected gradient refinement; u must be positive on B_3R. The certification
// probe evaluates f(lambda(A^u)) against the spec when one is supplied.
HarnackReport harnack_audit(const ScalarField& u, double R, double delta,
                            const CurvatureSpec* spec = nullptr,
                            std::uint64_t seed = 0x9e3779b9,
                            int samples = 100000);

// The proof's reduction to R = delta = 1:
// u -> delta^{(n-2)/4} R^{(n-2)/2} u(R x). Exposed for the invariance test
// product(R, delta) = delta^{(2-n)/2} R^{2-n} product(1, 1).
FieldPtr harnack_scaling_map(const FieldPtr& u, double R, double delta, int n);

// delta = inf{ |lambda|_2 : f(lambda) = 1 } computed on the level set by
// per-direction root finding plus refinement (independent of compute_delta1's
// sphere-maximization route; equal to it by homogeneity).
double certify_delta_matrix(const CurvatureSpec& spec, double tol = 1e-8,
                            std::uint64_t seed = 0x517cc1b7, int samples = 20000,
                            int refine_iters = 60);

}  // namespace sigmak
