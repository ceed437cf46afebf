// SPDX-License-Identifier: Apache-2.0
#pragma once

// Moving-sphere and comparison tooling: critical reflection radius, the
// gradient bound implied by sphere-comparison hypotheses, tangency
// comparison of Schouten matrices, and the max-point inequality on the
// sphere.

#include <Eigen/Core>
#include <cstdint>

#include "sigmak/curvature.hpp"
#include "sigmak/field.hpp"
#include "sigmak/stereographic.hpp"

#include "json.hpp"

namespace sigmak {

struct MovingSphereReport {
  Eigen::VectorXd center;
  double lambda_x = 0.0;    // largest certified radius
  long samples = 0;         // comparisons performed
  double worst_margin = 0.0;  // min of u(y) - u_{x,lambda}(y) over certified samples
  double grid_tol = 0.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct CriticalLambdaOptions {
  double lambda_hi = 4.0;      // search bracket upper end
  double search_radius = 60.0; // comparison domain B(x, search_radius)
  int directions = 64;         // sample directions per radius shell
  int radii = 48;              // radius shells per comparison
  int lambda_grid = 24;        // sub-grid of lambdas below the candidate
  double bisect_tol = 1e-4;
  std::uint64_t seed = 0x2545f491;
};

// Largest lambda_x with u_{x,lambda} <= u outside B_lambda(x) for all
// lambda <= lambda_x, certified on finite samples (falsifier / estimator).
// NotFound if even the smallest probe radius fails.
MovingSphereReport critical_lambda(const ScalarField& u,
                                   const Eigen::VectorXd& x,
                                   const CriticalLambdaOptions& opt = {});

struct GradientBoundReport {
  bool hypothesis_ok = false;
  bool conclusion_ok = false;
  long hypothesis_samples = 0;
  long conclusion_samples = 0;
  double worst_hypothesis_margin = 0.0;  // min u(y) - u_{x,lambda}(y)
  double worst_conclusion_margin = 0.0;  // min (n-2)/(2a) u(x) - |grad u(x)|
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct GradientBoundOptions {
  long hypothesis_triples = 20000;
  long conclusion_points = 4000;
  double slack = 1e-10;
  std::uint64_t seed = 0x6c078965;
};

// Two-part check of the sphere-comparison gradient bound on B_{8a}(center):
// (1) sample the comparison hypothesis u_{x,lambda} <= u over admissible
// (x, lambda, y); (2) check |grad u| <= (n-2)/(2a) u on B_a(center).
// Domain error if u's domain does not cover B_{8a}(center).
GradientBoundReport gradient_bound_check(const ScalarField& u, double a,
                                         const Eigen::VectorXd& center,
                                         const GradientBoundOptions& opt = {});

// At a first-order touching point (equal value and gradient, u >= xi nearby)
// the Schouten matrices compare: A^u(p) <= A^xi(p). Verifies the
// preconditions on a sampled neighborhood (NotTouching otherwise) and
// returns true iff max eigenvalue of A^u - A^xi <= tol. margin_out receives
// tol - that eigenvalue.
bool touching_comparison(const ScalarField& u, const ScalarField& xi,
                         const Eigen::VectorXd& p, double tol = 1e-8,
                         double* margin_out = nullptr);

struct MaxPointReport {
  bool holds = false;
  double max_value = 0.0;
  double lhs = 0.0;  // f(u_max^{-4/(n-2)} lambda_round)
  Eigen::VectorXd max_point;  // on S^n, in R^{n+1}

  nlohmann::json to_json() const;
};

// Locate the max of the sphere field and check
// f(u(xbar)^{-4/(n-2)} lambda(A_round)) <= 1 + tol.
MaxPointReport max_point_inequality(const SphereField& u,
                                    const CurvatureSpec& spec,
                                    double tol = 1e-10,
                                    std::uint64_t seed = 0xb5297a4d);

}  // namespace sigmak
