// SPDX-License-Identifier: Apache-2.0
#pragma once

// Curvature functions f on eigenvalue vectors: the normalized power
// f = sigma_k^{1/k} on Gamma_k, and the interpolation family
// f_t(lam) = f(t*lam + (1-t)*sigma_1(lam)*e) on the pulled-back cone.
// Both are symmetric, concave and homogeneous of degree one.

#include <Eigen/Core>
#include <cstdint>

#include "sigmak/sampling.hpp"

#include "json.hpp"

namespace sigmak {

struct CurvatureSpec {
  enum class Kind { SigmaK, Homotopy };

  int n = 0;        // ambient dimension, >= 3
  Kind kind = Kind::SigmaK;
  int k = 1;        // 1 <= k <= n
  double t = 1.0;   // homotopy parameter, only meaningful for Kind::Homotopy

  static CurvatureSpec sigma(int n, int k);
  static CurvatureSpec homotopy(int n, int k, double t);

  bool is_sigma() const { return kind == Kind::SigmaK; }

  nlohmann::json to_json() const;
  static CurvatureSpec from_json(const nlohmann::json& j);
};

// Membership in the spec's cone (Gamma_k, or its homotopy pullback).
bool spec_membership(const CurvatureSpec& spec, const Eigen::VectorXd& lam);

// f(lam); throws ErrorCode::ConeViolation outside the cone.
double f_eval(const CurvatureSpec& spec, const Eigen::VectorXd& lam);

// Gradient of f at lam (inside the cone). Componentwise positive there.
Eigen::VectorXd f_gradient(const CurvatureSpec& spec,
                           const Eigen::VectorXd& lam);

// Family access on an explicit base (base must be Kind::SigmaK).
double homotopy_eval(const CurvatureSpec& base, double t,
                     const Eigen::VectorXd& lam);
bool homotopy_membership(const CurvatureSpec& base, double t,
                         const Eigen::VectorXd& lam);

// b with f(b*e) = 1, i.e. b = 1/f(e); verified to |f(be)-1| <= 1e-12.
double normalize_b(const CurvatureSpec& spec);

// Largest delta with f < 1 on {lam in Gamma : |lam| < delta}, computed as
// 1 / max{f on the unit sphere intersected with the closed cone} by seeded
// dense sampling plus local refinement.
double compute_delta1(const CurvatureSpec& spec, double tol = 1e-8,
                      std::uint64_t seed = 0x5f3759df, int samples = 100000,
                      int refine_iters = 50);

// Finite-difference concavity probe: true iff every eigenvalue of the FD
// Hessian of f at lam is <= tol. Step h = max(1e-4, 1e-4*|lam|).
// Throws ConeViolation if the FD stencil leaves the cone.
bool concavity_probe(const CurvatureSpec& spec, const Eigen::VectorXd& lam,
                     double tol = 1e-6);

// Draw a point of the cone with all stencil margin; used by property tests
// and the verification suites.
Eigen::VectorXd sample_in_cone(const CurvatureSpec& spec, Rng& rng,
                               double scale = 1.0);

}  // namespace sigmak
