// SPDX-License-Identifier: Apache-2.0
#pragma once

// Damped-Newton collocation solver for radial solutions of
// f(lambda(A^u)) = 1 on a graded grid r_i = R_max (i/M)^2, with homotopy
// continuation from the semilinear member (t = 0) of the interpolation
// family to the target function (t = 1).
//
// Rows: node 0 enforces u'(0) = 0; nodes 1..M-2 collocate the equation via
// the radial reduction; the far field is matched at the last two nodes:
// node M-1 requires y = r^{n-2} u to be affine in r^{-2} across the last
// three nodes (exact for the two-term tail c r^{2-n} (1 + b r^{-2})) and
// node M fixes the amplitude y_M = c. Cone membership at those two closure
// nodes is audited on the same two-term tail model; everywhere else it uses
// the collocated difference stencils. Difference stencils act on the nodal
// u values directly; far rows scale second differences by u^{-(n+2)/(n-2)},
// so routing them through log u would add an avoidable |log u| round-off
// factor. Newton still steps in log u (positivity is then automatic) and
// the Jacobian is taken with respect to log u. The band stays at 4 sub-
// and superdiagonals.

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "sigmak/curvature.hpp"

#include "json.hpp"

namespace sigmak {

struct SolverConfig {
  double newton_tol = 1e-10;   // sup-norm of the residual vector
  int max_newton = 40;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  double dt_init = 0.1;        // continuation step
  double dt_min = 1e-4;
  int grid_m = 800;            // number of intervals; M+1 nodes
  double r_max = 40.0;
  std::optional<double> far_field_coeff;  // c in u ~ c r^{2-n}; default: from init
  double tail_tol = 1e-4;      // certificate threshold on the last-pair power-law mismatch

  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
};

struct RadialGrid {
  Eigen::VectorXd r;

  static RadialGrid graded(int m, double r_max);
  int nodes() const { return static_cast<int>(r.size()); }
};

// Banded matrix with kl sub- and ku superdiagonals.
class BandMatrix {
 public:
  BandMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  double& at(int i, int j);          // |i-j| within the band
  double coeff(int i, int j) const;  // 0 outside the band

  Eigen::MatrixXd to_dense() const;
  // Row-equilibrated sparse LU solve; reports SingularJacobian when the
  // factorization's diagonal ratio collapses below 1e-12.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  int n_, kl_, ku_;
  Eigen::MatrixXd store_;  // (kl+ku+1) x n
};

// Residual of the grid state u (values at the nodes, positive). Component
// i in 1..M-2 is f(lambda_rad, lambda_tan x (n-1)) - 1 at r_i; component 0
// is u'(0); component M-1 is the three-point tail collinearity defect;
// component M is log(u_M r_M^{n-2} / c). Throws ConeViolation with the
// offending node list if any node leaves the cone.
Eigen::VectorXd radial_residual(const CurvatureSpec& spec,
                                const RadialGrid& grid,
                                const Eigen::VectorXd& u,
                                double far_field_coeff);

// Analytic Jacobian of radial_residual with respect to log u.
BandMatrix radial_jacobian(const CurvatureSpec& spec, const RadialGrid& grid,
                           const Eigen::VectorXd& u, double far_field_coeff);

// Coefficient multiplying the second-derivative stencil in each interior row
// (ellipticity audit: negative inside the cone).
Eigen::VectorXd second_difference_coefficients(const CurvatureSpec& spec,
                                               const RadialGrid& grid,
                                               const Eigen::VectorXd& u);

struct RadialSolution {
  CurvatureSpec spec;         // function actually solved (may carry t)
  double t = 1.0;
  Eigen::VectorXd radii;
  Eigen::VectorXd values;
  double residual_norm = 0.0;  // sup over interior rows, recomputed post-hoc
  // Per-row backward-error bound max_i sum_j |J_ij| eps: how far the interior
  // residual can be resolved when every node carries one ulp of relative
  // rounding. Far rows amplify nodal rounding by u^{-4/(n-2)}/h^2, so on wide
  // domains this floor sits above any fixed tolerance; a residual at or below
  // it is indistinguishable from zero in working precision.
  double noise_floor = 0.0;
  std::vector<bool> cone_ok;   // per node
  double tail_mismatch = 0.0;  // last-pair power-law certificate
  bool tail_ok = false;
  // cone everywhere, tail_ok, and residual under max(newton_tol, a small
  // fixed multiple of noise_floor covering evaluation round-off)
  bool certified = false;
  int newton_iters = 0;
  double far_field_coeff = 0.0;

  nlohmann::json to_json() const;  // {"spec","radii","values","residual_norm","t"}
  static RadialSolution from_json(const nlohmann::json& j);
  std::string to_csv() const;      // r,u,lambda_rad,lambda_tan,f_residual
};

// Newton from the given initial state (values at graded nodes).
RadialSolution newton_solve(const CurvatureSpec& spec,
                            const Eigen::VectorXd& init,
                            const SolverConfig& config);

struct ContinuationStep {
  double t = 0.0;
  double residual_norm = 0.0;
  double monitored = 0.0;  // (sup u)(sup 1/u) over the grid
  int newton_iters = 0;
};

struct ContinuationPath {
  std::vector<ContinuationStep> steps;
  RadialSolution final_solution;
  double monitored_t0 = 0.0;
  double monitored_max = 0.0;

  nlohmann::json to_json() const;
};

// March t: 0 -> 1 for the family over the given SigmaK base, starting from
// the closed-form semilinear bubble, gauge fixed by config.far_field_coeff
// (default: the tail of the t = 1 exact bubble of scale 1).
ContinuationPath continuation_solve(const CurvatureSpec& base,
                                    const SolverConfig& config);

// Exact bubble sampled on the grid.
Eigen::VectorXd bubble_on_grid(int n, const RadialGrid& grid, double a,
                               double s);

}  // namespace sigmak
