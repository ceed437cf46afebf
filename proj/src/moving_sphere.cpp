// SPDX-License-Identifier: Apache-2.0
#include "sigmak/moving_sphere.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "sigmak/errors.hpp"
#include "sigmak/sampling.hpp"
#include "sigmak/schouten.hpp"

namespace sigmak {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

// Reflected value u_{x,lambda}(y) without building a field object.
double reflected_value(const ScalarField& u, const Eigen::VectorXd& x,
                       double lambda, const Eigen::VectorXd& y) {
  const Eigen::VectorXd w = y - x;
  const double rho = w.norm();
  if (rho <= 1e-8 * lambda)
    fail(ErrorCode::SingularCenter, "reflection at its own center");
  const Eigen::VectorXd z = x + (lambda * lambda / (rho * rho)) * w;
  return std::pow(lambda / rho, u.dim() - 2.0) * u.value(z);
}

}  // namespace

nlohmann::json MovingSphereReport::to_json() const {
  nlohmann::json j;
  j["center"] = vec_to_json(center);
  j["lambda_x"] = lambda_x;
  j["samples"] = samples;
  j["worst_margin"] = worst_margin;
  j["grid_tol"] = grid_tol;
  j["seed"] = seed;
  return j;
}

MovingSphereReport critical_lambda(const ScalarField& u,
                                   const Eigen::VectorXd& x,
                                   const CriticalLambdaOptions& opt) {
  const int n = u.dim();
  if (static_cast<int>(x.size()) != n)
    fail(ErrorCode::BadInput, "center has wrong dimension");
  if (opt.lambda_hi <= 0.0 || opt.search_radius <= opt.lambda_hi)
    fail(ErrorCode::BadInput, "need 0 < lambda_hi < search_radius");
  if (opt.directions < 1 || opt.radii < 2 || opt.lambda_grid < 1 ||
      opt.bisect_tol <= 0.0)
    fail(ErrorCode::BadInput, "bad sampling options");

  Rng rng(opt.seed);
  std::vector<Eigen::VectorXd> dirs(opt.directions);
  for (auto& d : dirs) d = rng.on_sphere(n);

  MovingSphereReport rep;
  rep.center = x;
  rep.grid_tol = opt.bisect_tol;
  rep.seed = opt.seed;
  rep.samples = 0;
  double worst = std::numeric_limits<double>::infinity();

  // one reflection radius against the whole shell family
  auto compare_at = [&](double mu, bool record) -> bool {
    const double r0 = 1.02 * mu;
    const double grow = std::pow(opt.search_radius / r0,
                                 1.0 / (opt.radii - 1));
    double r = r0;
    for (int i = 0; i < opt.radii; ++i, r *= grow) {
      for (const auto& d : dirs) {
        const Eigen::VectorXd y = x + r * d;
        const double uy = u.value(y);
        const double margin = uy - reflected_value(u, x, mu, y);
        ++rep.samples;
        if (record) worst = std::min(worst, margin);
        if (margin < -1e-12 * std::max(1.0, std::abs(uy))) return false;
      }
    }
    return true;
  };
  // lambda certifies only if every radius below it compares
  auto certified = [&](double lam) -> bool {
    for (int j = 1; j <= opt.lambda_grid; ++j)
      if (!compare_at(lam * j / opt.lambda_grid, false)) return false;
    return true;
  };

  const double lo = 1e-3 * opt.lambda_hi;
  if (!certified(lo))
    fail(ErrorCode::NotFound, "no reflection radius certifies");
  rep.lambda_x = bisect_last_true(certified, lo, opt.lambda_hi,
                                  opt.bisect_tol);
  for (int j = 1; j <= opt.lambda_grid; ++j)
    compare_at(rep.lambda_x * j / opt.lambda_grid, true);
  rep.worst_margin = worst;
  return rep;
}

nlohmann::json GradientBoundReport::to_json() const {
  nlohmann::json j;
  j["hypothesis_ok"] = hypothesis_ok;
  j["conclusion_ok"] = conclusion_ok;
  j["hypothesis_samples"] = hypothesis_samples;
  j["conclusion_samples"] = conclusion_samples;
  j["worst_hypothesis_margin"] = worst_hypothesis_margin;
  j["worst_conclusion_margin"] = worst_conclusion_margin;
  j["seed"] = seed;
  return j;
}

GradientBoundReport gradient_bound_check(const ScalarField& u, double a,
                                         const Eigen::VectorXd& center,
                                         const GradientBoundOptions& opt) {
  const int n = u.dim();
  if (a <= 0.0) fail(ErrorCode::BadInput, "radius must be positive");
  if (static_cast<int>(center.size()) != n)
    fail(ErrorCode::BadInput, "center has wrong dimension");

  GradientBoundReport rep;
  rep.seed = opt.seed;
  Rng rng(opt.seed);

  double worst_hyp = std::numeric_limits<double>::infinity();
  long done = 0;
  while (done < opt.hypothesis_triples) {
    const Eigen::VectorXd x = rng.in_ball(n, center, 4.0 * a);
    const Eigen::VectorXd y = rng.in_ball(n, center, 8.0 * a);
    const double gap = (y - x).norm();
    if (gap < 1e-6 * a) continue;  // reflection degenerate, resample
    const double lambda = rng.uniform(0.0, std::min(2.0 * a, gap));
    if (lambda <= 0.0) continue;
    const double margin = u.value(y) - reflected_value(u, x, lambda, y);
    worst_hyp = std::min(worst_hyp, margin);
    ++done;
  }
  rep.hypothesis_samples = done;
  rep.worst_hypothesis_margin = worst_hyp;
  rep.hypothesis_ok = worst_hyp >= -opt.slack;

  const double slope = 0.5 * (n - 2) / a;
  double worst_con = std::numeric_limits<double>::infinity();
  for (long i = 0; i < opt.conclusion_points; ++i) {
    const Eigen::VectorXd p = rng.in_ball(n, center, a);
    const FieldEval e = u.eval(p);
    worst_con = std::min(worst_con, slope * e.value - e.grad.norm());
  }
  rep.conclusion_samples = opt.conclusion_points;
  rep.worst_conclusion_margin = worst_con;
  rep.conclusion_ok = worst_con >= -opt.slack;
  return rep;
}

bool touching_comparison(const ScalarField& u, const ScalarField& xi,
                         const Eigen::VectorXd& p, double tol,
                         double* margin_out) {
  const int n = u.dim();
  if (xi.dim() != n) fail(ErrorCode::BadInput, "dimension mismatch");
  const FieldEval eu = u.eval(p);
  const FieldEval ex = xi.eval(p);

  const double scale = std::max(1.0, std::abs(eu.value));
  if (std::abs(eu.value - ex.value) > 1e-8 * scale)
    fail(ErrorCode::NotTouching, "values do not match at the point");
  if ((eu.grad - ex.grad).norm() > 1e-8 * std::max(1.0, eu.grad.norm()))
    fail(ErrorCode::NotTouching, "gradients do not match at the point");

  // u >= xi on a sampled neighborhood
  Rng rng(0x853c49e6u);
  const double h = 1e-2;
  for (int i = 0; i < 64; ++i) {
    const Eigen::VectorXd y = rng.in_ball(n, p, h);
    if (u.value(y) - xi.value(y) < -1e-10 * scale)
      fail(ErrorCode::NotTouching, "comparison field is not below nearby");
  }

  const Eigen::MatrixXd diff = schouten_from_derivatives(n, eu).m -
                               schouten_from_derivatives(n, ex).m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
  const double top = es.eigenvalues().maxCoeff();
  if (margin_out != nullptr) *margin_out = tol - top;
  return top <= tol;
}

nlohmann::json MaxPointReport::to_json() const {
  nlohmann::json j;
  j["holds"] = holds;
  j["max_value"] = max_value;
  j["lhs"] = lhs;
  j["max_point"] = vec_to_json(max_point);
  return j;
}

MaxPointReport max_point_inequality(const SphereField& u,
                                    const CurvatureSpec& spec, double tol,
                                    std::uint64_t seed) {
  const int n = u.dim();
  if (spec.n != n) fail(ErrorCode::BadInput, "spec dimension mismatch");

  auto objective = [&](const Eigen::VectorXd& z) -> double {
    try {
      return u.value_at(z);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(seed);
  Eigen::VectorXd best = rng.on_sphere(n + 1);
  double best_v = objective(best);
  for (int i = 0; i < 20000; ++i) {
    const Eigen::VectorXd z = rng.on_sphere(n + 1);
    const double v = objective(z);
    if (v > best_v) {
      best_v = v;
      best = z;
    }
  }
  best = refine_on_sphere(objective, best, 60, rng);
  best_v = objective(best);

  MaxPointReport rep;
  rep.max_point = best;
  rep.max_value = best_v;
  const Eigen::VectorXd lam =
      std::pow(best_v, -4.0 / (n - 2)) * round_sphere_schouten(n);
  rep.lhs = f_eval(spec, lam);
  rep.holds = rep.lhs <= 1.0 + tol;
  return rep;
}

}  // namespace sigmak
