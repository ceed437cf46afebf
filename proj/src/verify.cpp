// SPDX-License-Identifier: Apache-2.0
#include "sigmak/verify.hpp"

#include <cmath>

#include "json.hpp"

#include "sigmak/bubble.hpp"
#include "sigmak/curvature.hpp"
#include "sigmak/errors.hpp"
#include "sigmak/field.hpp"
#include "sigmak/harnack.hpp"
#include "sigmak/moving_sphere.hpp"
#include "sigmak/sampling.hpp"
#include "sigmak/schouten.hpp"

namespace sigmak {

namespace {

FieldPtr two_bubble_sum(int n) {
  std::vector<BubbleParams> terms(2);
  terms[0].amplitude = 1.0;
  terms[0].scale = 1.0;
  terms[0].center = Eigen::VectorXd::Zero(n);
  terms[1].amplitude = 0.6;
  terms[1].scale = 0.8;
  terms[1].center = Eigen::VectorXd::Constant(n, 0.7);
  return bubble_sum_field(n, terms);
}

SuiteResult suite_invariance(std::uint64_t seed) {
  SuiteResult out;
  out.name = "invariance";

  // sorted Schouten spectrum is preserved under the sphere reflection
  bool covariant = true;
  for (int n : {3, 4}) {
    const FieldPtr u = two_bubble_sum(n);
    Rng rng(seed + n);
    for (int trial = 0; trial < 16; ++trial) {
      MoebiusParams m;
      m.center = rng.in_ball(n, Eigen::VectorXd::Zero(n), 2.0);
      m.radius = rng.uniform(0.5, 2.0);
      const FieldPtr refl = kelvin_transform(u, m);
      const Eigen::VectorXd y =
          m.center + rng.uniform(0.3, 3.0) * rng.on_sphere(n);
      const Eigen::VectorXd w = y - m.center;
      const Eigen::VectorXd z =
          m.center + (m.radius * m.radius / w.squaredNorm()) * w;
      const Eigen::VectorXd a = schouten_flat(*refl, y).eigenvalues();
      const Eigen::VectorXd b = schouten_flat(*u, z).eigenvalues();
      const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
      if ((a - b).cwiseAbs().maxCoeff() > 1e-9 * scale) covariant = false;
    }
  }
  out.checks.emplace_back("kelvin_spectrum_covariance", covariant);

  // reflecting twice in the same sphere is the identity
  bool involution = true;
  {
    const int n = 3;
    const FieldPtr u = two_bubble_sum(n);
    MoebiusParams m;
    m.center = Eigen::VectorXd::Constant(n, 0.2);
    m.radius = 1.3;
    const FieldPtr twice = kelvin_transform(kelvin_transform(u, m), m);
    Rng rng(seed + 11);
    for (int trial = 0; trial < 16; ++trial) {
      const Eigen::VectorXd p =
          m.center + rng.uniform(0.2, 4.0) * rng.on_sphere(n);
      const FieldEval a = twice->eval(p);
      const FieldEval b = u->eval(p);
      if (std::abs(a.value - b.value) > 1e-10 * std::max(1.0, b.value) ||
          (a.grad - b.grad).norm() > 1e-9 ||
          (a.hess - b.hess).norm() > 1e-8)
        involution = false;
    }
  }
  out.checks.emplace_back("kelvin_involution", involution);

  // the audit product transforms with the proof's scaling map
  bool scaling = true;
  {
    const int n = 3;
    BubbleParams bp;
    bp.amplitude = 1.3;
    bp.scale = 0.9;
    bp.center = Eigen::VectorXd::Constant(n, 0.1);
    const FieldPtr u = bubble_field(n, bp);
    const double R = 1.5, delta = 0.7;
    const HarnackReport big =
        harnack_audit(*u, R, delta, nullptr, seed + 21, 2000);
    const FieldPtr hat = harnack_scaling_map(u, R, delta, n);
    const HarnackReport unit =
        harnack_audit(*hat, 1.0, 1.0, nullptr, seed + 22, 2000);
    const double predicted =
        unit.product * std::pow(delta, 0.5 * (2 - n)) * std::pow(R, 2.0 - n);
    if (std::abs(big.product - predicted) > 1e-6 * predicted) scaling = false;
  }
  out.checks.emplace_back("harnack_product_scaling", scaling);

  out.pass = true;
  for (const auto& c : out.checks) out.pass = out.pass && c.second;
  return out;
}

SuiteResult suite_lemma2(std::uint64_t seed) {
  SuiteResult out;
  out.name = "lemma2";
  const int n = 3;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n);

  GradientBoundOptions opt;
  opt.seed = seed + 1;
  opt.hypothesis_triples = 8000;
  opt.conclusion_points = 2000;

  // a standard bubble on a ball within its comparison range
  const CurvatureSpec spec = CurvatureSpec::sigma(n, 1);
  const BubbleParams bp = bubble_exact(spec, 1.0, origin);
  const FieldPtr u = bubble_field(n, bp);
  const GradientBoundReport r1 = gradient_bound_check(*u, 0.4, origin, opt);
  out.checks.emplace_back("bubble_hypothesis", r1.hypothesis_ok);
  out.checks.emplace_back("bubble_conclusion", r1.conclusion_ok);

  // reflections act linearly, so sums of bubbles inherit the hypothesis
  const GradientBoundReport r2 =
      gradient_bound_check(*two_bubble_sum(n), 0.05, origin, opt);
  out.checks.emplace_back("bubble_sum_hypothesis", r2.hypothesis_ok);

  // a steep profile must be flagged by the conclusion check
  const FieldPtr steep = gaussian_field(n, 1.0, 40.0, origin);
  const GradientBoundReport r3 = gradient_bound_check(*steep, 0.4, origin, opt);
  out.checks.emplace_back("steep_profile_flagged", !r3.conclusion_ok);

  out.pass = true;
  for (const auto& c : out.checks) out.pass = out.pass && c.second;
  return out;
}

SuiteResult suite_touching(std::uint64_t seed) {
  SuiteResult out;
  out.name = "touching";
  (void)seed;
  const int n = 4;
  BubbleParams bp;
  bp.amplitude = 1.2;
  bp.scale = 1.0;
  bp.center = Eigen::VectorXd::Zero(n);
  const FieldPtr u = bubble_field(n, bp);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 0.3);

  // xi = u - beta |y - p|^2 touches from below at p
  const double beta = 0.05, eps = 1.0;
  const FieldPtr xi = sum_field(
      sum_field(u, quadratic_cap_field(beta, eps, p)),
      constant_field(n, -beta * eps * eps));

  bool compares = false;
  double margin = 0.0;
  compares = touching_comparison(*u, *xi, p, 1e-8, &margin);
  out.checks.emplace_back("paraboloid_below_compares", compares && margin >= 0.0);

  bool rejected = false;
  try {
    touching_comparison(*u, *scaled_field(u, 1.1), p);
  } catch (const Error& e) {
    rejected = e.code == ErrorCode::NotTouching;
  }
  out.checks.emplace_back("scaled_not_touching", rejected);

  bool reversed = false;
  try {
    touching_comparison(*xi, *u, p);  // xi is below u, not above
  } catch (const Error& e) {
    reversed = e.code == ErrorCode::NotTouching;
  }
  out.checks.emplace_back("reversed_not_touching", reversed);

  out.pass = true;
  for (const auto& c : out.checks) out.pass = out.pass && c.second;
  return out;
}

SuiteResult suite_duality(std::uint64_t seed) {
  SuiteResult out;
  out.name = "duality";

  const CurvatureSpec specs[] = {CurvatureSpec::sigma(3, 1),
                                 CurvatureSpec::sigma(4, 2),
                                 CurvatureSpec::sigma(5, 3)};
  const char* names[] = {"ratio_n3_k1", "ratio_n4_k2", "ratio_n5_k3"};
  bool sqrt_ok = true;
  for (int i = 0; i < 3; ++i) {
    const CurvatureSpec& s = specs[i];
    const double d1 = compute_delta1(s, 1e-8, seed + 31 + i);
    const double dm = certify_delta_matrix(s, 1e-8, seed + 41 + i);
    out.checks.emplace_back(names[i], std::abs(dm / d1 - 1.0) <= 1e-8);
    // the sphere max sits on the diagonal: delta_1 = sqrt(n) / f(e)
    const double predicted = std::sqrt(s.n) * normalize_b(s);
    if (std::abs(d1 - predicted) > 1e-8 * predicted) sqrt_ok = false;
  }
  out.checks.emplace_back("sqrt_n_times_b", sqrt_ok);

  out.pass = true;
  for (const auto& c : out.checks) out.pass = out.pass && c.second;
  return out;
}

}  // namespace

nlohmann::json SuiteResult::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["pass"] = pass;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json jc;
    jc["name"] = c.first;
    jc["pass"] = c.second;
    arr.push_back(jc);
  }
  j["checks"] = arr;
  return j;
}

std::vector<std::string> verify_suite_names() {
  return {"invariance", "lemma2", "touching", "duality"};
}

std::vector<SuiteResult> run_verify_suites(const std::string& name,
                                           std::uint64_t seed) {
  std::vector<SuiteResult> out;
  const bool all = name == "all";
  if (all || name == "invariance") out.push_back(suite_invariance(seed));
  if (all || name == "lemma2") out.push_back(suite_lemma2(seed));
  if (all || name == "touching") out.push_back(suite_touching(seed));
  if (all || name == "duality") out.push_back(suite_duality(seed));
  if (out.empty())
    fail(ErrorCode::BadInput, "unknown verify suite: " + name);
  return out;
}

}  // namespace sigmak
