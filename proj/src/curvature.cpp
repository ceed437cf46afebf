// SPDX-License-Identifier: Apache-2.0
#include "sigmak/curvature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "json.hpp"

#include "sigmak/errors.hpp"
#include "sigmak/sym.hpp"

namespace sigmak {

namespace {

void check_spec(const CurvatureSpec& s) {
  if (s.n < 3) fail(ErrorCode::BadInput, "dimension must be >= 3");
  if (s.k < 1 || s.k > s.n) fail(ErrorCode::BadInput, "need 1 <= k <= n");
  if (s.kind == CurvatureSpec::Kind::Homotopy && (s.t < 0.0 || s.t > 1.0))
    fail(ErrorCode::BadInput, "homotopy parameter must lie in [0,1]");
}

void check_dim(const CurvatureSpec& s, const Eigen::VectorXd& lam) {
  if (static_cast<int>(lam.size()) != s.n)
    fail(ErrorCode::BadInput, "eigenvalue vector has wrong length");
  if (!lam.allFinite()) fail(ErrorCode::BadInput, "non-finite eigenvalues");
}

// tl + (1-t) sigma_1(l) e: the argument fed to the base function.
Eigen::VectorXd homotopy_arg(double t, const Eigen::VectorXd& lam) {
  const double s1 = lam.sum();
  return t * lam + Eigen::VectorXd::Constant(lam.size(), (1.0 - t) * s1);
}

double sigma_f(const Eigen::VectorXd& lam, int k) {
  return std::pow(sigma_k(lam, k), 1.0 / k);
}

}  // namespace

CurvatureSpec CurvatureSpec::sigma(int n, int k) {
  CurvatureSpec s;
  s.n = n;
  s.kind = Kind::SigmaK;
  s.k = k;
  check_spec(s);
  return s;
}

CurvatureSpec CurvatureSpec::homotopy(int n, int k, double t) {
  CurvatureSpec s;
  s.n = n;
  s.kind = Kind::Homotopy;
  s.k = k;
  s.t = t;
  check_spec(s);
  return s;
}

nlohmann::json CurvatureSpec::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["k"] = k;
  if (kind == Kind::SigmaK) {
    j["kind"] = "sigma_k";
  } else {
    j["kind"] = "homotopy";
    j["t"] = t;
  }
  return j;
}

CurvatureSpec CurvatureSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::BadInput, "spec must be an object");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key != "n" && key != "kind" && key != "k" && key != "t")
      fail(ErrorCode::BadInput, "unknown spec key: " + key);
  }
  if (!j.contains("n") || !j.contains("kind") || !j.contains("k"))
    fail(ErrorCode::BadInput, "spec needs n, kind, k");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sigma_k") {
    if (j.contains("t"))
      fail(ErrorCode::BadInput, "t is not a sigma_k field");
    return sigma(j.at("n").get<int>(), j.at("k").get<int>());
  }
  if (kind == "homotopy") {
    if (!j.contains("t")) fail(ErrorCode::BadInput, "homotopy needs t");
    return homotopy(j.at("n").get<int>(), j.at("k").get<int>(),
                    j.at("t").get<double>());
  }
  fail(ErrorCode::BadInput, "unknown spec kind: " + kind);
}

bool spec_membership(const CurvatureSpec& spec, const Eigen::VectorXd& lam) {
  check_spec(spec);
  check_dim(spec, lam);
  if (spec.kind == CurvatureSpec::Kind::SigmaK)
    return in_gamma_k(lam, spec.k);
  return in_gamma_k(homotopy_arg(spec.t, lam), spec.k);
}

double f_eval(const CurvatureSpec& spec, const Eigen::VectorXd& lam) {
  if (!spec_membership(spec, lam))
    fail(ErrorCode::ConeViolation, "eigenvalues outside the cone");
  if (spec.kind == CurvatureSpec::Kind::SigmaK)
    return sigma_f(lam, spec.k);
  return sigma_f(homotopy_arg(spec.t, lam), spec.k);
}

Eigen::VectorXd f_gradient(const CurvatureSpec& spec,
                           const Eigen::VectorXd& lam) {
  if (!spec_membership(spec, lam))
    fail(ErrorCode::ConeViolation, "eigenvalues outside the cone");
  const int k = spec.k;
  auto sigma_power_grad = [k](const Eigen::VectorXd& mu) -> Eigen::VectorXd {
    const double sk = sigma_k(mu, k);
    return (std::pow(sk, 1.0 / k - 1.0) / k) * sigma_k_gradient(mu, k);
  };
  if (spec.kind == CurvatureSpec::Kind::SigmaK) return sigma_power_grad(lam);
  // chain rule through mu = t lam + (1-t) sigma_1(lam) e
  const Eigen::VectorXd mu = homotopy_arg(spec.t, lam);
  const Eigen::VectorXd gmu = sigma_power_grad(mu);
  const double colsum = (1.0 - spec.t) * gmu.sum();
  return spec.t * gmu + Eigen::VectorXd::Constant(lam.size(), colsum);
}

double homotopy_eval(const CurvatureSpec& base, double t,
                     const Eigen::VectorXd& lam) {
  if (base.kind != CurvatureSpec::Kind::SigmaK)
    fail(ErrorCode::BadInput, "homotopy base must be a sigma_k spec");
  return f_eval(CurvatureSpec::homotopy(base.n, base.k, t), lam);
}

bool homotopy_membership(const CurvatureSpec& base, double t,
                         const Eigen::VectorXd& lam) {
  if (base.kind != CurvatureSpec::Kind::SigmaK)
    fail(ErrorCode::BadInput, "homotopy base must be a sigma_k spec");
  return spec_membership(CurvatureSpec::homotopy(base.n, base.k, t), lam);
}

double normalize_b(const CurvatureSpec& spec) {
  check_spec(spec);
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(spec.n);
  const double b = 1.0 / f_eval(spec, e);
  const double probe = f_eval(spec, b * e);
  if (std::abs(probe - 1.0) > 1e-12)
    fail(ErrorCode::BadInput, "normalization drifted beyond 1e-12");
  return b;
}

double compute_delta1(const CurvatureSpec& spec, double tol,
                      std::uint64_t seed, int samples, int refine_iters) {
  check_spec(spec);
  (void)tol;
  const int n = spec.n;
  Rng rng(seed);

  auto objective = [&](const Eigen::VectorXd& mu) -> double {
    if (!spec_membership(spec, mu)) return -1.0;  // outside the closed cone
    return f_eval(spec, mu);
  };

  Eigen::VectorXd best = Eigen::VectorXd::Ones(n).normalized();
  double best_v = objective(best);
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd mu = rng.on_sphere(n);
    const double v = objective(mu);
    if (v > best_v) {
      best_v = v;
      best = mu;
    }
  }
  best = refine_on_sphere(objective, best, refine_iters, rng);
  best_v = objective(best);

  // Gradient polish: ascend f restricted to the sphere. f is homogeneous of
  // degree one, so the tangential gradient is grad f - f * mu.
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd g = f_gradient(spec, best);
    Eigen::VectorXd tang = g - best_v * best;
    const double tn = tang.norm();
    if (tn < 1e-15) break;
    double step = 0.5;
    bool moved = false;
    while (step > 1e-16) {
      Eigen::VectorXd cand = (best + step * tang).normalized();
      const double v = objective(cand);
      if (v > best_v) {
        best = cand;
        best_v = v;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return 1.0 / best_v;
}

bool concavity_probe(const CurvatureSpec& spec, const Eigen::VectorXd& lam,
                     double tol) {
  check_spec(spec);
  check_dim(spec, lam);
  const int n = spec.n;
  const double h = std::max(1e-4, 1e-4 * lam.norm());

  auto at = [&](const Eigen::VectorXd& mu) -> double {
    if (!spec_membership(spec, mu))
      fail(ErrorCode::ConeViolation, "concavity stencil leaves the cone");
    return f_eval(spec, mu);
  };

  Eigen::MatrixXd hess(n, n);
  const double f0 = at(lam);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
    ei[i] = h;
    hess(i, i) = (at(lam + ei) - 2.0 * f0 + at(lam - ei)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
      ej[j] = h;
      const double v = (at(lam + ei + ej) - at(lam + ei - ej) -
                        at(lam - ei + ej) + at(lam - ei - ej)) /
                       (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
  return es.eigenvalues().maxCoeff() <= tol;
}

Eigen::VectorXd sample_in_cone(const CurvatureSpec& spec, Rng& rng,
                               double scale) {
  const int n = spec.n;
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::VectorXd lam = rng.normal_vector(n) + rng.uniform(0.5, 3.0) * e;
    lam *= scale;
    if (!spec_membership(spec, lam)) continue;
    // Keep clear of the boundary in scale-free units. The probe's fourth
    // derivatives grow like a negative power of the normalized distance to
    // the cone boundary, and the k-th root in f hides that distance: f can
    // look mid-sized while sigma_k is nearly zero. Demanding every
    // normalized symmetric mean through order k stay above a fixed fraction
    // of its diagonal value keeps the documented finite-difference step in
    // the regime where truncation sits below the probe tolerance.
    Eigen::VectorXd mu = lam;
    if (spec.kind == CurvatureSpec::Kind::Homotopy)
      mu = spec.t * lam + (1.0 - spec.t) * sigma_k(lam, 1) * e;
    const double unit = mu.norm() / std::sqrt(static_cast<double>(n));
    if (unit <= 0.0) continue;
    const Eigen::VectorXd sig = sigma_all(mu);
    double binom = 1.0, diag = 1.0;
    bool deep = true;
    for (int j = 1; j <= spec.k && deep; ++j) {
      binom *= static_cast<double>(n - j + 1) / j;
      diag *= unit;
      deep = sig[j] >= 0.25 * binom * diag;
    }
    if (deep) return lam;
  }
  fail(ErrorCode::NotFound, "could not sample the cone interior");
}

}  // namespace sigmak
