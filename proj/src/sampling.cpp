// SPDX-License-Identifier: Apache-2.0
#include "sigmak/sampling.hpp"

#include <cmath>

#include "sigmak/errors.hpp"

namespace sigmak {

Eigen::VectorXd refine_on_sphere(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, int iters, Rng& rng) {
  Eigen::VectorXd best = x0.normalized();
  double best_v = fn(best);
  double step = 0.2;
  for (int it = 0; it < iters; ++it) {
    bool improved = false;
    for (int trial = 0; trial < 24; ++trial) {
      Eigen::VectorXd cand =
          (best + step * rng.on_sphere(static_cast<int>(x0.size())))
              .normalized();
      const double v = fn(cand);
      if (v > best_v) {
        best_v = v;
        best = cand;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
    if (step < 1e-13) break;
  }
  return best;
}

Eigen::VectorXd refine_in_ball(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_fn,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& center, double radius,
    int sign, int iters) {
  auto project = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    const Eigen::VectorXd d = p - center;
    const double nd = d.norm();
    if (nd <= radius) return p;
    return center + d * (radius / nd);
  };

  Eigen::VectorXd x = project(x0);
  double fx = fn(x);
  double step = 0.25 * radius;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd g = sign * grad_fn(x);
    const double gn = g.norm();
    if (gn < 1e-300) break;
    // On the boundary only the tangential part can move us.
    const Eigen::VectorXd d = x - center;
    if (d.norm() > radius * (1.0 - 1e-12)) {
      const Eigen::VectorXd nrm = d.normalized();
      const double outward = g.dot(nrm);
      if (outward > 0.0) g -= outward * nrm;
      if (g.norm() < 1e-14 * gn) break;  // stationary on the sphere
    }
    bool moved = false;
    while (step > 1e-16 * radius) {
      const Eigen::VectorXd cand = project(x + step * g.normalized());
      const double fc = fn(cand);
      if (sign * (fc - fx) > 0.0) {
        x = cand;
        fx = fc;
        step *= 1.7;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

double bisect_last_true(const std::function<bool(double)>& pred, double lo,
                        double hi, double tol) {
  if (!pred(lo)) fail(ErrorCode::NotFound, "predicate fails at bracket start");
  if (pred(hi)) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// B. Fornberg's recursion for finite-difference weights on arbitrary nodes.
Eigen::MatrixXd fd_weights(const Eigen::VectorXd& nodes, double x0,
                           int max_order) {
  const int nn = static_cast<int>(nodes.size());
  const int m = max_order;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m + 1, nn);
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < nn; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s)
          c(s, i) = c1 * (s * c(s - 1, i - 1) - c5 * c(s, i - 1)) / c2;
        c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
      }
      for (int s = mn; s >= 1; --s)
        c(s, j) = (c4 * c(s, j) - s * c(s - 1, j)) / c3;
      c(0, j) = c4 * c(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

}  // namespace sigmak
