// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic sampling and derivative-free/gradient refinement helpers.
// All randomness flows through an explicitly seeded mt19937_64; variates are
// generated from raw bits so results do not depend on libstdc++ internals.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>

namespace sigmak {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0,1)
  double uniform() {
    return (gen_() >> 11) * (1.0 / 9007199254740992.0);  // 53 bits
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal, Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // uniform on the unit sphere S^{n-1}
  Eigen::VectorXd on_sphere(int n) {
    Eigen::VectorXd v = normal_vector(n);
    double norm = v.norm();
    while (norm < 1e-12) {
      v = normal_vector(n);
      norm = v.norm();
    }
    return v / norm;
  }

  // uniform in the ball of given radius
  Eigen::VectorXd in_ball(int n, const Eigen::VectorXd& center, double radius) {
    const Eigen::VectorXd dir = on_sphere(n);
    const double r = radius * std::pow(uniform(), 1.0 / n);
    return center + r * dir;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Maximize fn over the unit sphere by projected gradient-free ascent from x0:
// shrinking random-direction polish. Deterministic given rng state.
Eigen::VectorXd refine_on_sphere(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, int iters, Rng& rng);

// Maximize (sign=+1) or minimize (sign=-1) a smooth objective over the closed
// ball B(center, radius) by projected gradient steps with backtracking.
// grad_fn returns the gradient; fn the value. Returns the refined point.
Eigen::VectorXd refine_in_ball(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_fn,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& center, double radius,
    int sign, int iters);

// One-dimensional bisection for a monotone predicate: returns the largest
// value in [lo, hi] at which pred holds, assuming pred(lo) = true. tol is
// absolute on the bracket width.
double bisect_last_true(const std::function<bool(double)>& pred, double lo,
                        double hi, double tol);

// Finite-difference weights on arbitrary nodes (Fornberg). Returns weights
// w(k, j): the j-th node's weight for the k-th derivative, k = 0..max_order.
Eigen::MatrixXd fd_weights(const Eigen::VectorXd& nodes, double x0,
                           int max_order);

}  // namespace sigmak
