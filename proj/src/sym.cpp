// SPDX-License-Identifier: Apache-2.0
#include "sigmak/sym.hpp"

#include "sigmak/errors.hpp"

namespace sigmak {

Eigen::VectorXd sigma_all(const Eigen::VectorXd& lam) {
  const int n = static_cast<int>(lam.size());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
  e[0] = 1.0;
  // multiply out prod_i (x + lam_i)
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j >= 1; --j) e[j] += lam[i] * e[j - 1];
  return e;
}

double sigma_k(const Eigen::VectorXd& lam, int k) {
  const int n = static_cast<int>(lam.size());
  if (k < 1 || k > n)
    fail(ErrorCode::BadInput, "sigma_k requires 1 <= k <= n");
  return sigma_all(lam)[k];
}

Eigen::VectorXd sigma_k_gradient(const Eigen::VectorXd& lam, int k) {
  const int n = static_cast<int>(lam.size());
  if (k < 1 || k > n)
    fail(ErrorCode::BadInput, "sigma_k_gradient requires 1 <= k <= n");
  Eigen::VectorXd g(n);
  if (k == 1) {
    g.setOnes();
    return g;
  }
  Eigen::VectorXd rest(n - 1);
  for (int i = 0; i < n; ++i) {
    int m = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) rest[m++] = lam[j];
    g[i] = sigma_all(rest)[k - 1];
  }
  return g;
}

bool in_gamma_k(const Eigen::VectorXd& lam, int k) {
  const int n = static_cast<int>(lam.size());
  if (k < 1 || k > n)
    fail(ErrorCode::BadInput, "in_gamma_k requires 1 <= k <= n");
  const Eigen::VectorXd e = sigma_all(lam);
  for (int j = 1; j <= k; ++j)
    if (!(e[j] > 0.0)) return false;
  return true;
}

}  // namespace sigmak
