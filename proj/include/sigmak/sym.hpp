// SPDX-License-Identifier: Apache-2.0
#pragma once

// Elementary symmetric functions and the associated open cones
// Gamma_k = connected component of {sigma_k > 0} containing (1,...,1),
// characterized by sigma_j > 0 for all j <= k.

#include <Eigen/Core>

namespace sigmak {

// e_0..e_n of the entries of lam (e_0 = 1), by the product recurrence.
Eigen::VectorXd sigma_all(const Eigen::VectorXd& lam);

// sigma_k(lam); requires 1 <= k <= lam.size().
double sigma_k(const Eigen::VectorXd& lam, int k);

// d sigma_k / d lam_i = sigma_{k-1} of lam with entry i removed.
Eigen::VectorXd sigma_k_gradient(const Eigen::VectorXd& lam, int k);

bool in_gamma_k(const Eigen::VectorXd& lam, int k);

}  // namespace sigmak
