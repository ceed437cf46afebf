// SPDX-License-Identifier: Apache-2.0
#pragma once

// Positive scalar fields on domains of R^n with value / gradient / Hessian
// access. Analytic built-ins compose exactly (chain rule); gridded fields
// differentiate with 4th-order central stencils.

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "json.hpp"

namespace sigmak {

struct FieldEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

struct Domain {
  enum class Kind { All, Ball, BallComplement };

  Kind kind = Kind::All;
  Eigen::VectorXd center;  // for Ball / BallComplement
  double radius = 0.0;

  static Domain all() { return {}; }
  static Domain ball(Eigen::VectorXd c, double r);
  static Domain ball_complement(Eigen::VectorXd c, double r);

  bool contains(const Eigen::VectorXd& p) const;
};

class ScalarField {
 public:
  virtual ~ScalarField() = default;

  int dim() const { return n_; }
  const Domain& domain() const { return domain_; }

  // Checks the domain and evaluates; positivity of the value is an invariant
  // of the built-ins on their domains and is asserted by callers that need it.
  FieldEval eval(const Eigen::VectorXd& p) const;
  double value(const Eigen::VectorXd& p) const { return eval(p).value; }

 protected:
  ScalarField(int n, Domain d) : n_(n), domain_(std::move(d)) {}
  virtual FieldEval eval_impl(const Eigen::VectorXd& p) const = 0;

 private:
  int n_;
  Domain domain_;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

struct BubbleParams {
  double amplitude = 1.0;  // a > 0
  double scale = 1.0;      // s > 0
  Eigen::VectorXd center;

  nlohmann::json to_json() const;
  static BubbleParams from_json(const nlohmann::json& j);
};

struct MoebiusParams {
  Eigen::VectorXd center;
  double radius = 1.0;  // lambda > 0
};

FieldPtr constant_field(int n, double c);
// a * (1 + s^2 |x - x0|^2)^{-(n-2)/2}
FieldPtr bubble_field(int n, const BubbleParams& p);
FieldPtr bubble_sum_field(int n, const std::vector<BubbleParams>& terms,
                          double constant_term = 0.0);
FieldPtr scaled_field(const FieldPtr& u, double c);
FieldPtr sum_field(const FieldPtr& u, const FieldPtr& w);
FieldPtr product_field(const FieldPtr& u, const FieldPtr& w);
FieldPtr power_field(const FieldPtr& u, double exponent);  // u > 0 required
// c * u(R x): the dilation used by the scaling reductions.
FieldPtr dilated_field(const FieldPtr& u, double R, double prefactor);
// amp * exp(-c |x - x0|^2)
FieldPtr gaussian_field(int n, double amp, double c,
                        const Eigen::VectorXd& x0);
// amp * exp(k . x)
FieldPtr exponential_field(int n, double amp, const Eigen::VectorXd& k);
// beta * (eps^2 - |y - c|^2) on its positivity ball
FieldPtr quadratic_cap_field(double beta, double eps,
                             const Eigen::VectorXd& center);

// Radial profiles u(|x - center|) with closed-form derivatives.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;
  // value, first and second derivative at r >= 0
  virtual void eval(double r, double& v, double& dv, double& d2v) const = 0;
};
FieldPtr radial_field(int n, std::shared_ptr<const RadialProfile> profile,
                      const Eigen::VectorXd& center);

// General Moebius composition U(y) = (lambda/|y-x|)^power * u(x + lambda^2 (y-x)/|y-x|^2).
// power = n-2 is the Kelvin transform; power = 0 is a plain chart change.
// Evaluation within 1e-8 * lambda of the center reports SingularCenter.
FieldPtr moebius_compose(const FieldPtr& u, const MoebiusParams& m,
                         double power);
FieldPtr kelvin_transform(const FieldPtr& u, const MoebiusParams& m);

// Uniform-grid field; derivatives by 4th-order central differences.
// Evaluation snaps to grid nodes (within 1e-6 * spacing) and requires two
// interior layers for the stencil; anything else reports Domain.
struct GridSpec {
  Eigen::VectorXd origin;
  double spacing = 0.0;
  std::vector<int> shape;
};

class GridField : public ScalarField {
 public:
  GridField(GridSpec spec, std::vector<double> values /* row-major */);

  static std::shared_ptr<const GridField> sample(const ScalarField& u,
                                                 const GridSpec& spec);

  const GridSpec& grid() const { return spec_; }
  const std::vector<double>& values() const { return values_; }

  nlohmann::json to_json() const;
  static std::shared_ptr<const GridField> from_json(const nlohmann::json& j);

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override;

 private:
  double at(const std::vector<int>& idx) const;

  GridSpec spec_;
  std::vector<double> values_;
  std::vector<std::ptrdiff_t> strides_;
};

// Tagged analytic descriptors: constant, bubble, bubble_sum, kelvin.
nlohmann::json field_to_json(const FieldPtr& u);
FieldPtr field_from_json(int n, const nlohmann::json& j);

}  // namespace sigmak
