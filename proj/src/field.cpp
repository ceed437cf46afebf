// SPDX-License-Identifier: Apache-2.0
#include "sigmak/field.hpp"

#include <cmath>
#include <cstdint>
#include <utility>

#include "json.hpp"

#include "sigmak/errors.hpp"

namespace sigmak {

namespace {

Eigen::VectorXd vec_from_json(const nlohmann::json& j, int expected,
                              const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected)
    fail(ErrorCode::BadInput, std::string(what) + " must be an array of length " +
                                  std::to_string(expected));
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v[i] = j.at(i).get<double>();
  return v;
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> allowed,
                         const char* what) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) ok = true;
    if (!ok)
      fail(ErrorCode::BadInput,
           std::string("unknown ") + what + " key: " + item.key());
  }
}

// Fields that round-trip through json implement this.
struct Descriptor {
  virtual ~Descriptor() = default;
  virtual nlohmann::json descriptor() const = 0;
};

}  // namespace

Domain Domain::ball(Eigen::VectorXd c, double r) {
  Domain d;
  d.kind = Kind::Ball;
  d.center = std::move(c);
  d.radius = r;
  return d;
}

Domain Domain::ball_complement(Eigen::VectorXd c, double r) {
  Domain d;
  d.kind = Kind::BallComplement;
  d.center = std::move(c);
  d.radius = r;
  return d;
}

bool Domain::contains(const Eigen::VectorXd& p) const {
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::Ball:
      return (p - center).norm() < radius;
    case Kind::BallComplement:
      return (p - center).norm() > radius;
  }
  return false;
}

FieldEval ScalarField::eval(const Eigen::VectorXd& p) const {
  if (static_cast<int>(p.size()) != n_)
    fail(ErrorCode::BadInput, "point has wrong dimension");
  if (!p.allFinite()) fail(ErrorCode::BadInput, "non-finite point");
  if (!domain_.contains(p))
    fail(ErrorCode::Domain, "point outside the field domain");
  return eval_impl(p);
}

nlohmann::json BubbleParams::to_json() const {
  nlohmann::json j;
  j["a"] = amplitude;
  j["s"] = scale;
  j["center"] = vec_to_json(center);
  return j;
}

BubbleParams BubbleParams::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"a", "s", "center"}, "bubble");
  if (!j.contains("a") || !j.contains("s") || !j.contains("center"))
    fail(ErrorCode::BadInput, "bubble needs a, s, center");
  BubbleParams p;
  p.amplitude = j.at("a").get<double>();
  p.scale = j.at("s").get<double>();
  const auto& c = j.at("center");
  if (!c.is_array() || c.empty())
    fail(ErrorCode::BadInput, "bubble center must be a nonempty array");
  p.center = vec_from_json(c, static_cast<int>(c.size()), "bubble center");
  if (p.amplitude <= 0.0 || p.scale <= 0.0)
    fail(ErrorCode::BadInput, "bubble needs positive amplitude and scale");
  return p;
}

namespace {

class ConstantField final : public ScalarField, public Descriptor {
 public:
  ConstantField(int n, double c) : ScalarField(n, Domain::all()), c_(c) {}

  nlohmann::json descriptor() const override {
    nlohmann::json j;
    j["type"] = "constant";
    j["value"] = c_;
    return j;
  }

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval e;
    e.value = c_;
    e.grad = Eigen::VectorXd::Zero(p.size());
    e.hess = Eigen::MatrixXd::Zero(p.size(), p.size());
    return e;
  }

 private:
  double c_;
};

// Accumulates one bubble term into an eval. a (1 + s^2 |w|^2)^m, m = -(n-2)/2.
void add_bubble(const BubbleParams& b, int n, const Eigen::VectorXd& p,
                FieldEval& e) {
  const double m = -0.5 * (n - 2);
  const Eigen::VectorXd w = p - b.center;
  const double s2 = b.scale * b.scale;
  const double t = 1.0 + s2 * w.squaredNorm();
  const double tm = std::pow(t, m);
  e.value += b.amplitude * tm;
  const double c1 = b.amplitude * m * tm / t * 2.0 * s2;  // a m t^{m-1} 2 s^2
  e.grad += c1 * w;
  e.hess += (c1 * (m - 1.0) / t * 2.0 * s2) * (w * w.transpose());
  e.hess += c1 * Eigen::MatrixXd::Identity(n, n);
}

class BubbleField final : public ScalarField, public Descriptor {
 public:
  BubbleField(int n, BubbleParams p)
      : ScalarField(n, Domain::all()), p_(std::move(p)) {}

  nlohmann::json descriptor() const override {
    nlohmann::json j = p_.to_json();
    j["type"] = "bubble";
    return j;
  }

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval e;
    e.value = 0.0;
    e.grad = Eigen::VectorXd::Zero(dim());
    e.hess = Eigen::MatrixXd::Zero(dim(), dim());
    add_bubble(p_, dim(), p, e);
    return e;
  }

 private:
  BubbleParams p_;
};

class BubbleSumField final : public ScalarField, public Descriptor {
 public:
  BubbleSumField(int n, std::vector<BubbleParams> terms, double constant)
      : ScalarField(n, Domain::all()),
        terms_(std::move(terms)),
        constant_(constant) {}

  nlohmann::json descriptor() const override {
    nlohmann::json j;
    j["type"] = "bubble_sum";
    j["constant"] = constant_;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : terms_) arr.push_back(t.to_json());
    j["terms"] = arr;
    return j;
  }

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval e;
    e.value = constant_;
    e.grad = Eigen::VectorXd::Zero(dim());
    e.hess = Eigen::MatrixXd::Zero(dim(), dim());
    for (const auto& t : terms_) add_bubble(t, dim(), p, e);
    return e;
  }

 private:
  std::vector<BubbleParams> terms_;
  double constant_;
};

Domain intersect(const Domain& a, const Domain& b) {
  if (a.kind == Domain::Kind::All) return b;
  if (b.kind == Domain::Kind::All) return a;
  fail(ErrorCode::BadInput, "unsupported domain intersection");
}

class ScaledField final : public ScalarField {
 public:
  ScaledField(FieldPtr u, double c)
      : ScalarField(u->dim(), u->domain()), u_(std::move(u)), c_(c) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval e = u_->eval(p);
    e.value *= c_;
    e.grad *= c_;
    e.hess *= c_;
    return e;
  }

 private:
  FieldPtr u_;
  double c_;
};

class SumField final : public ScalarField {
 public:
  SumField(FieldPtr u, FieldPtr w)
      : ScalarField(u->dim(), intersect(u->domain(), w->domain())),
        u_(std::move(u)),
        w_(std::move(w)) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval a = u_->eval(p);
    const FieldEval b = w_->eval(p);
    a.value += b.value;
    a.grad += b.grad;
    a.hess += b.hess;
    return a;
  }

 private:
  FieldPtr u_, w_;
};

class ProductField final : public ScalarField {
 public:
  ProductField(FieldPtr u, FieldPtr w)
      : ScalarField(u->dim(), intersect(u->domain(), w->domain())),
        u_(std::move(u)),
        w_(std::move(w)) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    const FieldEval a = u_->eval(p);
    const FieldEval b = w_->eval(p);
    FieldEval e;
    e.value = a.value * b.value;
    e.grad = a.grad * b.value + b.grad * a.value;
    e.hess = a.hess * b.value + b.hess * a.value +
             a.grad * b.grad.transpose() + b.grad * a.grad.transpose();
    return e;
  }

 private:
  FieldPtr u_, w_;
};

class PowerField final : public ScalarField {
 public:
  PowerField(FieldPtr u, double alpha)
      : ScalarField(u->dim(), u->domain()), u_(std::move(u)), alpha_(alpha) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    const FieldEval a = u_->eval(p);
    if (a.value <= 0.0)
      fail(ErrorCode::NonpositiveValue, "power of a nonpositive field value");
    FieldEval e;
    const double v = std::pow(a.value, alpha_);
    e.value = v;
    const double d1 = alpha_ * v / a.value;
    e.grad = d1 * a.grad;
    e.hess = d1 * a.hess +
             (alpha_ * (alpha_ - 1.0) * v / (a.value * a.value)) *
                 (a.grad * a.grad.transpose());
    return e;
  }

 private:
  FieldPtr u_;
  double alpha_;
};

class DilatedField final : public ScalarField {
 public:
  DilatedField(FieldPtr u, double R, double c)
      : ScalarField(u->dim(), pull_domain(u->domain(), R)),
        u_(std::move(u)),
        R_(R),
        c_(c) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval e = u_->eval(R_ * p);
    e.value *= c_;
    e.grad *= c_ * R_;
    e.hess *= c_ * R_ * R_;
    return e;
  }

 private:
  static Domain pull_domain(const Domain& d, double R) {
    if (d.kind == Domain::Kind::All) return d;
    Domain out = d;
    out.center = d.center / R;
    out.radius = d.radius / R;
    return out;
  }

  FieldPtr u_;
  double R_, c_;
};

class GaussianField final : public ScalarField {
 public:
  GaussianField(int n, double amp, double c, Eigen::VectorXd x0)
      : ScalarField(n, Domain::all()), amp_(amp), c_(c), x0_(std::move(x0)) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    const Eigen::VectorXd w = p - x0_;
    FieldEval e;
    e.value = amp_ * std::exp(-c_ * w.squaredNorm());
    e.grad = (-2.0 * c_ * e.value) * w;
    e.hess = (4.0 * c_ * c_ * e.value) * (w * w.transpose()) -
             (2.0 * c_ * e.value) * Eigen::MatrixXd::Identity(dim(), dim());
    return e;
  }

 private:
  double amp_, c_;
  Eigen::VectorXd x0_;
};

class ExponentialField final : public ScalarField {
 public:
  ExponentialField(int n, double amp, Eigen::VectorXd k)
      : ScalarField(n, Domain::all()), amp_(amp), k_(std::move(k)) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    FieldEval e;
    e.value = amp_ * std::exp(k_.dot(p));
    e.grad = e.value * k_;
    e.hess = e.value * (k_ * k_.transpose());
    return e;
  }

 private:
  double amp_;
  Eigen::VectorXd k_;
};

class QuadraticCapField final : public ScalarField {
 public:
  QuadraticCapField(double beta, double eps, Eigen::VectorXd center)
      : ScalarField(static_cast<int>(center.size()),
                    Domain::ball(center, eps)),
        beta_(beta),
        eps_(eps),
        center_(std::move(center)) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    const Eigen::VectorXd w = p - center_;
    FieldEval e;
    e.value = beta_ * (eps_ * eps_ - w.squaredNorm());
    e.grad = -2.0 * beta_ * w;
    e.hess = -2.0 * beta_ * Eigen::MatrixXd::Identity(dim(), dim());
    return e;
  }

 private:
  double beta_, eps_;
  Eigen::VectorXd center_;
};

class RadialFieldImpl final : public ScalarField {
 public:
  RadialFieldImpl(int n, std::shared_ptr<const RadialProfile> profile,
                  Eigen::VectorXd center)
      : ScalarField(n, Domain::all()),
        profile_(std::move(profile)),
        center_(std::move(center)) {}

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& p) const override {
    const Eigen::VectorXd w = p - center_;
    const double r = w.norm();
    double v = 0.0, dv = 0.0, d2v = 0.0;
    profile_->eval(r, v, dv, d2v);
    FieldEval e;
    e.value = v;
    if (r < 1e-12) {
      // smooth even profile: u'(0)=0, Hessian is u''(0) I
      e.grad = Eigen::VectorXd::Zero(dim());
      e.hess = d2v * Eigen::MatrixXd::Identity(dim(), dim());
      return e;
    }
    const Eigen::VectorXd wh = w / r;
    e.grad = dv * wh;
    e.hess = (d2v - dv / r) * (wh * wh.transpose()) +
             (dv / r) * Eigen::MatrixXd::Identity(dim(), dim());
    return e;
  }

 private:
  std::shared_ptr<const RadialProfile> profile_;
  Eigen::VectorXd center_;
};

class MoebiusComposeField final : public ScalarField, public Descriptor {
 public:
  MoebiusComposeField(FieldPtr u, MoebiusParams m, double power)
      : ScalarField(u->dim(), Domain::all()),
        u_(std::move(u)),
        m_(std::move(m)),
        power_(power) {}

  nlohmann::json descriptor() const override {
    const auto* inner = dynamic_cast<const Descriptor*>(u_.get());
    if (inner == nullptr)
      fail(ErrorCode::BadInput, "inner field has no serialized form");
    nlohmann::json j;
    j["type"] = "kelvin";
    j["center"] = vec_to_json(m_.center);
    j["radius"] = m_.radius;
    j["field"] = inner->descriptor();
    return j;
  }

  double power() const { return power_; }

 protected:
  FieldEval eval_impl(const Eigen::VectorXd& y) const override {
    const int n = dim();
    const double lam = m_.radius;
    const Eigen::VectorXd w = y - m_.center;
    const double rho = w.norm();
    if (rho <= 1e-8 * lam)
      fail(ErrorCode::SingularCenter, "evaluation at the inversion center");
    const Eigen::VectorXd wh = w / rho;
    const double rho2 = rho * rho;

    const Eigen::VectorXd z = m_.center + (lam * lam / rho2) * w;
    const FieldEval inner = u_->eval(z);

    // phi = (lam/rho)^power with its derivatives
    const double phi = std::pow(lam / rho, power_);
    const Eigen::VectorXd grad_phi = (-power_ / rho * phi) * wh;
    const Eigen::MatrixXd hess_phi =
        (power_ * phi / rho2) *
        ((power_ + 2.0) * (wh * wh.transpose()) -
         Eigen::MatrixXd::Identity(n, n));

    // dz/dy = (lam^2/rho^2)(I - 2 wh wh^T), symmetric
    const Eigen::MatrixXd J =
        (lam * lam / rho2) *
        (Eigen::MatrixXd::Identity(n, n) - 2.0 * (wh * wh.transpose()));

    const Eigen::VectorXd grad_v = J * inner.grad;
    Eigen::MatrixXd hess_v = J * inner.hess * J;
    // second derivatives of z contracted with grad u
    const double c2 = 2.0 * lam * lam / (rho2 * rho2);
    const double gw = inner.grad.dot(w);
    hess_v += c2 * (4.0 * gw / rho2) * (w * w.transpose());
    hess_v -= c2 * (w * inner.grad.transpose() + inner.grad * w.transpose());
    hess_v -= (c2 * gw) * Eigen::MatrixXd::Identity(n, n);

    FieldEval e;
    e.value = phi * inner.value;
    e.grad = inner.value * grad_phi + phi * grad_v;
    e.hess = inner.value * hess_phi + grad_phi * grad_v.transpose() +
             grad_v * grad_phi.transpose() + phi * hess_v;
    return e;
  }

 private:
  FieldPtr u_;
  MoebiusParams m_;
  double power_;
};

}  // namespace

FieldPtr constant_field(int n, double c) {
  if (n < 1) fail(ErrorCode::BadInput, "dimension must be positive");
  return std::make_shared<ConstantField>(n, c);
}

FieldPtr bubble_field(int n, const BubbleParams& p) {
  BubbleParams q = p;
  if (q.center.size() == 0) q.center = Eigen::VectorXd::Zero(n);
  if (static_cast<int>(q.center.size()) != n)
    fail(ErrorCode::BadInput, "bubble center has wrong dimension");
  if (q.amplitude <= 0.0 || q.scale <= 0.0)
    fail(ErrorCode::BadInput, "bubble needs positive amplitude and scale");
  return std::make_shared<BubbleField>(n, std::move(q));
}

FieldPtr bubble_sum_field(int n, const std::vector<BubbleParams>& terms,
                          double constant_term) {
  std::vector<BubbleParams> ts;
  ts.reserve(terms.size());
  for (const auto& t : terms) {
    BubbleParams q = t;
    if (q.center.size() == 0) q.center = Eigen::VectorXd::Zero(n);
    if (static_cast<int>(q.center.size()) != n)
      fail(ErrorCode::BadInput, "bubble center has wrong dimension");
    if (q.amplitude <= 0.0 || q.scale <= 0.0)
      fail(ErrorCode::BadInput, "bubble needs positive amplitude and scale");
    ts.push_back(std::move(q));
  }
  if (constant_term < 0.0)
    fail(ErrorCode::BadInput, "constant term must be nonnegative");
  return std::make_shared<BubbleSumField>(n, std::move(ts), constant_term);
}

FieldPtr scaled_field(const FieldPtr& u, double c) {
  return std::make_shared<ScaledField>(u, c);
}

FieldPtr sum_field(const FieldPtr& u, const FieldPtr& w) {
  if (u->dim() != w->dim()) fail(ErrorCode::BadInput, "dimension mismatch");
  return std::make_shared<SumField>(u, w);
}

FieldPtr product_field(const FieldPtr& u, const FieldPtr& w) {
  if (u->dim() != w->dim()) fail(ErrorCode::BadInput, "dimension mismatch");
  return std::make_shared<ProductField>(u, w);
}

FieldPtr power_field(const FieldPtr& u, double exponent) {
  return std::make_shared<PowerField>(u, exponent);
}

FieldPtr dilated_field(const FieldPtr& u, double R, double prefactor) {
  if (R <= 0.0) fail(ErrorCode::BadInput, "dilation factor must be positive");
  return std::make_shared<DilatedField>(u, R, prefactor);
}

FieldPtr gaussian_field(int n, double amp, double c,
                        const Eigen::VectorXd& x0) {
  if (static_cast<int>(x0.size()) != n)
    fail(ErrorCode::BadInput, "gaussian center has wrong dimension");
  return std::make_shared<GaussianField>(n, amp, c, x0);
}

FieldPtr exponential_field(int n, double amp, const Eigen::VectorXd& k) {
  if (static_cast<int>(k.size()) != n)
    fail(ErrorCode::BadInput, "exponential slope has wrong dimension");
  return std::make_shared<ExponentialField>(n, amp, k);
}

FieldPtr quadratic_cap_field(double beta, double eps,
                             const Eigen::VectorXd& center) {
  if (beta <= 0.0 || eps <= 0.0)
    fail(ErrorCode::BadInput, "cap needs positive beta and eps");
  return std::make_shared<QuadraticCapField>(beta, eps, center);
}

FieldPtr radial_field(int n, std::shared_ptr<const RadialProfile> profile,
                      const Eigen::VectorXd& center) {
  if (static_cast<int>(center.size()) != n)
    fail(ErrorCode::BadInput, "profile center has wrong dimension");
  if (!profile) fail(ErrorCode::BadInput, "null radial profile");
  return std::make_shared<RadialFieldImpl>(n, std::move(profile), center);
}

FieldPtr moebius_compose(const FieldPtr& u, const MoebiusParams& m,
                         double power) {
  if (static_cast<int>(m.center.size()) != u->dim())
    fail(ErrorCode::BadInput, "inversion center has wrong dimension");
  if (m.radius <= 0.0)
    fail(ErrorCode::BadInput, "inversion radius must be positive");
  return std::make_shared<MoebiusComposeField>(u, m, power);
}

FieldPtr kelvin_transform(const FieldPtr& u, const MoebiusParams& m) {
  return moebius_compose(u, m, static_cast<double>(u->dim() - 2));
}

GridField::GridField(GridSpec spec, std::vector<double> values)
    : ScalarField(static_cast<int>(spec.shape.size()), Domain::all()),
      spec_(std::move(spec)),
      values_(std::move(values)) {
  const int n = dim();
  if (n < 1) fail(ErrorCode::BadInput, "grid needs at least one axis");
  if (spec_.spacing <= 0.0)
    fail(ErrorCode::BadInput, "grid spacing must be positive");
  if (static_cast<int>(spec_.origin.size()) != n)
    fail(ErrorCode::BadInput, "grid origin has wrong dimension");
  std::size_t total = 1;
  for (int s : spec_.shape) {
    if (s < 1) fail(ErrorCode::BadInput, "grid shape must be positive");
    total *= static_cast<std::size_t>(s);
  }
  if (values_.size() != total)
    fail(ErrorCode::BadInput, "grid value count does not match shape");
  strides_.assign(n, 1);
  for (int d = n - 2; d >= 0; --d)
    strides_[d] = strides_[d + 1] * spec_.shape[d + 1];
}

double GridField::at(const std::vector<int>& idx) const {
  std::ptrdiff_t flat = 0;
  for (int d = 0; d < dim(); ++d) flat += idx[d] * strides_[d];
  return values_[static_cast<std::size_t>(flat)];
}

FieldEval GridField::eval_impl(const Eigen::VectorXd& p) const {
  const int n = dim();
  const double h = spec_.spacing;
  std::vector<int> idx(n);
  for (int d = 0; d < n; ++d) {
    const double t = (p[d] - spec_.origin[d]) / h;
    const int i = static_cast<int>(std::lround(t));
    if (std::abs(t - i) > 1e-6)
      fail(ErrorCode::Domain, "point does not lie on a grid node");
    if (i < 2 || i > spec_.shape[d] - 3)
      fail(ErrorCode::Domain, "grid stencil leaves the sampled box");
    idx[d] = i;
  }

  // 4th-order central stencils on the 5-point line through the node
  static const double d1c[5] = {1.0, -8.0, 0.0, 8.0, -1.0};    // /(12h)
  static const double d2c[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};  // /(12h^2)

  FieldEval e;
  e.value = at(idx);
  e.grad = Eigen::VectorXd::Zero(n);
  e.hess = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> q = idx;
  for (int a = 0; a < n; ++a) {
    double g = 0.0, s = 0.0;
    for (int o = -2; o <= 2; ++o) {
      q[a] = idx[a] + o;
      const double v = at(q);
      g += d1c[o + 2] * v;
      s += d2c[o + 2] * v;
    }
    q[a] = idx[a];
    e.grad[a] = g / (12.0 * h);
    e.hess(a, a) = s / (12.0 * h * h);
    for (int b = a + 1; b < n; ++b) {
      double m = 0.0;
      for (int oa = -2; oa <= 2; ++oa) {
        if (d1c[oa + 2] == 0.0) continue;
        for (int ob = -2; ob <= 2; ++ob) {
          if (d1c[ob + 2] == 0.0) continue;
          q[a] = idx[a] + oa;
          q[b] = idx[b] + ob;
          m += d1c[oa + 2] * d1c[ob + 2] * at(q);
        }
      }
      q[a] = idx[a];
      q[b] = idx[b];
      m /= 144.0 * h * h;
      e.hess(a, b) = m;
      e.hess(b, a) = m;
    }
  }
  return e;
}

std::shared_ptr<const GridField> GridField::sample(const ScalarField& u,
                                                   const GridSpec& spec) {
  const int n = static_cast<int>(spec.shape.size());
  if (n != u.dim()) fail(ErrorCode::BadInput, "grid dimension mismatch");
  std::size_t total = 1;
  for (int s : spec.shape) total *= static_cast<std::size_t>(s);
  std::vector<double> vals(total);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd p(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int d = 0; d < n; ++d) p[d] = spec.origin[d] + spec.spacing * idx[d];
    vals[flat] = u.value(p);
    for (int d = n - 1; d >= 0; --d) {
      if (++idx[d] < spec.shape[d]) break;
      idx[d] = 0;
    }
  }
  return std::make_shared<GridField>(spec, std::move(vals));
}

nlohmann::json GridField::to_json() const {
  nlohmann::json g;
  g["origin"] = vec_to_json(spec_.origin);
  g["spacing"] = spec_.spacing;
  g["shape"] = spec_.shape;
  nlohmann::json j;
  j["n"] = dim();
  j["grid"] = std::move(g);
  j["values"] = values_;
  return j;
}

std::shared_ptr<const GridField> GridField::from_json(
    const nlohmann::json& j) {
  reject_unknown_keys(j, {"n", "grid", "values"}, "grid field");
  for (const char* key : {"n", "grid", "values"})
    if (!j.contains(key))
      fail(ErrorCode::BadInput, std::string("grid field needs ") + key);
  const auto& g = j.at("grid");
  reject_unknown_keys(g, {"origin", "spacing", "shape"}, "grid");
  for (const char* key : {"origin", "spacing", "shape"})
    if (!g.contains(key))
      fail(ErrorCode::BadInput, std::string("grid needs ") + key);
  GridSpec spec;
  spec.shape = g.at("shape").get<std::vector<int>>();
  spec.spacing = g.at("spacing").get<double>();
  spec.origin = vec_from_json(g.at("origin"),
                              static_cast<int>(spec.shape.size()),
                              "grid origin");
  const int n = j.at("n").get<int>();
  if (n != static_cast<int>(spec.shape.size()))
    fail(ErrorCode::BadInput, "grid field n does not match shape rank");
  auto values = j.at("values").get<std::vector<double>>();
  return std::make_shared<GridField>(std::move(spec), std::move(values));
}

nlohmann::json field_to_json(const FieldPtr& u) {
  if (const auto* g = dynamic_cast<const GridField*>(u.get()))
    return g->to_json();
  const auto* d = dynamic_cast<const Descriptor*>(u.get());
  if (d == nullptr)
    fail(ErrorCode::BadInput, "field has no serialized form");
  return d->descriptor();
}

FieldPtr field_from_json(int n, const nlohmann::json& j) {
  if (!j.is_object())
    fail(ErrorCode::BadInput, "field descriptor must be an object");
  if (j.contains("grid")) {
    auto g = GridField::from_json(j);
    if (g->dim() != n) fail(ErrorCode::BadInput, "grid dimension mismatch");
    return g;
  }
  if (!j.contains("type"))
    fail(ErrorCode::BadInput, "field descriptor needs a type");
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") {
    reject_unknown_keys(j, {"type", "value"}, "constant field");
    if (!j.contains("value"))
      fail(ErrorCode::BadInput, "constant field needs value");
    return constant_field(n, j.at("value").get<double>());
  }
  if (type == "bubble") {
    nlohmann::json q = j;
    q.erase("type");
    return bubble_field(n, BubbleParams::from_json(q));
  }
  if (type == "bubble_sum") {
    reject_unknown_keys(j, {"type", "terms", "constant"}, "bubble_sum field");
    if (!j.contains("terms"))
      fail(ErrorCode::BadInput, "bubble_sum needs terms");
    std::vector<BubbleParams> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back(BubbleParams::from_json(t));
    const double c0 = j.value("constant", 0.0);
    return bubble_sum_field(n, terms, c0);
  }
  if (type == "kelvin") {
    reject_unknown_keys(j, {"type", "center", "radius", "field"},
                        "kelvin field");
    for (const char* key : {"center", "radius", "field"})
      if (!j.contains(key))
        fail(ErrorCode::BadInput, std::string("kelvin needs ") + key);
    MoebiusParams m;
    m.center = vec_from_json(j.at("center"), n, "kelvin center");
    m.radius = j.at("radius").get<double>();
    return kelvin_transform(field_from_json(n, j.at("field")), m);
  }
  fail(ErrorCode::BadInput, "unknown field type: " + type);
}

}  // namespace sigmak
