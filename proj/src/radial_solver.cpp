// SPDX-License-Identifier: Apache-2.0
#include "sigmak/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "sigmak/bubble.hpp"
#include "sigmak/errors.hpp"
#include "sigmak/sampling.hpp"

namespace sigmak {

namespace {

constexpr int kBand = 4;  // sub/superdiagonals of the Jacobian

// Line-search acceptance: ask for a tenth off the residual, otherwise noise
// jitter at the rounding floor gets accepted as progress and Newton crawls.
constexpr double kSufficientDecrease = 0.9;

// The one-ulp floor bounds how nodal rounding moves a row; evaluation
// round-off inside the row stacks a few more rounding events on top.
constexpr double kResidualSlack = 4.0;

struct Row {
  int jlo = 0;  // window start; nodes jlo .. jlo + count - 1
  Eigen::VectorXd w1, w2;
  int count() const { return static_cast<int>(w1.size()); }
};

// Stencil windows and weights for every node. Interior nodes take a
// centered 5-point window; the row next to the center widens to 6 nodes so
// the off-center second derivative stays fourth order. Column offsets never
// exceed kBand. The last two nodes never read their windows (node_state
// switches to the tail model there).
std::vector<Row> build_rows(const RadialGrid& grid) {
  const int m = grid.nodes() - 1;
  if (m < 8) fail(ErrorCode::BadInput, "grid needs at least 8 intervals");
  std::vector<Row> rows(m + 1);
  for (int i = 0; i <= m; ++i) {
    Row& row = rows[i];
    int count = 5;
    row.jlo = std::clamp(i - 2, 0, m - 4);
    if (i == 1) {
      row.jlo = 0;
      count = 6;
    }
    const Eigen::VectorXd nodes = grid.r.segment(row.jlo, count);
    const Eigen::MatrixXd w = fd_weights(nodes, grid.r[i], 2);
    row.w1 = w.row(1);
    row.w2 = w.row(2);
  }
  return rows;
}

struct NodeState {
  double u = 0.0, du = 0.0, d2u = 0.0;
  double w1 = 0.0, w2 = 0.0;  // u^{-(n+2)/(n-2)}, u^{-2n/(n-2)}
  double lam_rad = 0.0, lam_tan = 0.0;
  Eigen::VectorXd lam;
  bool in_cone = false;
};

// Eigenvalues of the conformal Schouten operator at node i from the nodal
// u values:
//   lam_rad = -c1 w1 u'' + (n-1) c2 w2 u'^2,
//   lam_tan = -c1 w1 u'/r -        c2 w2 u'^2,
// with c1 = 2/(n-2), c2 = 2/(n-2)^2; at r = 0 the limit u'/r -> u'' - u'^2/u.
// The last two nodes belong to the far-field closure, not the collocated
// operator; their derivatives come from the two-term tail model
// y = A + B r^{-2}, y = r^{n-2} u, interpolated through them. A one-sided
// stencil there amplifies seam round-off by u^{-4/(n-2)}/h^2 and reports
// spurious cone exits on states the closure rows accept.
NodeState node_state(const CurvatureSpec& spec, const RadialGrid& grid,
                     const std::vector<Row>& rows, const Eigen::VectorXd& u,
                     int i) {
  const int n = spec.n;
  const double c1 = 2.0 / (n - 2);
  const double c2 = 2.0 / ((n - 2.0) * (n - 2.0));
  const int m = grid.nodes() - 1;
  NodeState s;
  s.u = u[i];
  const double r = grid.r[i];
  if (i >= m - 1) {
    const double rho1 = 1.0 / (grid.r[m - 1] * grid.r[m - 1]);
    const double rho0 = 1.0 / (grid.r[m] * grid.r[m]);
    const double y1 = std::pow(grid.r[m - 1], n - 2.0) * u[m - 1];
    const double y0 = std::pow(grid.r[m], n - 2.0) * u[m];
    const double B = (y1 - y0) / (rho1 - rho0);
    const double A = y0 - B * rho0;
    // u = A r^{2-n} + B r^{-n}; the pure A term has lambda = 0 exactly
    s.du = (2.0 - n) * A * std::pow(r, 1.0 - n) -
           n * B * std::pow(r, -n - 1.0);
    s.d2u = (2.0 - n) * (1.0 - n) * A * std::pow(r, -n) +
            n * (n + 1.0) * B * std::pow(r, -n - 2.0);
  } else {
    const Row& row = rows[i];
    s.du = row.w1.dot(u.segment(row.jlo, row.count()));
    s.d2u = row.w2.dot(u.segment(row.jlo, row.count()));
  }
  s.w1 = std::pow(s.u, -(n + 2.0) / (n - 2.0));
  s.w2 = s.w1 / s.u;
  const double du_over_r = (r == 0.0) ? s.d2u - s.du * s.du / s.u : s.du / r;
  s.lam_rad = -c1 * s.w1 * s.d2u + (n - 1) * c2 * s.w2 * s.du * s.du;
  s.lam_tan = -c1 * s.w1 * du_over_r - c2 * s.w2 * s.du * s.du;
  s.lam = Eigen::VectorXd::Constant(n, s.lam_tan);
  s.lam[0] = s.lam_rad;
  if (s.lam.allFinite()) s.in_cone = spec_membership(spec, s.lam);
  return s;
}

// Residual and (optionally) the banded Jacobian with respect to log u.
Eigen::VectorXd assemble(const CurvatureSpec& spec, const RadialGrid& grid,
                         const std::vector<Row>& rows,
                         const Eigen::VectorXd& u, double far_field_coeff,
                         BandMatrix* jac) {
  const int n = spec.n;
  const int m = grid.nodes() - 1;
  if (far_field_coeff <= 0.0)
    fail(ErrorCode::BadInput, "far-field coefficient must be positive");
  if (!u.allFinite())
    fail(ErrorCode::BadInput, "non-finite state");
  if (u.minCoeff() <= 0.0)
    fail(ErrorCode::NonpositiveValue, "state must be positive");

  const double c1 = 2.0 / (n - 2);
  const double c2 = 2.0 / ((n - 2.0) * (n - 2.0));
  const double a1 = -(n + 2.0) / (n - 2.0);  // d log w1 / d log u
  const double a2 = -2.0 * n / (n - 2.0);    // d log w2 / d log u

  // Cone audit over the collocated nodes before touching f. The center and
  // closure rows evaluate no f; their cone membership is a post-hoc
  // certificate, not an evaluability requirement, and at the closure nodes
  // it only settles once the collinearity row has converged.
  std::vector<NodeState> states(m + 1);
  std::vector<int> bad;
  for (int i = 0; i <= m; ++i) {
    states[i] = node_state(spec, grid, rows, u, i);
    if (!states[i].in_cone && i >= 1 && i <= m - 2) bad.push_back(i);
  }
  if (!bad.empty())
    fail(ErrorCode::ConeViolation, "state leaves the cone", bad);

  Eigen::VectorXd res(m + 1);
  res[0] = states[0].du;  // u'(0) = 0
  // Far field matched at the last two nodes. Node M pins the amplitude
  // y_M = c for y = r^{n-2} u; node M-1 asks y to be affine in r^{-2}
  // across the last three nodes, which the two-term tail
  // c r^{2-n} (1 + b r^{-2}) satisfies identically. Collocating a one-sided
  // second derivative at M-1 instead makes the tail block so stiff that
  // damped Newton crawls.
  res[m] = std::log(u[m]) + (n - 2.0) * std::log(grid.r[m]) -
           std::log(far_field_coeff);
  {
    const double y2 = std::pow(grid.r[m - 2], n - 2.0) * u[m - 2];
    const double y1 = std::pow(grid.r[m - 1], n - 2.0) * u[m - 1];
    const double y0 = std::pow(grid.r[m], n - 2.0) * u[m];
    const double g1 =
        1.0 / (grid.r[m - 1] * grid.r[m - 1]) - 1.0 / (grid.r[m] * grid.r[m]);
    const double g2 = 1.0 / (grid.r[m - 2] * grid.r[m - 2]) -
                      1.0 / (grid.r[m - 1] * grid.r[m - 1]);
    const double scale = far_field_coeff * (g1 + g2);
    res[m - 1] = (g1 * y2 - (g1 + g2) * y1 + g2 * y0) / scale;
    if (jac != nullptr) {
      jac->at(m - 1, m - 2) = g1 * y2 / scale;
      jac->at(m - 1, m - 1) = -(g1 + g2) * y1 / scale;
      jac->at(m - 1, m) = g2 * y0 / scale;
    }
  }
  if (jac != nullptr) {
    for (int j = 0; j < rows[0].count(); ++j)
      jac->at(0, rows[0].jlo + j) = rows[0].w1[j] * u[rows[0].jlo + j];
    jac->at(m, m) = 1.0;
  }

  for (int i = 1; i < m - 1; ++i) {
    const NodeState& s = states[i];
    res[i] = f_eval(spec, s.lam) - 1.0;
    if (jac == nullptr) continue;
    const Eigen::VectorXd g = f_gradient(spec, s.lam);
    const double g_rad = g[0];
    const double g_tan = g.tail(n - 1).sum();
    const Row& row = rows[i];
    const double r = grid.r[i];
    // split each eigenvalue into its w1 and w2 parts: the diagonal picks up
    // the log-derivative of the weights on top of the stencil terms
    const double rad1 = -c1 * s.w1 * s.d2u;
    const double rad2 = (n - 1) * c2 * s.w2 * s.du * s.du;
    const double tan1 = -c1 * s.w1 * s.du / r;
    const double tan2 = -c2 * s.w2 * s.du * s.du;
    for (int j = 0; j < row.count(); ++j) {
      const int col = row.jlo + j;
      double d_rad = -c1 * s.w1 * row.w2[j] +
                     2.0 * (n - 1) * c2 * s.w2 * s.du * row.w1[j];
      double d_tan = -c1 * s.w1 * row.w1[j] / r -
                     2.0 * c2 * s.w2 * s.du * row.w1[j];
      d_rad *= u[col];
      d_tan *= u[col];
      if (col == i) {
        d_rad += a1 * rad1 + a2 * rad2;
        d_tan += a1 * tan1 + a2 * tan2;
      }
      jac->at(i, col) = g_rad * d_rad + g_tan * d_tan;
    }
  }
  return res;
}

// Backward-error resolution of the interior rows: one ulp of relative
// rounding on every node moves row i by at most sum_j |J_ij| eps.
double residual_floor(const BandMatrix& jac) {
  const int m = jac.size() - 1;
  double worst = 0.0;
  for (int i = 1; i < m; ++i) {
    double s = 0.0;
    for (int j = std::max(0, i - jac.lower());
         j <= std::min(m, i + jac.upper()); ++j)
      s += std::abs(jac.coeff(i, j));
    worst = std::max(worst, s);
  }
  return worst * std::numeric_limits<double>::epsilon();
}

double sup_norm(const Eigen::VectorXd& x) { return x.cwiseAbs().maxCoeff(); }

// Last-pair power-law certificate: |log(u_M/u_{M-1}) - (2-n) log(r_M/r_{M-1})|.
double tail_mismatch_of(int n, const RadialGrid& grid,
                        const Eigen::VectorXd& u) {
  const int m = grid.nodes() - 1;
  return std::abs(std::log(u[m] / u[m - 1]) -
                  (2.0 - n) * std::log(grid.r[m] / grid.r[m - 1]));
}

bool recoverable(ErrorCode c) {
  return c == ErrorCode::ConeViolation || c == ErrorCode::BadInput ||
         c == ErrorCode::NonpositiveValue || c == ErrorCode::Domain;
}

void append_double(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

}  // namespace

nlohmann::json SolverConfig::to_json() const {
  nlohmann::json j;
  j["newton_tol"] = newton_tol;
  j["max_newton"] = max_newton;
  j["backtrack_factor"] = backtrack_factor;
  j["max_backtracks"] = max_backtracks;
  j["dt_init"] = dt_init;
  j["dt_min"] = dt_min;
  j["grid_m"] = grid_m;
  j["r_max"] = r_max;
  if (far_field_coeff)
    j["far_field_coeff"] = *far_field_coeff;
  else
    j["far_field_coeff"] = nullptr;
  j["tail_tol"] = tail_tol;
  return j;
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::BadInput, "solver config must be an object");
  SolverConfig c;
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const nlohmann::json& val = item.value();
    if (key == "newton_tol") c.newton_tol = val.get<double>();
    else if (key == "max_newton") c.max_newton = val.get<int>();
    else if (key == "backtrack_factor") c.backtrack_factor = val.get<double>();
    else if (key == "max_backtracks") c.max_backtracks = val.get<int>();
    else if (key == "dt_init") c.dt_init = val.get<double>();
    else if (key == "dt_min") c.dt_min = val.get<double>();
    else if (key == "grid_m") c.grid_m = val.get<int>();
    else if (key == "r_max") c.r_max = val.get<double>();
    else if (key == "tail_tol") c.tail_tol = val.get<double>();
    else if (key == "far_field_coeff") {
      if (!val.is_null()) c.far_field_coeff = val.get<double>();
    } else {
      fail(ErrorCode::BadInput, "unknown solver config key: " + key);
    }
  }
  if (c.newton_tol <= 0.0 || c.max_newton < 1 || c.max_backtracks < 1 ||
      c.backtrack_factor <= 0.0 || c.backtrack_factor >= 1.0 ||
      c.dt_init <= 0.0 || c.dt_init > 1.0 || c.dt_min <= 0.0 ||
      c.grid_m < 8 || c.r_max <= 0.0 || c.tail_tol <= 0.0)
    fail(ErrorCode::BadInput, "solver config out of range");
  if (c.far_field_coeff && *c.far_field_coeff <= 0.0)
    fail(ErrorCode::BadInput, "far-field coefficient must be positive");
  return c;
}

RadialGrid RadialGrid::graded(int m, double r_max) {
  if (m < 8) fail(ErrorCode::BadInput, "grid needs at least 8 intervals");
  if (r_max <= 0.0) fail(ErrorCode::BadInput, "grid radius must be positive");
  RadialGrid g;
  g.r.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i) / m;
    g.r[i] = r_max * t * t;
  }
  return g;
}

BandMatrix::BandMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
  if (n < 1 || kl < 0 || ku < 0) fail(ErrorCode::BadInput, "bad band shape");
  store_ = Eigen::MatrixXd::Zero(kl + ku + 1, n);
}

double& BandMatrix::at(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || j - i > ku_ || i - j > kl_)
    fail(ErrorCode::BadInput, "entry outside the band");
  return store_(ku_ + i - j, j);
}

double BandMatrix::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || j - i > ku_ || i - j > kl_)
    return 0.0;
  return store_(ku_ + i - j, j);
}

Eigen::MatrixXd BandMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j)
      d(i, j) = coeff(i, j);
  return d;
}

Eigen::VectorXd BandMatrix::solve(const Eigen::VectorXd& rhs) const {
  if (static_cast<int>(rhs.size()) != n_)
    fail(ErrorCode::BadInput, "right-hand side has wrong length");
  const int n = n_, kl = kl_, ku = ku_;
  const int kw = kl + ku;  // upper bandwidth after pivoting fill-in

  // LAPACK-style working band: entry (i,j) at ab(kl+ku+i-j, j)
  Eigen::MatrixXd ab = Eigen::MatrixXd::Zero(2 * kl + ku + 1, n);
  Eigen::VectorXd x = rhs;

  // row equilibration in the max norm
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
      s = std::max(s, std::abs(coeff(i, j)));
    if (s == 0.0)
      fail(ErrorCode::SingularJacobian, "zero row in the Jacobian");
    for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
      ab(kl + ku + i - j, j) = coeff(i, j) / s;
    x[i] /= s;
  }

  // banded LU with partial pivoting
  std::vector<int> piv(n);
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (int j = 0; j < n; ++j) {
    const int ilast = std::min(j + kl, n - 1);
    int p = j;
    for (int i = j + 1; i <= ilast; ++i)
      if (std::abs(ab(kl + ku + i - j, j)) >
          std::abs(ab(kl + ku + p - j, j)))
        p = i;
    piv[j] = p;
    if (p != j) {
      const int clast = std::min(j + kw, n - 1);
      for (int c = j; c <= clast; ++c)
        std::swap(ab(kl + ku + j - c, c), ab(kl + ku + p - c, c));
      std::swap(x[j], x[p]);
    }
    const double diag = ab(kl + ku, j);
    const double ad = std::abs(diag);
    dmin = std::min(dmin, ad);
    dmax = std::max(dmax, ad);
    if (ad < 1e-300)
      fail(ErrorCode::SingularJacobian, "vanishing pivot");
    for (int i = j + 1; i <= ilast; ++i) {
      const double mult = ab(kl + ku + i - j, j) / diag;
      ab(kl + ku + i - j, j) = mult;
      const int clast = std::min(j + kw, n - 1);
      for (int c = j + 1; c <= clast; ++c)
        ab(kl + ku + i - c, c) -= mult * ab(kl + ku + j - c, c);
      x[i] -= mult * x[j];
    }
  }
  if (dmin < 1e-12 * dmax)
    fail(ErrorCode::SingularJacobian, "pivot ratio below 1e-12");

  // back substitution
  for (int j = n - 1; j >= 0; --j) {
    const int clast = std::min(j + kw, n - 1);
    double acc = x[j];
    for (int c = j + 1; c <= clast; ++c)
      acc -= ab(kl + ku + j - c, c) * x[c];
    x[j] = acc / ab(kl + ku, j);
  }
  return x;
}

Eigen::VectorXd radial_residual(const CurvatureSpec& spec,
                                const RadialGrid& grid,
                                const Eigen::VectorXd& u,
                                double far_field_coeff) {
  if (grid.nodes() != static_cast<int>(u.size()))
    fail(ErrorCode::BadInput, "state length does not match the grid");
  if (u.minCoeff() <= 0.0)
    fail(ErrorCode::NonpositiveValue, "state must be positive");
  const std::vector<Row> rows = build_rows(grid);
  return assemble(spec, grid, rows, u, far_field_coeff, nullptr);
}

BandMatrix radial_jacobian(const CurvatureSpec& spec, const RadialGrid& grid,
                           const Eigen::VectorXd& u, double far_field_coeff) {
  if (grid.nodes() != static_cast<int>(u.size()))
    fail(ErrorCode::BadInput, "state length does not match the grid");
  if (u.minCoeff() <= 0.0)
    fail(ErrorCode::NonpositiveValue, "state must be positive");
  const std::vector<Row> rows = build_rows(grid);
  BandMatrix jac(grid.nodes(), kBand, kBand);
  assemble(spec, grid, rows, u, far_field_coeff, &jac);
  return jac;
}

Eigen::VectorXd second_difference_coefficients(const CurvatureSpec& spec,
                                               const RadialGrid& grid,
                                               const Eigen::VectorXd& u) {
  if (grid.nodes() != static_cast<int>(u.size()))
    fail(ErrorCode::BadInput, "state length does not match the grid");
  if (u.minCoeff() <= 0.0)
    fail(ErrorCode::NonpositiveValue, "state must be positive");
  const int n = spec.n;
  const int m = grid.nodes() - 1;
  const double c1 = 2.0 / (n - 2);
  const std::vector<Row> rows = build_rows(grid);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m + 1);
  for (int i = 1; i < m - 1; ++i) {
    const NodeState s = node_state(spec, grid, rows, u, i);
    if (!s.in_cone)
      fail(ErrorCode::ConeViolation, "state leaves the cone", {i});
    const Eigen::VectorXd g = f_gradient(spec, s.lam);
    out[i] = g[0] * s.w1 * (-c1);  // dF_i / d(second difference of u)
  }
  return out;
}

nlohmann::json RadialSolution::to_json() const {
  nlohmann::json j;
  j["spec"] = spec.to_json();
  j["t"] = t;
  nlohmann::json r = nlohmann::json::array(), u = nlohmann::json::array();
  for (int i = 0; i < radii.size(); ++i) {
    r.push_back(radii[i]);
    u.push_back(values[i]);
  }
  j["radii"] = r;
  j["values"] = u;
  j["residual_norm"] = residual_norm;
  return j;
}

RadialSolution RadialSolution::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::BadInput, "solution must be an object");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key != "spec" && key != "t" && key != "radii" && key != "values" &&
        key != "residual_norm")
      fail(ErrorCode::BadInput, "unknown solution key: " + key);
  }
  for (const char* key : {"spec", "t", "radii", "values", "residual_norm"})
    if (!j.contains(key))
      fail(ErrorCode::BadInput, std::string("solution needs ") + key);
  RadialSolution s;
  s.spec = CurvatureSpec::from_json(j.at("spec"));
  s.t = j.at("t").get<double>();
  const auto rr = j.at("radii").get<std::vector<double>>();
  const auto uu = j.at("values").get<std::vector<double>>();
  if (rr.size() != uu.size() || rr.size() < 2)
    fail(ErrorCode::BadInput, "radii and values must match");
  s.radii = Eigen::Map<const Eigen::VectorXd>(rr.data(), rr.size());
  s.values = Eigen::Map<const Eigen::VectorXd>(uu.data(), uu.size());
  s.residual_norm = j.at("residual_norm").get<double>();
  return s;
}

std::string RadialSolution::to_csv() const {
  RadialGrid grid;
  grid.r = radii;
  const std::vector<Row> rows = build_rows(grid);
  std::string out = "r,u,lambda_rad,lambda_tan,f_residual\n";
  for (int i = 0; i < grid.nodes(); ++i) {
    const NodeState s = node_state(spec, grid, rows, values, i);
    append_double(out, radii[i]);
    out += ',';
    append_double(out, values[i]);
    out += ',';
    append_double(out, s.lam_rad);
    out += ',';
    append_double(out, s.lam_tan);
    out += ',';
    if (s.in_cone)
      append_double(out, f_eval(spec, s.lam) - 1.0);
    else
      out += "nan";
    out += '\n';
  }
  return out;
}

RadialSolution newton_solve(const CurvatureSpec& spec,
                            const Eigen::VectorXd& init,
                            const SolverConfig& config) {
  const int n = spec.n;
  const RadialGrid grid = RadialGrid::graded(config.grid_m, config.r_max);
  const int m = config.grid_m;
  if (static_cast<int>(init.size()) != m + 1)
    fail(ErrorCode::BadInput, "initial state length does not match the grid");
  if (!init.allFinite() || init.minCoeff() <= 0.0)
    fail(ErrorCode::NonpositiveValue, "initial state must be positive");

  const double c_far = config.far_field_coeff
                           ? *config.far_field_coeff
                           : init[m] * std::pow(grid.r[m], n - 2.0);
  const std::vector<Row> rows = build_rows(grid);

  Eigen::VectorXd v = init.array().log();
  Eigen::VectorXd res;
  try {
    res = assemble(spec, grid, rows, init, c_far, nullptr);
  } catch (const Error& e) {
    if (e.code == ErrorCode::ConeViolation)
      fail(ErrorCode::ConeExit, "initial state leaves the cone", e.nodes);
    throw;
  }

  BandMatrix jac(m + 1, kBand, kBand);
  int iters = 0;
  int uphill = 0;  // consecutive watchdog steps taken without a new best
  double best_seen = sup_norm(res);
  bool converged = best_seen <= config.newton_tol;
  while (!converged && iters < config.max_newton) {
    assemble(spec, grid, rows, v.array().exp(), c_far, &jac);
    const double floor = residual_floor(jac);
    const Eigen::VectorXd dv = jac.solve(-res);
    const double base_norm = sup_norm(res);

    // damped search asking for a real decrease, not a noise-level one
    double step = 1.0;
    bool accepted = false;
    bool cone_blocked = false;
    bool have_fallback = false;
    double fallback_norm = base_norm;
    Eigen::VectorXd v_fallback, res_fallback;
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      const Eigen::VectorXd v_try = v + step * dv;
      try {
        const Eigen::VectorXd res_try =
            assemble(spec, grid, rows, v_try.array().exp(), c_far, nullptr);
        cone_blocked = false;
        const double norm_try = sup_norm(res_try);
        if (norm_try <= kSufficientDecrease * base_norm) {
          v = v_try;
          res = res_try;
          accepted = true;
          break;
        }
        if (norm_try < fallback_norm) {
          fallback_norm = norm_try;
          v_fallback = v_try;
          res_fallback = res_try;
          have_fallback = true;
        }
      } catch (const Error& e) {
        if (!recoverable(e.code)) throw;
        cone_blocked = (e.code == ErrorCode::ConeViolation);
      }
      step *= config.backtrack_factor;
    }
    if (!accepted) {
      // a residual the damped search cannot improve and that sits inside the
      // rounding resolution of the rows is converged for this precision
      if (base_norm <= std::max(config.newton_tol, kResidualSlack * floor)) {
        converged = true;
        break;
      }
      // Watchdog: near the wide-domain tail the second-order term of the
      // stiff rows beats every damped decrease, yet the full step still
      // lands inside the quadratic basin; allow it to go uphill briefly.
      if (uphill < 2) {
        try {
          const Eigen::VectorXd v_try = v + dv;
          const Eigen::VectorXd res_try =
              assemble(spec, grid, rows, v_try.array().exp(), c_far, nullptr);
          v = v_try;
          res = res_try;
          ++uphill;
          ++iters;
          continue;
        } catch (const Error& e) {
          if (!recoverable(e.code)) throw;
          cone_blocked =
              cone_blocked || (e.code == ErrorCode::ConeViolation);
        }
      }
      if (have_fallback) {  // last resort, crawl on the best damped step
        v = v_fallback;
        res = res_fallback;
        accepted = true;
      } else if (cone_blocked) {
        fail(ErrorCode::ConeExit, "every damped step leaves the cone");
      } else {
        fail(ErrorCode::MaxIter, "line search stalled");
      }
    }
    ++iters;
    const double now = sup_norm(res);
    if (now < best_seen) {
      best_seen = now;
      uphill = 0;
    }
    // stop at the rounding resolution of the rows: any further decrease is
    // noise luck, and chasing it burns iterations without meaning
    converged = now <= std::max(config.newton_tol, kResidualSlack * floor);
  }

  RadialSolution sol;
  sol.spec = spec;
  sol.t = spec.kind == CurvatureSpec::Kind::Homotopy ? spec.t : 1.0;
  sol.radii = grid.r;
  sol.values = v.array().exp();
  sol.newton_iters = iters;
  sol.far_field_coeff = c_far;

  // post-hoc certificates, all recomputed at the returned state
  assemble(spec, grid, rows, sol.values, c_far, &jac);
  sol.noise_floor = residual_floor(jac);
  const double resolution =
      std::max(config.newton_tol, kResidualSlack * sol.noise_floor);
  if (!converged && sup_norm(res) > resolution) {
    std::ostringstream os;
    os << "no convergence within the iteration budget (residual "
       << sup_norm(res) << ", target " << resolution
       << "); coarse far fields leave the damped step almost no room -- "
          "refine grid_m or shrink r_max";
    fail(ErrorCode::MaxIter, os.str());
  }
  sol.residual_norm = sup_norm(res.segment(1, m - 1));
  sol.cone_ok.assign(m + 1, false);
  for (int i = 0; i <= m; ++i)
    sol.cone_ok[i] = node_state(spec, grid, rows, sol.values, i).in_cone;
  sol.tail_mismatch = tail_mismatch_of(n, grid, sol.values);
  sol.tail_ok = sol.tail_mismatch <= config.tail_tol;
  const bool cone_all =
      std::all_of(sol.cone_ok.begin(), sol.cone_ok.end(),
                  [](bool b) { return b; });
  sol.certified =
      cone_all && sol.residual_norm <= resolution && sol.tail_ok;
  return sol;
}

nlohmann::json ContinuationPath::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json js;
    js["t"] = s.t;
    js["residual_norm"] = s.residual_norm;
    js["monitored"] = s.monitored;
    js["newton_iters"] = s.newton_iters;
    steps_json.push_back(js);
  }
  nlohmann::json j;
  j["steps"] = steps_json;
  j["final"] = final_solution.to_json();
  j["monitored_t0"] = monitored_t0;
  j["monitored_max"] = monitored_max;
  return j;
}

ContinuationPath continuation_solve(const CurvatureSpec& base,
                                    const SolverConfig& config) {
  if (base.kind != CurvatureSpec::Kind::SigmaK)
    fail(ErrorCode::BadInput, "continuation base must be a sigma_k spec");
  const int n = base.n;
  const RadialGrid grid = RadialGrid::graded(config.grid_m, config.r_max);
  const int m = config.grid_m;
  const double r_m = grid.r[m];

  const double kappa = bubble_kappa(n);
  const double fe = f_eval(base, Eigen::VectorXd::Ones(n));
  const double c_inf =
      config.far_field_coeff
          ? *config.far_field_coeff
          : bubble_tail_coefficient(
                n, bubble_exact(base, 1.0, Eigen::VectorXd::Zero(n)));

  // Closed-form bubble for the member at t: f_t(mu e) = mu (t + n(1-t)) f(e),
  // so the scale with asymptotic tail c_inf and its amplitude follow.
  auto member_bubble = [&](double t, double& a, double& s) {
    const double fet = (t + n * (1.0 - t)) * fe;
    s = std::sqrt(kappa * fet) * std::pow(c_inf, -2.0 / (n - 2));
    a = std::pow(kappa * s * s * fet, 0.25 * (n - 2));
  };
  // Gauge for the t-solve: the exact finite-radius tail of that bubble.
  auto member_gauge = [&](double t) {
    double a = 0.0, s = 0.0;
    member_bubble(t, a, s);
    return a * std::pow(1.0 + s * s * r_m * r_m, -0.5 * (n - 2)) *
           std::pow(r_m, n - 2.0);
  };
  auto spec_at = [&](double t) {
    return t >= 1.0 ? base : CurvatureSpec::homotopy(n, base.k, t);
  };
  auto monitored_of = [](const RadialSolution& sol) {
    return sol.values.maxCoeff() / sol.values.minCoeff();
  };

  SolverConfig local = config;
  ContinuationPath path;

  double a0 = 0.0, s0 = 0.0;
  member_bubble(0.0, a0, s0);
  Eigen::VectorXd u_prev = bubble_on_grid(n, grid, a0, s0);
  local.far_field_coeff = member_gauge(0.0);
  RadialSolution sol = newton_solve(spec_at(0.0), u_prev, local);
  path.steps.push_back(
      {0.0, sol.residual_norm, monitored_of(sol), sol.newton_iters});
  u_prev = sol.values;

  double t_cur = 0.0;
  double dt = config.dt_init;
  while (t_cur < 1.0) {
    const double t_next = std::min(1.0, t_cur + dt);
    local.far_field_coeff = member_gauge(t_next);
    bool ok = true;
    try {
      sol = newton_solve(spec_at(t_next), u_prev, local);
    } catch (const Error& e) {
      if (e.code != ErrorCode::ConeExit && e.code != ErrorCode::MaxIter &&
          e.code != ErrorCode::SingularJacobian)
        throw;
      ok = false;
    }
    if (!ok) {
      dt *= 0.5;
      if (dt < config.dt_min)
        fail(ErrorCode::ContinuationStall,
             "step size collapsed before reaching the target");
      continue;
    }
    t_cur = t_next;
    u_prev = sol.values;
    path.steps.push_back(
        {t_cur, sol.residual_norm, monitored_of(sol), sol.newton_iters});
    dt = std::min(2.0 * dt, config.dt_init);
  }

  path.final_solution = sol;
  path.monitored_t0 = path.steps.front().monitored;
  path.monitored_max = 0.0;
  for (const auto& s : path.steps)
    path.monitored_max = std::max(path.monitored_max, s.monitored);
  return path;
}

Eigen::VectorXd bubble_on_grid(int n, const RadialGrid& grid, double a,
                               double s) {
  if (a <= 0.0 || s <= 0.0)
    fail(ErrorCode::BadInput, "bubble needs positive amplitude and scale");
  Eigen::VectorXd u(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i)
    u[i] = a * std::pow(1.0 + s * s * grid.r[i] * grid.r[i], -0.5 * (n - 2));
  return u;
}

}  // namespace sigmak
