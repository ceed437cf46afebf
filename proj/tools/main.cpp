// SPDX-License-Identifier: Apache-2.0

// sigmak: batch front end over the library. Subcommands: cone-check, eval,
// bubble, solve, continue, audit-harnack, verify. Every run prints one
// schema-versioned JSON envelope (resolved config, seed, result) to stdout,
// newline terminated; --out writes files. Exit codes: 0 success / audit
// pass, 1 computation failure or audit fail, 2 usage error. The subcommand
// handlers only parse and delegate; all arithmetic lives in the library.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "sigmak/bubble.hpp"
#include "sigmak/curvature.hpp"
#include "sigmak/errors.hpp"
#include "sigmak/field.hpp"
#include "sigmak/harnack.hpp"
#include "sigmak/radial_solver.hpp"
#include "sigmak/schouten.hpp"
#include "sigmak/sym.hpp"
#include "sigmak/verify.hpp"

namespace {

using nlohmann::json;
using sigmak::ErrorCode;
using sigmak::fail;

struct RunArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "json";
  std::string suite = "all";  // verify only
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json jvec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_of(const json& j, int expect, const std::string& what) {
  if (!j.is_array() || j.empty())
    fail(ErrorCode::BadInput, what + " must be a nonempty array");
  if (expect >= 0 && static_cast<int>(j.size()) != expect)
    fail(ErrorCode::BadInput, what + " must have length " +
                                  std::to_string(expect));
  Eigen::VectorXd v(j.size());
  int i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorCode::BadInput, what + " must be numeric");
    v[i++] = x.get<double>();
  }
  return v;
}

json load_config(const RunArgs& a) {
  if (a.config_path.empty()) return json::object();
  std::ifstream in(a.config_path);
  if (!in)
    fail(ErrorCode::BadInput, "cannot read config file: " + a.config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::BadInput,
         std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    fail(ErrorCode::BadInput, "config must be a JSON object");
  return j;
}

// Unknown keys are errors, not warnings.
void check_keys(const json& j, std::initializer_list<const char*> keys,
                const char* what) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      fail(ErrorCode::BadInput,
           std::string("unknown ") + what + " key: " + item.key());
  }
}

void require_keys(const json& j, std::initializer_list<const char*> keys,
                  const char* what) {
  for (const char* k : keys)
    if (!j.contains(k))
      fail(ErrorCode::BadInput,
           std::string(what) + " config needs \"" + k + "\"");
}

std::uint64_t resolve_seed(const RunArgs& a, const json& cfg) {
  if (a.seed) return *a.seed;
  if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
  return 0;
}

json envelope_of(const char* cmd, std::uint64_t seed, json config) {
  json env;
  env["schema"] = "1";
  env["command"] = cmd;
  env["seed"] = seed;
  env["config"] = std::move(config);
  return env;
}

json error_json(const sigmak::Error& e) {
  json j;
  j["code"] = sigmak::to_string(e.code);
  j["message"] = e.what();
  if (!e.nodes.empty()) j["nodes"] = e.nodes;
  return j;
}

std::string strip_known_ext(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return path;
  if (slash != std::string::npos && dot < slash) return path;
  const std::string ext = path.substr(dot);
  if (ext == ".json" || ext == ".csv") return path.substr(0, dot);
  return path;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::BadInput, "cannot write: " + path);
  out << text;
  if (!out) fail(ErrorCode::BadInput, "write failed: " + path);
}

struct Output {
  json envelope;
  std::string csv;           // tabular rendering for --format csv
  std::string solution_csv;  // solve / continue per-node table
};

void emit(const RunArgs& a, const Output& o) {
  const std::string dumped = o.envelope.dump() + "\n";
  std::cout << dumped;
  if (a.out_path.empty()) return;
  if (!o.solution_csv.empty()) {
    // solve and continue always write the JSON + CSV pair
    const std::string stem = strip_known_ext(a.out_path);
    write_file(stem + ".json", dumped);
    write_file(stem + ".csv", o.solution_csv);
  } else if (a.format == "csv" && !o.csv.empty()) {
    write_file(a.out_path, o.csv);
  } else {
    write_file(a.out_path, dumped);
  }
}

int fail_with(const RunArgs& a, json env, const sigmak::Error& e) {
  if (e.code == ErrorCode::BadInput) throw e;  // usage, handled in main
  env["error"] = error_json(e);
  emit(a, {std::move(env), "", ""});
  return 1;
}

int run_cone_check(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"k", "vectors", "seed"}, "cone-check");
  require_keys(cfg, {"k", "vectors"}, "cone-check");
  const int k = cfg.at("k").get<int>();
  if (k < 1) fail(ErrorCode::BadInput, "k must be >= 1");
  const json& vecs = cfg.at("vectors");
  if (!vecs.is_array() || vecs.empty())
    fail(ErrorCode::BadInput, "vectors must be a nonempty array");

  int n = -1;
  json table = json::array();
  for (const auto& jv : vecs) {
    const Eigen::VectorXd lam = vec_of(jv, n, "vector");
    if (n < 0) {
      n = static_cast<int>(lam.size());
      if (k > n) fail(ErrorCode::BadInput, "k exceeds the vector length");
    }
    const Eigen::VectorXd s = sigmak::sigma_all(lam);
    json row;
    row["lambda"] = jvec(lam);
    row["sigma"] = jvec(s.segment(1, k));
    row["member"] = sigmak::in_gamma_k(lam, k);
    table.push_back(std::move(row));
  }

  std::string csv;
  for (int i = 1; i <= n; ++i)
    csv += "lambda_" + std::to_string(i) + ",";
  for (int i = 1; i <= k; ++i)
    csv += "sigma_" + std::to_string(i) + ",";
  csv += "member\n";
  for (const auto& row : table) {
    for (const auto& x : row.at("lambda")) csv += fmt17(x.get<double>()) + ",";
    for (const auto& x : row.at("sigma")) csv += fmt17(x.get<double>()) + ",";
    csv += row.at("member").get<bool>() ? "1\n" : "0\n";
  }

  json config;
  config["k"] = k;
  config["vectors"] = vecs;
  json env = envelope_of("cone-check", resolve_seed(a, cfg), config);
  env["result"] = json{{"n", n}, {"table", table}};
  emit(a, {std::move(env), std::move(csv), ""});
  return 0;
}

int run_eval(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"spec", "field", "points", "seed"}, "eval");
  require_keys(cfg, {"spec", "field", "points"}, "eval");
  const auto spec = sigmak::CurvatureSpec::from_json(cfg.at("spec"));
  const auto field = sigmak::field_from_json(spec.n, cfg.at("field"));
  const json& points = cfg.at("points");
  if (!points.is_array() || points.empty())
    fail(ErrorCode::BadInput, "points must be a nonempty array");

  json config;
  config["spec"] = spec.to_json();
  config["field"] = sigmak::field_to_json(field);
  config["points"] = points;
  json env = envelope_of("eval", resolve_seed(a, cfg), config);

  try {
    json rows = json::array();
    std::string csv;
    for (int i = 1; i <= spec.n; ++i) csv += "x_" + std::to_string(i) + ",";
    csv += "u,";
    for (int i = 1; i <= spec.n; ++i)
      csv += "lambda_" + std::to_string(i) + ",";
    csv += "member,f\n";
    for (const auto& jp : points) {
      const Eigen::VectorXd p = vec_of(jp, spec.n, "point");
      const auto A = sigmak::schouten_flat(*field, p);
      const Eigen::VectorXd lam = A.eigenvalues();
      const double u = field->value(p);
      const bool member = sigmak::spec_membership(spec, lam);
      json row;
      row["point"] = jvec(p);
      row["u"] = u;
      row["lambda"] = jvec(lam);
      row["member"] = member;
      row["f"] = member ? json(sigmak::f_eval(spec, lam)) : json(nullptr);
      rows.push_back(std::move(row));

      for (int i = 0; i < spec.n; ++i) csv += fmt17(p[i]) + ",";
      csv += fmt17(u) + ",";
      for (int i = 0; i < spec.n; ++i) csv += fmt17(lam[i]) + ",";
      csv += member ? "1," : "0,";
      csv += member ? fmt17(sigmak::f_eval(spec, lam)) : "nan";
      csv += "\n";
    }
    env["result"] = json{{"rows", rows}};
    emit(a, {std::move(env), std::move(csv), ""});
    return 0;
  } catch (const sigmak::Error& e) {
    return fail_with(a, std::move(env), e);
  }
}

int run_bubble(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"spec", "s", "center", "seed"}, "bubble");
  require_keys(cfg, {"spec"}, "bubble");
  const auto spec = sigmak::CurvatureSpec::from_json(cfg.at("spec"));
  const double s = cfg.value("s", 1.0);
  if (!(s > 0.0)) fail(ErrorCode::BadInput, "s must be positive");
  Eigen::VectorXd center = Eigen::VectorXd::Zero(spec.n);
  if (cfg.contains("center")) center = vec_of(cfg.at("center"), spec.n, "center");

  json config;
  config["spec"] = spec.to_json();
  config["s"] = s;
  config["center"] = jvec(center);
  json env = envelope_of("bubble", resolve_seed(a, cfg), config);

  try {
    const auto p = sigmak::bubble_exact(spec, s, center);
    const double kappa = sigmak::bubble_kappa(spec.n);
    const double tail = sigmak::bubble_tail_coefficient(spec.n, p);
    env["result"] = json{{"bubble", p.to_json()},
                         {"kappa", kappa},
                         {"tail_coefficient", tail}};
    std::string csv = "a,s,kappa,tail_coefficient";
    for (int i = 1; i <= spec.n; ++i) csv += ",center_" + std::to_string(i);
    csv += "\n" + fmt17(p.amplitude) + "," + fmt17(p.scale) + "," +
           fmt17(kappa) + "," + fmt17(tail);
    for (int i = 0; i < spec.n; ++i) csv += "," + fmt17(center[i]);
    csv += "\n";
    emit(a, {std::move(env), std::move(csv), ""});
    return 0;
  } catch (const sigmak::Error& e) {
    return fail_with(a, std::move(env), e);
  }
}

json solution_result(const sigmak::RadialSolution& sol) {
  json r;
  r["solution"] = sol.to_json();
  r["certified"] = sol.certified;
  r["cone_ok"] = std::all_of(sol.cone_ok.begin(), sol.cone_ok.end(),
                             [](bool b) { return b; });
  r["tail_mismatch"] = sol.tail_mismatch;
  r["tail_ok"] = sol.tail_ok;
  r["newton_iters"] = sol.newton_iters;
  r["far_field_coeff"] = sol.far_field_coeff;
  return r;
}

int run_solve(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"spec", "solver", "init_scale", "init_amplitude_factor",
                   "seed"},
             "solve");
  require_keys(cfg, {"spec"}, "solve");
  const auto spec = sigmak::CurvatureSpec::from_json(cfg.at("spec"));
  const auto solver = sigmak::SolverConfig::from_json(
      cfg.contains("solver") ? cfg.at("solver") : json::object());
  const double init_scale = cfg.value("init_scale", 1.0);
  const double init_factor = cfg.value("init_amplitude_factor", 1.0);
  if (!(init_scale > 0.0) || !(init_factor > 0.0))
    fail(ErrorCode::BadInput, "initializer parameters must be positive");

  json config;
  config["spec"] = spec.to_json();
  config["solver"] = solver.to_json();
  config["init_scale"] = init_scale;
  config["init_amplitude_factor"] = init_factor;
  json env = envelope_of("solve", resolve_seed(a, cfg), config);

  try {
    const auto grid = sigmak::RadialGrid::graded(solver.grid_m, solver.r_max);
    const auto bp = sigmak::bubble_exact(spec, init_scale,
                                         Eigen::VectorXd::Zero(spec.n));
    const Eigen::VectorXd init = sigmak::bubble_on_grid(
        spec.n, grid, bp.amplitude * init_factor, bp.scale);
    const auto sol = sigmak::newton_solve(spec, init, solver);
    env["result"] = solution_result(sol);
    emit(a, {std::move(env), "", sol.to_csv()});
    return sol.certified ? 0 : 1;
  } catch (const sigmak::Error& e) {
    return fail_with(a, std::move(env), e);
  }
}

int run_continue(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"spec", "solver", "seed"}, "continue");
  require_keys(cfg, {"spec"}, "continue");
  const auto spec = sigmak::CurvatureSpec::from_json(cfg.at("spec"));
  const auto solver = sigmak::SolverConfig::from_json(
      cfg.contains("solver") ? cfg.at("solver") : json::object());

  json config;
  config["spec"] = spec.to_json();
  config["solver"] = solver.to_json();
  json env = envelope_of("continue", resolve_seed(a, cfg), config);

  try {
    const auto path = sigmak::continuation_solve(spec, solver);
    json r = path.to_json();
    r["certified"] = path.final_solution.certified;
    r["steps_taken"] = path.steps.size();
    env["result"] = std::move(r);
    emit(a, {std::move(env), "", path.final_solution.to_csv()});
    return path.final_solution.certified ? 0 : 1;
  } catch (const sigmak::Error& e) {
    return fail_with(a, std::move(env), e);
  }
}

int run_audit_harnack(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"n", "field", "R", "delta", "spec", "samples", "seed"},
             "audit-harnack");
  require_keys(cfg, {"n", "field", "R"}, "audit-harnack");
  const int n = cfg.at("n").get<int>();
  if (n < 3) fail(ErrorCode::BadInput, "n must be >= 3");
  const auto field = sigmak::field_from_json(n, cfg.at("field"));
  const double R = cfg.at("R").get<double>();
  if (!(R > 0.0)) fail(ErrorCode::BadInput, "R must be positive");
  const int samples = cfg.value("samples", 100000);
  if (samples < 100) fail(ErrorCode::BadInput, "samples must be >= 100");
  std::optional<sigmak::CurvatureSpec> spec;
  if (cfg.contains("spec"))
    spec = sigmak::CurvatureSpec::from_json(cfg.at("spec"));
  if (!cfg.contains("delta") && !spec)
    fail(ErrorCode::BadInput,
         "audit-harnack needs \"delta\" or a \"spec\" to derive it from");
  const std::uint64_t seed = resolve_seed(a, cfg);

  json config;
  config["n"] = n;
  config["field"] = sigmak::field_to_json(field);
  config["R"] = R;
  config["samples"] = samples;
  if (spec) config["spec"] = spec->to_json();
  json env = envelope_of("audit-harnack", seed, config);

  try {
    double delta;
    if (cfg.contains("delta")) {
      delta = cfg.at("delta").get<double>();
      if (!(delta > 0.0)) fail(ErrorCode::BadInput, "delta must be positive");
    } else {
      delta = sigmak::certify_delta_matrix(*spec);
    }
    env["config"]["delta"] = delta;
    const auto report = sigmak::harnack_audit(
        *field, R, delta, spec ? &*spec : nullptr, seed, samples);
    env["result"] = report.to_json();
    std::string csv =
        "n,R,delta,sup_value,inf_value,product,bound,pass\n" +
        std::to_string(report.n) + "," + fmt17(report.R) + "," +
        fmt17(report.delta) + "," + fmt17(report.sup_value) + "," +
        fmt17(report.inf_value) + "," + fmt17(report.product) + "," +
        fmt17(report.bound) + "," + (report.pass ? "1" : "0") + "\n";
    emit(a, {std::move(env), std::move(csv), ""});
    return report.pass ? 0 : 1;
  } catch (const sigmak::Error& e) {
    return fail_with(a, std::move(env), e);
  }
}

int run_verify(const RunArgs& a) {
  const json cfg = load_config(a);
  check_keys(cfg, {"suite", "seed"}, "verify");
  std::string suite = a.suite;
  if (suite == "all" && cfg.contains("suite"))
    suite = cfg.at("suite").get<std::string>();
  const std::uint64_t seed = resolve_seed(a, cfg);

  // unknown suite names are usage errors (BadInput propagates to exit 2)
  const auto results = sigmak::run_verify_suites(suite, seed);

  json env = envelope_of("verify", seed, json{{"suite", suite}});
  bool all_pass = true;
  json suites = json::array();
  std::string csv = "suite,check,pass\n";
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    suites.push_back(r.to_json());
    for (const auto& [check, ok] : r.checks)
      csv += r.name + "," + check + "," + (ok ? "1" : "0") + "\n";
  }
  env["result"] = json{{"suites", suites}, {"all_pass", all_pass}};
  emit(a, {std::move(env), std::move(csv), ""});
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature cone, conformal field and radial solver toolkit"};
  app.require_subcommand(1);

  RunArgs args;
  std::uint64_t seed_val = 0;
  app.add_option("--config", args.config_path, "JSON config file");
  auto* seed_opt =
      app.add_option("--seed", seed_val, "sampling seed, recorded in output");
  app.add_option("--out", args.out_path, "output file path");
  app.add_option("--format", args.format, "output file format")
      ->check(CLI::IsMember({"json", "csv"}));

  const char* names[] = {"cone-check", "eval",          "bubble", "solve",
                         "continue",   "audit-harnack", "verify"};
  const char* descs[] = {
      "sigma_1..sigma_k table and cone verdicts for a vector list",
      "field values and curvature eigenvalues at points",
      "closed-form exact solution amplitude for a spec",
      "radial Newton solve from a bubble initializer",
      "homotopy continuation t: 0 -> 1 over a sigma_k base",
      "sup/inf product bound audit",
      "run the property suites"};
  for (int i = 0; i < 7; ++i)
    app.add_subcommand(names[i], descs[i])->fallthrough();
  app.get_subcommand("verify")->add_option(
      "suite", args.suite, "suite name or \"all\"");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) args.seed = seed_val;

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "cone-check") return run_cone_check(args);
    if (cmd == "eval") return run_eval(args);
    if (cmd == "bubble") return run_bubble(args);
    if (cmd == "solve") return run_solve(args);
    if (cmd == "continue") return run_continue(args);
    if (cmd == "audit-harnack") return run_audit_harnack(args);
    return run_verify(args);
  } catch (const sigmak::Error& e) {
    // whatever reaches here is malformed input or an unusable config
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
