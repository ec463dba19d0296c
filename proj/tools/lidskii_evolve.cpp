#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "lidskii/config.hpp"
#include "lidskii/contour.hpp"
#include "lidskii/errors.hpp"
#include "lidskii/operators.hpp"
#include "lidskii/outputs.hpp"
#include "lidskii/parallel.hpp"
#include "lidskii/solver.hpp"
#include "lidskii/spectral.hpp"

namespace {

using namespace lidskii;
using nlohmann::json;

struct CommonArgs {
  std::string config;
  std::string out;
  double tol = 0.0;
  bool tol_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ProblemConfig load_with_overrides(const CommonArgs& a) {
  ProblemConfig cfg = load_config(a.config);
  if (a.tol_set) cfg.quadrature.tol = a.tol;
  if (a.seed_set) cfg.seed = a.seed;
  if (!a.out.empty()) cfg.outputs = a.out;
  return cfg;
}

std::vector<cplx> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Contour make_contour(const ProblemConfig& cfg, const EvolutionProblem& p, const SpectralData& sd) {
  const std::vector<cplx> evs = to_std(sd.eigenvalues);
  Contour c = auto_contour(evs, p.mode.kappa(), p.times, cfg.quadrature.tol);
  const auto& o = cfg.contour;
  if (o.theta_zero || o.theta_iota || o.epsilon || o.cut_radius) {
    c = build_contour(0.0, o.theta_iota.value_or(c.theta_iota),
                      o.theta_zero.value_or(c.theta_zero), o.epsilon.value_or(c.epsilon),
                      o.cut_radius.value_or(c.cut_radius), p.mode.kappa());
    c.poles_hint = evs;
  }
  return c;
}

json mode_json(const Mode& m) {
  if (m.fractional) return json{{"fractional", true}, {"alpha", m.alpha}};
  return json{{"fractional", false}, {"n", m.n}};
}

json contour_json(const Contour& c, const QuadDiagnostics& d, bool ok, double min_distance) {
  return json{{"vertex_iota", c.vertex_iota},
              {"theta_iota", c.theta_iota},
              {"theta_zero", c.theta_zero},
              {"epsilon", c.epsilon},
              {"cut_radius", c.cut_radius},
              {"orientation", c.orientation},
              {"segment_count", c.segments.size()},
              {"truncation_radius", d.truncation_radius},
              {"node_count", d.node_count},
              {"panel_count", d.panel_count},
              {"est_tail", d.est_tail},
              {"cancellation_nats", d.cancellation_nats},
              {"validated", json{{"ok", ok}, {"min_distance", min_distance}}}};
}

// Checks the expanded time list before any heavy work; the empty list is a config error.
int check_times(const std::vector<double>& times) {
  if (times.empty()) {
    std::cerr << "times must be non-empty\n";
    return 2;
  }
  return 0;
}

int cmd_solve(const CommonArgs& args) {
  const ProblemConfig cfg = load_with_overrides(args);
  const EvolutionProblem p = build_problem(cfg);
  if (int rc = check_times(p.times)) return rc;

  const SpectralData sd = eigendecompose(p.op);
  const Contour contour = make_contour(cfg, p, sd);
  const auto [ok, min_distance] = validate_contour(contour, to_std(sd.eigenvalues));
  if (!ok)
    fail_numerical("contour-invalid",
                   "the contour does not enclose the spectrum cleanly (distance " +
                       format_g17(min_distance) + ")");

  const SolutionResult uc = solve_contour(p, contour, cfg.quadrature.tol);
  std::vector<SolutionResult> results{uc};

  json errors = json::object();
  if (!p.mode.fractional) {
    results.push_back(solve_oracle(p));
    const auto& uo = results.back();
    std::vector<double> evso;
    double mx = 0.0;
    for (std::size_t it = 0; it < p.times.size(); ++it) {
      const double dn = std::max(uo.states[it].norm(), 1e-300);
      evso.push_back((uc.states[it] - uo.states[it]).norm() / dn);
      mx = std::max(mx, evso.back());
    }
    errors["contour_vs_oracle"] = evso;
    errors["max_contour_vs_oracle"] = mx;
  } else {
    std::vector<double> resid, dgap;
    for (double t : p.times) {
      resid.push_back(fractional_residual(p, contour, t, cfg.quadrature.tol));
      dgap.push_back(derivative_identity_check(p, contour, t));
    }
    errors["substitution_residual"] = resid;
    errors["derivative_identity_gap"] = dgap;
  }

  json norms = json::object();
  for (const auto& r : results) {
    std::vector<double> ns;
    for (const auto& u : r.states) ns.push_back(u.norm());
    norms[r.method] = ns;
  }

  std::vector<std::string> methods;
  for (const auto& r : results) methods.push_back(r.method);
  const json summary{{"times", p.times},
                     {"mode", mode_json(p.mode)},
                     {"seed", cfg.seed},
                     {"dimension", p.op.dim()},
                     {"operator_kind", p.op.kind},
                     {"methods", methods},
                     {"errors", errors},
                     {"state_norms", norms},
                     {"quadrature",
                      json{{"tol", cfg.quadrature.tol},
                           {"node_count", uc.diagnostics.node_count},
                           {"panel_count", uc.diagnostics.panel_count},
                           {"truncation_radius", uc.diagnostics.truncation_radius},
                           {"est_tail", uc.diagnostics.est_tail},
                           {"cancellation_nats", uc.diagnostics.cancellation_nats}}},
                     {"threads", active_thread_count()}};

  ensure_directory(cfg.outputs);
  atomic_write_text(cfg.outputs + "/solution.csv", solution_csv(p.times, results));
  atomic_write_text(cfg.outputs + "/summary.json", summary.dump(2) + "\n");
  atomic_write_text(cfg.outputs + "/contour.json",
                    contour_json(contour, uc.diagnostics, ok, min_distance).dump(2) + "\n");
  std::cout << "wrote " << cfg.outputs << "/solution.csv, summary.json, contour.json\n";
  return 0;
}

int cmd_report(const CommonArgs& args) {
  const ProblemConfig cfg = load_with_overrides(args);
  const DiscretizedOperator op = build_operator(cfg.op);
  const int power = cfg.mode.fractional ? 1 : cfg.mode.n;

  const SpectralDiagnostics sdiag = spectral_diagnostics(op, power, cfg.seed);
  const SpectralData sd = eigendecompose(op);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);

  // Counting-function growth trend: s-numbers of the power operator sampled at powered
  // radii, normalized by the estimated growth rate r^rho_hat.
  std::vector<double> spow;
  {
    DiscretizedOperator oppow;
    if (op.is_diagonal()) {
      Vec d = Vec::Ones(op.dim());
      for (int i = 0; i < power; ++i) d = d.cwiseProduct(op.diag);
      oppow.diag = d;
      oppow.diagonal_only = true;
      oppow.kind = op.kind;
    } else {
      Mat m = Mat::Identity(op.dim(), op.dim());
      for (int i = 0; i < power; ++i) m = m * op.matrix;
      oppow.matrix = m;
      oppow.kind = op.kind;
    }
    spow = singular_values(oppow);
  }
  json trend = json::array();
  if (!sdiag.s_numbers.empty() && sdiag.rho_hat > 0.0) {
    const double lo = 1.0 / sdiag.s_numbers.front() * 1.5;
    const double hi = 1.0 / sdiag.s_numbers.back() * 0.9;
    if (hi > lo && lo > 0.0) {
      for (int k = 0; k < 8; ++k) {
        const double r = lo * std::pow(hi / lo, k / 7.0);
        double rp = 1.0;
        for (int i = 0; i < power; ++i) rp *= r;
        const double ratio = counting_function(spow, rp) / std::pow(r, sdiag.rho_hat);
        trend.push_back(json{{"r", r}, {"ratio", ratio}});
      }
    }
  }

  const std::size_t cap = 256;
  std::vector<double> s_head(sdiag.s_numbers.begin(),
                             sdiag.s_numbers.begin() +
                                 std::min(cap, sdiag.s_numbers.size()));
  std::vector<int> bd_head(br.boundaries.begin(),
                           br.boundaries.begin() +
                               std::min(cap, br.boundaries.size()));

  const json out{{"operator_kind", op.kind},
                 {"dimension", op.dim()},
                 {"s_numbers", s_head},
                 {"s_numbers_count", sdiag.s_numbers.size()},
                 {"rho_hat", sdiag.rho_hat},
                 {"mu_hat", sdiag.mu_hat},
                 {"mu_degenerate", sdiag.mu_degenerate},
                 {"sector", json{{"vertex", sdiag.sector_vertex},
                                 {"semi_angle", sdiag.sector_semi_angle}}},
                 {"accretivity", json{{"power", power},
                                      {"accretive", sdiag.accretive},
                                      {"margin", sdiag.accretivity_margin}}},
                 {"form_bounds", json{{"c1", sdiag.c1}, {"c2", sdiag.c2}}},
                 {"brackets", json{{"boundaries", bd_head},
                                   {"group_count", br.boundaries.size() - 1},
                                   {"tau", br.tau},
                                   {"gap_constant", br.gap_constant}}},
                 {"counting_ratio_trend", trend}};

  ensure_directory(cfg.outputs);
  atomic_write_text(cfg.outputs + "/diagnostics.json", out.dump(2) + "\n");
  std::cout << "wrote " << cfg.outputs << "/diagnostics.json\n";
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  const ProblemConfig cfg = load_with_overrides(args);
  const EvolutionProblem p = build_problem(cfg);
  if (int rc = check_times(p.times)) return rc;

  const SpectralData sd = eigendecompose(p.op);
  const Contour contour = make_contour(cfg, p, sd);
  const auto [ok, min_distance] = validate_contour(contour, to_std(sd.eigenvalues));
  if (!ok)
    fail_numerical("contour-invalid",
                   "the contour does not enclose the spectrum cleanly (distance " +
                       format_g17(min_distance) + ")");
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  const MethodComparison mc = compare_methods(p, contour, sd, br, cfg.quadrature.tol);

  std::string errors_csv;
  if (!p.mode.fractional) {
    errors_csv = "t,contour_vs_series,contour_vs_oracle,series_vs_oracle\n";
    for (std::size_t i = 0; i < mc.times.size(); ++i)
      errors_csv += format_g17(mc.times[i]) + "," + format_g17(mc.contour_vs_series[i]) + "," +
                    format_g17(mc.contour_vs_oracle[i]) + "," +
                    format_g17(mc.series_vs_oracle[i]) + "\n";
  } else {
    errors_csv = "t,contour_vs_series,substitution_residual,derivative_identity_gap\n";
    for (std::size_t i = 0; i < mc.times.size(); ++i)
      errors_csv += format_g17(mc.times[i]) + "," + format_g17(mc.contour_vs_series[i]) + "," +
                    format_g17(mc.fractional_resid[i]) + "," +
                    format_g17(mc.derivative_gap[i]) + "\n";
  }

  std::string group_csv = "t,nu,norm\n";
  for (std::size_t i = 0; i < mc.times.size(); ++i)
    for (std::size_t g = 0; g < mc.group_partial_norms[i].size(); ++g)
      group_csv += format_g17(mc.times[i]) + "," + std::to_string(g) + "," +
                   format_g17(mc.group_partial_norms[i][g]) + "\n";

  ensure_directory(cfg.outputs);
  atomic_write_text(cfg.outputs + "/errors.csv", errors_csv);
  atomic_write_text(cfg.outputs + "/group_norms.csv", group_csv);
  std::cout << "wrote " << cfg.outputs << "/errors.csv, group_norms.csv\n";
  return 0;
}

int cmd_validate(const CommonArgs& args) {
  const ProblemConfig cfg = load_with_overrides(args);
  const EvolutionProblem p = build_problem(cfg);
  if (int rc = check_times(p.times)) return rc;

  const SpectralData sd = eigendecompose(p.op);
  const Contour contour = make_contour(cfg, p, sd);
  const auto [ok, min_distance] = validate_contour(contour, to_std(sd.eigenvalues));

  const json out{{"config_ok", true},
                 {"operator_kind", p.op.kind},
                 {"dimension", p.op.dim()},
                 {"times", p.times},
                 {"contour", json{{"theta_iota", contour.theta_iota},
                                  {"theta_zero", contour.theta_zero},
                                  {"epsilon", contour.epsilon},
                                  {"cut_radius", contour.cut_radius},
                                  {"ok", ok},
                                  {"min_distance", min_distance}}}};
  std::cout << out.dump(2) << "\n";
  if (!ok) {
    std::cerr << "contour-invalid: the contour does not enclose the spectrum cleanly\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  lidskii::apply_thread_cap_from_env();

  CLI::App app{"evolution solver for discretized sectorial operators: contour quadrature, "
               "root-vector series, and spectral diagnostics"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "problem config JSON path")->required();
    sub->add_option("--out", args.out, "output directory (overrides config)");
    sub->add_option("--tol", args.tol, "quadrature tolerance (overrides config)");
    sub->add_option("--seed", args.seed, "random seed (overrides config)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the evolution problem and write results");
  CLI::App* report = app.add_subcommand("report", "spectral diagnostics report");
  CLI::App* compare = app.add_subcommand("compare", "pairwise method comparison");
  CLI::App* validate = app.add_subcommand("validate", "dry-run config and contour check");
  for (auto* sub : {solve, report, compare, validate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  args.tol_set = solve->count("--tol") || report->count("--tol") || compare->count("--tol") ||
                 validate->count("--tol");
  args.seed_set = solve->count("--seed") || report->count("--seed") || compare->count("--seed") ||
                  validate->count("--seed");

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (report->parsed()) return cmd_report(args);
    if (compare->parsed()) return cmd_compare(args);
    if (validate->parsed()) return cmd_validate(args);
  } catch (const lidskii::Error& e) {
    std::cerr << "lidskii-evolve: " << e.what() << "\n";
    return e.kind() == lidskii::ErrorKind::invalid_input ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "lidskii-evolve: unexpected failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
