#include "lidskii/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lidskii/errors.hpp"
#include "lidskii/operators.hpp"

namespace lidskii {
namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& what) { fail_input("schema-violation", what); }

template <typename T>
T get_or(const json& j, const char* key, T dv) {
  if (!j.is_object() || !j.contains(key)) return dv;
  try {
    return j.at(key).get<T>();
  } catch (...) {
    schema_fail(std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<cplx> parse_coefficients(const json& j, const char* key) {
  std::vector<cplx> out;
  if (!j.contains(key)) return out;
  const json& arr = j.at(key);
  if (!arr.is_array()) schema_fail("coefficients must be an array");
  for (const auto& e : arr) {
    if (e.is_number()) {
      out.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      schema_fail("each coefficient must be a number or a [re, im] pair");
    }
  }
  return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) return;
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      schema_fail("unknown field '" + item.key() + "' in " + where);
}

}  // namespace

ProblemConfig parse_config(const json& j) {
  if (!j.is_object()) schema_fail("top level must be an object");
  check_keys(j, {"operator", "mode", "initial", "times", "contour", "quadrature", "seed",
                 "outputs"},
             "top level");
  if (!j.contains("operator")) schema_fail("missing 'operator' section");

  ProblemConfig cfg;

  const json& jop = j.at("operator");
  if (!jop.is_object() || !jop.contains("kind") || !jop.at("kind").is_string())
    schema_fail("'operator' must be an object with a string 'kind'");
  check_keys(jop,
             {"kind", "a", "b", "n_points", "eta", "xi", "beta", "laplacian_kind", "order",
              "coefficients", "theta", "n", "c", "d_shift", "truncation", "dimension", "a_scale",
              "a_power", "delta", "kappa", "M", "arg_pattern", "seed"},
             "'operator'");
  auto& oc = cfg.op;
  oc.kind = jop.at("kind").get<std::string>();
  oc.a = get_or(jop, "a", oc.a);
  oc.b = get_or(jop, "b", oc.b);
  oc.n_points = get_or(jop, "n_points", oc.n_points);
  oc.eta = get_or(jop, "eta", oc.eta);
  oc.xi = get_or(jop, "xi", oc.xi);
  oc.beta = get_or(jop, "beta", oc.beta);
  oc.laplacian_kind = get_or(jop, "laplacian_kind", oc.laplacian_kind);
  oc.order = get_or(jop, "order", oc.order);
  oc.coefficients = parse_coefficients(jop, "coefficients");
  oc.theta = get_or(jop, "theta", oc.theta);
  oc.n = get_or(jop, "n", oc.n);
  oc.c = get_or(jop, "c", oc.c);
  oc.d_shift = get_or(jop, "d_shift", oc.d_shift);
  oc.truncation = get_or(jop, "truncation", oc.truncation);
  oc.dimension = get_or(jop, "dimension", oc.dimension);
  oc.a_scale = get_or(jop, "a_scale", oc.a_scale);
  oc.a_power = get_or(jop, "a_power", oc.a_power);
  oc.delta = get_or(jop, "delta", oc.delta);
  oc.kappa = get_or(jop, "kappa", oc.kappa);
  oc.M = get_or(jop, "M", oc.M);
  oc.arg_pattern = get_or(jop, "arg_pattern", oc.arg_pattern);
  oc.seed = get_or<std::uint64_t>(jop, "seed", oc.seed);

  if (j.contains("mode")) {
    const json& jm = j.at("mode");
    check_keys(jm, {"fractional", "n", "alpha"}, "'mode'");
    cfg.mode.fractional = get_or(jm, "fractional", false);
    cfg.mode.n = get_or(jm, "n", cfg.mode.n);
    cfg.mode.alpha = get_or(jm, "alpha", cfg.mode.alpha);
  }

  if (j.contains("initial")) {
    const json& ji = j.at("initial");
    check_keys(ji, {"type", "k", "center", "width", "path"}, "'initial'");
    cfg.initial.type = get_or(ji, "type", cfg.initial.type);
    cfg.initial.k = get_or(ji, "k", cfg.initial.k);
    cfg.initial.center = get_or(ji, "center", cfg.initial.center);
    cfg.initial.width = get_or(ji, "width", cfg.initial.width);
    cfg.initial.path = get_or(ji, "path", cfg.initial.path);
  }

  if (j.contains("times")) {
    const json& jt = j.at("times");
    check_keys(jt, {"values", "t_min", "t_max", "count", "spacing"}, "'times'");
    if (jt.contains("values")) {
      cfg.times.explicit_list = true;
      cfg.times.values = get_or(jt, "values", std::vector<double>{});
    }
    cfg.times.t_min = get_or(jt, "t_min", cfg.times.t_min);
    cfg.times.t_max = get_or(jt, "t_max", cfg.times.t_max);
    cfg.times.count = get_or(jt, "count", cfg.times.count);
    cfg.times.spacing = get_or(jt, "spacing", cfg.times.spacing);
  }

  if (j.contains("contour")) {
    const json& jc = j.at("contour");
    check_keys(jc, {"theta_zero", "theta_iota", "epsilon", "cut_radius"}, "'contour'");
    if (jc.contains("theta_zero")) cfg.contour.theta_zero = get_or(jc, "theta_zero", 0.0);
    if (jc.contains("theta_iota")) cfg.contour.theta_iota = get_or(jc, "theta_iota", 0.0);
    if (jc.contains("epsilon")) cfg.contour.epsilon = get_or(jc, "epsilon", 0.0);
    if (jc.contains("cut_radius")) cfg.contour.cut_radius = get_or(jc, "cut_radius", 0.0);
  }

  if (j.contains("quadrature")) {
    const json& jq = j.at("quadrature");
    check_keys(jq, {"tol", "base_nodes_per_unit"}, "'quadrature'");
    cfg.quadrature.tol = get_or(jq, "tol", cfg.quadrature.tol);
    cfg.quadrature.base_nodes_per_unit = get_or(jq, "base_nodes_per_unit", 16);
  }

  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.outputs = get_or<std::string>(j, "outputs", "out");
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_input("missing-file", "cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_input("schema-violation", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json serialize_config(const ProblemConfig& cfg) {
  json jop{{"kind", cfg.op.kind},
           {"a", cfg.op.a},
           {"b", cfg.op.b},
           {"n_points", cfg.op.n_points},
           {"eta", cfg.op.eta},
           {"xi", cfg.op.xi},
           {"beta", cfg.op.beta},
           {"laplacian_kind", cfg.op.laplacian_kind},
           {"order", cfg.op.order},
           {"theta", cfg.op.theta},
           {"n", cfg.op.n},
           {"c", cfg.op.c},
           {"d_shift", cfg.op.d_shift},
           {"truncation", cfg.op.truncation},
           {"dimension", cfg.op.dimension},
           {"a_scale", cfg.op.a_scale},
           {"a_power", cfg.op.a_power},
           {"delta", cfg.op.delta},
           {"kappa", cfg.op.kappa},
           {"M", cfg.op.M},
           {"arg_pattern", cfg.op.arg_pattern},
           {"seed", cfg.op.seed}};
  if (!cfg.op.coefficients.empty()) {
    json arr = json::array();
    for (const auto& z : cfg.op.coefficients) arr.push_back(json::array({z.real(), z.imag()}));
    jop["coefficients"] = arr;
  }

  json jt;
  if (cfg.times.explicit_list) jt["values"] = cfg.times.values;
  jt["t_min"] = cfg.times.t_min;
  jt["t_max"] = cfg.times.t_max;
  jt["count"] = cfg.times.count;
  jt["spacing"] = cfg.times.spacing;

  json jc = json::object();
  if (cfg.contour.theta_zero) jc["theta_zero"] = *cfg.contour.theta_zero;
  if (cfg.contour.theta_iota) jc["theta_iota"] = *cfg.contour.theta_iota;
  if (cfg.contour.epsilon) jc["epsilon"] = *cfg.contour.epsilon;
  if (cfg.contour.cut_radius) jc["cut_radius"] = *cfg.contour.cut_radius;

  return json{{"operator", jop},
              {"mode",
               {{"fractional", cfg.mode.fractional}, {"n", cfg.mode.n}, {"alpha", cfg.mode.alpha}}},
              {"initial",
               {{"type", cfg.initial.type},
                {"k", cfg.initial.k},
                {"center", cfg.initial.center},
                {"width", cfg.initial.width},
                {"path", cfg.initial.path}}},
              {"times", jt},
              {"contour", jc},
              {"quadrature",
               {{"tol", cfg.quadrature.tol},
                {"base_nodes_per_unit", cfg.quadrature.base_nodes_per_unit}}},
              {"seed", cfg.seed},
              {"outputs", cfg.outputs}};
}

bool config_equal(const ProblemConfig& a, const ProblemConfig& b) {
  const auto& x = a.op;
  const auto& y = b.op;
  const bool op_eq = x.kind == y.kind && x.a == y.a && x.b == y.b && x.n_points == y.n_points &&
                     x.eta == y.eta && x.xi == y.xi && x.beta == y.beta &&
                     x.laplacian_kind == y.laplacian_kind && x.order == y.order &&
                     x.coefficients == y.coefficients && x.theta == y.theta && x.n == y.n &&
                     x.c == y.c && x.d_shift == y.d_shift && x.truncation == y.truncation &&
                     x.dimension == y.dimension && x.a_scale == y.a_scale &&
                     x.a_power == y.a_power && x.delta == y.delta && x.kappa == y.kappa &&
                     x.M == y.M && x.arg_pattern == y.arg_pattern && x.seed == y.seed;
  return op_eq && a.mode.fractional == b.mode.fractional && a.mode.n == b.mode.n &&
         a.mode.alpha == b.mode.alpha && a.initial.type == b.initial.type &&
         a.initial.k == b.initial.k && a.initial.center == b.initial.center &&
         a.initial.width == b.initial.width && a.initial.path == b.initial.path &&
         a.times.explicit_list == b.times.explicit_list && a.times.values == b.times.values &&
         a.times.t_min == b.times.t_min && a.times.t_max == b.times.t_max &&
         a.times.count == b.times.count && a.times.spacing == b.times.spacing &&
         a.contour.theta_zero == b.contour.theta_zero &&
         a.contour.theta_iota == b.contour.theta_iota && a.contour.epsilon == b.contour.epsilon &&
         a.contour.cut_radius == b.contour.cut_radius &&
         a.quadrature.tol == b.quadrature.tol &&
         a.quadrature.base_nodes_per_unit == b.quadrature.base_nodes_per_unit &&
         a.seed == b.seed && a.outputs == b.outputs;
}

DiscretizedOperator build_operator(const OperatorConfig& oc) {
  if (oc.kind == "composite")
    return composite_operator(oc.eta, oc.xi, oc.beta, make_grid(oc.a, oc.b, oc.n_points),
                              oc.laplacian_kind);
  if (oc.kind == "dirichlet_laplacian")
    return dirichlet_laplacian(make_grid(oc.a, oc.b, oc.n_points));
  if (oc.kind == "gl_derivative")
    return gl_fractional_derivative(make_grid(oc.a, oc.b, oc.n_points), oc.order);
  if (oc.kind == "quasi_polynomial")
    return quasi_polynomial(oc.coefficients, oc.theta, make_grid(oc.a, oc.b, oc.n_points));
  if (oc.kind == "binomial")
    return binomial_expansion_operator(oc.n, oc.beta, make_grid(oc.a, oc.b, oc.n_points));
  if (oc.kind == "difference_power")
    return difference_fractional_power(oc.c, oc.d_shift, oc.beta, oc.dimension, oc.truncation)
        .first;
  if (oc.kind == "riesz_composite") {
    const double s = oc.a_scale, p = oc.a_power;
    return riesz_composite(
        make_grid(oc.a, oc.b, oc.n_points),
        [s, p](double x) { return cplx(s * std::pow(1.0 + std::abs(x), p), 0.0); }, oc.delta,
        oc.beta);
  }
  if (oc.kind == "diagonal_normal")
    return diagonal_normal_operator(oc.kappa, oc.M, oc.dimension, oc.arg_pattern, oc.seed);
  fail_input("schema-violation", "unknown operator kind '" + oc.kind + "'");
}

std::vector<double> expand_times(const TimesConfig& tc) {
  if (tc.explicit_list) return tc.values;
  if (tc.count < 1) fail_input("invalid-interval", "time count must be at least 1");
  if (!(tc.t_min > 0.0) || !(tc.t_max >= tc.t_min))
    fail_input("invalid-interval", "time range must satisfy 0 < t_min <= t_max");
  std::vector<double> out;
  if (tc.count == 1) return {tc.t_min};
  for (int i = 0; i < tc.count; ++i) {
    const double s = static_cast<double>(i) / (tc.count - 1);
    if (tc.spacing == "linear")
      out.push_back(tc.t_min + s * (tc.t_max - tc.t_min));
    else if (tc.spacing == "log")
      out.push_back(tc.t_min * std::pow(tc.t_max / tc.t_min, s));
    else
      fail_input("invalid-interval", "spacing must be 'linear' or 'log'");
  }
  return out;
}

Vec build_initial(const InitialConfig& ic, const DiscretizedOperator& op) {
  const int dim = op.dim();
  if (ic.type == "basis_index") {
    if (ic.k < 0 || ic.k >= dim)
      fail_input("invalid-interval", "basis index out of range for the operator dimension");
    return Vec::Unit(dim, ic.k);
  }
  if (ic.type == "gaussian") {
    if (!(ic.width > 0.0)) fail_input("invalid-interval", "gaussian width must be positive");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
      const double x =
          op.grid ? op.grid->nodes[i] : static_cast<double>(i + 1) / (dim + 1);
      const double d = (x - ic.center) / ic.width;
      v(i) = std::exp(-0.5 * d * d);
    }
    const double norm = v.norm();
    if (norm < 1e-300) fail_input("invalid-interval", "gaussian initial state is numerically zero");
    return v / norm;
  }
  if (ic.type == "file") {
    std::ifstream in(ic.path);
    if (!in) fail_input("missing-file", "cannot open initial-state file '" + ic.path + "'");
    std::vector<cplx> vals;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      double re;
      if (!(ls >> re)) continue;  // blank or comment line
      double im = 0.0;
      ls >> im;
      vals.emplace_back(re, im);
    }
    if (static_cast<int>(vals.size()) != dim)
      fail_input("dimension-mismatch", "initial-state file length does not match the operator");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = vals[i];
    return v;
  }
  fail_input("schema-violation", "unknown initial-state type '" + ic.type + "'");
}

EvolutionProblem build_problem(const ProblemConfig& cfg) {
  EvolutionProblem p;
  p.op = build_operator(cfg.op);
  p.mode = cfg.mode;
  p.initial = build_initial(cfg.initial, p.op);
  p.times = expand_times(cfg.times);
  return p;
}

}  // namespace lidskii
