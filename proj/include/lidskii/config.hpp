#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lidskii/types.hpp"

namespace lidskii {

// Operator construction request (tagged by `kind`); only the fields of the active
// kind are consumed. Grid-based kinds use interval [a,b] with n_points.
struct OperatorConfig {
  std::string kind;  // composite | dirichlet_laplacian | gl_derivative | quasi_polynomial |
                     // binomial | difference_power | riesz_composite | diagonal_normal
  double a = 0.0, b = 1.0;
  int n_points = 0;
  double eta = -1.0, xi = 1.0, beta = 0.5;
  std::string laplacian_kind = "dirichlet";
  double order = 0.5;                 // gl_derivative
  std::vector<cplx> coefficients;     // quasi_polynomial
  double theta = 0.5;                 // quasi_polynomial
  int n = 1;                          // binomial
  double c = 1.0;                     // difference_power
  int d_shift = 1;                    // difference_power
  int truncation = 64;                // difference_power
  int dimension = 0;                  // difference_power / diagonal_normal
  double a_scale = 1.0, a_power = 0.0;  // riesz_composite: a(x) = a_scale (1+|x|)^a_power
  double delta = 1.0;                 // riesz_composite
  double kappa = 0.5;                 // diagonal_normal
  double M = 0.0;                     // diagonal_normal
  std::string arg_pattern = "constant";
  std::uint64_t seed = 0;             // diagonal_normal: random argument pattern
};

struct InitialConfig {
  std::string type = "basis_index";   // basis_index | gaussian | file
  int k = 0;
  double center = 0.5, width = 0.1;
  std::string path;
};

struct TimesConfig {
  bool explicit_list = false;
  std::vector<double> values;
  double t_min = 0.1, t_max = 1.0;
  int count = 3;
  std::string spacing = "linear";     // linear | log
};

struct ContourOverrides {
  std::optional<double> theta_zero, theta_iota, epsilon, cut_radius;
};

struct QuadratureConfig {
  double tol = 1e-8;
  int base_nodes_per_unit = 16;
};

struct ProblemConfig {
  OperatorConfig op;
  Mode mode;
  InitialConfig initial;
  TimesConfig times;
  ContourOverrides contour;
  QuadratureConfig quadrature;
  std::uint64_t seed = 0;
  std::string outputs = "out";
};

// Parse / validate / serialize. Parse errors raise invalid_input with code
// schema-violation (or missing-file for load). Round trip parse -> serialize -> parse
// yields an equal value.
ProblemConfig parse_config(const nlohmann::json& j);
ProblemConfig load_config(const std::string& path);
nlohmann::json serialize_config(const ProblemConfig& cfg);
bool config_equal(const ProblemConfig& lhs, const ProblemConfig& rhs);

// Realize the configured pieces.
DiscretizedOperator build_operator(const OperatorConfig& oc);
std::vector<double> expand_times(const TimesConfig& tc);
Vec build_initial(const InitialConfig& ic, const DiscretizedOperator& op);
EvolutionProblem build_problem(const ProblemConfig& cfg);

}  // namespace lidskii
