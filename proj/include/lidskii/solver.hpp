#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lidskii/types.hpp"

namespace lidskii {

enum class KernelMode { serial, parallel };
KernelMode default_kernel_mode();

// u(t) = 1/(2 pi i) ∮ exp(-z^kappa t) (W - z)^{-1} h dz over the clockwise spectrum-enclosing
// contour, kappa = n (integer mode) or alpha (fractional mode). One LU factorization per node;
// node solves may run in parallel, accumulation is serial in node order (bit-reproducible).
// Errors: singular-resolvent, tolerance-unreachable, invalid-interval.
SolutionResult solve_contour(const EvolutionProblem& problem, const Contour& contour, double tol,
                             KernelMode mode = default_kernel_mode());

// Bracketed root-vector expansion: per-cluster residues of exp(-z^kappa t)(W - z)^{-1} h via
// small clockwise circles (trapezoid rule, 32 nodes); simple well-conditioned eigenvalues use
// the closed form exp(-lambda^kappa t) (h, g) e. Group partial norms follow the bracketing.
// Errors: cluster-overlap handled by merging, singular-resolvent.
SolutionResult solve_series(const EvolutionProblem& problem, const SpectralData& spectral,
                            const Bracketing& brackets, KernelMode mode = default_kernel_mode());

// Dense matrix exponential exp(-t W^n) h. Integer mode only. Errors: mode-mismatch.
SolutionResult solve_oracle(const EvolutionProblem& problem);

// || sum_j w_j exp(-lambda_j^alpha t) lambda_j x_j - W u(t) || / ||W u(t)||  with
// x_j = (W - lambda_j)^{-1} h: checks that the fractional substitution reproduces W u.
// Fractional mode only. Errors: mode-mismatch plus solve_contour errors.
double fractional_residual(const EvolutionProblem& problem, const Contour& contour, double t,
                           double tol);

// Relative gap between the fractional-derivative node factor written through the
// power-function derivative identity and the direct -du/dt factor, evaluated on the
// same quadrature. Fractional mode only. Errors: mode-mismatch.
double derivative_identity_check(const EvolutionProblem& problem, const Contour& contour, double t);

struct ContractionReport {
  int samples = 0;
  double max_norm_ratio = 0.0;    // max over samples/times of ||u(t)|| / ||h||
  bool contraction = false;       // max_norm_ratio <= 1 + 1e-10
  double accretivity_margin = 0.0;
};

// Evolves n_samples random unit initial states and reports the worst norm ratio.
// Requires the driving operator power to be accretive. Errors: precondition-violation.
ContractionReport contraction_probe(const DiscretizedOperator& op, int power, int n_samples,
                                    const std::vector<double>& times, std::uint64_t seed);

struct InitialConditionRow {
  double t = 0.0;
  double deviation = 0.0;         // ||u(t) - h||
};

// ||u(t) - h|| along a sequence of times decreasing toward 0; pass iff the deviations
// decrease and the final one is <= 10 * tol + 2 * t_min * ||W^n h||.
struct InitialConditionReport {
  std::vector<InitialConditionRow> rows;
  bool pass = false;
};
InitialConditionReport initial_condition_probe(const EvolutionProblem& problem,
                                               const Contour& contour,
                                               const std::vector<double>& t_sequence, double tol);

struct MethodComparison {
  std::vector<double> times;
  std::vector<double> contour_vs_series;
  std::vector<double> contour_vs_oracle;   // integer mode; empty otherwise
  std::vector<double> series_vs_oracle;    // integer mode; empty otherwise
  std::vector<double> fractional_resid;    // fractional mode; empty otherwise
  std::vector<double> derivative_gap;      // fractional mode; empty otherwise
  std::vector<std::vector<double>> group_partial_norms;  // per time, from the series method
};

// Relative pairwise disagreement between the solution methods over problem.times.
MethodComparison compare_methods(const EvolutionProblem& problem, const Contour& contour,
                                 const SpectralData& spectral, const Bracketing& brackets,
                                 double tol);

}  // namespace lidskii
