#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lidskii/types.hpp"

namespace lidskii {

// Full eigendecomposition with biorthogonal left system G = (V^-1)^H, eigenvalues sorted
// by ascending modulus, clusters merged at relative tolerance cluster_tol, per-eigenvalue
// condition numbers ||g_q|| (right vectors normalized to 1, pairing (e_q, g_q) = 1).
// Errors: eigensolve-failure.
SpectralData eigendecompose(const DiscretizedOperator& op, double cluster_tol = 1e-6);

// Singular values of the INVERSE, i.e. s-numbers s_j = 1/(j-th singular value of op),
// returned decreasing. Errors: singular-operator.
std::vector<double> singular_values(const DiscretizedOperator& op);

// #{ j : 1/s_j < r }. Errors: invalid-interval (r <= 0).
int counting_function(const std::vector<double>& s_numbers, double r);

// Least-squares slope of log j against log(1/s_j) over the tail half of the list.
// Errors: too-few-values (< 32 entries).
double estimate_convergence_exponent(const std::vector<double>& s_numbers);

// Growth order of the eigenvalues of a positive definite Hermitian operator:
// log-log slope over a pre-saturation index window. Returns 0 for degenerate
// (flat) spectra. Errors: non-positive-definite.
double estimate_order(const DiscretizedOperator& op_H);

// Sector containing sampled numerical-range values (random unit vectors, eigenvector
// directions and pairwise mixtures), with 5% slack on the semi-angle and vertex pushed
// left. vertex = min(Re z - |Im z|) rule; semi_angle < pi/2 enforced.
std::pair<double, double> numerical_range_sector(const DiscretizedOperator& op, int n_samples,
                                                 std::uint64_t seed);

// margin = smallest eigenvalue of the symmetric part of op^power; accretive iff margin >= -tol.
std::pair<bool, double> accretivity_check(const DiscretizedOperator& op, int power, double tol);

// Sesquilinear-form bounds against a Hermitian positive gram matrix:
// C2 = min generalized eigenvalue of (sym op, gram), C1 = largest singular value of
// L^-1 op L^-H for gram = L L^H. Errors: indefinite-gram.
std::pair<double, double> h2_constants(const DiscretizedOperator& op, const Mat& gram_plus);

// Greedy bracketing: close a group after eigenvalue k whenever
// |lambda_{k+1}| - |lambda_k| > C |lambda_{k+1}|^{1 - 1/tau}; never splits a cluster.
// Errors: invalid-interval (tau <= 0 or C <= 0).
Bracketing bracket_eigenvalues(const SpectralData& spectral, double tau, double gap_constant);

// Diagnostics bundle used by the report command.
SpectralDiagnostics spectral_diagnostics(const DiscretizedOperator& op, int power,
                                         std::uint64_t seed);

}  // namespace lidskii
