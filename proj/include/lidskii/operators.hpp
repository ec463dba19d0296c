#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lidskii/types.hpp"

namespace lidskii {

// Uniform grid on (a,b) with the left endpoint excluded. Errors: invalid-interval.
GridSpec make_grid(double a, double b, int n_points);

// Backward-difference weight sequence for the given order, no spacing scaling:
// w_0 = 1, w_{k+1} = w_k (k - order)/(k + 1).
std::vector<double> gl_weights(double order, int length);

// Lower-triangular Toeplitz matrix of backward-difference fractional-derivative
// weights scaled by spacing^-order. Errors: non-positive-order.
DiscretizedOperator gl_fractional_derivative(const GridSpec& grid, double order);

// Symmetric tridiagonal second-difference Laplacian with Dirichlet ends (negative definite).
DiscretizedOperator dirichlet_laplacian(const GridSpec& grid);

// eta * D2 + xi * D^beta with eta < 0, xi > 0, beta in (0,1).
// laplacian_kind "dirichlet": symmetric tridiagonal D2; "gl_toeplitz": order-2
// backward-difference Toeplitz D2 so every term commutes. Errors: sign-violation.
DiscretizedOperator composite_operator(double eta, double xi, double beta, const GridSpec& grid,
                                       const std::string& laplacian_kind = "dirichlet");

// sum_k coeffs[k] * D^{k*theta} (k = 0 term is coeffs[0] * identity).
// Errors: empty-coefficients (no nonzero coefficient).
DiscretizedOperator quasi_polynomial(const std::vector<cplx>& coefficients, double theta,
                                     const GridSpec& grid);

// sum_{k=0..n} (-1)^{n-k} binom(n,k) D^{beta*k + 2(n-k)} over backward-difference
// Toeplitz matrices; equals composite_operator(-1, 1, beta, grid, gl_toeplitz)^n exactly
// in the commuting Toeplitz algebra. Requires beta in (0, 1/n). Errors: beta-too-large.
DiscretizedOperator binomial_expansion_operator(int n, double beta, const GridSpec& grid);

// Fractional power of the shifted difference J f(x) = c[f(x) - f(x - d)]:
// coefficients C_0 = c^beta, C_{k+1} = C_k (k - beta)/(k + 1) placed on subdiagonal
// k * d_shift. Returns the banded matrix and the coefficient sequence with its tail bound.
std::pair<DiscretizedOperator, CoefficientSequence> difference_fractional_power(
    double c, int d_shift, double beta, int dimension, int truncation);

// L = J^* a J + b J^beta + Q^* N Q with multiplication coefficients a(i), b(i) sampled at
// indices 1..dim; sigma = 4 c ||a||_inf + 2 c^beta ||b||_inf.
// Errors: singular-Q, non-accretive-N.
std::pair<DiscretizedOperator, double> difference_perturbation(
    const std::function<double(int)>& a_fn, const std::function<double(int)>& b_fn, double c,
    int d_shift, double beta, const Mat& Q, const Mat& N_op, int dimension);

// Dominance hypothesis gamma_N > sigma * ||Q^{-1}||^2.
bool perturbation_threshold_ok(double gamma_N, double sigma, double q_inv_norm);

// Cell-averaged Riesz potential: entry(i,j) integrates |x_i - s|^{beta-1}/(2 Gamma(beta) cos(beta pi/2))
// exactly over grid cell j. Symmetric. Errors: invalid-interval (beta outside (0,1)).
DiscretizedOperator riesz_potential(const GridSpec& grid, double beta);

// D2 a(x) D2 + R_{2(1-beta)} D2 + delta I with D2 the Dirichlet second difference and R the
// cell-averaged Riesz potential of order 2(1-beta); beta in (3/4, 1), Re a > 0 on the grid.
// Errors: coefficient-positivity.
DiscretizedOperator riesz_composite(const GridSpec& grid, const std::function<cplx(double)>& a_fn,
                                    double delta, double beta);

// Modulus growth sequence mu_n = (max(n,3) ln max(n,3) lnln max(n,3))^kappa, n 1-based.
double diagonal_modulus(int n, double kappa);

// Diagonal normal operator lambda_n = mu_n + i eta_n with |eta_n| = M_eff mu_n,
// M_eff = M (1 - 1e-9) so the boundary ratio stays strictly below M.
// arg_pattern: "constant" | "alternating" | "random" (seeded).
// Errors: invalid-interval (kappa outside (0,1), M < 0, or dimension < 1).
DiscretizedOperator diagonal_normal_operator(double kappa, double M, int dimension,
                                             const std::string& arg_pattern,
                                             std::uint64_t seed = 0);

}  // namespace lidskii
