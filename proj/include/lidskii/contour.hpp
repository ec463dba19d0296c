#pragma once

#include <utility>
#include <vector>

#include "lidskii/types.hpp"

namespace lidskii {

// Boundary of { |arg(z - vertex)| <= theta_iota + eps } ∩ { |arg z| <= theta_zero + eps }
// minus the disk of cut_radius, traversed clockwise around the enclosed spectrum:
// lower unbounded ray inward, cut arc through angle zero, upper unbounded ray outward.
// Errors: decay-violation (theta_zero + eps >= pi/(2 alpha)); geometry-degenerate.
Contour build_contour(double sector_vertex, double theta_iota, double theta_zero, double epsilon,
                      double cut_radius, double alpha);

// Composite Gauss-Legendre rule along the contour truncated at radius R chosen so that the
// analytic tail of exp(-t z^alpha) stays below tol relative to the slowest-decaying scale.
// Panel density follows the phase variation of t z^alpha, with extra subdivision near
// contour.poles_hint. Errors: tolerance-unreachable, invalid-interval.
QuadratureRule contour_nodes(const Contour& contour, double t, double alpha, double tol,
                             int base_nodes_per_unit);

// Same rule shared across several times: truncation for the smallest, density for the largest.
QuadratureRule contour_nodes_multi(const Contour& contour, const std::vector<double>& times,
                                   double alpha, double tol, int base_nodes_per_unit);

// ok = every eigenvalue is enclosed (winding number -1 under the clockwise traversal)
// and none sits on the curve; min_distance = distance from the spectrum to the curve
// (+infinity for an empty list).
std::pair<bool, double> validate_contour(const Contour& contour, const std::vector<cplx>& eigenvalues);

// Contour parameters adapted to a known spectrum: hugs the spectrum tightly enough that
// predicted exp cancellation stays below a fixed budget, growing theta_zero from the
// spectral angles and shrinking epsilon when needed. Sets poles_hint.
Contour auto_contour(const std::vector<cplx>& eigenvalues, double alpha,
                     const std::vector<double>& times, double tol);

// Predicted cancellation (nats): t_max * (min Re lambda^alpha - r^alpha cos(alpha (theta_0 + eps))).
double cancellation_loss(const std::vector<cplx>& eigenvalues, double alpha, double t_max,
                         double cut_radius, double theta_eff);

}  // namespace lidskii
