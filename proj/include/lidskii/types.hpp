#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lidskii {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// 1-D grid on (a,b): nodes x_j = a + j*spacing, j = 1..n_points (left boundary excluded).
struct GridSpec {
  double a = 0.0;
  double b = 1.0;
  int n_points = 0;
  double spacing = 0.0;
  std::vector<double> nodes;
};

// Dense complex matrix standing in for an operator on the grid.
// For very large diagonal operators the dense matrix is not materialized;
// `diag` carries the entries and `diagonal_only` is set.
struct DiscretizedOperator {
  Mat matrix;                     // N x N; empty when diagonal_only
  std::optional<GridSpec> grid;   // absent for abstract-dimension operators
  std::string kind;
  std::map<std::string, double> params;
  bool diagonal_only = false;
  Vec diag;                       // filled for diagonal kinds

  int dim() const {
    if (diagonal_only) return static_cast<int>(diag.size());
    return static_cast<int>(matrix.rows());
  }
  bool has_dense() const { return matrix.size() > 0; }
  bool is_diagonal() const { return diag.size() > 0; }
  Vec apply(const Vec& v) const {
    if (is_diagonal() && (diagonal_only || !has_dense())) return diag.cwiseProduct(v);
    return matrix * v;
  }
};

// Truncated coefficient sequence of a fractional-power difference operator.
struct CoefficientSequence {
  std::vector<cplx> values;
  double order = 0.0;
  int truncation_length = 0;
  double tail_bound = 0.0;
};

// Eigen data sorted by ascending modulus with biorthogonal left/right systems.
struct SpectralData {
  Vec eigenvalues;                 // ascending modulus
  Mat right_vectors;               // columns e_q (unit norm)
  Mat left_vectors;                // columns g_q with (e_p, g_q) = delta_pq
  std::vector<int> cluster_of;     // eigenvalue index -> cluster id
  RVec condition_numbers;          // per eigenvalue
  bool identity_vectors = false;   // diagonal operator: vectors are the permuted standard basis
  std::vector<int> diag_perm;      // identity_vectors: eigenvalue q sits at original index diag_perm[q]
};

// Group boundaries {N_nu}: group nu covers eigenvalue indices (boundaries[nu], boundaries[nu+1]].
struct Bracketing {
  std::vector<int> boundaries;     // starts at 0, ends at eigenvalue count, strictly increasing
  double tau = 1.0;
  double gap_constant = 1.0;
};

enum class SegmentKind { ray, arc };

struct ContourSegment {
  SegmentKind kind = SegmentKind::ray;
  cplx start;                      // traversal start (finite anchor for unbounded rays)
  cplx end;                        // traversal end; for unbounded rays: anchor + unit direction
  bool unbounded = false;          // ray extends to infinity
  bool inward = false;             // unbounded ray traversed from infinity toward the anchor
  cplx direction;                  // unit direction away from the anchor (unbounded rays)
  double radius = 0.0;             // arcs: centered at the origin
  double phi0 = 0.0, phi1 = 0.0;   // arcs: traversed from phi0 to phi1
  std::string parametrization;
};

// Spectrum-enclosing contour: boundary of the sector intersection minus the cut disk,
// traversed clockwise around the enclosed spectrum (lower ray inward, cut arc through
// angle zero, upper ray outward).
struct Contour {
  double vertex_iota = 0.0;
  double theta_iota = 0.0;
  double theta_zero = 0.0;
  double epsilon = 0.0;
  double cut_radius = 0.0;
  std::vector<ContourSegment> segments;
  std::string orientation = "spectrum-enclosing-clockwise";
  std::vector<cplx> poles_hint;    // optional metadata: known eigenvalues, used to refine quadrature
};

struct QuadratureRule {
  std::vector<cplx> nodes;
  std::vector<cplx> weights;       // parametrization derivative x panel weight
  double truncation_radius = 0.0;
  double est_tail = 0.0;           // relative analytic tail bound (<= requested tolerance)
  int panel_count = 0;
};

struct Mode {
  bool fractional = false;
  int n = 1;            // integer power (integer mode)
  double alpha = 2.0;   // exponent (fractional mode)
  double kappa() const { return fractional ? alpha : static_cast<double>(n); }
};

struct EvolutionProblem {
  DiscretizedOperator op;
  Mode mode;
  Vec initial;
  std::vector<double> times;       // strictly increasing, positive
};

struct QuadDiagnostics {
  int node_count = 0;
  int panel_count = 0;
  double truncation_radius = 0.0;
  double est_tail = 0.0;
  double cancellation_nats = 0.0;  // predicted integrand-vs-answer magnitude gap
  double theta_zero = 0.0, epsilon = 0.0, cut_radius = 0.0;
};

struct SolutionResult {
  std::vector<Vec> states;                            // per time
  std::string method;                                 // contour | series | oracle
  std::vector<std::vector<double>> group_partial_norms;  // per time: ||group sum|| per group (series)
  QuadDiagnostics diagnostics;
};

struct SpectralDiagnostics {
  std::vector<double> s_numbers;
  double rho_hat = 0.0;
  double mu_hat = 0.0;
  bool mu_degenerate = false;
  double sector_vertex = 0.0;
  double sector_semi_angle = 0.0;
  bool accretive = false;
  double accretivity_margin = 0.0;
  double c1 = 0.0, c2 = 0.0;
};

}  // namespace lidskii
