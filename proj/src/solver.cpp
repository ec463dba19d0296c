#include "lidskii/solver.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "lidskii/contour.hpp"
#include "lidskii/errors.hpp"
#include "lidskii/kernel.hpp"
#include "lidskii/spectral.hpp"

namespace lidskii {
namespace {

constexpr cplx kInvTwoPiI{0.0, -1.0 / (2.0 * std::numbers::pi)};  // 1/(2 pi i)

double checked_kappa(const EvolutionProblem& problem) {
  const int dim = problem.op.dim();
  if (dim <= 0) fail_input("invalid-interval", "operator has no dimension");
  if (problem.initial.size() != dim)
    fail_input("dimension-mismatch", "initial vector does not match operator dimension");
  if (problem.times.empty()) fail_input("invalid-interval", "times must be non-empty");
  double prev = 0.0;
  for (double t : problem.times) {
    if (!(t > prev))
      fail_input("invalid-interval", "times must be positive and strictly increasing");
    prev = t;
  }
  if (problem.mode.fractional) {
    if (!(problem.mode.alpha > 1.0))
      fail_input("invalid-interval", "fractional exponent must exceed 1");
  } else if (problem.mode.n < 1) {
    fail_input("invalid-interval", "integer power must be at least 1");
  }
  return problem.mode.kappa();
}

void fill_quad_diagnostics(QuadDiagnostics& d, const QuadratureRule& rule, const Contour& contour,
                           double kappa, double t_max) {
  d.node_count = static_cast<int>(rule.nodes.size());
  d.panel_count = rule.panel_count;
  d.truncation_radius = rule.truncation_radius;
  d.est_tail = rule.est_tail;
  d.theta_zero = contour.theta_zero;
  d.epsilon = contour.epsilon;
  d.cut_radius = contour.cut_radius;
  if (!contour.poles_hint.empty())
    d.cancellation_nats = cancellation_loss(contour.poles_hint, kappa, t_max, contour.cut_radius,
                                            contour.theta_zero + contour.epsilon);
}

}  // namespace

KernelMode default_kernel_mode() {
#ifdef _OPENMP
  return KernelMode::parallel;
#else
  return KernelMode::serial;
#endif
}

SolutionResult solve_contour(const EvolutionProblem& problem, const Contour& contour, double tol,
                             KernelMode mode) {
  const double kappa = checked_kappa(problem);
  if (!(tol > 0.0)) fail_input("invalid-interval", "tolerance must be positive");

  const QuadratureRule rule = contour_nodes_multi(contour, problem.times, kappa, tol, 16);
  const Mat H = problem.initial;
  const auto sums =
      detail::contour_accumulate(problem.op, rule, problem.times, kappa, H, {}, mode);

  SolutionResult res;
  res.method = "contour";
  res.states.resize(problem.times.size());
  for (std::size_t it = 0; it < problem.times.size(); ++it)
    res.states[it] = (sums[it][0] * kInvTwoPiI).col(0);
  fill_quad_diagnostics(res.diagnostics, rule, contour, kappa, problem.times.back());
  return res;
}

SolutionResult solve_series(const EvolutionProblem& problem, const SpectralData& spectral,
                            const Bracketing& brackets, KernelMode mode) {
  const double kappa = checked_kappa(problem);
  const int n = problem.op.dim();
  const int nt = static_cast<int>(problem.times.size());
  if (spectral.eigenvalues.size() != n)
    fail_input("dimension-mismatch", "spectral data does not match operator dimension");
  const auto& bd = brackets.boundaries;
  if (bd.size() < 2 || bd.front() != 0 || bd.back() != n || !std::is_sorted(bd.begin(), bd.end()))
    fail_input("invalid-interval", "bracket boundaries must run from 0 to the eigenvalue count");
  const int ng = static_cast<int>(bd.size()) - 1;

  SolutionResult res;
  res.method = "series";
  res.states.assign(nt, Vec::Zero(n));
  res.group_partial_norms.assign(nt, std::vector<double>(ng, 0.0));

  const auto group_of_index = [&](int q) {
    const int g = static_cast<int>(std::upper_bound(bd.begin(), bd.end(), q) - bd.begin()) - 1;
    return std::min(g, ng - 1);
  };

  if (spectral.identity_vectors) {
    // Diagonal operator: root vectors are permuted standard basis vectors, terms have
    // disjoint support, everything reduces to the scalar closed form.
    for (int q = 0; q < n; ++q) {
      const int slot = spectral.diag_perm.empty() ? q : spectral.diag_perm[q];
      const cplx z = detail::node_power(spectral.eigenvalues(q), kappa);
      const cplx hq = problem.initial(slot);
      const int g = group_of_index(q);
      for (int it = 0; it < nt; ++it) {
        const cplx coef = std::exp(-z * problem.times[it]) * hq;
        res.states[it](slot) = coef;
        res.group_partial_norms[it][g] += std::norm(coef);
      }
    }
    for (auto& row : res.group_partial_norms)
      for (auto& v : row) v = std::sqrt(v);
    return res;
  }

  // Contiguous clusters from the cluster map.
  std::vector<std::pair<int, int>> clusters;  // [begin, end)
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && spectral.cluster_of[j] == spectral.cluster_of[i]) ++j;
    clusters.emplace_back(i, j);
    i = j;
  }
  const int nc = static_cast<int>(clusters.size());

  const auto cond_of = [&](int q) {
    return spectral.condition_numbers.size() > q ? spectral.condition_numbers(q) : 1.0;
  };
  // A cluster needs the circle-residue treatment when it is multiple or ill-conditioned.
  std::vector<char> needs_circle(nc, 0);
  for (int c = 0; c < nc; ++c) {
    const auto [b, e] = clusters[c];
    needs_circle[c] = (e - b > 1) || (cond_of(b) > 1e8);
  }

  // Union-find over clusters: circles that would swallow outside eigenvalues are merged.
  std::vector<int> parent(nc);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };

  struct CircleGeom {
    cplx center;
    double radius = 0.0;
  };

  const auto members_of = [&](int root, std::vector<int>& out) {
    out.clear();
    for (int c = 0; c < nc; ++c)
      if (find(c) == root)
        for (int q = clusters[c].first; q < clusters[c].second; ++q) out.push_back(q);
  };

  const auto geometry = [&](const std::vector<int>& members) {
    CircleGeom g;
    cplx sum = 0.0;
    for (int q : members) sum += spectral.eigenvalues(q);
    g.center = sum / static_cast<double>(members.size());
    double spread = 0.0;
    std::vector<char> inside(n, 0);
    for (int q : members) {
      inside[q] = 1;
      spread = std::max(spread, std::abs(spectral.eigenvalues(q) - g.center));
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (int q = 0; q < n; ++q)
      if (!inside[q]) dmin = std::min(dmin, std::abs(spectral.eigenvalues(q) - g.center));
    // No outside eigenvalue (single group): an origin-scale circle keeps the resolvent
    // tame on the circle even when the cluster spread is only rounding noise.
    if (!std::isfinite(dmin)) dmin = 2.0 * std::abs(g.center);
    // Half the distance to the nearest outside eigenvalue, widened to cover the cluster,
    // capped away from the origin so the circle never crosses the branch cut.
    g.radius = std::max(0.5 * dmin, 2.0 * spread + 1e-12);
    const double ac = std::abs(g.center);
    if (ac > 0.0) g.radius = std::min(g.radius, 0.9 * ac);
    if (g.radius < spread)
      fail_numerical("cluster-overlap",
                     "cannot separate an eigenvalue cluster from the origin with a residue circle");
    return g;
  };

  std::vector<int> members;
  for (int pass = 0; pass <= nc; ++pass) {
    bool changed = false;
    for (int c = 0; c < nc; ++c) {
      if (find(c) != c) continue;
      bool circ = false;
      for (int d = 0; d < nc; ++d)
        if (find(d) == c && needs_circle[d]) circ = true;
      // Merged groups of several clusters always integrate over one shared circle.
      for (int d = 0; d < nc; ++d)
        if (d != c && find(d) == c) circ = true;
      if (!circ) continue;
      members_of(c, members);
      const CircleGeom g = geometry(members);
      for (int q = 0; q < n; ++q) {
        if (std::abs(spectral.eigenvalues(q) - g.center) <= 1.05 * g.radius) {
          int qc = 0;
          while (!(clusters[qc].first <= q && q < clusters[qc].second)) ++qc;
          if (find(qc) != c) {
            parent[find(qc)] = c;
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
    if (pass == nc)
      fail_numerical("cluster-overlap", "residue circles could not be separated by merging");
  }

  // Evaluate one term per root group and accumulate states and bracket-group norms.
  std::vector<std::vector<Vec>> group_sums(nt, std::vector<Vec>(ng, Vec::Zero(n)));
  std::vector<char> seen(nc, 0);
  for (int c = 0; c < nc; ++c) {
    const int root = find(c);
    if (seen[root]) continue;
    seen[root] = 1;
    members_of(root, members);
    bool circ = members.size() > 1 || needs_circle[c];
    for (int d = 0; d < nc; ++d)
      if (find(d) == root && needs_circle[d]) circ = true;
    const int g = group_of_index(members.front());

    if (!circ) {
      const int q = members.front();
      const cplx z = detail::node_power(spectral.eigenvalues(q), kappa);
      const cplx ip = spectral.left_vectors.col(q).dot(problem.initial);
      for (int it = 0; it < nt; ++it) {
        const Vec term = (std::exp(-z * problem.times[it]) * ip) * spectral.right_vectors.col(q);
        res.states[it] += term;
        group_sums[it][g] += term;
      }
      continue;
    }

    const CircleGeom geom = geometry(members);
    constexpr int m = 32;
    QuadratureRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int k = 0; k < m; ++k) {
      const double phi = -2.0 * std::numbers::pi * k / m;  // clockwise
      const cplx e = std::polar(1.0, phi);
      rule.nodes[k] = geom.center + geom.radius * e;
      rule.weights[k] = cplx(0.0, -2.0 * std::numbers::pi / m) * geom.radius * e;
    }
    const Mat H = problem.initial;
    const auto sums = detail::contour_accumulate(problem.op, rule, problem.times, kappa, H, {}, mode);
    for (int it = 0; it < nt; ++it) {
      const Vec term = (sums[it][0] * kInvTwoPiI).col(0);
      res.states[it] += term;
      group_sums[it][g] += term;
    }
  }

  for (int it = 0; it < nt; ++it)
    for (int g = 0; g < ng; ++g) res.group_partial_norms[it][g] = group_sums[it][g].norm();
  return res;
}

SolutionResult solve_oracle(const EvolutionProblem& problem) {
  checked_kappa(problem);
  if (problem.mode.fractional)
    fail_input("mode-mismatch", "the dense-exponential reference requires the integer-power mode");
  const int n = problem.mode.n;
  const int dim = problem.op.dim();

  SolutionResult res;
  res.method = "oracle";
  res.states.resize(problem.times.size());

  if (problem.op.is_diagonal()) {
    Vec dn = Vec::Ones(dim);
    for (int i = 0; i < n; ++i) dn = dn.cwiseProduct(problem.op.diag);
    for (std::size_t it = 0; it < problem.times.size(); ++it) {
      const double t = problem.times[it];
      Vec u(dim);
      for (int i = 0; i < dim; ++i) u(i) = std::exp(-t * dn(i)) * problem.initial(i);
      res.states[it] = u;
    }
    return res;
  }

  Mat wn = Mat::Identity(dim, dim);
  for (int i = 0; i < n; ++i) wn = wn * problem.op.matrix;
  for (std::size_t it = 0; it < problem.times.size(); ++it) {
    const Mat a = -problem.times[it] * wn;
    const Mat e = a.exp();
    res.states[it] = e * problem.initial;
  }
  return res;
}

double fractional_residual(const EvolutionProblem& problem, const Contour& contour, double t,
                           double tol) {
  if (!problem.mode.fractional)
    fail_input("mode-mismatch", "the substitution residual is defined for the fractional mode");
  checked_kappa(problem);
  if (!(t > 0.0)) fail_input("invalid-interval", "time must be positive");
  if (!(tol > 0.0)) fail_input("invalid-interval", "tolerance must be positive");

  const double alpha = problem.mode.alpha;
  const QuadratureRule rule = contour_nodes(contour, t, alpha, tol, 16);
  const int nn = static_cast<int>(rule.nodes.size());
  std::vector<std::vector<cplx>> factors(2);
  factors[0].assign(nn, cplx(1.0, 0.0));
  factors[1] = rule.nodes;

  const Mat H = problem.initial;
  const auto sums = detail::contour_accumulate(problem.op, rule, {t}, alpha, H, factors,
                                               default_kernel_mode());
  const Vec u = (sums[0][0] * kInvTwoPiI).col(0);
  const Vec lhs = (sums[0][1] * kInvTwoPiI).col(0);
  const Vec rhs = problem.op.apply(u);
  const double nr = rhs.norm();
  if (nr < 1e-300) return lhs.norm();
  return (lhs - rhs).norm() / nr;
}

double derivative_identity_check(const EvolutionProblem& problem, const Contour& contour,
                                 double t) {
  if (!problem.mode.fractional)
    fail_input("mode-mismatch", "the derivative identity is defined for the fractional mode");
  checked_kappa(problem);
  if (!(t > 0.0)) fail_input("invalid-interval", "time must be positive");

  const double alpha = problem.mode.alpha;
  const double sigma = 1.0 - 1.0 / alpha;
  const QuadratureRule rule = contour_nodes(contour, t, alpha, 1e-10, 16);
  const int nn = static_cast<int>(rule.nodes.size());

  // Left side: the fractional-derivative factor written through the power-function
  // integral, lambda * z * Gamma(1-sigma) z^{sigma-1} / Gamma(1-sigma) with z = lambda^alpha.
  // Right side: the direct node factor z. Equal analytically on the principal branch;
  // the gap measures branch and special-function bookkeeping consistency.
  const double gam = std::tgamma(1.0 - sigma);
  std::vector<std::vector<cplx>> factors(2);
  factors[0].resize(nn);
  factors[1].resize(nn);
  for (int j = 0; j < nn; ++j) {
    const cplx lam = rule.nodes[j];
    const cplx z = std::pow(lam, alpha);
    factors[0][j] = lam * z * (gam * std::pow(z, sigma - 1.0)) / gam;
    factors[1][j] = z;
  }

  const Mat H = problem.initial;
  const auto sums = detail::contour_accumulate(problem.op, rule, {t}, alpha, H, factors,
                                               default_kernel_mode());
  const Vec lhs = (sums[0][0] * kInvTwoPiI).col(0);
  const Vec rhs = (sums[0][1] * kInvTwoPiI).col(0);
  const double nr = rhs.norm();
  if (nr < 1e-300) return lhs.norm();
  return (lhs - rhs).norm() / nr;
}

ContractionReport contraction_probe(const DiscretizedOperator& op, int power, int n_samples,
                                    const std::vector<double>& times, std::uint64_t seed) {
  if (power < 1) fail_input("invalid-interval", "power must be at least 1");
  if (n_samples < 1) fail_input("invalid-interval", "sample count must be at least 1");
  double prev = 0.0;
  for (double t : times) {
    if (!(t > prev))
      fail_input("invalid-interval", "times must be positive and strictly increasing");
    prev = t;
  }
  if (times.empty()) fail_input("invalid-interval", "times must be non-empty");

  const auto [accretive, margin] = accretivity_check(op, power, 1e-10);
  if (!accretive)
    fail_input("precondition-violation",
               "the operator power is not accretive; contraction is not expected");

  const int dim = op.dim();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat H(dim, n_samples);
  for (int s = 0; s < n_samples; ++s) {
    Vec h(dim);
    for (int i = 0; i < dim; ++i) h(i) = cplx(nd(gen), nd(gen));
    const double norm = h.norm();
    H.col(s) = norm < 1e-300 ? Vec::Unit(dim, 0) : Vec(h / norm);
  }

  const SpectralData sd = eigendecompose(op, 1e-6);
  std::vector<cplx> evs(sd.eigenvalues.data(), sd.eigenvalues.data() + sd.eigenvalues.size());
  const Contour contour = auto_contour(evs, static_cast<double>(power), times, 1e-8);
  const QuadratureRule rule =
      contour_nodes_multi(contour, times, static_cast<double>(power), 1e-8, 16);
  const auto sums = detail::contour_accumulate(op, rule, times, static_cast<double>(power), H, {},
                                               default_kernel_mode());

  ContractionReport rep;
  rep.samples = n_samples;
  rep.accretivity_margin = margin;
  for (std::size_t it = 0; it < times.size(); ++it) {
    const Mat u = sums[it][0] * kInvTwoPiI;
    for (int s = 0; s < n_samples; ++s)
      rep.max_norm_ratio = std::max(rep.max_norm_ratio, u.col(s).norm());
  }
  rep.contraction = rep.max_norm_ratio <= 1.0 + 1e-10;
  return rep;
}

InitialConditionReport initial_condition_probe(const EvolutionProblem& problem,
                                               const Contour& contour,
                                               const std::vector<double>& t_sequence, double tol) {
  EvolutionProblem sorted = problem;
  sorted.times = t_sequence;
  std::sort(sorted.times.begin(), sorted.times.end());
  const double kappa = checked_kappa(sorted);  // validates geometry, dims, positivity
  if (t_sequence.size() < 2 || !std::is_sorted(t_sequence.rbegin(), t_sequence.rend()))
    fail_input("invalid-interval", "time sequence must decrease toward zero");

  const QuadratureRule rule = contour_nodes_multi(contour, sorted.times, kappa, tol, 16);
  const Mat H = problem.initial;
  const auto sums = detail::contour_accumulate(problem.op, rule, t_sequence, kappa, H, {},
                                               default_kernel_mode());

  InitialConditionReport rep;
  for (std::size_t i = 0; i < t_sequence.size(); ++i) {
    const Vec u = (sums[i][0] * kInvTwoPiI).col(0);
    rep.rows.push_back({t_sequence[i], (u - problem.initial).norm()});
  }

  Vec wh = problem.initial;
  const int reps = problem.mode.fractional ? 1 : problem.mode.n;
  for (int i = 0; i < reps; ++i) wh = problem.op.apply(wh);
  const double t_min = t_sequence.back();
  rep.pass = rep.rows.back().deviation <= 10.0 * tol + 2.0 * t_min * wh.norm();
  return rep;
}

MethodComparison compare_methods(const EvolutionProblem& problem, const Contour& contour,
                                 const SpectralData& spectral, const Bracketing& brackets,
                                 double tol) {
  checked_kappa(problem);
  const SolutionResult uc = solve_contour(problem, contour, tol);
  const SolutionResult us = solve_series(problem, spectral, brackets);

  MethodComparison out;
  out.times = problem.times;
  out.group_partial_norms = us.group_partial_norms;

  const auto rel_sym = [](const Vec& a, const Vec& b) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
  };
  for (std::size_t it = 0; it < problem.times.size(); ++it)
    out.contour_vs_series.push_back(rel_sym(uc.states[it], us.states[it]));

  if (!problem.mode.fractional) {
    const SolutionResult uo = solve_oracle(problem);
    for (std::size_t it = 0; it < problem.times.size(); ++it) {
      const double dn = std::max(uo.states[it].norm(), 1e-300);
      out.contour_vs_oracle.push_back((uc.states[it] - uo.states[it]).norm() / dn);
      out.series_vs_oracle.push_back((us.states[it] - uo.states[it]).norm() / dn);
    }
  } else {
    for (double t : problem.times) {
      out.fractional_resid.push_back(fractional_residual(problem, contour, t, tol));
      out.derivative_gap.push_back(derivative_identity_check(problem, contour, t));
    }
  }
  return out;
}

}  // namespace lidskii
