#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "lidskii/contour.hpp"
#include "lidskii/errors.hpp"
#include "lidskii/operators.hpp"
#include "lidskii/solver.hpp"
#include "lidskii/spectral.hpp"

using namespace lidskii;

namespace {

template <typename F>
std::string error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

DiscretizedOperator dense_op(const Mat& m) {
  DiscretizedOperator op;
  op.matrix = m;
  op.kind = "dense";
  return op;
}

DiscretizedOperator diag_op(const Vec& d) {
  DiscretizedOperator op;
  op.diag = d;
  op.matrix = d.asDiagonal();
  op.kind = "diag";
  return op;
}

Mode integer_mode(int n) {
  Mode m;
  m.fractional = false;
  m.n = n;
  return m;
}

Mode fractional_mode(double alpha) {
  Mode m;
  m.fractional = true;
  m.alpha = alpha;
  return m;
}

EvolutionProblem make_problem(DiscretizedOperator op, Mode mode, Vec h,
                              std::vector<double> times) {
  EvolutionProblem p;
  p.op = std::move(op);
  p.mode = mode;
  p.initial = std::move(h);
  p.times = std::move(times);
  return p;
}

std::vector<cplx> to_std(const Vec& v) {
  return std::vector<cplx>(v.data(), v.data() + v.size());
}

double rel_err(const Vec& got, const Vec& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace

TEST_CASE("contour evolution of the identity matches scalar decay for every power") {
  const Vec h = Vec::Constant(3, cplx(1.0, 0.0)).normalized();
  const std::vector<double> times = {0.1, 0.5, 1.0};
  for (int n : {1, 2, 3}) {
    auto p = make_problem(dense_op(Mat::Identity(3, 3)), integer_mode(n), h, times);
    const Contour c = auto_contour({cplx(1.0, 0.0)}, double(n), times, 1e-10);
    const SolutionResult r = solve_contour(p, c, 1e-10);
    REQUIRE(r.states.size() == times.size());
    for (std::size_t it = 0; it < times.size(); ++it)
      CHECK(rel_err(r.states[it], std::exp(-times[it]) * h) <= 1e-9);
  }
}

TEST_CASE("contour evolution uses the elementwise path for diagonal operators") {
  Vec d(2);
  d << cplx(2.0, 0.0), cplx(5.0, 0.0);
  Vec h(2);
  h << cplx(0.6, 0.0), cplx(0.8, 0.0);
  const std::vector<double> times = {0.3, 1.0};
  auto p = make_problem(diag_op(d), integer_mode(1), h, times);
  const Contour c = auto_contour(to_std(d), 1.0, times, 1e-10);
  const SolutionResult r = solve_contour(p, c, 1e-10);
  for (std::size_t it = 0; it < times.size(); ++it) {
    Vec want(2);
    for (int i = 0; i < 2; ++i) want(i) = std::exp(-d(i) * times[it]) * h(i);
    CHECK(rel_err(r.states[it], want) <= 1e-9);
  }
}

TEST_CASE("fractional contour evolution of a scalar matches exp(-t w^alpha)") {
  Vec h(1);
  h << cplx(1.0, 0.0);
  Vec d(1);
  d << cplx(2.0, 0.0);
  const std::vector<double> times = {0.2, 1.0};
  auto p = make_problem(diag_op(d), fractional_mode(2.0), h, times);
  const Contour c = auto_contour({cplx(2.0, 0.0)}, 2.0, times, 1e-10);
  const SolutionResult r = solve_contour(p, c, 1e-10);
  for (std::size_t it = 0; it < times.size(); ++it)
    CHECK(std::abs(r.states[it](0) - std::exp(cplx(-4.0 * times[it], 0.0))) <= 1e-8);
}

TEST_CASE("matrix-exponential reference handles zero, diagonal, and defective cases") {
  const std::vector<double> times = {0.5};
  {
    auto p = make_problem(dense_op(Mat::Zero(2, 2)), integer_mode(1),
                          Vec::Constant(2, cplx(1.0, 0.0)), times);
    const SolutionResult r = solve_oracle(p);
    CHECK(rel_err(r.states[0], Vec::Constant(2, cplx(1.0, 0.0))) == 0.0);
  }
  {
    Vec d(2);
    d << cplx(1.0, 0.0), cplx(3.0, 0.0);
    Vec h(2);
    h << cplx(1.0, 0.0), cplx(1.0, 0.0);
    auto p = make_problem(diag_op(d), integer_mode(2), h, times);
    const SolutionResult r = solve_oracle(p);
    Vec want(2);
    want << std::exp(cplx(-0.5, 0.0)), std::exp(cplx(-4.5, 0.0));
    CHECK(rel_err(r.states[0], want) <= 1e-14);
  }
  {
    Mat j(2, 2);
    j << cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0);
    Vec h(2);
    h << cplx(0.0, 0.0), cplx(1.0, 0.0);
    auto p = make_problem(dense_op(j), integer_mode(1), h, times);
    const SolutionResult r = solve_oracle(p);
    Vec want(2);
    want << -0.5 * std::exp(-0.5), std::exp(-0.5);
    CHECK(rel_err(r.states[0], want) <= 1e-14);
  }
  {
    auto p = make_problem(dense_op(Mat::Identity(2, 2)), fractional_mode(2.0),
                          Vec::Constant(2, cplx(1.0, 0.0)), times);
    CHECK(error_code_of([&] { solve_oracle(p); }) == "mode-mismatch");
  }
}

TEST_CASE("bracketed expansion on a large diagonal operator uses disjoint groups") {
  const auto op = diagonal_normal_operator(0.5, 0.5, 2000, "alternating", 1);
  const SpectralData sd = eigendecompose(op);
  REQUIRE(sd.identity_vectors);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  Vec h = Vec::Zero(2000);
  for (int i = 0; i < 2000; ++i) h(i) = cplx(1.0 / std::sqrt(2000.0), 0.0);
  const std::vector<double> times = {0.05, 0.4};
  auto p = make_problem(op, integer_mode(1), h, times);
  const SolutionResult r = solve_series(p, sd, br);
  for (std::size_t it = 0; it < times.size(); ++it) {
    Vec want(2000);
    for (int i = 0; i < 2000; ++i) want(i) = std::exp(-op.diag(i) * times[it]) * h(i);
    CHECK(rel_err(r.states[it], want) <= 1e-12);
    // Groups have disjoint coordinate support, so their norms tile the state norm.
    double ss = 0.0;
    for (double g : r.group_partial_norms[it]) ss += g * g;
    CHECK(std::sqrt(ss) == doctest::Approx(r.states[it].norm()).epsilon(1e-10));
    CHECK(r.group_partial_norms[it].size() == br.boundaries.size() - 1);
  }
}

TEST_CASE("bracketed expansion agrees with the reference on the composite operator") {
  const GridSpec g = make_grid(0.0, 1.0, 32);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  Vec h = Vec::Zero(32);
  h(3) = cplx(1.0, 0.0);
  const std::vector<double> times = {0.1, 1.0};
  for (int n : {1, 2}) {
    auto p = make_problem(w, integer_mode(n), h, times);
    const SolutionResult rs = solve_series(p, sd, br);
    const SolutionResult ro = solve_oracle(p);
    for (std::size_t it = 0; it < times.size(); ++it)
      CHECK(rel_err(rs.states[it], ro.states[it]) <= 1e-7);
  }
}

TEST_CASE("bracketed expansion integrates a defective block through a residue circle") {
  Mat j(2, 2);
  j << cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0);
  Vec h(2);
  h << cplx(0.0, 0.0), cplx(1.0, 0.0);
  const std::vector<double> times = {0.1, 1.0};
  auto p = make_problem(dense_op(j), integer_mode(1), h, times);
  const SpectralData sd = eigendecompose(p.op);
  REQUIRE(sd.cluster_of[0] == sd.cluster_of[1]);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  const SolutionResult r = solve_series(p, sd, br);
  for (std::size_t it = 0; it < times.size(); ++it) {
    Vec want(2);
    want << -times[it] * std::exp(-times[it]), std::exp(-times[it]);
    CHECK(rel_err(r.states[it], want) <= 1e-8);
  }
}

TEST_CASE("bracketed expansion handles mixed defective and simple spectrum") {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = cplx(2.0, 0.0);
  m(0, 1) = cplx(1.0, 0.0);
  m(1, 1) = cplx(2.0, 0.0);
  m(2, 2) = cplx(4.0, 0.0);
  m(3, 3) = cplx(7.0, 1.0);
  Vec h(4);
  h << cplx(1.0, 0.0), cplx(0.5, 0.0), cplx(-0.3, 0.0), cplx(0.8, 0.0);
  const std::vector<double> times = {0.2, 1.0};
  auto p = make_problem(dense_op(m), integer_mode(1), h, times);
  const SpectralData sd = eigendecompose(p.op);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  const SolutionResult rs = solve_series(p, sd, br);
  const SolutionResult ro = solve_oracle(p);
  for (std::size_t it = 0; it < times.size(); ++it)
    CHECK(rel_err(rs.states[it], ro.states[it]) <= 1e-8);
}

TEST_CASE("fractional bracketed expansion matches elementwise decay") {
  Vec d(2);
  d << cplx(1.0, 0.0), cplx(2.5, 0.0);
  Vec h(2);
  h << cplx(0.6, 0.0), cplx(0.8, 0.0);
  const std::vector<double> times = {0.3, 1.0};
  auto p = make_problem(diag_op(d), fractional_mode(1.5), h, times);
  const SpectralData sd = eigendecompose(p.op);
  const SolutionResult r = solve_series(p, sd, bracket_eigenvalues(sd, 1.0, 1.0));
  for (std::size_t it = 0; it < times.size(); ++it) {
    Vec want(2);
    for (int i = 0; i < 2; ++i)
      want(i) = std::exp(-std::pow(d(i), 1.5) * times[it]) * h(i);
    CHECK(rel_err(r.states[it], want) <= 1e-9);
  }
}

TEST_CASE("substitution residual and derivative identity are tiny for a scalar") {
  Vec d(1);
  d << cplx(2.0, 0.0);
  Vec h(1);
  h << cplx(1.0, 0.0);
  auto p = make_problem(diag_op(d), fractional_mode(2.0), h, {1.0});
  const Contour c = auto_contour({cplx(2.0, 0.0)}, 2.0, {1.0}, 1e-10);
  CHECK(fractional_residual(p, c, 1.0, 1e-10) <= 1e-8);
  CHECK(derivative_identity_check(p, c, 1.0) <= 1e-9);

  auto pi = make_problem(diag_op(d), integer_mode(1), h, {1.0});
  CHECK(error_code_of([&] { fractional_residual(pi, c, 1.0, 1e-10); }) == "mode-mismatch");
  CHECK(error_code_of([&] { derivative_identity_check(pi, c, 1.0); }) == "mode-mismatch");
}

TEST_CASE("zero initial state gives zero substitution residual") {
  Vec d(1);
  d << cplx(2.0, 0.0);
  Vec h(1);
  h << cplx(0.0, 0.0);
  auto p = make_problem(diag_op(d), fractional_mode(2.0), h, {1.0});
  const Contour c = auto_contour({cplx(2.0, 0.0)}, 2.0, {1.0}, 1e-10);
  CHECK(fractional_residual(p, c, 1.0, 1e-10) <= 1e-12);
}

TEST_CASE("norm contraction holds for accretive powers and is refused otherwise") {
  const GridSpec g = make_grid(0.0, 1.0, 64);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const ContractionReport rep = contraction_probe(w, 1, 10, {0.1, 1.0}, 7);
  CHECK(rep.samples == 10);
  CHECK(rep.contraction);
  CHECK(rep.max_norm_ratio <= 1.0 + 1e-10);
  CHECK(rep.accretivity_margin > 0.0);

  DiscretizedOperator neg;
  neg.matrix = -w.matrix;
  CHECK(error_code_of([&] { contraction_probe(neg, 1, 2, {0.1}, 7); }) ==
        "precondition-violation");
}

TEST_CASE("deviation from the initial state decreases as t drops to zero") {
  const GridSpec g = make_grid(0.0, 1.0, 64);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  Vec h = Vec::Zero(64);
  h(5) = cplx(1.0, 0.0);
  const std::vector<double> tseq = {1e-1, 1e-2, 1e-3, 1e-4};
  auto p = make_problem(w, integer_mode(1), h, {1e-4, 1e-3, 1e-2, 1e-1});
  const Contour c = auto_contour(to_std(sd.eigenvalues), 1.0, p.times, 1e-8);
  const InitialConditionReport rep = initial_condition_probe(p, c, tseq, 1e-8);
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].deviation < rep.rows[i - 1].deviation);
  CHECK(rep.pass);
}

TEST_CASE("method comparison reports consistent integer-mode error columns") {
  const GridSpec g = make_grid(0.0, 1.0, 32);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  Vec h = Vec::Zero(32);
  h(2) = cplx(1.0, 0.0);
  auto p = make_problem(w, integer_mode(1), h, {0.1, 0.5});
  const Contour c = auto_contour(to_std(sd.eigenvalues), 1.0, p.times, 1e-8);
  const MethodComparison mc = compare_methods(p, c, sd, br, 1e-8);
  REQUIRE(mc.times == p.times);
  REQUIRE(mc.contour_vs_series.size() == 2);
  REQUIRE(mc.contour_vs_oracle.size() == 2);
  REQUIRE(mc.series_vs_oracle.size() == 2);
  CHECK(mc.fractional_resid.empty());
  CHECK(mc.derivative_gap.empty());
  for (int i = 0; i < 2; ++i) {
    CHECK(mc.contour_vs_series[i] <= 1e-6);
    CHECK(mc.contour_vs_oracle[i] <= 1e-6);
    CHECK(mc.series_vs_oracle[i] <= 1e-6);
  }
  CHECK(mc.group_partial_norms.size() == 2);
}

TEST_CASE("method comparison reports residual columns in fractional mode") {
  const GridSpec g = make_grid(0.0, 1.0, 32);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  const Bracketing br = bracket_eigenvalues(sd, 1.0, 1.0);
  Vec h = Vec::Zero(32);
  h(2) = cplx(1.0, 0.0);
  auto p = make_problem(w, fractional_mode(3.0), h, {0.2, 1.0});
  const Contour c = auto_contour(to_std(sd.eigenvalues), 3.0, p.times, 1e-8);
  const MethodComparison mc = compare_methods(p, c, sd, br, 1e-8);
  CHECK(mc.contour_vs_oracle.empty());
  CHECK(mc.series_vs_oracle.empty());
  REQUIRE(mc.fractional_resid.size() == 2);
  REQUIRE(mc.derivative_gap.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(mc.contour_vs_series[i] <= 1e-5);
    CHECK(mc.fractional_resid[i] <= 1e-5);
    CHECK(mc.derivative_gap[i] <= 1e-5);
  }
}

TEST_CASE("serial and parallel kernels produce bit-identical states") {
  const GridSpec g = make_grid(0.0, 1.0, 64);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  Vec h = Vec::Zero(64);
  h(7) = cplx(1.0, 0.0);
  auto p = make_problem(w, integer_mode(2), h, {0.1, 0.5, 1.0});
  const Contour c = auto_contour(to_std(sd.eigenvalues), 2.0, p.times, 1e-8);
  const SolutionResult rs = solve_contour(p, c, 1e-8, KernelMode::serial);
  const SolutionResult rp = solve_contour(p, c, 1e-8, KernelMode::parallel);
  for (std::size_t it = 0; it < p.times.size(); ++it) {
    CHECK((rs.states[it] - rp.states[it]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("input validation rejects malformed problems") {
  Vec d(2);
  d << cplx(1.0, 0.0), cplx(2.0, 0.0);
  Vec h(2);
  h << cplx(1.0, 0.0), cplx(0.0, 0.0);
  const Contour c = auto_contour(to_std(d), 1.0, {1.0}, 1e-8);

  auto p_empty = make_problem(diag_op(d), integer_mode(1), h, {});
  CHECK(error_code_of([&] { solve_contour(p_empty, c, 1e-8); }) == "invalid-interval");

  auto p_decr = make_problem(diag_op(d), integer_mode(1), h, {1.0, 0.5});
  CHECK(error_code_of([&] { solve_contour(p_decr, c, 1e-8); }) == "invalid-interval");

  auto p_neg = make_problem(diag_op(d), integer_mode(1), h, {-1.0, 0.5});
  CHECK(error_code_of([&] { solve_contour(p_neg, c, 1e-8); }) == "invalid-interval");

  Vec h3 = Vec::Zero(3);
  auto p_dim = make_problem(diag_op(d), integer_mode(1), h3, {1.0});
  CHECK(error_code_of([&] { solve_contour(p_dim, c, 1e-8); }) == "dimension-mismatch");

  auto p_alpha = make_problem(diag_op(d), fractional_mode(1.0), h, {1.0});
  CHECK(error_code_of([&] { solve_contour(p_alpha, c, 1e-8); }) == "invalid-interval");

  auto p_n = make_problem(diag_op(d), integer_mode(0), h, {1.0});
  CHECK(error_code_of([&] { solve_contour(p_n, c, 1e-8); }) == "invalid-interval");
}
