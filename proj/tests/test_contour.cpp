#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "lidskii/contour.hpp"
#include "lidskii/errors.hpp"
#include "lidskii/operators.hpp"
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

// Direct scalar evolution through the rule: (1/2pi i) sum w_j exp(-node_j^alpha t) / (w0 - node_j).
cplx scalar_evolve(const QuadratureRule& rule, double t, double alpha, cplx w0) {
  cplx s(0.0, 0.0);
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const cplx lam = rule.nodes[j];
    const cplx z = (alpha == 1.0) ? lam : std::pow(lam, alpha);
    s += rule.weights[j] * std::exp(-z * t) / (w0 - lam);
  }
  return s * cplx(0.0, -1.0 / (2.0 * M_PI));
}

}  // namespace

TEST_CASE("contour geometry: segments, orientation, and parameter validation") {
  const Contour c = build_contour(0.0, 0.2, 0.2, 0.1, 0.5, 1.0);
  CHECK(c.segments.size() == 3);
  CHECK(c.segments[0].kind == SegmentKind::ray);
  CHECK(c.segments[0].unbounded);
  CHECK(c.segments[0].inward);
  CHECK(c.segments[1].kind == SegmentKind::arc);
  CHECK(c.segments[1].radius == doctest::Approx(0.5));
  CHECK(c.segments[2].kind == SegmentKind::ray);
  CHECK_FALSE(c.segments[2].inward);
  CHECK(c.orientation == "spectrum-enclosing-clockwise");

  // Exponential decay requires theta_zero + epsilon < pi/(2 alpha).
  CHECK(error_code_of([] { build_contour(0.0, 0.4, 0.4, 0.4, 0.5, 2.0); }) ==
        "decay-violation");
  CHECK(error_code_of([] { build_contour(0.0, 0.2, 0.2, 0.1, -1.0, 1.0); }) ==
        "geometry-degenerate");
}

TEST_CASE("winding validation distinguishes inside, outside, and on-curve points") {
  const Contour c = build_contour(0.0, 0.10, 0.10, 0.05, 0.5, 2.0);
  auto [ok_in, d_in] = validate_contour(c, {cplx(1.0, 0.0)});
  CHECK(ok_in);
  CHECK(d_in > 0.1);

  auto [ok_cut, d_cut] = validate_contour(c, {cplx(0.3, 0.0)});
  CHECK_FALSE(ok_cut);

  auto [ok_sector, d_sector] = validate_contour(c, {cplx(1.0, 2.0)});
  CHECK_FALSE(ok_sector);

  auto [ok_on, d_on] = validate_contour(c, {cplx(0.5, 0.0)});
  CHECK_FALSE(ok_on);
  CHECK(d_on <= 1e-9);

  auto [ok_empty, d_empty] = validate_contour(c, {});
  CHECK(ok_empty);
  CHECK(std::isinf(d_empty));
}

TEST_CASE("winding validation with a shifted sector vertex") {
  const Contour c = build_contour(5.0, 0.3, 0.35, 0.05, 1.0, 1.0);
  CHECK(validate_contour(c, {cplx(8.0, 0.0)}).first);
  CHECK_FALSE(validate_contour(c, {cplx(4.9, 0.0)}).first);   // behind the vertex
  CHECK_FALSE(validate_contour(c, {cplx(0.8, 0.0)}).first);   // inside the cut disk
  CHECK_FALSE(validate_contour(c, {cplx(6.0, 4.0)}).first);   // outside both sectors
}

TEST_CASE("truncation radius tracks the analytic tail estimate") {
  Contour c = build_contour(0.0, 0.10, 0.10, 0.05, 0.5, 2.0);
  c.poles_hint = {cplx(1.0, 0.0)};
  const QuadratureRule rule = contour_nodes(c, 1.0, 2.0, 1e-8, 16);
  // Solving exp(-t R^2 cos(2(theta0+eps))) = tol relative to the slowest mode gives R = 4.39.
  CHECK(rule.truncation_radius >= 0.8 * 4.39);
  CHECK(rule.truncation_radius <= 2.0 * 4.39);
  CHECK(rule.est_tail <= 1e-8);
  CHECK(rule.panel_count > 0);
  CHECK(rule.nodes.size() == rule.weights.size());
  CHECK(rule.nodes.size() == 8u * static_cast<std::size_t>(rule.panel_count));
}

TEST_CASE("a shared rule for several times truncates for the slowest-decaying one") {
  Contour c = build_contour(0.0, 0.10, 0.10, 0.05, 0.5, 2.0);
  c.poles_hint = {cplx(1.0, 0.0)};
  const QuadratureRule r_slow = contour_nodes(c, 0.1, 2.0, 1e-8, 16);
  const QuadratureRule r_fast = contour_nodes(c, 1.0, 2.0, 1e-8, 16);
  const QuadratureRule r_multi = contour_nodes_multi(c, {0.1, 1.0}, 2.0, 1e-8, 16);
  CHECK(r_multi.truncation_radius >= r_fast.truncation_radius);
  CHECK(r_multi.truncation_radius == doctest::Approx(r_slow.truncation_radius).epsilon(1e-9));
  CHECK(r_multi.nodes.size() >= r_fast.nodes.size());

  CHECK(error_code_of([&] { contour_nodes(c, -1.0, 2.0, 1e-8, 16); }) == "invalid-interval");
  CHECK(error_code_of([&] { contour_nodes_multi(c, {}, 2.0, 1e-8, 16); }) ==
        "invalid-interval");
}

TEST_CASE("tolerance is reported unreachable when the decay angle is almost exhausted") {
  const double theta = M_PI / 8.0 - 5e-13;  // theta0 + eps within 1e-12 of pi/4
  const Contour c = build_contour(0.0, theta, theta, theta, 0.5, 2.0);
  CHECK(error_code_of([&] { contour_nodes(c, 1.0, 2.0, 1e-8, 16); }) ==
        "tolerance-unreachable");
}

TEST_CASE("scalar evolution through the rule matches exp(-t w^alpha)") {
  Contour c = build_contour(0.0, 0.2, 0.2, 0.1, 0.5, 1.0);
  c.poles_hint = {cplx(1.0, 0.0)};
  const QuadratureRule r1 = contour_nodes(c, 1.0, 1.0, 1e-8, 16);
  CHECK(std::abs(scalar_evolve(r1, 1.0, 1.0, cplx(1.0, 0.0)) - std::exp(-1.0)) <= 1e-7);

  Contour c2 = build_contour(0.0, 0.10, 0.10, 0.05, 0.5, 2.0);
  c2.poles_hint = {cplx(1.0, 0.0)};
  const QuadratureRule r2 = contour_nodes(c2, 0.5, 2.0, 1e-8, 16);
  CHECK(std::abs(scalar_evolve(r2, 0.5, 2.0, cplx(1.0, 0.0)) - std::exp(-0.5)) <= 1e-7);
}

TEST_CASE("automatic contour selection encloses the spectrum with bounded cancellation") {
  const GridSpec g = make_grid(0.0, 1.0, 64);
  const auto w = composite_operator(-1.0, 1.0, 0.5, g);
  const SpectralData sd = eigendecompose(w);
  std::vector<cplx> evs(sd.eigenvalues.data(), sd.eigenvalues.data() + sd.eigenvalues.size());

  const std::vector<double> times = {0.1, 0.5, 1.0};
  for (double alpha : {1.0, 2.0}) {
    const Contour c = auto_contour(evs, alpha, times, 1e-8);
    auto [ok, dist] = validate_contour(c, evs);
    CHECK(ok);
    CHECK(dist > 0.0);
    double min_mod = std::abs(evs[0].real());
    for (const cplx& z : evs) min_mod = std::min(min_mod, std::abs(z));
    CHECK(c.cut_radius < min_mod);
    CHECK(c.poles_hint.size() == evs.size());
    const double loss =
        cancellation_loss(evs, alpha, times.back(), c.cut_radius, c.theta_zero + c.epsilon);
    CHECK(loss <= 12.0 + 1e-9);
    // The rule for the whole time sweep stays well below machine-noise amplification.
    const QuadratureRule rule = contour_nodes_multi(c, times, alpha, 1e-8, 16);
    CHECK(rule.est_tail <= 1e-8);
  }
}
