#include "lidskii/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "lidskii/errors.hpp"

namespace lidskii {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr int kGL = 8;
constexpr double kGLX[kGL] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                              -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                              0.7966664774136267,  0.9602898564975363};
constexpr double kGLW[kGL] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                              0.2223810344533745, 0.1012285362903763};

// Upper angular bound of the shifted sector {|arg(z - v)| <= ai} on the circle |z| = rho.
// Returns pi when the whole circle satisfies the constraint, nullopt when no point does.
std::optional<double> shifted_sector_angle(double v, double ai, double rho) {
  if (v == 0.0) return ai;
  const double sa = std::sin(ai), ca = std::cos(ai);
  const double disc = rho * rho - v * v * sa * sa;
  if (v > 0.0) {
    if (rho < v) return std::nullopt;
    const double s = -v * ca + std::sqrt(std::max(disc, 0.0));
    return std::arg(cplx(v + s * ca, s * sa));
  }
  if (disc <= 0.0) return kPi;
  const double s = -v * ca + std::sqrt(disc);
  return std::arg(cplx(v + s * ca, s * sa));
}

struct UpperPiece {
  cplx start;
  cplx end;        // meaningful when !unbounded
  cplx direction;  // unit, outward
  bool unbounded = false;
};

double dist_point_segment(const cplx& p, const cplx& a, const cplx& b, bool unbounded_b) {
  const cplx ab = b - a;
  const double l2 = std::norm(ab);
  if (l2 < 1e-300) return std::abs(p - a);
  double tproj = ((p - a) * std::conj(ab)).real() / l2;
  tproj = std::max(tproj, 0.0);
  if (!unbounded_b) tproj = std::min(tproj, 1.0);
  return std::abs(p - (a + tproj * ab));
}

double dist_point_arc(const cplx& p, double radius, double phi0, double phi1) {
  const double lo = std::min(phi0, phi1), hi = std::max(phi0, phi1);
  const double ang = std::arg(p);
  if (ang >= lo && ang <= hi) return std::abs(std::abs(p) - radius);
  const cplx e0 = radius * std::polar(1.0, lo), e1 = radius * std::polar(1.0, hi);
  return std::min(std::abs(p - e0), std::abs(p - e1));
}

double min_pole_dist_segment(const std::vector<cplx>& poles, const cplx& a, const cplx& b) {
  double d = std::numeric_limits<double>::infinity();
  for (const cplx& p : poles) d = std::min(d, dist_point_segment(p, a, b, false));
  return d;
}

// Panel count for a straight panel: ~3 nats of t*z^alpha variation per panel, skipping
// panels whose integrand is dead (> 46 nats below the slowest answer scale) and keeping
// panels shorter than half their distance to the nearest pole.
int subdivide_count(const cplx& z0, const cplx& z1, const std::vector<double>& times, double alpha,
                    double scale_exp, const std::vector<cplx>& poles, int base) {
  const cplx za = std::pow(z0, alpha), zb = std::pow(z1, alpha);
  double var = 0.0;
  bool relevant = false;
  for (double t : times) {
    const double decay = t * std::min(za.real(), zb.real());
    if (decay - t * scale_exp > 46.0) continue;
    relevant = true;
    var = std::max(var, t * std::abs(zb - za));
  }
  int n = 1;
  if (relevant) {
    n = std::max(1, static_cast<int>(std::ceil(var / 3.0)));
    if (!poles.empty()) {
      const double d = min_pole_dist_segment(poles, z0, z1);
      n = std::max(n, static_cast<int>(std::ceil(std::abs(z1 - z0) / std::max(0.5 * d, 1e-12))));
    }
  }
  return std::max(1, static_cast<int>(std::ceil(n * static_cast<double>(base) / 16.0)));
}

void emit_line(const cplx& z0, const cplx& z1, int n_sub, QuadratureRule& rule) {
  for (int i = 0; i < n_sub; ++i) {
    const cplx a = z0 + (z1 - z0) * (static_cast<double>(i) / n_sub);
    const cplx b = z0 + (z1 - z0) * (static_cast<double>(i + 1) / n_sub);
    const cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int g = 0; g < kGL; ++g) {
      rule.nodes.push_back(mid + half * kGLX[g]);
      rule.weights.push_back(half * kGLW[g]);
    }
    ++rule.panel_count;
  }
}

void emit_arc(double radius, double p0, double p1, const std::vector<double>& times, double alpha,
              const std::vector<cplx>& poles, int base, QuadratureRule& rule) {
  const double tmax = *std::max_element(times.begin(), times.end());
  const double var = tmax * std::pow(radius, alpha) * std::abs(p1 - p0) * alpha;
  int n = std::max(4, static_cast<int>(std::ceil(var / 3.0)));
  if (!poles.empty()) {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 16; ++i) {
      const cplx z = radius * std::polar(1.0, p0 + (p1 - p0) * i / 16.0);
      for (const cplx& p : poles) d = std::min(d, std::abs(p - z));
    }
    const double len = radius * std::abs(p1 - p0);
    n = std::max(n, static_cast<int>(std::ceil(len / std::max(0.5 * d, 1e-12))));
  }
  n = std::max(1, static_cast<int>(std::ceil(n * static_cast<double>(base) / 16.0)));
  for (int i = 0; i < n; ++i) {
    const double a = p0 + (p1 - p0) * (static_cast<double>(i) / n);
    const double b = p0 + (p1 - p0) * (static_cast<double>(i + 1) / n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int g = 0; g < kGL; ++g) {
      const cplx z = radius * std::polar(1.0, mid + half * kGLX[g]);
      rule.nodes.push_back(z);
      rule.weights.push_back(cplx(0.0, 1.0) * z * (half * kGLW[g]));
    }
    ++rule.panel_count;
  }
}

// Straight path subdivided geometrically away from its near-origin end, each chunk then
// split by subdivide_count, traversed from `from` to `to`.
void emit_ray_path(const cplx& from, const cplx& to, const std::vector<double>& times, double alpha,
                   double scale_exp, const std::vector<cplx>& poles, int base,
                   QuadratureRule& rule) {
  const double len = std::abs(to - from);
  if (len < 1e-300) return;
  const bool from_near = std::abs(from) <= std::abs(to);
  const cplx near_p = from_near ? from : to;
  const cplx far_p = from_near ? to : from;
  const cplx dir = (far_p - near_p) / len;
  std::vector<double> bs = {0.0};
  double step = 0.4 * std::max(std::abs(near_p), 1e-6);
  while (bs.back() < len) {
    bs.push_back(std::min(bs.back() + step, len));
    step *= 1.4;
  }
  std::vector<std::pair<cplx, cplx>> chunks;
  for (std::size_t i = 0; i + 1 < bs.size(); ++i)
    chunks.emplace_back(near_p + bs[i] * dir, near_p + bs[i + 1] * dir);
  if (!from_near) {
    std::reverse(chunks.begin(), chunks.end());
    for (auto& c : chunks) std::swap(c.first, c.second);
  }
  for (const auto& c : chunks)
    emit_line(c.first, c.second, subdivide_count(c.first, c.second, times, alpha, scale_exp, poles, base),
              rule);
}

double ray_radius_parameter(const cplx& anchor, const cplx& dir, double R) {
  // Positive s with |anchor + s dir| = R.
  const double b = (std::conj(anchor) * dir).real();
  const double disc = b * b - std::norm(anchor) + R * R;
  return -b + std::sqrt(std::max(disc, 0.0));
}

}  // namespace

Contour build_contour(double sector_vertex, double theta_iota, double theta_zero, double epsilon,
                      double cut_radius, double alpha) {
  if (!(alpha >= 1.0)) fail_input("invalid-interval", "need alpha >= 1");
  if (!(epsilon > 0.0) || theta_zero < 0.0 || theta_iota < 0.0 || !(cut_radius > 0.0))
    fail_input("geometry-degenerate", "need epsilon > 0, angles >= 0, cut_radius > 0");
  const double a0 = theta_zero + epsilon;
  const double ai = theta_iota + epsilon;
  if (!(a0 < kPi / (2.0 * alpha)))
    fail_input("decay-violation", "theta_zero + epsilon must stay below pi/(2 alpha)");
  if (!(ai < kPi / 2.0))
    fail_input("geometry-degenerate", "theta_iota + epsilon must stay below pi/2");

  const double v = sector_vertex;
  Contour c;
  c.vertex_iota = v;
  c.theta_iota = theta_iota;
  c.theta_zero = theta_zero;
  c.epsilon = epsilon;
  c.cut_radius = cut_radius;

  // Upper-half boundary pieces ordered by increasing modulus; the lower half is the
  // conjugate mirror. Active constraint at radius rho is the smaller of a0 and the
  // shifted-sector angle.
  std::vector<UpperPiece> upper;
  cplx start;
  bool have_arc;
  double phi_r = 0.0;
  int near_active;  // 0: |arg z| <= a0 binding, 1: shifted sector binding
  if (v < cut_radius) {
    have_arc = true;
    const std::optional<double> pi_r = shifted_sector_angle(v, ai, cut_radius);
    if (!pi_r) fail_input("geometry-degenerate", "cut circle lies outside the shifted sector");
    phi_r = std::min(a0, *pi_r);
    if (!(phi_r > 0.0)) fail_input("geometry-degenerate", "empty angular extent at the cut radius");
    near_active = (*pi_r < a0) ? 1 : 0;
    start = cut_radius * std::polar(1.0, phi_r);
  } else {
    have_arc = false;
    near_active = 1;  // boundary leaves the corner along the shifted-sector ray
    start = cplx(v, 0.0);
  }

  // Junction of the two boundary rays (when both parameters are positive).
  std::optional<cplx> junction;
  const double det = std::sin(ai - a0);
  if (std::abs(det) > 1e-14 && v != 0.0) {
    const double s = v * std::sin(ai) / det;   // along the a0 ray from the origin
    const double u = v * std::sin(a0) / det;   // along the shifted ray from the vertex
    if (s > 1e-12 && u > 1e-12) junction = s * std::polar(1.0, a0);
  }
  const int far_active = (ai < a0 && v != 0.0) ? 1 : 0;
  const cplx dir0 = std::polar(1.0, a0);
  const cplx diri = std::polar(1.0, ai);

  if (junction && far_active != near_active && std::abs(*junction) > std::abs(start) + 1e-12) {
    UpperPiece finite;
    finite.start = start;
    finite.end = *junction;
    finite.direction = (near_active == 0) ? dir0 : diri;
    upper.push_back(finite);
    UpperPiece inf;
    inf.start = *junction;
    inf.direction = (far_active == 0) ? dir0 : diri;
    inf.unbounded = true;
    inf.end = inf.start + inf.direction;
    upper.push_back(inf);
  } else {
    UpperPiece inf;
    inf.start = start;
    inf.direction = (near_active == 0) ? dir0 : diri;
    inf.unbounded = true;
    inf.end = inf.start + inf.direction;
    upper.push_back(inf);
  }

  // Traversal: conjugate-mirrored upper pieces from far to near, the cut arc counter-
  // clockwise through angle zero, then the upper pieces outward.
  for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
    ContourSegment seg;
    seg.kind = SegmentKind::ray;
    seg.start = std::conj(it->start);
    seg.end = std::conj(it->end);
    seg.direction = std::conj(it->direction);
    seg.unbounded = it->unbounded;
    seg.inward = it->unbounded;
    seg.parametrization = it->unbounded ? "ray-inward" : "segment-inward";
    c.segments.push_back(seg);
  }
  if (have_arc) {
    ContourSegment seg;
    seg.kind = SegmentKind::arc;
    seg.radius = cut_radius;
    seg.phi0 = -phi_r;
    seg.phi1 = phi_r;
    seg.start = cut_radius * std::polar(1.0, -phi_r);
    seg.end = cut_radius * std::polar(1.0, phi_r);
    seg.parametrization = "arc-ccw";
    c.segments.push_back(seg);
  }
  for (const auto& p : upper) {
    ContourSegment seg;
    seg.kind = SegmentKind::ray;
    seg.start = p.start;
    seg.end = p.end;
    seg.direction = p.direction;
    seg.unbounded = p.unbounded;
    seg.inward = false;
    seg.parametrization = p.unbounded ? "ray-outward" : "segment-outward";
    c.segments.push_back(seg);
  }
  return c;
}

QuadratureRule contour_nodes_multi(const Contour& contour, const std::vector<double>& times,
                                   double alpha, double tol, int base_nodes_per_unit) {
  if (times.empty()) fail_input("invalid-interval", "need at least one time");
  for (double t : times)
    if (!(t > 0.0)) fail_input("invalid-interval", "times must be positive");
  if (!(tol > 0.0)) fail_input("invalid-interval", "tol must be positive");
  if (base_nodes_per_unit < 1) fail_input("invalid-interval", "base_nodes_per_unit must be >= 1");

  const double tmin = *std::min_element(times.begin(), times.end());
  const double th = contour.theta_zero + contour.epsilon;
  const double cth = std::cos(alpha * th);
  if (!(cth > 0.0)) fail_input("decay-violation", "no exponential decay along the rays");
  const double r = contour.cut_radius;
  const double c = tmin * cth;
  const double scale_exp = std::pow(r, alpha) * cth;
  // The answer itself decays like exp(-t r^alpha cos(alpha th)); once that underflows the
  // whole solution is a hard zero and any truncation radius is admissible, so the relative
  // scale is clamped above the underflow threshold.
  const double answer_scale = std::max(std::exp(-tmin * scale_exp), 1e-280);

  auto tail = [&](double R) {
    return std::exp(-c * std::pow(R, alpha)) / (c * alpha * std::pow(R, alpha - 1.0));
  };
  double R = std::max(1.05 * r, 0.5);
  while (tail(R) > tol * answer_scale && R < 1e6) R *= 1.2;
  if (R >= 1e6) fail_numerical("tolerance-unreachable", "tail bound cannot reach the tolerance");

  QuadratureRule rule;
  rule.truncation_radius = R;
  rule.est_tail = tail(R) / answer_scale;

  for (const ContourSegment& seg : contour.segments) {
    if (seg.kind == SegmentKind::arc) {
      emit_arc(seg.radius, seg.phi0, seg.phi1, times, alpha, contour.poles_hint,
               base_nodes_per_unit, rule);
      continue;
    }
    cplx from = seg.start, to = seg.end;
    if (seg.unbounded) {
      const double sR = ray_radius_parameter(seg.start, seg.direction, R);
      if (sR <= 0.0) continue;  // anchor already beyond the truncation radius
      if (seg.inward) {
        from = seg.start + sR * seg.direction;
        to = seg.start;
      } else {
        from = seg.start;
        to = seg.start + sR * seg.direction;
      }
    }
    emit_ray_path(from, to, times, alpha, scale_exp, contour.poles_hint, base_nodes_per_unit,
                  rule);
  }
  return rule;
}

QuadratureRule contour_nodes(const Contour& contour, double t, double alpha, double tol,
                             int base_nodes_per_unit) {
  return contour_nodes_multi(contour, {t}, alpha, tol, base_nodes_per_unit);
}

namespace {

// Accumulated argument change of (z - pole) along the sampled closed curve, with
// adaptive bisection so no step rotates by more than half a radian.
double winding_delta(const cplx& a, const cplx& b, const cplx& pole, int depth) {
  const cplx za = a - pole, zb = b - pole;
  const double d = std::arg(zb / za);
  if (std::abs(d) <= 0.5 || depth >= 48) return d;
  const cplx mid = 0.5 * (a + b);
  return winding_delta(a, mid, pole, depth + 1) + winding_delta(mid, b, pole, depth + 1);
}

}  // namespace

std::pair<bool, double> validate_contour(const Contour& contour,
                                         const std::vector<cplx>& eigenvalues) {
  if (eigenvalues.empty()) return {true, std::numeric_limits<double>::infinity()};

  double maxmod = 0.0;
  for (const cplx& ev : eigenvalues) maxmod = std::max(maxmod, std::abs(ev));
  const double Rv = 2.0 * (maxmod + contour.cut_radius + std::abs(contour.vertex_iota) + 1.0);

  // Distance from the spectrum to the (untruncated) curve.
  double min_dist = std::numeric_limits<double>::infinity();
  for (const cplx& ev : eigenvalues) {
    for (const ContourSegment& seg : contour.segments) {
      if (seg.kind == SegmentKind::arc) {
        min_dist = std::min(min_dist, dist_point_arc(ev, seg.radius, seg.phi0, seg.phi1));
      } else if (seg.unbounded) {
        min_dist = std::min(min_dist,
                            dist_point_segment(ev, seg.start, seg.start + seg.direction, true));
      } else {
        min_dist = std::min(min_dist, dist_point_segment(ev, seg.start, seg.end, false));
      }
    }
  }

  // Closed sampled polyline: the truncated traversal plus the outer closing arc.
  std::vector<cplx> path;
  double phi_up = 0.0;
  for (const ContourSegment& seg : contour.segments) {
    if (seg.kind == SegmentKind::arc) {
      for (int i = 0; i <= 64; ++i)
        path.push_back(seg.radius * std::polar(1.0, seg.phi0 + (seg.phi1 - seg.phi0) * i / 64.0));
      continue;
    }
    cplx from = seg.start, to = seg.end;
    if (seg.unbounded) {
      const double sR = ray_radius_parameter(seg.start, seg.direction, Rv);
      if (seg.inward) {
        from = seg.start + sR * seg.direction;
      } else {
        to = seg.start + sR * seg.direction;
        phi_up = std::arg(to);
      }
    }
    for (int i = 0; i <= 64; ++i)
      path.push_back(from + (to - from) * (static_cast<double>(i) / 64.0));
  }
  for (int i = 1; i <= 128; ++i)
    path.push_back(Rv * std::polar(1.0, phi_up + (-phi_up - phi_up) * i / 128.0));

  bool all_inside = min_dist > 1e-12 * (1.0 + maxmod);
  for (const cplx& ev : eigenvalues) {
    if (!all_inside) break;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      total += winding_delta(path[i], path[i + 1], ev, 0);
    total += winding_delta(path.back(), path.front(), ev, 0);
    const long w = std::lround(total / (2.0 * kPi));
    if (w != -1) all_inside = false;
  }
  return {all_inside, min_dist};
}

double cancellation_loss(const std::vector<cplx>& eigenvalues, double alpha, double t_max,
                         double cut_radius, double theta_eff) {
  double min_re = std::numeric_limits<double>::infinity();
  for (const cplx& ev : eigenvalues)
    min_re = std::min(min_re, std::pow(ev, alpha).real());
  return t_max * min_re - t_max * std::pow(cut_radius, alpha) * std::cos(alpha * theta_eff);
}

Contour auto_contour(const std::vector<cplx>& eigenvalues, double alpha,
                     const std::vector<double>& times, double tol) {
  (void)tol;
  if (eigenvalues.empty()) fail_input("invalid-interval", "need a nonempty spectrum");
  if (times.empty()) fail_input("invalid-interval", "need at least one time");

  double max_arg = 0.0, min_mod = std::numeric_limits<double>::infinity();
  for (const cplx& ev : eigenvalues) {
    max_arg = std::max(max_arg, std::abs(std::arg(ev)));
    min_mod = std::min(min_mod, std::abs(ev));
  }
  if (!(min_mod > 0.0)) fail_input("invalid-interval", "spectrum touches the origin");
  const double theta0 = std::max(max_arg * 1.02 + 0.005, 0.01);
  const double half = kPi / (2.0 * alpha);
  if (!(theta0 + 1e-3 < half))
    fail_input("decay-violation", "spectral angle leaves no room for a decaying contour");
  const double eps_default = 0.25 * (half - theta0);
  const double tmax = *std::max_element(times.begin(), times.end());

  const double hugs[] = {0.5, 0.75, 0.9, 0.97, 0.99, 0.995};
  const double efracs[] = {1.0, 0.3, 0.1, 0.02};
  const double budget_nats = 12.0;
  double best_loss = std::numeric_limits<double>::infinity();
  double best_r = 0.5 * min_mod, best_eps = std::max(1e-3, eps_default);
  bool accepted = false;
  for (double hug : hugs) {
    const double r = hug * min_mod;
    for (double efrac : efracs) {
      const double eps = std::max(1e-3, eps_default * efrac);
      const double th = theta0 + eps;
      if (alpha * th >= kPi / 2.0) continue;
      const double loss = cancellation_loss(eigenvalues, alpha, tmax, r, th);
      if (loss < best_loss) {
        best_loss = loss;
        best_r = r;
        best_eps = eps;
      }
      if (loss <= budget_nats) {
        best_r = r;
        best_eps = eps;
        accepted = true;
        break;
      }
    }
    if (accepted) break;
  }
  Contour c = build_contour(0.0, theta0, theta0, best_eps, best_r, alpha);
  c.poles_hint = eigenvalues;
  return c;
}

}  // namespace lidskii
