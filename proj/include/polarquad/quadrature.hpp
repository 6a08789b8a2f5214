#pragma once

// Polar-transform quadrature rules for curved triangles.
//
// The element is placed in its reference frame, the angular range about the
// projected field point is broken at corner rays and tangents, and a Gauss
// rule in theta is combined with Gauss rules in r between each entry/exit
// pair on every ray. Each planar point is mapped back to (xi, eta) by Newton
// iteration, giving a rule that is used exactly like a standard triangle rule:
//
//   int f J dxi deta  ~  sum_n f(xi_n, eta_n) J(xi_n, eta_n) w_n,  sum w_n = 1/2.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polarquad/common.hpp"
#include "polarquad/element.hpp"
#include "polarquad/gauss.hpp"
#include "polarquad/geometry.hpp"
#include "polarquad/symmetric_rule.hpp"

namespace polarquad {

struct QuadraturePoint {
  double xi = 0.0;
  double eta = 0.0;
  double w = 0.0;
};

struct RuleMeta {
  std::string origin = "none";         // location_name() of the origin
  std::vector<double> breakpoints;     // angles as integrated (closure included)
  double sigma = -1.0;                 // < 0 when not computed
  int retries = 0;                     // nudged rays
  bool polar = false;
};

struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  std::vector<Vec2> planar;  // reference-frame (x, y) per point; polar rules only
  RuleMeta meta;

  double weight_sum() const {
    double s = 0.0;
    for (const auto& p : points) s += p.w;
    return s;
  }
};

/// Parameters for sizing the polar rule. Defaults: N_theta = N_r = 8,
/// sigma threshold 1, s = sqrt(2), K and M clamped to [4, 64].
struct RuleSelection {
  int n_theta = 8;
  int n_r = 8;
  int k_min = 4, k_max = 64;
  int m_min = 4, m_max = 64;
  double sigma_threshold = 1.0;
  double s = std::numbers::sqrt2;
  /// Fixed (K, M) per interval, overriding the adaptive selection.
  std::optional<std::pair<int, int>> fixed_counts;

  void validate() const {
    if (n_theta < 1 || n_r < 1) throw ValidationError("N_theta and N_r must be positive");
    if (k_min < 1 || m_min < 1 || k_min > k_max || m_min > m_max) {
      throw ValidationError("need 1 <= K_min <= K_max and 1 <= M_min <= M_max");
    }
    if (!(sigma_threshold > 0.0) || !(s > 0.0)) {
      throw ValidationError("sigma threshold and scaling factor must be positive");
    }
    if (fixed_counts && (fixed_counts->first < 1 || fixed_counts->second < 1)) {
      throw ValidationError("fixed counts must be positive");
    }
  }
};

// ---------------------------------------------------------------------------
// Rule sizing

struct RuleSpacing {
  double dtheta;  // max corner angle / N_theta
  double dr;      // max chord length / N_r
};

inline RuleSpacing rule_spacing(const ProjectedTriangle& proj, const RuleSelection& sel) {
  double max_angle = 0.0, max_len = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2& c = proj.corner(i);
    const Vec2 next = proj.corner((i + 1) % 3) - c;
    const Vec2 prev = proj.corner((i + 2) % 3) - c;
    max_angle = std::max(max_angle, std::atan2(std::abs(cross2(next, prev)), next.dot(prev)));
    max_len = std::max(max_len, next.norm());
  }
  return {max_angle / sel.n_theta, max_len / sel.n_r};
}

inline int select_theta_count(double theta_lo, double theta_hi, const RuleSpacing& sp,
                              const RuleSelection& sel) {
  if (sel.fixed_counts) return sel.fixed_counts->first;
  const long k = std::lround((theta_hi - theta_lo) / sp.dtheta);
  return static_cast<int>(std::clamp<long>(k, sel.k_min, sel.k_max));
}

inline int select_radial_count(double span, const RuleSpacing& sp, const RuleSelection& sel) {
  if (sel.fixed_counts) return sel.fixed_counts->second;
  const long m = std::lround(span / sp.dr);
  return static_cast<int>(std::clamp<long>(m, sel.m_min, sel.m_max));
}

struct SelectedCounts {
  int k;
  std::vector<int> m;  // one per radial pair
};

inline SelectedCounts select_counts(double theta_lo, double theta_hi, const std::vector<double>& spans,
                                    const RuleSpacing& sp, const RuleSelection& sel) {
  SelectedCounts out{select_theta_count(theta_lo, theta_hi, sp, sel), {}};
  for (double s : spans) out.m.push_back(select_radial_count(s, sp, sel));
  return out;
}

// ---------------------------------------------------------------------------
// Stage 1: angular breakpoints

struct Breakpoint {
  double theta;
  bool origin_tangent = false;  // a ray tangent to an edge away from the origin
};

inline constexpr double kBreakpointMerge = 1e-10;

/// Sorted, deduplicated limits of integration in theta. For an origin inside
/// the element the list is closed with theta_1 + 2pi.
inline std::vector<Breakpoint> angle_breakpoints(const ProjectedTriangle& proj,
                                                 const OriginLocation& loc) {
  std::vector<Breakpoint> raw;
  const double at_origin = 1e-8 * proj.scale;
  const auto* vertex = std::get_if<OnVertex>(&loc);
  for (int k = 0; k < 3; ++k) {
    if (vertex && vertex->corner == k + 1) continue;
    const Vec2& c = proj.corner(k);
    raw.push_back({canonical_angle(std::atan2(c.y(), c.x())), false});
  }
  for (int edge = 1; edge <= 3; ++edge) {
    const EdgePolynomial poly = edge_polynomial(proj, edge);
    for (double g : origin_tangents(proj, edge, origin_edge_param(loc, edge))) {
      const Vec2 p = poly.at(g);
      if (p.norm() <= at_origin) continue;
      raw.push_back({canonical_angle(std::atan2(p.y(), p.x())), true});
    }
  }
  const auto add_tangent = [&](EdgeParam e) {
    const auto [a, b] = tangent_angle(proj, e);
    raw.push_back({a, false});
    raw.push_back({b, false});
  };
  if (const auto* on = std::get_if<OnEdge>(&loc)) add_tangent(on->where);
  if (vertex) {
    const int k = vertex->corner;
    add_tangent({k, 0.0});                   // edge leaving the vertex
    add_tangent({k == 1 ? 3 : k - 1, 1.0});  // edge arriving at the vertex
  }

  std::sort(raw.begin(), raw.end(),
            [](const Breakpoint& a, const Breakpoint& b) { return a.theta < b.theta; });
  std::vector<Breakpoint> out;
  for (const auto& b : raw) {
    if (!out.empty() && b.theta - out.back().theta < kBreakpointMerge) {
      out.back().origin_tangent = out.back().origin_tangent || b.origin_tangent;
    } else {
      out.push_back(b);
    }
  }
  if (out.size() > 1 && out.front().theta + kTwoPi - out.back().theta < kBreakpointMerge) {
    out.front().origin_tangent = out.front().origin_tangent || out.back().origin_tangent;
    out.pop_back();
  }
  if (std::holds_alternative<Inside>(loc) && !out.empty()) {
    out.push_back({out.front().theta + kTwoPi, out.front().origin_tangent});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage 2(a): radial limits

/// All ray hits over the three edges, ascending in r. For an origin on the
/// boundary, the crossing at the origin itself is deflated out of the edges
/// through it, and any remaining hit with r ~ 0 is dropped.
inline std::vector<RayHit> collect_ray_hits(const ProjectedTriangle& proj, double theta,
                                            const OriginLocation& loc) {
  std::vector<RayHit> hits;
  const bool boundary = on_boundary(loc);
  const double r_floor = 1e-8 * proj.scale;
  for (int edge = 1; edge <= 3; ++edge) {
    for (const RayHit& h : ray_edge_intersections(proj, edge, theta, origin_edge_param(loc, edge))) {
      if (boundary && h.r <= r_floor) continue;
      hits.push_back(h);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) { return a.r < b.r; });
  return hits;
}

struct RadialLimits {
  std::vector<double> radii;  // even length: (r0, r1), (r2, r3), ...
  std::vector<RayHit> hits;
  bool from_origin = false;   // radii[0] == 0 was prepended
};

/// Radii where the ray at `theta` crosses the element boundary. r = 0 is
/// prepended for an inside origin, and for a boundary origin when the ray
/// starts into the element (odd hit count). Throws OddRadialCountError.
inline RadialLimits radial_limits(const ProjectedTriangle& proj, double theta,
                                  const OriginLocation& loc) {
  RadialLimits out;
  out.hits = collect_ray_hits(proj, theta, loc);
  if (std::holds_alternative<Inside>(loc)) {
    out.from_origin = true;
  } else if (on_boundary(loc)) {
    out.from_origin = out.hits.size() % 2 == 1;
  }
  if (out.from_origin) out.radii.push_back(0.0);
  for (const auto& h : out.hits) out.radii.push_back(h.r);
  if (out.radii.size() % 2 != 0) {
    throw OddRadialCountError("odd number of radial limits on ray", theta);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage 2: rule assembly

namespace detail {

// Node placement on [lo, hi]. An end whose ray is tangent to an edge, or lies
// a distance d from such a ray outside the interval, is graded with
// theta - theta* = t^2 so that the sqrt-type behaviour of the radial limits
// near theta* = lo - d (or hi + d) becomes smooth in t. Returns theta and
// d theta / du for u in (0, 1).
struct ThetaSegment {
  double lo, hi;
  std::optional<double> d_lo, d_hi;  // at most one is set

  std::pair<double, double> map(double u) const {
    const double w = hi - lo;
    if (!d_lo && !d_hi) return {lo + w * u, w};
    const double d = d_lo ? *d_lo : *d_hi;
    const double ta = std::sqrt(d), tb = std::sqrt(d + w);
    const double v = d_lo ? u : 1.0 - u;
    const double t = ta + (tb - ta) * v;
    const double theta = d_lo ? lo - d + t * t : hi + d - t * t;
    return {theta, 2.0 * t * (tb - ta)};
  }
};

// Angles of edge points whose tangent passes through the origin, for roots
// on or slightly beyond the edge.
inline std::vector<double> tangent_ray_angles(const ProjectedTriangle& proj, const OriginLocation& loc) {
  std::vector<double> out;
  const double at_origin = 1e-8 * proj.scale;
  for (int edge = 1; edge <= 3; ++edge) {
    const EdgePolynomial poly = edge_polynomial(proj, edge);
    for (double g : tangent_roots(proj, edge, origin_edge_param(loc, edge))) {
      if (g < -0.5 || g > 1.5) continue;
      const Vec2 p = poly.at(g);
      if (p.norm() <= at_origin) continue;
      out.push_back(std::atan2(p.y(), p.x()));
    }
  }
  return out;
}

// Distance from `end` to the nearest angle in `angles` on the far side
// (below `end` if `below`), when closer than `reach`.
inline std::optional<double> grading_offset(const std::vector<double>& angles, double end, bool below,
                                            double reach) {
  std::optional<double> best;
  for (double a : angles) {
    double d = below ? end - a : a - end;
    d -= kTwoPi * std::floor(d / kTwoPi);
    if (d > kTwoPi - kBreakpointMerge) d = 0.0;
    if (d < reach && (!best || d < *best)) best = d;
  }
  return best;
}

}  // namespace detail

/// Builds the polar rule for an element and a field point.
inline QuadratureRule build_rule(const ProjectedTriangle& proj, const OriginLocation& loc,
                                 const RuleSelection& sel) {
  QuadratureRule rule;
  rule.meta.polar = true;
  rule.meta.origin = location_name(loc);

  std::vector<Breakpoint> bps = angle_breakpoints(proj, loc);
  if (!std::holds_alternative<Inside>(loc) && !bps.empty()) {
    bps.push_back({bps.front().theta + kTwoPi, bps.front().origin_tangent});
  }
  for (const auto& b : bps) rule.meta.breakpoints.push_back(b.theta);

  const RuleSpacing spacing = rule_spacing(proj, sel);
  const std::optional<ReferenceCoords> origin = origin_coords(loc);
  const bool inside = std::holds_alternative<Inside>(loc);
  const bool boundary = on_boundary(loc);
  const double det_floor = 1e-14 * proj.scale * proj.scale;

  const std::vector<double> tangent_angles = detail::tangent_ray_angles(proj, loc);
  const auto add_ray = [&](double theta, double w_theta, bool from_origin, double width) {
    std::vector<RayHit> hits = collect_ray_hits(proj, theta, loc);
    if ((hits.size() + (from_origin ? 1 : 0)) % 2 != 0) {
      theta += 1e-9 * width;
      ++rule.meta.retries;
      hits = collect_ray_hits(proj, theta, loc);
      if ((hits.size() + (from_origin ? 1 : 0)) % 2 != 0) {
        throw OddRadialCountError("odd number of radial limits after retry", theta);
      }
    }
    const double ct = std::cos(theta), st = std::sin(theta);

    // Pair up (entry, exit); an entry without a hit starts at the origin.
    std::size_t h = 0;
    bool first = true;
    while (h < hits.size()) {
      double r_in;
      ReferenceCoords seed;
      if (first && from_origin) {
        r_in = 0.0;
        seed = *origin;
      } else {
        r_in = hits[h].r;
        seed = edge_to_area({hits[h].edge, hits[h].gamma});
        ++h;
      }
      first = false;
      const RayHit& exit = hits[h++];
      const double span = exit.r - r_in;
      if (!(span > 0.0)) continue;

      const int M = select_radial_count(span, spacing, sel);
      const GaussRule1D& gr = gauss_legendre_reference(M);
      for (int m = 0; m < M; ++m) {
        const double r = r_in + 0.5 * span * (gr.nodes[static_cast<std::size_t>(m)] + 1.0);
        const double w_r = 0.5 * span * gr.weights[static_cast<std::size_t>(m)];
        const Vec2 target(r * ct, r * st);
        NewtonResult nr = try_newton_invert(proj.planar, target, seed);
        if (!nr.converged()) {
          for (ReferenceCoords alt : {edge_to_area({exit.edge, exit.gamma}),
                                      ReferenceCoords{1.0 / 3.0, 1.0 / 3.0}}) {
            nr = try_newton_invert(proj.planar, target, alt);
            if (nr.converged()) break;
          }
          if (!nr.converged()) throw NewtonFailure("cannot invert quadrature point", target);
        }
        seed = nr.coords;
        if (!nr.coords.inside(1e-9)) {
          throw NumericalError("quadrature point mapped outside the reference triangle");
        }
        const double det = std::abs(planar_jacobian(proj.planar, nr.coords).determinant());
        if (det < det_floor) throw NumericalError("degenerate projection (element folded in projection)");
        rule.points.push_back({nr.coords.xi, nr.coords.eta, r * w_r * w_theta / det});
        rule.planar.push_back(target);
      }
    }
  };

  for (std::size_t iv = 0; iv + 1 < bps.size(); ++iv) {
    const double lo = bps[iv].theta, hi = bps[iv + 1].theta;
    const double width = hi - lo;
    if (width < kBreakpointMerge) continue;

    const auto probe = collect_ray_hits(proj, 0.5 * (lo + hi), loc);
    const bool from_origin = inside || (boundary && probe.size() % 2 == 1);
    if (probe.empty() && !from_origin) continue;

    const int K = select_theta_count(lo, hi, spacing, sel);
    std::optional<double> d_lo = bps[iv].origin_tangent ? std::optional(0.0) : std::nullopt;
    std::optional<double> d_hi = bps[iv + 1].origin_tangent ? std::optional(0.0) : std::nullopt;
    if (!d_lo) d_lo = detail::grading_offset(tangent_angles, lo, true, width);
    if (!d_hi) d_hi = detail::grading_offset(tangent_angles, hi, false, width);
    std::vector<detail::ThetaSegment> segments;
    if (d_lo && d_hi) {
      const double mid = 0.5 * (lo + hi);
      segments = {{lo, mid, d_lo, std::nullopt}, {mid, hi, std::nullopt, d_hi}};
    } else {
      segments = {{lo, hi, d_lo, d_hi}};
    }
    const GaussRule1D& gt = gauss_legendre_reference(K);
    for (const auto& seg : segments) {
      for (int k = 0; k < K; ++k) {
        const double u = 0.5 * (gt.nodes[static_cast<std::size_t>(k)] + 1.0);
        const auto [theta, dtheta] = seg.map(u);
        add_ray(theta, 0.5 * gt.weights[static_cast<std::size_t>(k)] * dtheta, from_origin, width);
      }
    }
  }
  return rule;
}

inline QuadratureRule build_rule(const CurvedTriangle& tri, const Vec3& field, const RuleSelection& sel = {}) {
  const ProjectedTriangle proj = build_reference_frame(tri, field);
  return build_rule(proj, locate_origin(proj), sel);
}

// ---------------------------------------------------------------------------
// Near-field selector and the far-field rule

/// 0 on the element, |x - ybar| / rho outside the bounding sphere of radius
/// rho = s max|y_i - ybar|, and |z| / rho inside it.
inline double sigma(const CurvedTriangle& tri, const Vec3& x, double s = std::numbers::sqrt2) {
  const Vec3 mean = tri.node_mean();
  const double rho = s * tri.radius();
  const double rx = (x - mean).norm();
  if (rx > rho) return rx / rho;
  const ProjectedTriangle proj = build_reference_frame(tri, x);
  const OriginLocation loc = locate_origin(proj);
  if (const auto c = origin_coords(loc)) {
    if ((tri.interpolate(*c) - x).norm() <= 1e-9 * rho) return 0.0;
  }
  return std::abs(proj.z_field) / rho;
}

inline QuadratureRule fallback_rule() {
  QuadratureRule rule;
  rule.meta.origin = "symmetric-25";
  for (const auto& p : kSymmetricRule25) rule.points.push_back({p[0], p[1], p[2]});
  return rule;
}

/// sum_n f(xi_n, eta_n) J(xi_n, eta_n) w_n.
template <typename F>
double apply_rule(const QuadratureRule& rule, const CurvedTriangle& tri, F&& f) {
  double sum = 0.0;
  for (const auto& p : rule.points) {
    const ReferenceCoords c{p.xi, p.eta};
    sum += f(c) * tri.surface_jacobian(c).jacobian * p.w;
  }
  return sum;
}

/// Exact integral of xi^a eta^b over the reference triangle: a! b! / (a+b+2)!.
inline double monomial_integral(int a, int b) {
  return std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 3.0));
}

/// Largest |rule - exact| / exact over monomials of total degree <= degree.
inline double monomial_error(const QuadratureRule& rule, int degree) {
  double worst = 0.0;
  for (int d = 0; d <= degree; ++d) {
    for (int a = 0; a <= d; ++a) {
      const int b = d - a;
      double s = 0.0;
      for (const auto& p : rule.points) s += std::pow(p.xi, a) * std::pow(p.eta, b) * p.w;
      const double exact = monomial_integral(a, b);
      worst = std::max(worst, std::abs(s - exact) / exact);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Text serialisation: '#' header lines, then one "xi eta w" per line.

struct RuleFile {
  CurvedTriangle element;
  Vec3 field = Vec3::Zero();
  QuadratureRule rule;
};

inline void write_rule(std::ostream& os, const QuadratureRule& rule, const CurvedTriangle& tri,
                       const Vec3& field) {
  os << std::setprecision(17);
  os << "# polarquad rule\n";
  for (int i = 0; i < 6; ++i) {
    const Vec3& p = tri.node(i);
    os << "# node " << (i + 1) << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  os << "# field " << field.x() << ' ' << field.y() << ' ' << field.z() << '\n';
  os << "# sigma " << rule.meta.sigma << '\n';
  os << "# origin " << rule.meta.origin << '\n';
  os << "# breakpoints " << rule.meta.breakpoints.size();
  for (double t : rule.meta.breakpoints) os << ' ' << t;
  os << '\n';
  os << "# points " << rule.points.size() << '\n';
  for (const auto& p : rule.points) os << p.xi << ' ' << p.eta << ' ' << p.w << '\n';
}

inline RuleFile read_rule(std::istream& is) {
  RuleFile out;
  std::array<Vec3, 6> nodes{};
  std::array<bool, 6> seen{};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "node") {
        int i = 0;
        Vec3 p;
        ls >> i >> p.x() >> p.y() >> p.z();
        if (!ls || i < 1 || i > 6) throw ValidationError("bad node header at line " + std::to_string(lineno));
        nodes[static_cast<std::size_t>(i - 1)] = p;
        seen[static_cast<std::size_t>(i - 1)] = true;
      } else if (key == "field") {
        ls >> out.field.x() >> out.field.y() >> out.field.z();
      } else if (key == "sigma") {
        ls >> out.rule.meta.sigma;
      } else if (key == "origin") {
        std::getline(ls >> std::ws, out.rule.meta.origin);
      } else if (key == "breakpoints") {
        std::size_t n = 0;
        ls >> n;
        out.rule.meta.breakpoints.resize(n);
        for (auto& t : out.rule.meta.breakpoints) ls >> t;
      }
      if (!ls && key != "origin") throw ValidationError("bad header at line " + std::to_string(lineno));
      continue;
    }
    QuadraturePoint p;
    ls >> p.xi >> p.eta >> p.w;
    if (!ls) throw ValidationError("bad rule line " + std::to_string(lineno));
    out.rule.points.push_back(p);
  }
  if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    out.element = CurvedTriangle(nodes);
  }
  return out;
}

}  // namespace polarquad
