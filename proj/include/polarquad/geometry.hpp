#pragma once

// Planar geometry in the element reference frame: the corner plane is z = 0
// and the field point sits on the z axis, so the origin of the plane is the
// projection of the field point.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polarquad/common.hpp"
#include "polarquad/element.hpp"

namespace polarquad {

/// Fixed-capacity list used for root sets and per-edge hits.
template <typename T, std::size_t N>
class SmallList {
 public:
  void push_back(const T& v) {
    if (size_ == N) throw std::length_error("SmallList capacity exceeded");
    data_[size_++] = v;
  }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + size_; }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + size_; }

 private:
  std::array<T, N> data_{};
  std::size_t size_ = 0;
};

template <std::size_t N>
struct RealRoots : SmallList<double, N> {
  /// Set when every coefficient is zero (every value is a root).
  bool all = false;
};

// ---------------------------------------------------------------------------
// Root solvers

/// Real roots of a g^2 + b g + c, ascending. Uses the cancellation-free form
/// q = -(b + sign(b) sqrt(disc)) / 2. A discriminant below 1e-12 b^2 in
/// magnitude is treated as zero and the double root reported once.
inline RealRoots<2> solve_quadratic_real(double a, double b, double c) {
  RealRoots<2> out;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) {
    out.all = true;
    return out;
  }
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-14 * scale) return out;  // nonzero constant
    out.push_back(-c / b);
    return out;
  }
  const double disc = b * b - 4.0 * a * c;
  if (std::abs(disc) <= 1e-12 * b * b) {
    out.push_back(-b / (2.0 * a));
    return out;
  }
  if (disc < 0.0) return out;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = (q != 0.0) ? c / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  out.push_back(r1);
  out.push_back(r2);
  return out;
}

namespace detail {

inline double cubic_value(double a, double b, double c, double d, double x) {
  return ((a * x + b) * x + c) * x + d;
}

inline double polish_cubic_root(double a, double b, double c, double d, double x) {
  double f = cubic_value(a, b, c, d, x);
  for (int it = 0; it < 4 && f != 0.0; ++it) {
    const double df = (3.0 * a * x + 2.0 * b) * x + c;
    if (df == 0.0) break;
    const double xn = x - f / df;
    const double fn = cubic_value(a, b, c, d, xn);
    if (!(std::abs(fn) < std::abs(f))) break;
    x = xn;
    f = fn;
  }
  return x;
}

}  // namespace detail

/// Real roots of a g^3 + b g^2 + c g + d, ascending, repeated roots merged.
/// One real root is found in closed form and Newton-polished, then deflated
/// to the stable quadratic. Small leading coefficients degrade to quadratic.
inline RealRoots<3> solve_cubic_real(double a, double b, double c, double d) {
  RealRoots<3> out;
  const double lower = std::max({std::abs(b), std::abs(c), std::abs(d)});
  if (std::abs(a) <= 1e-14 * lower || (a == 0.0 && lower == 0.0)) {
    const auto q = solve_quadratic_real(b, c, d);
    out.all = q.all;
    for (double r : q) out.push_back(r);
    return out;
  }
  const double B = b / a, C = c / a, D = d / a;
  // Depressed cubic t^3 + p t + q with x = t - B/3.
  const double p = C - B * B / 3.0;
  const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;
  const double delta = 0.25 * q * q + p * p * p / 27.0;
  double t;
  if (delta >= 0.0) {
    const double u = std::cbrt(-0.5 * q - std::copysign(std::sqrt(delta), q));
    t = (u != 0.0) ? u - p / (3.0 * u) : 0.0;
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    // Largest-magnitude root of the three for a stable deflation.
    t = m * std::cos(phi);
    for (int k = 1; k < 3; ++k) {
      const double tk = m * std::cos(phi - 2.0 * kPi * k / 3.0);
      if (std::abs(tk - B / 3.0) > std::abs(t - B / 3.0)) t = tk;
    }
  }
  const double r = detail::polish_cubic_root(1.0, B, C, D, t - B / 3.0);

  std::array<double, 3> roots{};
  std::size_t n = 0;
  roots[n++] = r;
  const double p1 = B + r;
  const double p0 = C + r * p1;
  for (double s : solve_quadratic_real(1.0, p1, p0)) {
    roots[n++] = detail::polish_cubic_root(1.0, B, C, D, s);
  }
  std::sort(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) {
      const double prev = out[out.size() - 1];
      if (std::abs(roots[i] - prev) <= 1e-9 * std::max(1.0, std::abs(prev))) continue;
    }
    out.push_back(roots[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference frame

/// x' = rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Vec3 inverse_apply(const Vec3& x) const { return rotation.transpose() * (x - translation); }
};

struct ProjectedTriangle {
  PlanarNodes planar;             // (x, y) of the six nodes
  std::array<double, 6> heights;  // z of the six nodes (corners are 0)
  double z_field = 0.0;           // signed height of the field point
  RigidTransform transform;
  CurvedTriangle source;
  double scale = 0.0;             // source.radius()

  const Vec2& corner(int k) const { return planar[static_cast<std::size_t>(k)]; }
};

/// Rotates and shifts `tri` so its corners lie in z = 0 (x axis along
/// corner 1 -> 2) and the field point maps to (0, 0, z).
inline ProjectedTriangle build_reference_frame(const CurvedTriangle& tri, const Vec3& field) {
  const auto& y = tri.nodes();
  const double scale = tri.radius();
  const Vec3 e12 = y[1] - y[0];
  Vec3 n = e12.cross(y[2] - y[0]);
  if (!(n.norm() >= 1e-14 * scale * scale) || !(scale > 0.0)) {
    throw DegenerateElementError("element corners are collinear");
  }
  n.normalize();
  const Vec3 ex = e12.normalized();
  const Vec3 ey = n.cross(ex);

  ProjectedTriangle out;
  out.source = tri;
  out.scale = scale;
  out.transform.rotation.row(0) = ex.transpose();
  out.transform.rotation.row(1) = ey.transpose();
  out.transform.rotation.row(2) = n.transpose();
  const double h = (field - y[0]).dot(n);
  const Vec3 origin = field - h * n;
  out.transform.translation = -(out.transform.rotation * origin);
  out.z_field = h;
  for (std::size_t i = 0; i < 6; ++i) {
    const Vec3 p = out.transform.apply(y[i]);
    out.planar[i] = p.head<2>();
    out.heights[i] = i < 3 ? 0.0 : p.z();
  }
  return out;
}

/// Power-basis coefficients (c0, c1, c2) of x(gamma) and y(gamma) on an edge.
struct EdgePolynomial {
  std::array<double, 3> x{};
  std::array<double, 3> y{};

  Vec2 at(double g) const {
    return {x[0] + g * (x[1] + g * x[2]), y[0] + g * (y[1] + g * y[2])};
  }
  Vec2 derivative(double g) const { return {x[1] + 2.0 * g * x[2], y[1] + 2.0 * g * y[2]}; }
};

inline EdgePolynomial edge_polynomial(const ProjectedTriangle& proj, int edge) {
  const auto& idx = CurvedTriangle::edge_nodes(edge);
  const Vec2& pi = proj.planar[idx[0]];
  const Vec2& pj = proj.planar[idx[1]];
  const Vec2& pm = proj.planar[idx[2]];
  // J1 = 1 - 3g + 2g^2, J2 = -g + 2g^2, J3 = 4g - 4g^2.
  const Vec2 c0 = pi;
  const Vec2 c1 = -3.0 * pi - pj + 4.0 * pm;
  const Vec2 c2 = 2.0 * pi + 2.0 * pj - 4.0 * pm;
  return {{c0.x(), c1.x(), c2.x()}, {c0.y(), c1.y(), c2.y()}};
}

inline Vec2 planar_edge_point(const ProjectedTriangle& proj, EdgeParam e) {
  return edge_polynomial(proj, e.edge).at(e.gamma);
}

// ---------------------------------------------------------------------------
// Rays, tangents and angles

struct RayHit {
  int edge = 1;
  double gamma = 0.0;
  double r = 0.0;
};

using EdgeHits = SmallList<RayHit, 2>;

/// Intersections of the ray at angle `theta` from the origin with one edge:
/// gamma strictly inside (0, 1), r > 0, ascending in r.
/// When the edge is known to pass through the origin at `through_origin`,
/// that root is deflated out and only the other crossing is reported.
inline EdgeHits ray_edge_intersections(const ProjectedTriangle& proj, int edge, double theta,
                                       std::optional<double> through_origin = std::nullopt) {
  EdgeHits out;
  const auto& idx = CurvedTriangle::edge_nodes(edge);
  const double s = std::sin(theta), c = std::cos(theta);
  const auto side = [&](int k) {
    const Vec2& p = proj.planar[static_cast<std::size_t>(k)];
    return p.x() * s - p.y() * c;
  };
  const double si = side(idx[0]), sj = side(idx[1]), sm = side(idx[2]);
  const double qa = 2.0 * si + 2.0 * sj - 4.0 * sm;
  const double qb = -3.0 * si - sj + 4.0 * sm;
  const double qc = si;
  if (std::max({std::abs(qa), std::abs(qb), std::abs(qc)}) <= 1e-13 * proj.scale) {
    return out;  // ray runs along a straight edge
  }
  RealRoots<2> roots;
  if (!through_origin) {
    roots = solve_quadratic_real(qa, qb, qc);
  } else if (std::abs(qa) > 1e-13 * proj.scale) {
    roots.push_back(-qb / qa - *through_origin);
  }
  const EdgePolynomial poly = edge_polynomial(proj, edge);
  for (double g : roots) {
    if (!(g > 0.0 && g < 1.0)) continue;
    const Vec2 p = poly.at(g);
    const double r = std::abs(c) >= std::abs(s) ? p.x() / c : p.y() / s;
    if (r > 0.0) out.push_back({edge, g, r});
  }
  if (out.size() == 2 && out[0].r > out[1].r) std::swap(out[0], out[1]);
  return out;
}

/// All real gamma where the tangent to the edge (extended beyond [0, 1])
/// passes through the origin, i.e. roots of x(g) y'(g) - y(g) x'(g). A
/// straight edge gives a constant (or identically zero) polynomial and hence
/// no points. An edge through the origin at `through_origin` has a root
/// there, which is deflated out.
inline std::vector<double> tangent_roots(const ProjectedTriangle& proj, int edge,
                                         std::optional<double> through_origin = std::nullopt) {
  const EdgePolynomial e = edge_polynomial(proj, edge);
  const auto& X = e.x;
  const auto& Y = e.y;
  const double w0 = X[0] * Y[1] - Y[0] * X[1];
  const double w1 = 2.0 * (X[0] * Y[2] - Y[0] * X[2]);
  const double w2 = X[1] * Y[2] - X[2] * Y[1];
  // The cubic coefficient 2 X2 Y2 - 2 Y2 X2 vanishes identically.
  const double w3 = 0.0;
  std::vector<double> out;
  const double floor = 1e-14 * proj.scale * proj.scale;
  if (std::max(std::abs(w1), std::abs(w2)) <= floor) return out;  // straight edge
  if (through_origin) {
    if (std::abs(w2) > floor) out.push_back(-w1 / w2 - *through_origin);
    return out;
  }
  for (double g : solve_cubic_real(w3, w2, w1, w0)) out.push_back(g);
  return out;
}

/// The tangent roots with gamma in the open interval (0, 1).
inline std::vector<double> origin_tangents(const ProjectedTriangle& proj, int edge,
                                           std::optional<double> through_origin = std::nullopt) {
  std::vector<double> out;
  for (double g : tangent_roots(proj, edge, through_origin)) {
    if (g > 0.0 && g < 1.0) out.push_back(g);
  }
  return out;
}

/// Angles (psi, psi + pi) of the edge tangent at e, both in [0, 2pi).
inline std::pair<double, double> tangent_angle(const ProjectedTriangle& proj, EdgeParam e) {
  const Vec2 d = edge_polynomial(proj, e.edge).derivative(e.gamma);
  if (d.norm() <= 1e-14 * proj.scale) {
    throw NumericalError("zero edge tangent (cusped edge) on edge " + std::to_string(e.edge));
  }
  const double psi = std::atan2(d.y(), d.x());
  return {canonical_angle(psi), canonical_angle(psi + kPi)};
}

// ---------------------------------------------------------------------------
// Origin classification

struct Inside {
  ReferenceCoords coords;
};
struct Outside {
  bool newton_failed = false;
};
struct OnVertex {
  int corner = 1;  // 1..3
};
struct OnEdge {
  EdgeParam where;
};

using OriginLocation = std::variant<Inside, Outside, OnVertex, OnEdge>;

inline bool on_boundary(const OriginLocation& loc) {
  return std::holds_alternative<OnVertex>(loc) || std::holds_alternative<OnEdge>(loc);
}

/// Edge parameter of the origin on `edge`, when the origin lies on it.
inline std::optional<double> origin_edge_param(const OriginLocation& loc, int edge) {
  if (const auto* on = std::get_if<OnEdge>(&loc); on && on->where.edge == edge) return on->where.gamma;
  if (const auto* v = std::get_if<OnVertex>(&loc)) {
    if (v->corner == edge) return 0.0;
    if ((v->corner == 1 ? 3 : v->corner - 1) == edge) return 1.0;
  }
  return std::nullopt;
}

/// Reference coordinates of the origin, when it lies on the element.
inline std::optional<ReferenceCoords> origin_coords(const OriginLocation& loc) {
  if (const auto* in = std::get_if<Inside>(&loc)) return in->coords;
  if (const auto* v = std::get_if<OnVertex>(&loc)) {
    const auto& c = kNodeCoords[static_cast<std::size_t>(v->corner - 1)];
    return ReferenceCoords{c[0], c[1]};
  }
  if (const auto* e = std::get_if<OnEdge>(&loc)) return edge_to_area(e->where);
  return std::nullopt;
}

inline std::string location_name(const OriginLocation& loc) {
  struct Visitor {
    std::string operator()(const Inside&) const { return "inside"; }
    std::string operator()(const Outside& o) const {
      return o.newton_failed ? "outside(newton-failed)" : "outside";
    }
    std::string operator()(const OnVertex& v) const { return "vertex " + std::to_string(v.corner); }
    std::string operator()(const OnEdge& e) const {
      return "edge " + std::to_string(e.where.edge) + " gamma=" + std::to_string(e.where.gamma);
    }
  };
  return std::visit(Visitor{}, loc);
}

/// Axis-aligned planar box containing the three (curved) projected edges.
inline std::pair<Vec2, Vec2> projected_bounding_box(const ProjectedTriangle& proj) {
  Vec2 lo = proj.corner(0), hi = proj.corner(0);
  for (int edge = 1; edge <= 3; ++edge) {
    const EdgePolynomial e = edge_polynomial(proj, edge);
    for (double g : {0.0, 1.0}) {
      lo = lo.cwiseMin(e.at(g));
      hi = hi.cwiseMax(e.at(g));
    }
    for (int k = 0; k < 2; ++k) {
      const auto& c = k == 0 ? e.x : e.y;
      if (c[2] == 0.0) continue;
      const double g = -c[1] / (2.0 * c[2]);
      if (g > 0.0 && g < 1.0) {
        lo = lo.cwiseMin(e.at(g));
        hi = hi.cwiseMax(e.at(g));
      }
    }
  }
  return {lo, hi};
}

/// Closest point of an edge curve to the origin: (gamma, distance).
inline std::pair<double, double> closest_edge_point(const ProjectedTriangle& proj, int edge) {
  const EdgePolynomial e = edge_polynomial(proj, edge);
  const auto& X = e.x;
  const auto& Y = e.y;
  // d/dg |e|^2 / 2 = e . e'
  const double c3 = 2.0 * (X[2] * X[2] + Y[2] * Y[2]);
  const double c2 = 3.0 * (X[1] * X[2] + Y[1] * Y[2]);
  const double c1 = X[1] * X[1] + Y[1] * Y[1] + 2.0 * (X[0] * X[2] + Y[0] * Y[2]);
  const double c0 = X[0] * X[1] + Y[0] * Y[1];
  double best_g = 0.0, best_d = e.at(0.0).norm();
  const auto consider = [&](double g) {
    const double d = e.at(g).norm();
    if (d < best_d) {
      best_d = d;
      best_g = g;
    }
  };
  consider(1.0);
  for (double g : solve_cubic_real(c3, c2, c1, c0)) {
    if (g > 0.0 && g < 1.0) consider(g);
  }
  return {best_g, best_d};
}

/// Classifies the origin against the projected element. Vertex and edge
/// snapping use 1e-9 x element radius.
inline OriginLocation locate_origin(const ProjectedTriangle& proj) {
  const double snap = 1e-9 * proj.scale;
  const auto [lo, hi] = projected_bounding_box(proj);
  if (lo.x() > snap || lo.y() > snap || hi.x() < -snap || hi.y() < -snap) return Outside{};

  for (int k = 0; k < 3; ++k) {
    if (proj.corner(k).norm() <= snap) return OnVertex{k + 1};
  }
  for (int edge = 1; edge <= 3; ++edge) {
    const auto [g, d] = closest_edge_point(proj, edge);
    if (d <= snap && g > 0.0 && g < 1.0) return OnEdge{{edge, g}};
  }

  static constexpr std::array<std::array<double, 2>, 7> guesses{
      {{1.0 / 3.0, 1.0 / 3.0}, {0.2, 0.2}, {0.6, 0.2}, {0.2, 0.6}, {0.45, 0.1}, {0.1, 0.45}, {0.45, 0.45}}};
  bool any_converged = false;
  for (const auto& g : guesses) {
    const NewtonResult r = try_newton_invert(proj.planar, Vec2::Zero(), {g[0], g[1]});
    if (!r.converged()) continue;
    any_converged = true;
    if (r.coords.inside()) return Inside{r.coords};
  }
  return Outside{!any_converged};
}

}  // namespace polarquad
