#pragma once

// Second-order (6-node) triangle interpolation.
//
// Node order: corners 1,2,3 then edge nodes 4 (1-2), 5 (2-3), 6 (3-1).
// Reference triangle: 0 <= xi <= 1, 0 <= eta <= 1 - xi.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include "polarquad/common.hpp"

namespace polarquad {

struct ReferenceCoords {
  double xi = 0.0;
  double eta = 0.0;

  bool inside(double slack = 0.0) const {
    return xi >= -slack && eta >= -slack && xi + eta <= 1.0 + slack;
  }
};

/// A point on an element edge. `edge` is 1, 2 or 3; gamma in [0, 1] runs
/// anti-clockwise (edge 1: node 1 -> 2, edge 2: 2 -> 3, edge 3: 3 -> 1).
struct EdgeParam {
  int edge = 1;
  double gamma = 0.0;
};

using ShapeValues = std::array<double, 6>;
using ShapeGradients = std::array<Vec2, 6>;
using PlanarNodes = std::array<Vec2, 6>;

/// Zero-based node indices (corner i, corner j, edge node) for edges 1..3.
inline constexpr std::array<std::array<int, 3>, 3> kEdgeNodes{{{0, 1, 3}, {1, 2, 4}, {2, 0, 5}}};

/// Reference coordinates of the six nodes.
inline constexpr std::array<std::array<double, 2>, 6> kNodeCoords{
    {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}}};

inline ShapeValues shape_functions(ReferenceCoords c) {
  const double xi = c.xi, eta = c.eta;
  const double lam = 1.0 - xi - eta;
  return {2.0 * lam * (0.5 - xi - eta),
          2.0 * xi * (xi - 0.5),
          2.0 * eta * (eta - 0.5),
          4.0 * xi * lam,
          4.0 * xi * eta,
          4.0 * eta * lam};
}

inline ShapeGradients shape_gradients(ReferenceCoords c) {
  const double xi = c.xi, eta = c.eta;
  const double lam = 1.0 - xi - eta;
  return {Vec2(1.0 - 4.0 * lam, 1.0 - 4.0 * lam),
          Vec2(4.0 * xi - 1.0, 0.0),
          Vec2(0.0, 4.0 * eta - 1.0),
          Vec2(4.0 * (lam - xi), -4.0 * xi),
          Vec2(4.0 * eta, 4.0 * xi),
          Vec2(-4.0 * eta, 4.0 * (lam - eta))};
}

/// Edge shape functions J1, J2, J3 of gamma.
inline std::array<double, 3> edge_functions(double g) {
  return {2.0 * g * g - 3.0 * g + 1.0, 2.0 * g * g - g, -4.0 * g * g + 4.0 * g};
}

inline std::array<double, 3> edge_function_derivatives(double g) {
  return {4.0 * g - 3.0, 4.0 * g - 1.0, -8.0 * g + 4.0};
}

/// Maps a point on edge `e` to reference coordinates.
inline ReferenceCoords edge_to_area(EdgeParam e) {
  switch (e.edge) {
    case 1: return {e.gamma, 0.0};
    case 2: return {1.0 - e.gamma, e.gamma};
    case 3: return {0.0, 1.0 - e.gamma};
  }
  throw ValidationError("edge index must be 1, 2 or 3, got " + std::to_string(e.edge));
}

struct SurfaceJacobian {
  double jacobian;  // |dy/dxi x dy/deta|
  Vec3 normal;      // unit normal, orientation from node order
};

/// Isoparametric curved triangle in 3-D.
class CurvedTriangle {
 public:
  CurvedTriangle() = default;

  /// Throws DegenerateElementError for non-finite nodes or collinear corners.
  explicit CurvedTriangle(const std::array<Vec3, 6>& nodes) : nodes_(nodes) {
    for (const auto& p : nodes_) {
      if (!p.allFinite()) throw DegenerateElementError("element node is not finite");
    }
    const double r = radius();
    const Vec3 n = (nodes_[1] - nodes_[0]).cross(nodes_[2] - nodes_[0]);
    if (!(r > 0.0) || n.norm() < 1e-14 * r * r) {
      throw DegenerateElementError("element corners are collinear");
    }
  }

  /// Flat triangle with exact edge midpoints.
  static CurvedTriangle flat(const Vec3& a, const Vec3& b, const Vec3& c) {
    return CurvedTriangle({a, b, c, 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)});
  }

  const std::array<Vec3, 6>& nodes() const { return nodes_; }
  const Vec3& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

  /// Mean of the six nodes.
  Vec3 node_mean() const {
    Vec3 m = Vec3::Zero();
    for (const auto& p : nodes_) m += p;
    return m / 6.0;
  }

  /// max_i |y_i - mean|; the length scale used by all tolerances.
  double radius() const {
    const Vec3 m = node_mean();
    double r = 0.0;
    for (const auto& p : nodes_) r = std::max(r, (p - m).norm());
    return r;
  }

  Vec3 interpolate(ReferenceCoords c) const {
    const auto L = shape_functions(c);
    Vec3 y = Vec3::Zero();
    for (std::size_t i = 0; i < 6; ++i) y += L[i] * nodes_[i];
    return y;
  }

  /// Tangent vectors (dy/dxi, dy/deta).
  std::pair<Vec3, Vec3> tangents(ReferenceCoords c) const {
    const auto G = shape_gradients(c);
    Vec3 txi = Vec3::Zero(), teta = Vec3::Zero();
    for (std::size_t i = 0; i < 6; ++i) {
      txi += G[i].x() * nodes_[i];
      teta += G[i].y() * nodes_[i];
    }
    return {txi, teta};
  }

  SurfaceJacobian surface_jacobian(ReferenceCoords c) const {
    const auto [txi, teta] = tangents(c);
    const Vec3 n = txi.cross(teta);
    const double J = n.norm();
    const double r = radius();
    if (J < 1e-14 * r * r) {
      throw DegenerateElementError("degenerate surface tangents (collapsed element)");
    }
    return {J, n / J};
  }

  Vec3 edge_point(EdgeParam e) const {
    const auto& idx = edge_nodes(e.edge);
    const auto J = edge_functions(e.gamma);
    return J[0] * nodes_[idx[0]] + J[1] * nodes_[idx[1]] + J[2] * nodes_[idx[2]];
  }

  static const std::array<int, 3>& edge_nodes(int edge) {
    if (edge < 1 || edge > 3) {
      throw ValidationError("edge index must be 1, 2 or 3, got " + std::to_string(edge));
    }
    return kEdgeNodes[static_cast<std::size_t>(edge - 1)];
  }

 private:
  std::array<Vec3, 6> nodes_{};
};

// Planar (projected) map (xi, eta) -> (x, y) over six planar nodes.

inline Vec2 planar_interpolate(const PlanarNodes& p, ReferenceCoords c) {
  const auto L = shape_functions(c);
  Vec2 x = Vec2::Zero();
  for (std::size_t i = 0; i < 6; ++i) x += L[i] * p[i];
  return x;
}

/// Columns are d(x,y)/dxi and d(x,y)/deta.
inline Mat2 planar_jacobian(const PlanarNodes& p, ReferenceCoords c) {
  const auto G = shape_gradients(c);
  Mat2 J = Mat2::Zero();
  for (std::size_t i = 0; i < 6; ++i) {
    J.col(0) += G[i].x() * p[i];
    J.col(1) += G[i].y() * p[i];
  }
  return J;
}

inline double planar_scale(const PlanarNodes& p) {
  Vec2 m = Vec2::Zero();
  for (const auto& q : p) m += q;
  m /= 6.0;
  double r = 0.0;
  for (const auto& q : p) r = std::max(r, (q - m).norm());
  return r;
}

struct NewtonOptions {
  double tolerance = 1e-12;  // scaled by max(1, element scale, |target|)
  int max_iterations = 30;
  int max_halvings = 6;
};

enum class NewtonStatus { Converged, MaxIterations, SingularJacobian };

struct NewtonResult {
  ReferenceCoords coords;
  double residual = 0.0;
  int iterations = 0;
  NewtonStatus status = NewtonStatus::MaxIterations;

  bool converged() const { return status == NewtonStatus::Converged; }
};

/// Damped Newton iteration for planar_interpolate(p, c) == target. Iterates
/// are not clamped to the reference triangle.
inline NewtonResult try_newton_invert(const PlanarNodes& p, const Vec2& target,
                                      ReferenceCoords guess = {1.0 / 3.0, 1.0 / 3.0},
                                      const NewtonOptions& opt = {}) {
  const double scale = planar_scale(p);
  const double tol = opt.tolerance * std::max({1.0, scale, target.norm()});
  const double det_floor = 1e-14 * scale * scale;

  NewtonResult out;
  ReferenceCoords c = guess;
  Vec2 F = planar_interpolate(p, c) - target;
  double res = F.norm();
  for (int it = 0; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    if (!std::isfinite(res)) break;
    if (res <= tol) {
      out.status = NewtonStatus::Converged;
      break;
    }
    if (it == opt.max_iterations) break;
    const Mat2 J = planar_jacobian(p, c);
    const double det = J.determinant();
    if (!(std::abs(det) > det_floor)) {
      out.status = NewtonStatus::SingularJacobian;
      break;
    }
    const Vec2 step = -J.inverse() * F;
    double lambda = 1.0;
    ReferenceCoords next{c.xi + step.x(), c.eta + step.y()};
    Vec2 Fn = planar_interpolate(p, next) - target;
    for (int h = 0; h < opt.max_halvings && !(Fn.norm() < res); ++h) {
      lambda *= 0.5;
      next = {c.xi + lambda * step.x(), c.eta + lambda * step.y()};
      Fn = planar_interpolate(p, next) - target;
    }
    c = next;
    F = Fn;
    res = F.norm();
  }
  out.coords = c;
  out.residual = res;
  return out;
}

/// As try_newton_invert, but throws NewtonFailure unless converged.
inline NewtonResult newton_invert(const PlanarNodes& p, const Vec2& target,
                                  ReferenceCoords guess = {1.0 / 3.0, 1.0 / 3.0},
                                  const NewtonOptions& opt = {}) {
  NewtonResult r = try_newton_invert(p, target, guess, opt);
  if (!r.converged()) {
    throw NewtonFailure(r.status == NewtonStatus::SingularJacobian
                            ? "singular planar Jacobian in Newton inversion"
                            : "Newton inversion did not converge",
                        target);
  }
  return r;
}

}  // namespace polarquad
