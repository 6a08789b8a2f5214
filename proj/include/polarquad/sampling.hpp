#pragma once

// Randomised curved elements and field points for property tests and the
// self-check. Elements carry one straight, one convex and one concave edge (in
// projection) plus out-of-plane bending, under a random rigid motion.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "polarquad/geometry.hpp"

namespace polarquad::sampling {

enum class OriginClass { Inside = 0, Vertex, Outside, StraightEdge, ConvexEdge, ConcaveEdge };

inline const char* class_name(OriginClass c) {
  static constexpr const char* names[] = {"inside", "vertex", "outside", "straight-edge", "convex-edge",
                                          "concave-edge"};
  return names[static_cast<int>(c)];
}

struct RandomElement {
  CurvedTriangle tri;
  std::array<int, 3> edge_kind{};  // per edge: 0 straight, 1 convex, 2 concave
  Mat3 rotation = Mat3::Identity();
  Vec3 shift = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();     // corner-plane normal in world coordinates
  /// Planar (unrotated) copy: z=0 corners, used to place field points.
  std::array<Vec3, 6> local{};

  Vec3 to_world(const Vec3& p) const { return rotation * p + shift; }
};

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// bump: in-plane midnode offset as a fraction of edge length.
inline RandomElement random_element(std::mt19937_64& rng, double bump = 0.1, double bend = 0.1) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RandomElement e;
  // Corners with all angles above ~25 degrees.
  std::array<Vec2, 3> c;
  for (;;) {
    c = {Vec2(0, 0), Vec2(1, 0), Vec2(u01(rng) * 1.2 - 0.1, 0.5 + 0.6 * u01(rng))};
    double min_angle = kPi;
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = c[(i + 1) % 3] - c[i], b = c[(i + 2) % 3] - c[i];
      min_angle = std::min(min_angle, std::atan2(std::abs(cross2(a, b)), a.dot(b)));
    }
    if (min_angle > 25.0 * kPi / 180.0) break;
  }
  const double size = 0.2 + 2.0 * u01(rng);
  for (auto& p : c) p *= size;

  std::array<int, 3> kinds{0, 1, 2};
  std::shuffle(kinds.begin(), kinds.end(), rng);
  e.edge_kind = kinds;
  for (int i = 0; i < 3; ++i) e.local[static_cast<std::size_t>(i)] = Vec3(c[i].x(), c[i].y(), 0.0);
  for (int edge = 0; edge < 3; ++edge) {
    const Vec2 a = c[edge], b = c[(edge + 1) % 3];
    const Vec2 d = b - a;
    const Vec2 outward(d.y(), -d.x());  // corners are anti-clockwise
    double amp = 0.0;
    if (kinds[edge] == 1) amp = bump * (0.3 + 0.7 * u01(rng));
    if (kinds[edge] == 2) amp = -bump * (0.3 + 0.7 * u01(rng));
    const Vec2 m = 0.5 * (a + b) + amp * outward;
    const double z = bend * (2.0 * u01(rng) - 1.0) * d.norm();
    e.local[static_cast<std::size_t>(edge + 3)] = Vec3(m.x(), m.y(), z);
  }
  e.rotation = random_rotation(rng);
  e.shift = Vec3(4.0 * u01(rng) - 2.0, 4.0 * u01(rng) - 2.0, 4.0 * u01(rng) - 2.0);
  std::array<Vec3, 6> world;
  for (std::size_t i = 0; i < 6; ++i) world[i] = e.to_world(e.local[i]);
  e.tri = CurvedTriangle(world);
  e.normal = e.rotation * Vec3::UnitZ();
  return e;
}

inline Vec2 local_planar(const RandomElement& e, ReferenceCoords c) {
  PlanarNodes p;
  for (std::size_t i = 0; i < 6; ++i) p[i] = e.local[i].head<2>();
  return planar_interpolate(p, c);
}

/// Field point whose projection falls in the requested class; height is a
/// random fraction of the element size (zero with probability 1/3).
inline Vec3 random_field_point(std::mt19937_64& rng, const RandomElement& e, OriginClass cls) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double size = (e.local[1] - e.local[0]).norm();
  Vec2 planar;
  switch (cls) {
    case OriginClass::Inside: {
      double xi, eta;
      do {
        xi = u01(rng);
        eta = u01(rng);
      } while (xi + eta > 0.9 || xi < 0.05 || eta < 0.05);
      planar = local_planar(e, {xi, eta});
      break;
    }
    case OriginClass::Vertex:
      planar = e.local[static_cast<std::size_t>(rng() % 3)].head<2>();
      break;
    case OriginClass::Outside: {
      PlanarNodes p;
      for (std::size_t i = 0; i < 6; ++i) p[i] = e.local[i].head<2>();
      for (;;) {
        const Vec2 q(size * (3.0 * u01(rng) - 1.0), size * (3.0 * u01(rng) - 1.0));
        ProjectedTriangle proj;
        for (std::size_t i = 0; i < 6; ++i) proj.planar[i] = p[i] - q;
        proj.scale = size;
        if (std::holds_alternative<Outside>(locate_origin(proj))) {
          planar = q;
          break;
        }
      }
      break;
    }
    default: {
      const int kind = cls == OriginClass::StraightEdge ? 0 : cls == OriginClass::ConvexEdge ? 1 : 2;
      int edge = 0;
      while (e.edge_kind[static_cast<std::size_t>(edge)] != kind) ++edge;
      const double g = 0.1 + 0.8 * u01(rng);
      planar = local_planar(e, edge_to_area({edge + 1, g}));
      break;
    }
  }
  double h = 0.0;
  if (rng() % 3 != 0) h = size * 0.4 * (2.0 * u01(rng) - 1.0);
  return e.to_world(Vec3(planar.x(), planar.y(), h));
}

}  // namespace polarquad::sampling
