#pragma once

// The demonstration element: corners (0,0), (1,0), (0,1) in the plane z = 0,
// with a straight edge 1, an edge 2 bowed outwards and an edge 3 bowed
// inwards. Six origin placements exercise every branch of the rule
// construction.

#include <array>
#include <string>

#include "polarquad/common.hpp"
#include "polarquad/element.hpp"

namespace polarquad {

inline CurvedTriangle demo_element() {
  return CurvedTriangle({Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), Vec3(0.5, 0.0, 0.0),
                         Vec3(0.6, 0.6, 0.0), Vec3(0.1, 0.5, 0.0)});
}

struct DemoCase {
  int id;
  const char* name;
  Vec3 field;
};

/// Origins: inside, on vertex 2, outside, and mid-way along the straight,
/// convex and concave edges.
inline const std::array<DemoCase, 6>& demo_cases() {
  static const std::array<DemoCase, 6> cases{{
      {1, "inside", Vec3(0.3, 0.25, 0.0)},
      {2, "vertex", Vec3(1.0, 0.0, 0.0)},
      {3, "outside", Vec3(0.4, -0.3, 0.0)},
      {4, "straight-edge", Vec3(0.4, 0.0, 0.0)},
      {5, "convex-edge", Vec3(0.6, 0.6, 0.0)},
      {6, "concave-edge", Vec3(0.1, 0.5, 0.0)},
  }};
  return cases;
}

inline const DemoCase& demo_case(int id) {
  if (id < 1 || id > 6) throw ValidationError("demo case must be 1..6, got " + std::to_string(id));
  return demo_cases()[static_cast<std::size_t>(id - 1)];
}

}  // namespace polarquad
