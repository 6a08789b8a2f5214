#pragma once

// Surface meshes of second-order triangles: GMSH 2.2 ASCII input/output, a
// subdivided-icosahedron sphere, and the six-way split into flat triangles.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polarquad/common.hpp"
#include "polarquad/element.hpp"
#include "polarquad/quadrature.hpp"

namespace polarquad {

enum class ElementOrder { Quadratic, Linear };

/// Node indices per element in corner/edge-node order. Linear (flat,
/// 3-node) elements store -1 in slots 3..5; their edge midpoints are
/// implied, not nodes.
using ElementNodes = std::array<int, 6>;

class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  SurfaceMesh(std::vector<Vec3> nodes, std::vector<ElementNodes> elements,
              ElementOrder order = ElementOrder::Quadratic)
      : nodes_(std::move(nodes)), elements_(std::move(elements)), order_(order) {
    check_indices();
    build_adjacency();
  }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<ElementNodes>& elements() const { return elements_; }
  ElementOrder order() const { return order_; }
  bool quadratic() const { return order_ == ElementOrder::Quadratic; }

  /// P and N in the convergence study.
  std::size_t element_count() const { return elements_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  /// Number of element nodes carrying unknowns (6 or 3).
  int local_nodes() const { return quadratic() ? 6 : 3; }

  /// Elements touching node i, ascending.
  const std::vector<int>& node_elements(std::size_t i) const { return adjacency_[i]; }

  CurvedTriangle element(std::size_t e) const {
    const ElementNodes& en = elements_[e];
    if (quadratic()) {
      std::array<Vec3, 6> p;
      for (std::size_t k = 0; k < 6; ++k) p[k] = nodes_[static_cast<std::size_t>(en[k])];
      return CurvedTriangle(p);
    }
    return CurvedTriangle::flat(nodes_[static_cast<std::size_t>(en[0])], nodes_[static_cast<std::size_t>(en[1])],
                                nodes_[static_cast<std::size_t>(en[2])]);
  }

  /// All elements as validated triangles; throws DegenerateElementError.
  std::vector<CurvedTriangle> triangles() const {
    std::vector<CurvedTriangle> out;
    out.reserve(elements_.size());
    for (std::size_t e = 0; e < elements_.size(); ++e) out.push_back(element(e));
    return out;
  }

 private:
  void check_indices() const {
    const int n = static_cast<int>(nodes_.size());
    const int used = local_nodes();
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      for (int k = 0; k < 6; ++k) {
        const int id = elements_[e][static_cast<std::size_t>(k)];
        const bool ok = k < used ? (id >= 0 && id < n) : id == -1;
        if (!ok) {
          throw ValidationError("element " + std::to_string(e) + " has bad node index " + std::to_string(id));
        }
      }
    }
  }

  void build_adjacency() {
    adjacency_.assign(nodes_.size(), {});
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      for (int k = 0; k < local_nodes(); ++k) {
        auto& list = adjacency_[static_cast<std::size_t>(elements_[e][static_cast<std::size_t>(k)])];
        if (list.empty() || list.back() != static_cast<int>(e)) list.push_back(static_cast<int>(e));
      }
    }
  }

  std::vector<Vec3> nodes_;
  std::vector<ElementNodes> elements_;
  ElementOrder order_ = ElementOrder::Quadratic;
  std::vector<std::vector<int>> adjacency_;
};

// ---------------------------------------------------------------------------
// Structural checks

/// Problems with edge sharing: an edge used by more than two elements, or a
/// shared edge whose two elements disagree on the edge node. An empty list
/// means the mesh is conforming.
inline std::vector<std::string> conformity_errors(const SurfaceMesh& mesh) {
  struct EdgeUse {
    int count = 0;
    int midnode = -1;
  };
  std::map<std::pair<int, int>, EdgeUse> edges;
  std::vector<std::string> errors;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const ElementNodes& en = mesh.elements()[e];
    for (const auto& idx : kEdgeNodes) {
      const int a = en[static_cast<std::size_t>(idx[0])], b = en[static_cast<std::size_t>(idx[1])];
      const int m = en[static_cast<std::size_t>(idx[2])];
      EdgeUse& use = edges[{std::min(a, b), std::max(a, b)}];
      if (++use.count == 1) {
        use.midnode = m;
      } else if (use.midnode != m) {
        errors.push_back("edge " + std::to_string(a) + "-" + std::to_string(b) + " has mismatched edge nodes");
      }
      if (use.count == 3) {
        errors.push_back("edge " + std::to_string(a) + "-" + std::to_string(b) + " is shared by more than two elements");
      }
    }
  }
  return errors;
}

/// True when every edge is shared by exactly two elements.
inline bool is_closed(const SurfaceMesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const ElementNodes& en : mesh.elements()) {
    for (const auto& idx : kEdgeNodes) {
      const int a = en[static_cast<std::size_t>(idx[0])], b = en[static_cast<std::size_t>(idx[1])];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  return !count.empty() &&
         std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

/// Elements whose centroid normal points towards the mean of the nodes.
/// Meaningful for star-shaped closed bodies.
inline std::vector<int> inward_elements(const SurfaceMesh& mesh) {
  Vec3 centre = Vec3::Zero();
  for (const Vec3& p : mesh.nodes()) centre += p;
  centre /= static_cast<double>(std::max<std::size_t>(1, mesh.node_count()));
  std::vector<int> out;
  const ReferenceCoords c{1.0 / 3.0, 1.0 / 3.0};
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const CurvedTriangle tri = mesh.element(e);
    if (tri.surface_jacobian(c).normal.dot(tri.interpolate(c) - centre) < 0.0) out.push_back(static_cast<int>(e));
  }
  return out;
}

/// Surface area by the symmetric rule.
inline double mesh_area(const SurfaceMesh& mesh) {
  const QuadratureRule rule = fallback_rule();
  double area = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    area += apply_rule(rule, mesh.element(e), [](ReferenceCoords) { return 1.0; });
  }
  return area;
}

// ---------------------------------------------------------------------------
// GMSH 2.2 ASCII

inline constexpr int kGmshTriangle6 = 9;

using WarningSink = std::function<void(const std::string&)>;

namespace detail {

[[noreturn]] inline void msh_error(int line, const std::string& what) {
  throw ValidationError("msh line " + std::to_string(line) + ": " + what);
}

}  // namespace detail

/// Reads a GMSH 2.2 ASCII mesh. Elements other than 6-node triangles are
/// skipped and reported to `warn`. GMSH orders the triangle's edge nodes
/// 1-2, 2-3, 3-1, which is the element's own order.
inline SurfaceMesh parse_msh(std::istream& in, const WarningSink& warn = {}) {
  int line_no = 0;
  std::string line;
  const auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  };
  const auto expect_end = [&](const std::string& tag) {
    if (!next() || line.rfind(tag, 0) != 0) detail::msh_error(line_no, "expected " + tag);
  };

  bool have_format = false, have_nodes = false, have_elements = false;
  std::map<long, int> node_index;
  std::vector<Vec3> nodes;
  std::vector<ElementNodes> elements;
  std::map<int, int> skipped;

  while (next()) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      if (!next()) detail::msh_error(line_no, "truncated $MeshFormat");
      std::istringstream ss(line);
      double version = 0.0;
      int file_type = -1, data_size = 0;
      if (!(ss >> version >> file_type >> data_size)) detail::msh_error(line_no, "bad $MeshFormat header");
      if (version < 2.0 || version >= 3.0) {
        detail::msh_error(line_no, "unsupported msh version " + std::to_string(version) + " (need 2.x)");
      }
      if (file_type != 0) detail::msh_error(line_no, "binary msh files are not supported");
      expect_end("$EndMeshFormat");
      have_format = true;
    } else if (line.rfind("$Nodes", 0) == 0) {
      if (!next()) detail::msh_error(line_no, "truncated $Nodes");
      long count = -1;
      if (!(std::istringstream(line) >> count) || count < 0) detail::msh_error(line_no, "bad node count");
      for (long i = 0; i < count; ++i) {
        if (!next()) detail::msh_error(line_no, "truncated node list");
        std::istringstream ss(line);
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(ss >> id >> x >> y >> z)) detail::msh_error(line_no, "bad node record");
        if (!node_index.emplace(id, static_cast<int>(nodes.size())).second) {
          detail::msh_error(line_no, "duplicate node id " + std::to_string(id));
        }
        nodes.emplace_back(x, y, z);
      }
      expect_end("$EndNodes");
      have_nodes = true;
    } else if (line.rfind("$Elements", 0) == 0) {
      if (!have_nodes) detail::msh_error(line_no, "$Elements before $Nodes");
      if (!next()) detail::msh_error(line_no, "truncated $Elements");
      long count = -1;
      if (!(std::istringstream(line) >> count) || count < 0) detail::msh_error(line_no, "bad element count");
      for (long i = 0; i < count; ++i) {
        if (!next()) detail::msh_error(line_no, "truncated element list");
        std::istringstream ss(line);
        long id = 0;
        int type = 0, ntags = 0;
        if (!(ss >> id >> type >> ntags) || ntags < 0) detail::msh_error(line_no, "bad element record");
        for (int t = 0; t < ntags; ++t) {
          long tag;
          if (!(ss >> tag)) detail::msh_error(line_no, "bad element tags");
        }
        if (type != kGmshTriangle6) {
          ++skipped[type];
          continue;
        }
        ElementNodes en{};
        for (int k = 0; k < 6; ++k) {
          long nid;
          if (!(ss >> nid)) detail::msh_error(line_no, "element has fewer than 6 nodes");
          const auto it = node_index.find(nid);
          if (it == node_index.end()) detail::msh_error(line_no, "element references unknown node " + std::to_string(nid));
          en[static_cast<std::size_t>(k)] = it->second;
        }
        elements.push_back(en);
      }
      expect_end("$EndElements");
      have_elements = true;
    } else if (line[0] == '$') {
      // Other sections ($PhysicalNames, $NodeData, ...) are skipped whole.
      const std::string end = "$End" + line.substr(1, line.find_first_of(" \t") - 1);
      bool closed = false;
      while (next()) {
        if (line.rfind(end, 0) == 0) {
          closed = true;
          break;
        }
      }
      if (!closed) detail::msh_error(line_no, "unterminated section, expected " + end);
    } else {
      detail::msh_error(line_no, "unexpected content outside a section");
    }
  }

  if (!have_format) throw ValidationError("msh file has no $MeshFormat section");
  if (!have_elements) throw ValidationError("msh file has no $Elements section");
  for (const auto& [type, n] : skipped) {
    if (warn) warn("skipped " + std::to_string(n) + " element(s) of unsupported type " + std::to_string(type));
  }
  if (elements.empty()) throw ValidationError("msh file contains no 6-node triangles (type 9)");

  // Keep only referenced nodes, in file order, so that every node is a
  // collocation point.
  std::vector<int> remap(nodes.size(), -1);
  for (const auto& en : elements) {
    for (int id : en) remap[static_cast<std::size_t>(id)] = 0;
  }
  std::vector<Vec3> used;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<int>(used.size());
    used.push_back(nodes[i]);
  }
  for (auto& en : elements) {
    for (int& id : en) id = remap[static_cast<std::size_t>(id)];
  }
  if (used.size() < nodes.size() && warn) {
    warn("dropped " + std::to_string(nodes.size() - used.size()) + " node(s) not used by any 6-node triangle");
  }

  SurfaceMesh mesh(std::move(used), std::move(elements));
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    try {
      (void)mesh.element(e);
    } catch (const DegenerateElementError& ex) {
      throw ValidationError("element " + std::to_string(e) + ": " + ex.what());
    }
  }
  for (const auto& err : conformity_errors(mesh)) {
    if (warn) warn(err);
  }
  if (warn && is_closed(mesh)) {
    const auto inward = inward_elements(mesh);
    if (!inward.empty()) warn(std::to_string(inward.size()) + " element(s) appear inward-oriented");
  }
  return mesh;
}

inline SurfaceMesh read_msh(const std::string& path, const WarningSink& warn = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mesh file " + path);
  return parse_msh(in, warn);
}

/// Writes a quadratic mesh as GMSH 2.2 ASCII (1-based ids, two tags).
inline void write_msh(std::ostream& out, const SurfaceMesh& mesh) {
  if (!mesh.quadratic()) throw ValidationError("only quadratic meshes can be written as type-9 msh");
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.node_count() << "\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const Vec3& p = mesh.nodes()[i];
    out << i + 1 << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << "\n";
  }
  out << "$EndNodes\n$Elements\n" << mesh.element_count() << "\n";
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    out << e + 1 << ' ' << kGmshTriangle6 << " 2 1 1";
    for (int id : mesh.elements()[e]) out << ' ' << id + 1;
    out << "\n";
  }
  out << "$EndElements\n";
}

inline void write_msh(const std::string& path, const SurfaceMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write mesh file " + path);
  write_msh(out, mesh);
}

// ---------------------------------------------------------------------------
// Generated meshes

/// Icosahedron subdivided `refinement` times, projected onto the sphere of
/// the given radius about the origin. Edge nodes are chord midpoints
/// projected radially. P = 20 * 4^refinement, outward oriented.
inline SurfaceMesh sphere_mesh(int refinement, double radius = 1.0) {
  if (refinement < 0) throw ValidationError("sphere refinement must be >= 0");
  if (!(radius > 0.0)) throw ValidationError("sphere radius must be positive");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                      {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<std::array<int, 3>> faces{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  std::map<std::pair<int, int>, int> mid;
  const auto midpoint = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    if (auto it = mid.find(key); it != mid.end()) return it->second;
    v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
    return mid[key] = static_cast<int>(v.size() - 1);
  };

  for (int level = 0; level < refinement; ++level) {
    std::vector<std::array<int, 3>> finer;
    finer.reserve(faces.size() * 4);
    mid.clear();
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      finer.push_back({f[0], ab, ca});
      finer.push_back({ab, f[1], bc});
      finer.push_back({ca, bc, f[2]});
      finer.push_back({ab, bc, ca});
    }
    faces = std::move(finer);
  }

  mid.clear();
  std::vector<ElementNodes> elements;
  elements.reserve(faces.size());
  for (const auto& f : faces) {
    elements.push_back({f[0], f[1], f[2], midpoint(f[0], f[1]), midpoint(f[1], f[2]), midpoint(f[2], f[0])});
  }
  for (Vec3& p : v) p *= radius;
  return SurfaceMesh(std::move(v), std::move(elements));
}

/// Replaces each curved element by six flat triangles fanned about the
/// image of its centroid (xi = eta = 1/3) through the boundary nodes
/// 1, 4, 2, 5, 3, 6. The node set is kept and one node per element added.
inline SurfaceMesh split_to_linear(const SurfaceMesh& mesh) {
  if (!mesh.quadratic()) throw ValidationError("split_to_linear needs a quadratic mesh");
  std::vector<Vec3> nodes = mesh.nodes();
  std::vector<ElementNodes> elements;
  elements.reserve(mesh.element_count() * 6);
  constexpr std::array<int, 6> ring{0, 3, 1, 4, 2, 5};
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const ElementNodes& en = mesh.elements()[e];
    const int c = static_cast<int>(nodes.size());
    nodes.push_back(mesh.element(e).interpolate({1.0 / 3.0, 1.0 / 3.0}));
    for (std::size_t k = 0; k < 6; ++k) {
      const int a = en[static_cast<std::size_t>(ring[k])];
      const int b = en[static_cast<std::size_t>(ring[(k + 1) % 6])];
      elements.push_back({c, a, b, -1, -1, -1});
    }
  }
  return SurfaceMesh(std::move(nodes), std::move(elements), ElementOrder::Linear);
}

}  // namespace polarquad
