#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polarquad/mesh.hpp"

using namespace polarquad;

namespace {

const char* kSingleElement = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
6
1 0 0 0
2 1 0 0
3 0 1 0
4 0.5 0 0
5 0.5 0.5 0
6 0 0.5 0
$EndNodes
$Elements
1
1 9 2 0 1 1 2 3 4 5 6
$EndElements
)";

const char* kMixed = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
1
2 1 "surface"
$EndPhysicalNames
$Nodes
7
10 0 0 0
20 1 0 0
30 0 1 0
40 0.5 0 0
50 0.5 0.5 0
60 0 0.5 0
70 9 9 9
$EndNodes
$Elements
3
1 15 2 0 1 70
2 1 2 0 1 10 20
3 9 2 0 1 10 20 30 40 50 60
$EndElements
)";

SurfaceMesh parse(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_msh(in, [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  });
}

}  // namespace

TEST(SphereMesh, Counts) {
  for (int r = 0; r <= 3; ++r) {
    const SurfaceMesh m = sphere_mesh(r);
    const std::size_t P = 20u << (2 * r);
    EXPECT_EQ(m.element_count(), P);
    // Euler: V - E + F = 2 with E = 3P/2; nodes are corners plus edge nodes.
    EXPECT_EQ(m.node_count(), (2 + P / 2) + 3 * P / 2);
    EXPECT_TRUE(m.quadratic());
  }
  EXPECT_EQ(sphere_mesh(0).node_count(), 42u);
}

TEST(SphereMesh, NodesOnSphere) {
  const SurfaceMesh unit = sphere_mesh(2), big = sphere_mesh(1, 2.5);
  for (const Vec3& p : unit.nodes()) ASSERT_NEAR(p.norm(), 1.0, 1e-14);
  for (const Vec3& p : big.nodes()) ASSERT_NEAR(p.norm(), 2.5, 2.5e-14);
}

TEST(SphereMesh, ConformingClosedOutward) {
  for (int r = 0; r <= 2; ++r) {
    const SurfaceMesh m = sphere_mesh(r);
    EXPECT_TRUE(conformity_errors(m).empty());
    EXPECT_TRUE(is_closed(m));
    EXPECT_TRUE(inward_elements(m).empty());
  }
}

TEST(SphereMesh, AreaConvergesToFourPi) {
  double prev = 1e9;
  for (int r = 0; r <= 3; ++r) {
    const double err = std::abs(mesh_area(sphere_mesh(r)) - 4 * kPi);
    EXPECT_LT(err, prev);
    prev = err;
  }
  // Refinement 2 is within 1e-4 relative (1.2e-3 absolute).
  EXPECT_LT(std::abs(mesh_area(sphere_mesh(2)) - 4 * kPi) / (4 * kPi), 1e-4);
}

TEST(SphereMesh, Adjacency) {
  const SurfaceMesh m = sphere_mesh(0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    const auto& adj = m.node_elements(i);
    // Icosahedron vertices touch 5 faces, edge nodes 2.
    EXPECT_TRUE(adj.size() == 5 || adj.size() == 2);
    total += adj.size();
  }
  EXPECT_EQ(total, 6 * m.element_count());
}

TEST(SplitToLinear, SixPerElement) {
  const SurfaceMesh one = parse(kSingleElement);
  const SurfaceMesh s = split_to_linear(one);
  EXPECT_EQ(s.element_count(), 6u);
  EXPECT_EQ(s.node_count(), 7u);
  EXPECT_FALSE(s.quadratic());
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(s.nodes()[i], one.nodes()[i]);
  EXPECT_NEAR(mesh_area(s), 0.5, 1e-12);
  EXPECT_NEAR(mesh_area(s), mesh_area(one), 1e-12);
}

TEST(SplitToLinear, SphereInscribed) {
  for (int r = 0; r <= 2; ++r) {
    const SurfaceMesh q = sphere_mesh(r);
    const SurfaceMesh s = split_to_linear(q);
    EXPECT_EQ(s.element_count(), 6 * q.element_count());
    EXPECT_EQ(s.node_count(), q.node_count() + q.element_count());
    EXPECT_LT(mesh_area(s), mesh_area(q));
    EXPECT_LT(mesh_area(s), 4 * kPi);
    EXPECT_TRUE(conformity_errors(s).empty());
    EXPECT_TRUE(is_closed(s));
    EXPECT_TRUE(inward_elements(s).empty());
  }
  EXPECT_LT(mesh_area(split_to_linear(sphere_mesh(0))), mesh_area(split_to_linear(sphere_mesh(1))));
}

TEST(ReadMsh, SingleElement) {
  const SurfaceMesh m = parse(kSingleElement);
  EXPECT_EQ(m.element_count(), 1u);
  EXPECT_EQ(m.node_count(), 6u);
  EXPECT_EQ(m.elements()[0], (ElementNodes{0, 1, 2, 3, 4, 5}));
}

TEST(ReadMsh, SkipsOtherTypesAndUnusedNodes) {
  std::vector<std::string> warnings;
  const SurfaceMesh m = parse(kMixed, &warnings);
  EXPECT_EQ(m.element_count(), 1u);
  EXPECT_EQ(m.node_count(), 6u);
  EXPECT_EQ(m.nodes()[1], Vec3(1, 0, 0));
  ASSERT_FALSE(warnings.empty());
}

TEST(ReadMsh, Errors) {
  EXPECT_THROW(parse(""), ValidationError);
  EXPECT_THROW(parse("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n"), ValidationError);
  EXPECT_THROW(parse("$MeshFormat\n2.2 1 8\n$EndMeshFormat\n"), ValidationError);
  std::string no_tri = kMixed;
  no_tri.replace(no_tri.find("3 9 2 0 1"), 9, "3 2 2 0 1");
  EXPECT_THROW(parse(no_tri), ValidationError);
  std::string bad_ref = kSingleElement;
  bad_ref.replace(bad_ref.find("1 2 3 4 5 6\n$EndElements"), 11, "1 2 3 4 5 7");
  EXPECT_THROW(parse(bad_ref), ValidationError);
  std::string truncated = kSingleElement;
  truncated.resize(truncated.find("$Elements"));
  EXPECT_THROW(parse(truncated), ValidationError);
  try {
    parse("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 a b c\n$EndNodes\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
  }
}

TEST(ReadMsh, WarnsOnNonConformingInput) {
  // Two elements sharing edge 1-2 with different edge nodes.
  const std::string text = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
9
1 0 0 0
2 1 0 0
3 0 1 0
4 0.5 0 0
5 0.5 0.5 0
6 0 0.5 0
7 0 -1 0
8 0.5 -0.5 0
9 0 -0.5 0
$EndNodes
$Elements
2
1 9 2 0 1 1 2 3 4 5 6
2 9 2 0 1 2 1 7 8 9 8
$EndElements
)";
  std::vector<std::string> warnings;
  EXPECT_NO_THROW(parse(text, &warnings));
  EXPECT_FALSE(warnings.empty());
}

TEST(WriteMsh, RoundTripIsIdentity) {
  const SurfaceMesh m = sphere_mesh(2);
  std::stringstream ss;
  write_msh(ss, m);
  const SurfaceMesh r = parse_msh(ss);
  ASSERT_EQ(r.node_count(), m.node_count());
  ASSERT_EQ(r.element_count(), m.element_count());
  for (std::size_t i = 0; i < m.node_count(); ++i) ASSERT_EQ(r.nodes()[i], m.nodes()[i]);
  EXPECT_EQ(r.elements(), m.elements());
}

TEST(WriteMsh, FileCountsMatchAtTwoResolutions) {
  const auto dir = std::filesystem::temp_directory_path();
  for (int r : {0, 1}) {
    const std::string path = (dir / ("polarquad_sphere_" + std::to_string(r) + ".msh")).string();
    write_msh(path, sphere_mesh(r));
    std::ifstream in(path);
    std::string line;
    long declared = -1;
    while (std::getline(in, line)) {
      if (line == "$Elements") {
        in >> declared;
        break;
      }
    }
    const SurfaceMesh m = read_msh(path);
    EXPECT_EQ(static_cast<long>(m.element_count()), declared);
    std::remove(path.c_str());
  }
  EXPECT_THROW(read_msh("/nonexistent/mesh.msh"), ValidationError);
}

TEST(SurfaceMeshType, RejectsBadIndices) {
  std::vector<Vec3> nodes{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_THROW(SurfaceMesh(nodes, {ElementNodes{0, 1, 5, -1, -1, -1}}, ElementOrder::Linear), ValidationError);
  EXPECT_NO_THROW(SurfaceMesh(nodes, {ElementNodes{0, 1, 2, -1, -1, -1}}, ElementOrder::Linear));
}
