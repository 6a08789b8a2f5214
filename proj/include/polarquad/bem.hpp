#pragma once

// Collocation boundary elements for the Laplace equation.
//
// Normals point out of the body. With dG/dn_y = (x - y).n_y / (4 pi R^3),
// the flux integral of dG/dn over a closed surface is -1 for x inside and 0
// outside, and the exterior Neumann problem at node i reads
//
//   c_i phi_i - sum_j A_ij phi_j = -sum_j B_ij q_j,   c_i = 1 + sum_j A_ij,
//
// with A the double-layer and B the single-layer operator.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polarquad/common.hpp"
#include "polarquad/element.hpp"
#include "polarquad/mesh.hpp"
#include "polarquad/quadrature.hpp"

namespace polarquad {

struct GreenValue {
  double G;
  double dG_dn;  // derivative with respect to y along n_y
};

/// Free-space Laplace Green's function 1 / (4 pi R) and its normal derivative
/// at the source point y.
inline GreenValue green(const Vec3& x, const Vec3& y, const Vec3& n_y) {
  const Vec3 d = x - y;
  const double R = d.norm();
  if (!(R > 0.0)) throw ValidationError("Green's function evaluated at coincident points");
  const double inv = 1.0 / (4.0 * kPi * R);
  return {inv, d.dot(n_y) * inv / (R * R)};
}

using ShapeIntegrals = std::array<double, 6>;

struct PanelIntegrals {
  ShapeIntegrals single{};  // int L_i G J
  ShapeIntegrals dbl{};     // int L_i dG/dn J
  bool polar = false;
};

/// Integrates L_i G and L_i dG/dn over the element with the polar rule when
/// sigma < sigma_threshold, otherwise with the symmetric fallback rule.
inline PanelIntegrals panel_integrals(const CurvedTriangle& tri, const Vec3& x, const RuleSelection& sel = {}) {
  PanelIntegrals out;
  out.polar = sigma(tri, x, sel.s) < sel.sigma_threshold;
  const QuadratureRule rule = out.polar ? build_rule(tri, x, sel) : fallback_rule();
  for (const auto& p : rule.points) {
    const ReferenceCoords c{p.xi, p.eta};
    const SurfaceJacobian sj = tri.surface_jacobian(c);
    const GreenValue g = green(x, tri.interpolate(c), sj.normal);
    const ShapeValues L = shape_functions(c);
    const double w = sj.jacobian * p.w;
    for (std::size_t k = 0; k < 6; ++k) {
      out.single[k] += L[k] * g.G * w;
      out.dbl[k] += L[k] * g.dG_dn * w;
    }
  }
  return out;
}

/// Folds six shape-function integrals of a flat element with exact edge
/// midpoints onto its three corners: the linear hat at corner 1 equals
/// L1 + (L4 + L6) / 2, and so on.
inline std::array<double, 3> fold_to_corners(const ShapeIntegrals& v) {
  return {v[0] + 0.5 * (v[3] + v[5]), v[1] + 0.5 * (v[3] + v[4]), v[2] + 0.5 * (v[4] + v[5])};
}

// ---------------------------------------------------------------------------
// Assembly

struct BoundaryProblem {
  SurfaceMesh mesh;
  RuleSelection selection;
  Eigen::MatrixXd A;  // double layer, multiplies phi
  Eigen::MatrixXd B;  // single layer, multiplies q = dphi/dn
  Eigen::VectorXd c;  // corner constants
  std::size_t polar_panels = 0;
  std::size_t fallback_panels = 0;
};

namespace detail {

// Precomputed symmetric-rule samples of one element, reused for every far
// collocation point.
struct FarSamples {
  std::vector<Vec3> y, n;
  std::vector<ShapeValues> L;
  std::vector<double> w;  // J * weight
};

inline FarSamples far_samples(const CurvedTriangle& tri) {
  FarSamples s;
  for (const auto& p : kSymmetricRule25) {
    const ReferenceCoords c{p[0], p[1]};
    const SurfaceJacobian sj = tri.surface_jacobian(c);
    s.y.push_back(tri.interpolate(c));
    s.n.push_back(sj.normal);
    s.L.push_back(shape_functions(c));
    s.w.push_back(sj.jacobian * p[2]);
  }
  return s;
}

inline PanelIntegrals far_integrals(const FarSamples& s, const Vec3& x) {
  PanelIntegrals out;
  for (std::size_t q = 0; q < s.y.size(); ++q) {
    const GreenValue g = green(x, s.y[q], s.n[q]);
    for (std::size_t k = 0; k < 6; ++k) {
      out.single[k] += s.L[q][k] * g.G * s.w[q];
      out.dbl[k] += s.L[q][k] * g.dG_dn * s.w[q];
    }
  }
  return out;
}

// Calls emit(node, single, dbl) for each unknown of element e seen from x.
template <typename Emit>
void element_row(const SurfaceMesh& mesh, std::size_t e, const CurvedTriangle& tri, const FarSamples& far,
                 const Vec3& x, const RuleSelection& sel, std::size_t& polar, std::size_t& fallback,
                 Emit&& emit) {
  const bool near = sigma(tri, x, sel.s) < sel.sigma_threshold;
  const PanelIntegrals p = near ? panel_integrals(tri, x, sel) : far_integrals(far, x);
  ++(near ? polar : fallback);
  const ElementNodes& en = mesh.elements()[e];
  if (mesh.quadratic()) {
    for (std::size_t k = 0; k < 6; ++k) emit(en[k], p.single[k], p.dbl[k]);
  } else {
    const auto s = fold_to_corners(p.single), d = fold_to_corners(p.dbl);
    for (std::size_t k = 0; k < 3; ++k) emit(en[k], s[k], d[k]);
  }
}

}  // namespace detail

/// Dense collocation matrices at every mesh node. Deterministic: rows are
/// filled in node order, elements in mesh order.
inline BoundaryProblem assemble(const SurfaceMesh& mesh, const RuleSelection& sel = {}) {
  sel.validate();
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  BoundaryProblem prob;
  prob.mesh = mesh;
  prob.selection = sel;
  prob.A = Eigen::MatrixXd::Zero(n, n);
  prob.B = Eigen::MatrixXd::Zero(n, n);

  const std::vector<CurvedTriangle> tris = mesh.triangles();
  std::vector<detail::FarSamples> far;
  far.reserve(tris.size());
  for (const auto& t : tris) far.push_back(detail::far_samples(t));

  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& x = mesh.nodes()[static_cast<std::size_t>(i)];
    for (std::size_t e = 0; e < tris.size(); ++e) {
      detail::element_row(mesh, e, tris[e], far[e], x, sel, prob.polar_panels, prob.fallback_panels,
                          [&](int j, double s, double d) {
                            prob.B(i, j) += s;
                            prob.A(i, j) += d;
                          });
    }
  }
  prob.c = Eigen::VectorXd::Ones(n) + prob.A.rowwise().sum();
  return prob;
}

/// int_S dG/dn dS seen from x (phi = 1 on every panel): -1 inside a closed
/// surface, 0 outside, -1/2 at a smooth surface point.
inline double double_layer_flux(const SurfaceMesh& mesh, const Vec3& x, const RuleSelection& sel = {}) {
  double flux = 0.0;
  std::size_t polar = 0, fallback = 0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const CurvedTriangle tri = mesh.element(e);
    const detail::FarSamples far = detail::far_samples(tri);
    detail::element_row(mesh, e, tri, far, x, sel, polar, fallback, [&](int, double, double d) { flux += d; });
  }
  return flux;
}

/// c_i = 1 + int_S dG/dn dS at node i; 1/2 at smooth points.
inline double corner_constant(const SurfaceMesh& mesh, std::size_t node, const RuleSelection& sel = {}) {
  if (node >= mesh.node_count()) throw ValidationError("node index out of range");
  return 1.0 + double_layer_flux(mesh, mesh.nodes()[node], sel);
}

// ---------------------------------------------------------------------------
// Boundary data and solution

struct PointSource {
  Vec3 position = Vec3(-0.2, -0.2, -0.2);
  double strength = 1.0;
};

/// Outward unit normal per node: element normals at the node, weighted by
/// element area, summed over adjacent elements and normalised.
inline std::vector<Vec3> node_normals(const SurfaceMesh& mesh) {
  std::vector<Vec3> sum(mesh.node_count(), Vec3::Zero());
  const QuadratureRule rule = fallback_rule();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const CurvedTriangle tri = mesh.element(e);
    const double area = apply_rule(rule, tri, [](ReferenceCoords) { return 1.0; });
    for (int k = 0; k < mesh.local_nodes(); ++k) {
      const ReferenceCoords c{kNodeCoords[static_cast<std::size_t>(k)][0], kNodeCoords[static_cast<std::size_t>(k)][1]};
      sum[static_cast<std::size_t>(mesh.elements()[e][static_cast<std::size_t>(k)])] +=
          area * tri.surface_jacobian(c).normal;
    }
  }
  for (Vec3& v : sum) {
    const double len = v.norm();
    if (!(len > 0.0)) throw ValidationError("node without a defined normal");
    v /= len;
  }
  return sum;
}

struct NeumannData {
  Eigen::VectorXd q;          // dphi/dn along the outward normal
  Eigen::VectorXd phi_exact;  // source potential at the nodes
};

/// Boundary data of the source potential phi = s / (4 pi |x - src|).
inline NeumannData neumann_bc(const SurfaceMesh& mesh, const PointSource& src) {
  const auto normals = node_normals(mesh);
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  NeumannData out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  double scale = 0.0;
  for (const Vec3& p : mesh.nodes()) scale = std::max(scale, (p - src.position).norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 d = mesh.nodes()[static_cast<std::size_t>(i)] - src.position;
    const double R = d.norm();
    if (!(R > 1e-12 * scale)) throw ValidationError("point source lies on the surface");
    out.phi_exact(i) = src.strength / (4.0 * kPi * R);
    out.q(i) = -src.strength * d.dot(normals[static_cast<std::size_t>(i)]) / (4.0 * kPi * R * R * R);
  }
  return out;
}

struct NeumannSolution {
  Eigen::VectorXd phi;
  double residual = 0.0;  // |M phi - rhs| / |rhs|
  double rcond = 0.0;     // reciprocal condition estimate of M
};

/// Solves (C - A) phi = -B q by dense LU. Throws NumericalError when the
/// reciprocal condition estimate is below 1e-12.
inline NeumannSolution solve_neumann(const BoundaryProblem& prob, const Eigen::VectorXd& q) {
  if (q.size() != prob.A.rows()) throw ValidationError("boundary data length does not match the system");
  Eigen::MatrixXd M = -prob.A;
  M.diagonal() += prob.c;
  const Eigen::VectorXd rhs = -prob.B * q;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  NeumannSolution out;
  out.rcond = lu.rcond();
  if (!(out.rcond >= 1e-12)) {
    throw NumericalError("boundary system is singular or ill-conditioned (rcond " + std::to_string(out.rcond) + ")");
  }
  out.phi = lu.solve(rhs);
  const double scale = rhs.norm();
  out.residual = (M * out.phi - rhs).norm() / (scale > 0.0 ? scale : 1.0);
  return out;
}

inline double rms_error(const Eigen::VectorXd& phi, const Eigen::VectorXd& exact) {
  if (phi.size() != exact.size()) throw ValidationError("rms_error: length mismatch");
  if (phi.size() == 0) return 0.0;
  return std::sqrt((phi - exact).squaredNorm() / static_cast<double>(phi.size()));
}

/// sum_j A_j(x) phi_j - B_j(x) q_j at a point off the surface: the solution
/// itself in the exterior domain, zero inside the body.
inline double evaluate_potential(const SurfaceMesh& mesh, const Eigen::VectorXd& phi, const Eigen::VectorXd& q,
                                 const Vec3& x, const RuleSelection& sel = {}) {
  double value = 0.0;
  std::size_t polar = 0, fallback = 0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const CurvedTriangle tri = mesh.element(e);
    const detail::FarSamples far = detail::far_samples(tri);
    detail::element_row(mesh, e, tri, far, x, sel, polar, fallback,
                        [&](int j, double s, double d) { value += d * phi(j) - s * q(j); });
  }
  return value;
}

struct PowerLaw {
  double exponent = 0.0;     // b in y = a x^b
  double coefficient = 0.0;  // a
};

/// Least-squares fit of log y = log a + b log x.
inline PowerLaw fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("power-law fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("power-law fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw ValidationError("power-law fit needs distinct x values");
  const double b = (n * sxy - sx * sy) / den;
  return {b, std::exp((sy - b * sx) / n)};
}

}  // namespace polarquad
