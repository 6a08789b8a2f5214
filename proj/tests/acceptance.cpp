// Acceptance run: one PASS/FAIL line per criterion. A criterion passes when
// its measured value is within tolerance and it finishes within its time
// budget. Exit status is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "polarquad/bem.hpp"
#include "polarquad/convergence.hpp"
#include "polarquad/demo.hpp"
#include "polarquad/mesh.hpp"
#include "polarquad/quadrature.hpp"
#include "polarquad/sampling.hpp"
#include "polarquad/selfcheck.hpp"

using namespace polarquad;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& ex) {
    o = {false, std::string("exception: ") + ex.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = o.pass && s < budget_s;
  failures += pass ? 0 : 1;
  std::printf("%s  %d  %-26s %s  [%.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s,
              budget_s);
  std::fflush(stdout);
}

using Shape6 = std::array<double, 6>;

Shape6 layer(const QuadratureRule& rule, const CurvedTriangle& tri, const Vec3& x, bool dbl) {
  Shape6 out{};
  for (const auto& p : rule.points) {
    const ReferenceCoords c{p.xi, p.eta};
    const SurfaceJacobian sj = tri.surface_jacobian(c);
    const auto g = green(x, tri.interpolate(c), sj.normal);
    const double k = (dbl ? g.dG_dn : g.G) * p.w * sj.jacobian;
    const auto L = shape_functions(c);
    for (std::size_t i = 0; i < 6; ++i) out[i] += L[i] * k;
  }
  return out;
}

double relative_difference(const Shape6& a, const Shape6& b) {
  double diff = 0, mag = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    mag = std::max(mag, std::abs(b[i]));
  }
  return diff / mag;
}

double angle_of(const Vec2& p) { return canonical_angle(std::atan2(p.y(), p.x())); }

bool has_breakpoint(const QuadratureRule& r, double theta) {
  for (double t : r.meta.breakpoints) {
    const double d = std::abs(canonical_angle(t) - canonical_angle(theta));
    if (d < 1e-9 || std::abs(d - kTwoPi) < 1e-9) return true;
  }
  return false;
}

// 1. Weight sums on random curved configurations, all six origin classes.
Outcome weight_sums() {
  const double worst = random_weight_sum_error(2024, 200, weight_sum_selection());
  return {worst < 1e-8, fmt("max |sum w - 1/2| = %.2e (tol 1e-8, 200 configs, N_theta 256, N_r 32)", worst)};
}

// 2. Monomials on the flat reference triangle against a!b!/(a+b+2)!.
Outcome monomials() {
  const double worst = polar_monomial_error(monomial_selection());
  return {worst < 1e-8, fmt("max relative error, degree <= 6 = %.2e (tol 1e-8)", worst)};
}

// 3. Polar rule against the symmetric rule at sigma in [2, 4].
Outcome cross_method() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u01(0, 1);
  std::normal_distribution<double> n01;
  const RuleSelection sel = weight_sum_selection();
  const QuadratureRule far = fallback_rule();
  double ws = 0, wd = 0;
  for (int t = 0; t < 50; ++t) {
    const auto e = sampling::random_element(rng);
    const Vec3 dir = Vec3(n01(rng), n01(rng), n01(rng)).normalized();
    const double s = 2.0 + 2.0 * u01(rng);
    const Vec3 x = e.tri.node_mean() + s * std::numbers::sqrt2 * e.tri.radius() * dir;
    if (sigma(e.tri, x) < 2.0 - 1e-12) return {false, "sampled field point has sigma < 2"};
    const QuadratureRule polar = build_rule(e.tri, x, sel);
    ws = std::max(ws, relative_difference(layer(polar, e.tri, x, false), layer(far, e.tri, x, false)));
    wd = std::max(wd, relative_difference(layer(polar, e.tri, x, true), layer(far, e.tri, x, true)));
  }
  return {ws < 1e-6 && wd < 1e-6,
          fmt("max relative difference single %.2e, double %.2e (tol 1e-6, 50 elements)", ws, wd)};
}

// Largest relative change of the shape-weighted single layer between two
// selections, over the field points.
double self_change(const CurvedTriangle& t, const std::vector<ReferenceCoords>& on, const RuleSelection& a,
                   const RuleSelection& b) {
  double worst = 0;
  for (const auto& c : on) {
    const Vec3 x = t.interpolate(c);
    worst = std::max(worst, relative_difference(panel_integrals(t, x, a).single, panel_integrals(t, x, b).single));
  }
  return worst;
}

// Self-terms the solver forms: every sphere element at its six nodes.
double collocation_self_change() {
  RuleSelection a, b;
  a.n_theta = a.n_r = 8;
  b.n_theta = b.n_r = 16;
  std::vector<ReferenceCoords> nodes;
  for (const auto& n : kNodeCoords) nodes.push_back({n[0], n[1]});
  double worst = 0;
  for (int r = 0; r <= 2; ++r) {
    const SurfaceMesh m = sphere_mesh(r);
    for (std::size_t e = 0; e < m.element_count(); ++e) worst = std::max(worst, self_change(m.element(e), nodes, a, b));
  }
  return worst;
}

// 4. Self-term single layer, N_theta = N_r from 8 to 16, on random curved
// elements at vertices, edge points and interior points.
Outcome self_term() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u01(0, 1);
  RuleSelection a, b;
  a.n_theta = a.n_r = 8;
  b.n_theta = b.n_r = 16;
  double worst = 0;
  int count = 0;
  for (int t = 0; t < 30; ++t) {
    const auto e = sampling::random_element(rng);
    std::vector<ReferenceCoords> on{{0, 0}, {1, 0}, {0.5, 0.5}, {0.5 * u01(rng), 0.0}};
    for (int k = 0; k < 4; ++k) {
      const double xi = u01(rng), eta = u01(rng) * (1 - xi);
      on.push_back({xi, eta});
    }
    worst = std::max(worst, self_change(e.tri, on, a, b));
    count += static_cast<int>(on.size());
  }
  return {worst < 1e-5, fmt("max relative change = %.2e (tol 1e-5, %g field points)", worst, count)};
}

// 5. Flux of the double layer at the sphere centre and corner constants.
Outcome gauss_flux() {
  const SurfaceMesh m = sphere_mesh(2);
  const double flux = double_layer_flux(m, Vec3::Zero());
  const BoundaryProblem p = assemble(m);
  const double dc = (p.c.array() - 0.5).abs().maxCoeff();
  return {std::abs(flux + 1) <= 2e-3 && dc <= 1e-2,
          fmt("flux %.6f (tol -1 +- 2e-3), max |c - 1/2| = %.2e (tol 1e-2), N = %g", flux, dc,
              static_cast<double>(m.node_count()))};
}

// 6. Sphere refinements 0..2, source inside at (-0.2, -0.2, -0.2).
Outcome convergence() {
  std::vector<NamedMesh> meshes;
  for (int r = 0; r <= 2; ++r) meshes.push_back({"sphere-" + std::to_string(r), sphere_mesh(r)});
  const ConvergenceReport rep = run_convergence(meshes, PointSource{});
  std::fputs(format_table(rep).c_str(), stdout);
  const double q = rep.fit("quadratic")->vs_P.exponent, l = rep.fit("linear")->vs_P.exponent;
  return {q <= -1.3 && q < l, fmt("slope vs P quadratic %.3f (tol <= -1.3), linear %.3f (must be shallower)", q, l)};
}

// 7. The six demo point sets at 16 x 16 points per interval.
Outcome figure_four() {
  RuleSelection sel;
  sel.fixed_counts = std::pair{16, 16};
  const CurvedTriangle tri = demo_element();
  std::array<QuadratureRule, 6> r;
  for (int id = 1; id <= 6; ++id) r[static_cast<std::size_t>(id - 1)] = build_rule(tri, demo_case(id).field, sel);
  std::string bad;
  const auto require = [&](bool ok, const std::string& what) {
    if (!ok && bad.empty()) bad = what;
  };
  double worst_sum = 0;
  for (const auto& rule : r) {
    worst_sum = std::max(worst_sum, std::abs(rule.weight_sum() - 0.5));
    for (const auto& p : rule.points) {
      require(p.w > 0, "positivity");
      require(ReferenceCoords{p.xi, p.eta}.inside(1e-9), "containment");
    }
  }
  require(worst_sum < 1e-8, "weight sums");
  const auto origin = [](int id) { return Vec2(demo_case(id).field.head<2>()); };
  const auto corner = [&](int k) { return Vec2(tri.node(k).head<2>()); };

  // Inside: the three corner rays divide the element.
  for (int k = 0; k < 3; ++k) require(has_breakpoint(r[0], angle_of(corner(k) - origin(1))), "inside corner rays");

  // Vertex: a thin wedge between the edge tangent and the chord ray, and the
  // main wedge beyond it.
  {
    const auto proj = build_reference_frame(tri, demo_case(2).field);
    const double psi = tangent_angle(proj, {2, 0.0}).first;
    const double chord = angle_of(corner(2) - origin(2));
    require(has_breakpoint(r[1], psi) && has_breakpoint(r[1], chord), "vertex breakpoints");
    int thin = 0, main = 0;
    for (const Vec2& p : r[1].planar) (angle_of(p) < chord ? thin : main)++;
    require(thin > 0 && main > 0, "vertex partition");
  }

  // Outside: the ray to the farthest corner splits the domain in two.
  {
    Vec2 far = Vec2::Zero();
    for (int k = 0; k < 3; ++k) {
      if ((corner(k) - origin(3)).norm() > far.norm()) far = corner(k) - origin(3);
    }
    require(has_breakpoint(r[2], angle_of(far)), "outside farthest-corner ray");
    int left = 0, right = 0;
    for (const Vec2& p : r[2].planar) (cross2(far, p) > 0 ? left : right)++;
    require(left > 0 && right > 0, "outside partition");
  }

  // Straight edge: split by the ray to the opposite corner, all points on
  // one side of the edge.
  {
    require(has_breakpoint(r[3], angle_of(corner(2) - origin(4))), "straight-edge corner ray");
    for (const Vec2& p : r[3].planar) require(p.y() >= -1e-12, "straight-edge side");
  }

  // Convex edge: rays to the edge's vertices, thin regions beyond its chord.
  {
    const Vec2 a = corner(1) - origin(5), b = corner(2) - origin(5);
    require(has_breakpoint(r[4], angle_of(a)) && has_breakpoint(r[4], angle_of(b)), "convex vertex rays");
    int beyond = 0;
    for (const Vec2& p : r[4].planar) beyond += cross2(b - a, p - a) < 0 ? 1 : 0;
    require(beyond > 0, "convex thin regions");
  }

  // Concave edge: bounded by the tangent at the origin; the narrow regions
  // past it hold a small share of the weight, on both sides of the origin.
  {
    const auto proj = build_reference_frame(tri, demo_case(6).field);
    const auto [p0, p1] = tangent_angle(proj, {3, 0.5});
    require(has_breakpoint(r[5], p0) && has_breakpoint(r[5], p1), "concave tangent breakpoints");
    const Vec2 t = Vec2(std::cos(p0), std::sin(p0));
    double far_w = 0;
    int above = 0, below = 0;
    for (std::size_t i = 0; i < r[5].points.size(); ++i) {
      const Vec2& p = r[5].planar[i];
      if (cross2(t, p) * cross2(t, corner(1) - origin(6)) < -1e-24) {
        far_w += r[5].points[i].w;
        (p.dot(t) > 0 ? above : below)++;
      }
    }
    require(above > 0 && below > 0 && far_w < 0.1 * r[5].weight_sum(), "concave tangent bound");
  }
  return {bad.empty(), bad.empty() ? fmt("6 cases, max |sum w - 1/2| = %.2e, all structural checks hold", worst_sum)
                                   : "failed check: " + bad};
}

// 8. Property suites, 10^4 cases each.
Outcome properties() {
  constexpr int kCases = 10000;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(-1, 1), u01(0, 1);
  int bad_roots = 0, bad_newton = 0, bad_rigid = 0, bad_parity = 0;

  for (int t = 0; t < kCases; ++t) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const double s2 = std::max({std::abs(a), std::abs(b), std::abs(c)});
    for (double r : solve_quadratic_real(a, b, c)) {
      if (!(std::abs((a * r + b) * r + c) <= 1e-10 * s2 * std::max(1.0, r * r))) ++bad_roots;
    }
    const double s3 = std::max(s2, std::abs(d));
    for (double r : solve_cubic_real(a, b, c, d)) {
      if (!(std::abs(((a * r + b) * r + c) * r + d) <= 1e-9 * s3 * std::max(1.0, std::abs(r * r * r)))) ++bad_roots;
    }
  }

  for (int t = 0; t < kCases; ++t) {
    const auto e = sampling::random_element(rng);
    PlanarNodes p;
    for (std::size_t i = 0; i < 6; ++i) p[i] = e.local[i].head<2>();
    const double xi = u01(rng), eta = u01(rng) * (1 - xi);
    const auto res = try_newton_invert(p, planar_interpolate(p, {xi, eta}));
    if (!res.converged() || std::hypot(res.coords.xi - xi, res.coords.eta - eta) > 1e-10) ++bad_newton;
  }

  for (int t = 0; t < kCases; ++t) {
    const auto cls = static_cast<sampling::OriginClass>(t % 6);
    const auto e = sampling::random_element(rng);
    const Vec3 x = sampling::random_field_point(rng, e, cls);
    const Mat3 R = sampling::random_rotation(rng);
    const Vec3 shift(u(rng), u(rng), u(rng));
    std::array<Vec3, 6> moved;
    for (std::size_t i = 0; i < 6; ++i) moved[i] = R * e.tri.nodes()[i] + shift;
    const CurvedTriangle m(moved);
    const Vec3 y = R * x + shift;
    const auto ra = build_rule(e.tri, x), rb = build_rule(m, y);
    const double va = apply_rule(ra, e.tri, [&](ReferenceCoords c) {
      return std::exp(-(e.tri.interpolate(c) - x).squaredNorm());
    });
    const double vb = apply_rule(rb, m, [&](ReferenceCoords c) { return std::exp(-(m.interpolate(c) - y).squaredNorm()); });
    if (ra.points.size() != rb.points.size() || !(std::abs(va - vb) <= 1e-10 * std::max(1.0, std::abs(va)))) ++bad_rigid;
  }

  for (int t = 0; t < kCases; ++t) {
    const auto cls = static_cast<sampling::OriginClass>(t % 6);
    const auto e = sampling::random_element(rng);
    const Vec3 x = sampling::random_field_point(rng, e, cls);
    const ProjectedTriangle proj = build_reference_frame(e.tri, x);
    const OriginLocation loc = locate_origin(proj);
    const double theta = kTwoPi * u01(rng);
    const RadialLimits lim = radial_limits(proj, theta, loc);
    bool ok = lim.radii.size() % 2 == 0 && std::is_sorted(lim.radii.begin(), lim.radii.end());
    // Each (r_2k, r_2k+1) interval runs through the element.
    const Vec2 dir(std::cos(theta), std::sin(theta));
    for (std::size_t k = 0; ok && k + 1 < lim.radii.size(); k += 2) {
      const auto res = try_newton_invert(proj.planar, 0.5 * (lim.radii[k] + lim.radii[k + 1]) * dir);
      ok = res.converged() && res.coords.inside(1e-8);
    }
    if (!ok) ++bad_parity;
  }

  const bool pass = bad_roots == 0 && bad_newton == 0 && bad_rigid == 0 && bad_parity == 0;
  return {pass, fmt("failures: roots %g, newton %g, rigid %g, parity %g (10^4 cases each)", bad_roots, bad_newton,
                    bad_rigid, bad_parity)};
}

}  // namespace

int main() {
  std::printf("informational: default selection gives max |sum w - 1/2| = %.2e on the criterion 1 configurations\n",
              random_weight_sum_error(2024, 200, RuleSelection{}));
  run(1, "weight-sum identity", 30, weight_sums);
  run(2, "monomial exactness", 5, monomials);
  run(3, "cross-method oracle", 60, cross_method);
  std::printf("informational: sphere collocation self-terms (refinements 0-2, six nodes per element) change by "
              "%.2e from N 8 to 16\n", collocation_self_change());
  run(4, "self-term stability", 10, self_term);
  run(5, "gauss flux identity", 120, gauss_flux);
  run(6, "convergence study", 600, convergence);
  run(7, "demo point structure", 5, figure_four);
  run(8, "property suites", 120, properties);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
