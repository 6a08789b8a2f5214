#pragma once

// Invariant checks runnable from the command line: weight sums, monomial
// exactness and the Gauss flux identity.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "polarquad/bem.hpp"
#include "polarquad/demo.hpp"
#include "polarquad/mesh.hpp"
#include "polarquad/quadrature.hpp"
#include "polarquad/sampling.hpp"

namespace polarquad {

/// Selection under which the weight sum of random curved configurations
/// reaches 1e-8. The defaults (N = 8, K >= 4) give about 1e-3 there.
inline RuleSelection weight_sum_selection() {
  RuleSelection sel;
  sel.n_theta = 256;
  sel.n_r = 32;
  sel.k_min = 32;
  sel.k_max = 1024;
  return sel;
}

/// Selection for monomial exactness on the flat reference triangle.
inline RuleSelection monomial_selection() {
  RuleSelection sel;
  sel.n_theta = 32;
  sel.n_r = 32;
  return sel;
}

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SelfcheckOptions {
  std::uint64_t seed = 1;
  int random_configs = 60;
  int sphere_level = 1;
  /// Test hook: perturb one weight of the symmetric rule before checking it.
  bool perturb_fallback = false;
};

namespace detail {

inline CheckResult check(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, std::isfinite(value) && value < tolerance};
}

}  // namespace detail

/// Largest weight-sum error over the six demo origins at 16 x 16 points.
inline double demo_weight_sum_error() {
  RuleSelection sel;
  sel.fixed_counts = std::pair{16, 16};
  const CurvedTriangle tri = demo_element();
  double worst = 0.0;
  for (const auto& c : demo_cases()) worst = std::max(worst, std::abs(build_rule(tri, c.field, sel).weight_sum() - 0.5));
  return worst;
}

/// Largest weight-sum error over `count` random configurations cycling
/// through the six origin classes.
inline double random_weight_sum_error(std::uint64_t seed, int count, const RuleSelection& sel) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto cls = static_cast<sampling::OriginClass>(i % 6);
    const auto e = sampling::random_element(rng);
    const Vec3 x = sampling::random_field_point(rng, e, cls);
    worst = std::max(worst, std::abs(build_rule(e.tri, x, sel).weight_sum() - 0.5));
  }
  return worst;
}

/// Largest relative monomial error (degree <= 6) of the polar rule on the
/// flat reference triangle, over origins inside, on a vertex, on an edge and
/// outside.
inline double polar_monomial_error(const RuleSelection& sel = monomial_selection()) {
  const CurvedTriangle ref = CurvedTriangle::flat(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  double worst = 0.0;
  for (const Vec3& x : {Vec3(0.3, 0.25, 0.0), Vec3(0.3, 0.25, 0.2), Vec3(0.0, 0.0, 0.0), Vec3(0.5, 0.0, 0.0),
                        Vec3(0.5, 0.5, 0.0), Vec3(0.4, -0.3, 0.0)}) {
    worst = std::max(worst, monomial_error(build_rule(ref, x, sel), 6));
  }
  return worst;
}

inline std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opt = {}) {
  std::vector<CheckResult> out;

  QuadratureRule fb = fallback_rule();
  if (opt.perturb_fallback) fb.points.front().w += 1e-6;
  out.push_back(detail::check("symmetric rule monomials, degree <= 10", monomial_error(fb, kSymmetricRuleDegree),
                              1e-12));
  out.push_back(detail::check("polar rule monomials, degree <= 6", polar_monomial_error(), 1e-8));
  out.push_back(detail::check("demo weight sums, 16 x 16 points", demo_weight_sum_error(), 1e-8));
  out.push_back(detail::check("random weight sums, seed " + std::to_string(opt.seed),
                              random_weight_sum_error(opt.seed, opt.random_configs, weight_sum_selection()), 1e-8));

  const SurfaceMesh sphere = sphere_mesh(opt.sphere_level);
  out.push_back(detail::check("sphere flux at centre + 1", std::abs(double_layer_flux(sphere, Vec3::Zero()) + 1.0),
                              2e-3));
  const BoundaryProblem prob = assemble(sphere);
  out.push_back(detail::check("sphere corner constants - 1/2", (prob.c.array() - 0.5).abs().maxCoeff(), 1e-2));
  return out;
}

inline std::string format_checks(const std::vector<CheckResult>& checks) {
  std::string out;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-4s %-44s %12.3e  (tol %.1e)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  c.value, c.tolerance);
    out += buf;
  }
  return out;
}

}  // namespace polarquad
