#pragma once

// Convergence study: solve the point-source Neumann problem on a sequence of
// meshes, with the curved elements and with their six-way flat split, and fit
// eps = a P^b to each variant.

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "polarquad/bem.hpp"
#include "polarquad/mesh.hpp"

namespace polarquad {

struct ConvergenceRecord {
  std::string variant;  // "quadratic" or "linear"
  std::string mesh;     // e.g. "sphere-2" or a file name
  std::size_t P = 0;
  std::size_t N = 0;
  double rms = 0.0;
  double seconds = 0.0;
  double residual = 0.0;
  double rcond = 0.0;
};

struct VariantFit {
  std::string variant;
  PowerLaw vs_P;
  PowerLaw vs_N;
};

struct ConvergenceReport {
  Vec3 source = Vec3(-0.2, -0.2, -0.2);
  std::vector<ConvergenceRecord> records;
  std::vector<VariantFit> fits;  // only for variants with two or more records

  const VariantFit* fit(const std::string& variant) const {
    for (const auto& f : fits) {
      if (f.variant == variant) return &f;
    }
    return nullptr;
  }
};

struct NamedMesh {
  std::string name;
  SurfaceMesh mesh;
};

inline ConvergenceRecord solve_record(const SurfaceMesh& mesh, const std::string& name, const PointSource& src,
                                      const RuleSelection& sel) {
  const auto t0 = std::chrono::steady_clock::now();
  const BoundaryProblem prob = assemble(mesh, sel);
  const NeumannData bc = neumann_bc(mesh, src);
  const NeumannSolution sol = solve_neumann(prob, bc.q);
  ConvergenceRecord r;
  r.variant = mesh.quadratic() ? "quadratic" : "linear";
  r.mesh = name;
  r.P = mesh.element_count();
  r.N = mesh.node_count();
  r.rms = rms_error(sol.phi, bc.phi_exact);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.residual = sol.residual;
  r.rcond = sol.rcond;
  return r;
}

/// Solves on every mesh and, when `with_linear`, on its flat split. The
/// optional callback sees each record as it completes.
inline ConvergenceReport run_convergence(const std::vector<NamedMesh>& meshes, const PointSource& src,
                                         const RuleSelection& sel = {}, bool with_linear = true,
                                         const std::function<void(const ConvergenceRecord&)>& progress = {}) {
  ConvergenceReport report;
  report.source = src.position;
  for (const auto& m : meshes) {
    report.records.push_back(solve_record(m.mesh, m.name, src, sel));
    if (progress) progress(report.records.back());
    if (with_linear) {
      report.records.push_back(solve_record(split_to_linear(m.mesh), m.name, src, sel));
      if (progress) progress(report.records.back());
    }
  }
  for (const char* variant : {"quadratic", "linear"}) {
    std::vector<double> P, N, e;
    for (const auto& r : report.records) {
      if (r.variant != variant) continue;
      P.push_back(static_cast<double>(r.P));
      N.push_back(static_cast<double>(r.N));
      e.push_back(r.rms);
    }
    if (P.size() >= 2) report.fits.push_back({variant, fit_power_law(P, e), fit_power_law(N, e)});
  }
  return report;
}

inline std::string format_table(const ConvergenceReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %-14s %8s %8s %14s %10s\n", "variant", "mesh", "P", "N", "rms_error",
                "seconds");
  out << buf;
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof buf, "%-10s %-14s %8zu %8zu %14.6e %10.3f\n", r.variant.c_str(), r.mesh.c_str(), r.P,
                  r.N, r.rms, r.seconds);
    out << buf;
  }
  for (const auto& f : report.fits) {
    std::snprintf(buf, sizeof buf, "fit %-10s eps = %.3g P^%.3f   eps = %.3g N^%.3f\n", f.variant.c_str(),
                  f.vs_P.coefficient, f.vs_P.exponent, f.vs_N.coefficient, f.vs_N.exponent);
    out << buf;
  }
  return out.str();
}

inline nlohmann::json to_json(const ConvergenceReport& report) {
  nlohmann::json j;
  j["source"] = {report.source.x(), report.source.y(), report.source.z()};
  j["records"] = nlohmann::json::array();
  for (const auto& r : report.records) {
    j["records"].push_back({{"variant", r.variant},
                            {"mesh", r.mesh},
                            {"P", r.P},
                            {"N", r.N},
                            {"rms_error", r.rms},
                            {"seconds", r.seconds},
                            {"residual", r.residual},
                            {"rcond", r.rcond}});
  }
  j["fits"] = nlohmann::json::array();
  for (const auto& f : report.fits) {
    j["fits"].push_back({{"variant", f.variant},
                         {"exponent_P", f.vs_P.exponent},
                         {"coefficient_P", f.vs_P.coefficient},
                         {"exponent_N", f.vs_N.exponent},
                         {"coefficient_N", f.vs_N.coefficient}});
  }
  return j;
}

/// Inverse of to_json; throws ValidationError on missing or mistyped keys.
inline ConvergenceReport report_from_json(const nlohmann::json& j) {
  try {
    ConvergenceReport report;
    const auto& s = j.at("source");
    report.source = Vec3(s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>());
    for (const auto& r : j.at("records")) {
      ConvergenceRecord rec;
      rec.variant = r.at("variant").get<std::string>();
      rec.mesh = r.at("mesh").get<std::string>();
      rec.P = r.at("P").get<std::size_t>();
      rec.N = r.at("N").get<std::size_t>();
      rec.rms = r.at("rms_error").get<double>();
      rec.seconds = r.at("seconds").get<double>();
      rec.residual = r.at("residual").get<double>();
      rec.rcond = r.at("rcond").get<double>();
      report.records.push_back(rec);
    }
    for (const auto& f : j.at("fits")) {
      report.fits.push_back({f.at("variant").get<std::string>(),
                             {f.at("exponent_P").get<double>(), f.at("coefficient_P").get<double>()},
                             {f.at("exponent_N").get<double>(), f.at("coefficient_N").get<double>()}});
    }
    return report;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("bad convergence report: ") + ex.what());
  }
}

}  // namespace polarquad
