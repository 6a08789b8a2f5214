// polarquad: command-line driver for the polar quadrature library.
//
//   polarquad rule --nodes ... --field x,y,z [--out FILE]
//   polarquad dump-points --case 1..6
//   polarquad convergence [--sphere R] [--levels 0 2] [--mesh FILE ...]
//   polarquad selfcheck [--seed S]
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure (including a
// failed self-check).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polarquad/bem.hpp"
#include "polarquad/convergence.hpp"
#include "polarquad/demo.hpp"
#include "polarquad/mesh.hpp"
#include "polarquad/quadrature.hpp"
#include "polarquad/selfcheck.hpp"

namespace pq = polarquad;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::string s = text;
  for (char& ch : s) {
    if (ch == ',' || ch == ';') ch = ' ';
  }
  std::istringstream in(s);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw pq::ValidationError(what + ": '" + token + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw pq::ValidationError(what + ": expected " + std::to_string(expected) + " numbers, got " +
                              std::to_string(out.size()));
  }
  return out;
}

pq::Vec3 parse_point(const std::string& text, const std::string& what) {
  const auto v = parse_numbers(text, 3, what);
  return {v[0], v[1], v[2]};
}

pq::CurvedTriangle parse_element_text(const std::string& text) {
  std::string body;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    body += line + ' ';
  }
  const auto v = parse_numbers(body, 18, "element nodes");
  std::array<pq::Vec3, 6> nodes;
  for (std::size_t i = 0; i < 6; ++i) nodes[i] = pq::Vec3(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
  return pq::CurvedTriangle(nodes);
}

struct SelectionFlags {
  int n_theta = 8;
  int n_r = 8;
  double sigma_threshold = 1.0;
  std::vector<int> fixed;
  CLI::Option* fixed_opt = nullptr;
  CLI::Option* n_theta_opt = nullptr;
  CLI::Option* n_r_opt = nullptr;

  void add(CLI::App* app) {
    n_theta_opt = app->add_option("--ntheta", n_theta, "N_theta (angular density)")->check(CLI::PositiveNumber);
    n_r_opt = app->add_option("--nr", n_r, "N_r (radial density)")->check(CLI::PositiveNumber);
    app->add_option("--sigma-threshold", sigma_threshold, "use the polar rule when sigma is below this")
        ->check(CLI::PositiveNumber);
    fixed_opt = app->add_option("--fixed-counts", fixed, "fixed K M points per interval")
                    ->expected(2)
                    ->check(CLI::PositiveNumber);
  }

  bool given() const { return *fixed_opt || *n_theta_opt || *n_r_opt; }

  pq::RuleSelection selection() const {
    pq::RuleSelection sel;
    sel.n_theta = n_theta;
    sel.n_r = n_r;
    sel.sigma_threshold = sigma_threshold;
    if (fixed.size() == 2) sel.fixed_counts = std::pair{fixed[0], fixed[1]};
    sel.validate();
    return sel;
  }
};

void print_sum(std::ostream& os, const pq::QuadratureRule& rule) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "sum_w %.17g\nsum_w_error %.3e\n", rule.weight_sum(),
                std::abs(rule.weight_sum() - 0.5));
  os << buf;
}

int cmd_rule(const std::string& element_file, const std::string& nodes, const std::string& field,
             const SelectionFlags& flags, const std::string& out_path) {
  if (element_file.empty() == nodes.empty()) throw pq::ValidationError("give exactly one of --element or --nodes");
  std::string text = nodes;
  if (!element_file.empty()) {
    std::ifstream in(element_file);
    if (!in) throw pq::ValidationError("cannot open element file " + element_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  const pq::CurvedTriangle tri = parse_element_text(text);
  const pq::Vec3 x = parse_point(field, "--field");
  const pq::QuadratureRule rule = pq::build_rule(tri, x, flags.selection());
  if (out_path.empty()) {
    pq::write_rule(std::cout, rule, tri, x);
  } else {
    std::ofstream out(out_path);
    if (!out) throw pq::ValidationError("cannot write " + out_path);
    pq::write_rule(out, rule, tri, x);
    std::cout << "origin " << rule.meta.origin << "\npoints " << rule.points.size() << "\n";
  }
  print_sum(out_path.empty() ? std::cerr : std::cout, rule);
  return 0;
}

int cmd_dump_points(int id, const SelectionFlags& flags, const std::string& out_path) {
  const pq::DemoCase& c = pq::demo_case(id);
  pq::RuleSelection sel = flags.selection();
  if (!flags.given()) sel.fixed_counts = std::pair{16, 16};
  const pq::CurvedTriangle tri = pq::demo_element();
  const pq::QuadratureRule rule = pq::build_rule(tri, c.field, sel);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw pq::ValidationError("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  os << "# case " << c.id << " " << c.name << "\n# origin " << rule.meta.origin << "\n# element";
  for (const auto& p : tri.nodes()) os << "  " << p.x() << ' ' << p.y();
  os << "\n# field " << c.field.x() << ' ' << c.field.y() << ' ' << c.field.z() << "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "# sum_w %.17g\n# x y xi eta w\n", rule.weight_sum());
  os << buf;
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    // The demo element lies in z = 0 with its corners already in the
    // reference frame, so planar coordinates are global ones.
    const pq::Vec2 p = rule.planar[i] + c.field.head<2>();
    std::snprintf(buf, sizeof buf, "%.10f %.10f %.12f %.12f %.6e\n", p.x(), p.y(), rule.points[i].xi,
                  rule.points[i].eta, rule.points[i].w);
    os << buf;
  }
  if (!out_path.empty()) print_sum(std::cout, rule);
  return 0;
}

int cmd_convergence(double radius, const std::vector<int>& levels, const std::vector<std::string>& meshes,
                    const std::string& source, bool no_linear, const SelectionFlags& flags,
                    const std::string& out_path) {
  std::vector<pq::NamedMesh> list;
  if (!meshes.empty()) {
    for (const auto& path : meshes) {
      list.push_back({path, pq::read_msh(path, [&](const std::string& w) { std::cerr << path << ": " << w << "\n"; })});
    }
  } else {
    if (levels.size() != 2 || levels[0] < 0 || levels[1] < levels[0]) {
      throw pq::ValidationError("--levels needs 0 <= MIN <= MAX");
    }
    for (int r = levels[0]; r <= levels[1]; ++r) list.push_back({"sphere-" + std::to_string(r), pq::sphere_mesh(r, radius)});
  }
  pq::PointSource src;
  src.position = parse_point(source, "--source");
  const pq::ConvergenceReport report = pq::run_convergence(list, src, flags.selection(), !no_linear);
  std::cout << pq::format_table(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw pq::ValidationError("cannot write " + out_path);
    out << pq::to_json(report).dump(2) << "\n";
  }
  return 0;
}

int cmd_selfcheck(std::uint64_t seed, bool perturb) {
  pq::SelfcheckOptions opt;
  opt.seed = seed;
  opt.perturb_fallback = perturb;
  const auto checks = pq::run_selfcheck(opt);
  std::cout << pq::format_checks(checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  std::cout << (ok ? "all checks passed\n" : "self-check FAILED\n");
  return ok ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polar quadrature on curved triangles and a Laplace BEM driver"};
  app.require_subcommand(1);

  CLI::App* rule = app.add_subcommand("rule", "build the quadrature rule for one element and field point");
  std::string element_file, nodes, field, out_path;
  SelectionFlags rule_flags;
  rule->add_option("--element", element_file, "file with six lines 'x y z' (corners, then edge nodes 4-6)");
  rule->add_option("--nodes", nodes, "18 comma-separated coordinates, same order");
  rule->add_option("--field", field, "field point x,y,z")->required();
  rule->add_option("--out", out_path, "write the rule here instead of stdout");
  rule_flags.add(rule);

  CLI::App* dump = app.add_subcommand("dump-points", "planar points of the demo element for origin case 1..6");
  int case_id = 1;
  std::string dump_out;
  SelectionFlags dump_flags;
  dump->add_option("--case", case_id, "1 inside, 2 vertex, 3 outside, 4 straight, 5 convex, 6 concave edge")
      ->required()
      ->check(CLI::Range(1, 6));
  dump->add_option("--out", dump_out, "write the listing here instead of stdout");
  dump_flags.add(dump);

  CLI::App* conv = app.add_subcommand("convergence", "point-source Neumann solves on a mesh sequence");
  double radius = 1.0;
  std::vector<int> levels{0, 2};
  std::vector<std::string> meshes;
  std::string source = "-0.2,-0.2,-0.2", conv_out;
  bool no_linear = false;
  SelectionFlags conv_flags;
  conv->add_option("--sphere", radius, "sphere radius")->check(CLI::PositiveNumber);
  conv->add_option("--levels", levels, "refinement range MIN MAX")->expected(2);
  conv->add_option("--mesh", meshes, "GMSH 2.2 meshes (type 9) to use instead of spheres");
  conv->add_option("--source", source, "point source x,y,z inside the body");
  conv->add_flag("--no-linear", no_linear, "skip the flat six-way split variant");
  conv->add_option("--out", conv_out, "write the JSON report here");
  conv_flags.add(conv);

  CLI::App* self = app.add_subcommand("selfcheck", "run the invariant checks");
  std::uint64_t seed = 1;
  bool perturb = false;
  self->add_option("--seed", seed, "seed for the random configurations");
  self->add_flag("--perturb-fallback", perturb, "negative control: corrupt the symmetric rule")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*rule) return cmd_rule(element_file, nodes, field, rule_flags, out_path);
    if (*dump) return cmd_dump_points(case_id, dump_flags, dump_out);
    if (*conv) return cmd_convergence(radius, levels, meshes, source, no_linear, conv_flags, conv_out);
    if (*self) return cmd_selfcheck(seed, perturb);
  } catch (const pq::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const pq::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
