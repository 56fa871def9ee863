#include "fbms/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "fbms/balancing.hpp"
#include "fbms/catenoid.hpp"
#include "fbms/equivariant.hpp"
#include "fbms/error.hpp"
#include "fbms/verify.hpp"

namespace fbms::cli {
namespace {

namespace fs = std::filesystem;
using io::InvariantCheck;
using io::Json;
using io::ReportDocument;

constexpr double kPi = std::numbers::pi;

[[noreturn]] void invalid(const std::string& flag, const std::string& why) {
  throw Error(ErrorKind::InvalidArgument, flag + ": " + why);
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Flags {
  CLI::App app{"Free boundary minimal surfaces: constructions and certificates", "fbms"};
  CLI::Option* m;
  CLI::Option* n;
  CLI::Option* k;
  CLI::Option* radius;
  CLI::Option* eps_grid;
  CLI::Option* tol_abs;
  CLI::Option* tol_rel;
  CLI::Option* tol_root;
  CLI::Option* quad_nodes;
  CLI::Option* out;
  CLI::Option* segments;

  explicit Flags(CliConfig& c) {
    app.fallthrough();
    app.require_subcommand(1);
    m = app.add_option("--m", c.m, "first sphere factor dimension");
    n = app.add_option("--n", c.n, "second factor dimension, or catenoid dimension");
    k = app.add_option("--k", c.k, "family index (number of crossings)");
    radius = app.add_option("--radius", c.radius, "annulus shooting radius R");
    eps_grid = app.add_option("--eps-grid", c.eps_grid, "sweep grid: a,b,c or lo:hi:count");
    tol_abs = app.add_option("--tol-abs", c.tol_abs, "integration absolute tolerance");
    tol_rel = app.add_option("--tol-rel", c.tol_rel, "integration relative tolerance");
    tol_root = app.add_option("--tol-root", c.tol_root, "root bracket tolerance");
    quad_nodes = app.add_option("--quad-nodes", c.quad_nodes, "boundary quadrature nodes");
    out = app.add_option("--out", c.out, "output directory");
    app.add_option("--config", c.config, "JSON configuration file");
    segments = app.add_option("--segments", c.segments, "OBJ segments around the axis");
    for (const auto& name : kSubcommands) {
      app.add_subcommand(name)->callback([&c, name] { c.subcommand = name; });
    }
  }
};

template <class T>
T json_number(const Json& v, const std::string& key) {
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) invalid("config '" + key + "'", "expected an integer");
  } else {
    if (!v.is_number()) invalid("config '" + key + "'", "expected a number");
  }
  return v.get<T>();
}

void merge_config_file(CliConfig& c, const Flags& f) {
  Json j;
  try {
    j = Json::parse(io::read_text(*c.config));
  } catch (const Json::parse_error& e) {
    invalid("--config", std::string("not valid JSON: ") + e.what());
  } catch (const Error& e) {
    invalid("--config", e.what());
  }
  if (!j.is_object()) invalid("--config", "top level must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "m") {
      if (!f.m->count()) c.m = json_number<int>(v, key);
    } else if (key == "n") {
      if (!f.n->count()) c.n = json_number<int>(v, key);
    } else if (key == "k") {
      if (!f.k->count()) c.k = json_number<int>(v, key);
    } else if (key == "radius") {
      if (!f.radius->count()) c.radius = json_number<double>(v, key);
    } else if (key == "eps_grid") {
      if (f.eps_grid->count()) continue;
      if (v.is_string()) {
        c.eps_grid = v.get<std::string>();
      } else if (v.is_array()) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + io::format_double(json_number<double>(x, key));
        c.eps_grid = s;
      } else {
        invalid("config 'eps_grid'", "expected a string or an array of numbers");
      }
    } else if (key == "tol_abs") {
      if (!f.tol_abs->count()) c.tol_abs = json_number<double>(v, key);
    } else if (key == "tol_rel") {
      if (!f.tol_rel->count()) c.tol_rel = json_number<double>(v, key);
    } else if (key == "tol_root") {
      if (!f.tol_root->count()) c.tol_root = json_number<double>(v, key);
    } else if (key == "radius_cap") {
      c.radius_cap = json_number<double>(v, key);
    } else if (key == "quad_nodes") {
      if (!f.quad_nodes->count()) c.quad_nodes = json_number<int>(v, key);
    } else if (key == "segments") {
      if (!f.segments->count()) c.segments = json_number<int>(v, key);
    } else if (key == "out") {
      if (!v.is_string()) invalid("config 'out'", "expected a string");
      if (!f.out->count()) c.out = v.get<std::string>();
    } else {
      invalid("--config", "unknown key '" + key + "'");
    }
  }
}

void check_positive(const char* flag, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(flag, "must be a positive finite number");
}

// ---------------------------------------------------------------------------
// pipelines

struct RunOutput {
  ReportDocument doc;
  std::vector<std::string> files;
};

equivariant::IntegrationSettings integration(const CliConfig& c) {
  equivariant::IntegrationSettings s;
  s.abs_tol = c.tol_abs;
  s.rel_tol = c.tol_rel;
  s.radius_cap = c.radius_cap;
  return s;
}

Json pair(const std::array<double, 2>& a) { return Json::array({a[0], a[1]}); }

RunOutput classify(const CliConfig& c, const fs::path&) {
  const auto p = equivariant::OrbitParams::make(c.m, c.n);
  const auto s = equivariant::singular_points(p);
  RunOutput r;
  r.doc.kind = "classification";
  r.doc.parameters = {{"m", c.m}, {"n", c.n}};
  Json eig = Json::array();
  for (const auto& e : s.eigenvalues) eig.push_back({{"re", e.real()}, {"im", e.imag()}});
  r.doc.results = {{"classification", equivariant::to_string(s.classification)},
                   {"p1", pair(s.p1)},
                   {"p2", pair(s.p2)},
                   {"jacobian_p1", Json::array({pair(s.jacobian_p1[0]), pair(s.jacobian_p1[1])})},
                   {"eigenvalues", eig},
                   {"discriminant", s.discriminant},
                   {"alpha", p.alpha()},
                   {"cone_slope", p.cone_slope()}};
  const bool focal = s.classification == equivariant::SingularityType::Focal;
  r.doc.checks = {
      InvariantCheck::make("field_residual", s.max_field_residual, "<", 1e-12),
      InvariantCheck::make("regime_agrees_with_dimension", focal == p.focal_regime(), "==", 1),
      InvariantCheck::make("complex_eigenvalues_iff_focal",
                           (s.eigenvalues[0].imag() != 0.0) == focal, "==", 1),
  };
  return r;
}

RunOutput family(const CliConfig& c, const fs::path& dir) {
  const auto p = equivariant::OrbitParams::make(c.m, c.n);
  const auto mem = equivariant::construct_family_member(p, c.k, integration(c));
  io::write_profile_csv(mem.nodes, dir / "profile.csv");
  RunOutput r;
  r.files = {"profile.csv"};
  r.doc.kind = "family";
  r.doc.parameters = {{"m", c.m}, {"n", c.n}, {"k", c.k}};
  Json cone = nullptr;
  try {
    cone = equivariant::cone_distance(mem, 0.5, 1.0);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyWindow) throw;
  }
  int bad_order = 0;
  for (std::size_t i = 1; i < mem.nodes.size(); ++i) bad_order += !(mem.nodes[i].r > mem.nodes[i - 1].r);
  r.doc.results = {{"crossing_time", mem.crossing_time},
                   {"scale", mem.scale},
                   {"boundary_point", pair(mem.boundary_point)},
                   {"boundary_tangent", pair(mem.boundary_tangent)},
                   {"residual", mem.residual},
                   {"crossings_before", mem.crossings_before},
                   {"cone_distance_window_0.5_1", cone},
                   {"nodes", mem.nodes.size()}};
  r.doc.checks = {
      InvariantCheck::make("boundary_residual", mem.residual, "<", 1e-6),
      InvariantCheck::make("boundary_radius_error",
                           std::abs(std::hypot(mem.boundary_point[0], mem.boundary_point[1]) - 1.0), "<",
                           1e-9),
      InvariantCheck::make("r_not_increasing", bad_order, "==", 0),
  };
  return r;
}

std::optional<std::array<double, 3>> parse_range(const std::string& spec) {
  if (spec.find(':') == std::string::npos) return std::nullopt;
  std::array<double, 3> v{};
  std::stringstream ss(spec);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ':')) {
    if (i == 3) invalid("--eps-grid", "range needs exactly lo:hi:count");
    try {
      std::size_t used = 0;
      v[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      invalid("--eps-grid", "cannot read '" + part + "'");
    }
    ++i;
  }
  if (i != 3) invalid("--eps-grid", "range needs exactly lo:hi:count");
  if (!(v[1] > v[0]) || v[2] < 2 || v[2] != std::floor(v[2])) {
    invalid("--eps-grid", "need lo < hi and an integer count >= 2");
  }
  return v;
}

RunOutput annulus(const CliConfig& c, const fs::path& dir) {
  const auto p = equivariant::OrbitParams::make(c.m, c.n);
  equivariant::AnnulusSettings s;
  s.integration = integration(c);
  s.root_tol = c.tol_root;
  if (const auto range = parse_range(c.eps_grid)) {
    s.scan_lo = (*range)[0];
    s.scan_hi = (*range)[1];
    s.scan_samples = static_cast<std::size_t>((*range)[2]);
  }
  const auto sol = equivariant::solve_annulus(p, c.radius, s);
  io::write_profile_csv(sol.nodes, dir / "profile.csv");
  std::vector<std::vector<double>> scan;
  for (const auto& [e, g] : sol.scan) scan.push_back({e, g});
  io::write_csv({"eps", "gap"}, scan, dir / "scan.csv");
  RunOutput r;
  r.files = {"profile.csv", "scan.csv"};
  r.doc.kind = "annulus";
  r.doc.parameters = {{"m", c.m}, {"n", c.n}, {"R", c.radius}};
  r.doc.results = {{"eps_bar", sol.eps_bar},          {"gap", sol.gap},
                   {"t_minus", sol.t_minus},          {"t_plus", sol.t_plus},
                   {"scale", sol.scale},              {"residual_minus", sol.residual_minus},
                   {"residual_plus", sol.residual_plus}, {"max_radius", sol.max_radius},
                   {"eps_bar_minus_half_pi", sol.eps_bar - kPi / 2}};
  r.doc.checks = {
      InvariantCheck::make("gap", std::abs(sol.gap), "<", 1e-9),
      InvariantCheck::make("residual_minus", sol.residual_minus, "<", 1e-6),
      InvariantCheck::make("residual_plus", sol.residual_plus, "<", 1e-6),
      InvariantCheck::make("max_radius", sol.max_radius, "<=", 1.0 + 1e-9),
  };
  if (c.m == c.n) {
    r.doc.checks.push_back(InvariantCheck::make("eps_bar_symmetry", std::abs(sol.eps_bar - kPi / 2), "<", 1e-8));
  }
  return r;
}

RunOutput catenoid_run(const CliConfig& c, const fs::path& dir) {
  if (c.n < 2) invalid("--n", "catenoid dimension must be at least 2");
  const double zmax = c.n == 2 ? 2.0 : 0.9 * catenoid::half_width(c.n);
  const auto prof = catenoid::solve_profile(c.n, zmax);
  RunOutput r;
  io::write_profile_csv(prof.samples(), dir / "profile.csv");
  r.files = {"profile.csv"};
  if (c.n == 2) {
    (void)io::revolve_to_obj(prof.samples(), c.segments, dir / "mesh.obj");
    r.files.push_back("mesh.obj");
  }
  double min_r = INFINITY;
  for (const auto& s : prof.samples()) min_r = std::min(min_r, s.r);
  r.doc.kind = "catenoid";
  r.doc.parameters = {{"n", c.n}, {"z_max", zmax}};
  r.doc.results = {{"half_width", c.n == 2 ? Json(nullptr) : Json(catenoid::half_width(c.n))},
                   {"first_integral_error", prof.first_integral_error()},
                   {"asymmetry", prof.asymmetry()},
                   {"r_at_z_max", prof.samples().back().r},
                   {"min_r", min_r}};
  r.doc.checks = {
      InvariantCheck::make("first_integral", prof.first_integral_error(), "<", 1e-8),
      InvariantCheck::make("asymmetry", prof.asymmetry(), "<", 1e-10),
      InvariantCheck::make("min_r", min_r, ">=", 1.0),
  };
  return r;
}

RunOutput critical(const CliConfig& c, const fs::path& dir) {
  const auto cc = catenoid::critical_catenoid();
  const auto fb = catenoid::free_boundary_catenoid(2);
  io::write_profile_csv(fb.nodes, dir / "profile.csv");
  std::vector<catenoid::ProfileSample> rings;
  const std::size_t stride = std::max<std::size_t>(1, (fb.nodes.size() - 1) / 64);
  for (std::size_t i = 0; i < fb.nodes.size(); i += stride) rings.push_back(fb.nodes[i]);
  if (rings.back().z != fb.nodes.back().z) rings.push_back(fb.nodes.back());
  const auto mesh = io::revolve_to_obj(rings, c.segments, dir / "mesh.obj");
  const auto mc = io::check_mesh(mesh);
  double route = 0.0;
  for (const auto& s : fb.nodes) route = std::max(route, std::abs(s.r - cc.radius(s.z)));
  const double h = cc.boundary_height();
  const auto waist = balancing::critical_waist();
  RunOutput r;
  r.files = {"profile.csv", "mesh.obj"};
  r.doc.kind = "catenoid";
  r.doc.parameters = {{"n", 2}, {"segments", c.segments}};
  r.doc.results = {{"sigma", cc.sigma},
                   {"tau", cc.tau},
                   {"boundary_height", h},
                   {"boundary_radius", cc.radius(h)},
                   {"waist_radius", 1.0 / cc.tau},
                   {"waist_flux", balancing::flux(waist, static_cast<std::size_t>(c.quad_nodes))[2]},
                   {"mesh_vertices", mesh.vertices.size()},
                   {"mesh_faces", mesh.faces.size()},
                   {"mesh_euler_characteristic", mc.euler_characteristic},
                   {"mesh_max_vertex_norm", mc.max_vertex_norm}};
  r.doc.checks = {
      InvariantCheck::make("sigma_fixed_point", std::abs(cc.sigma - 1.0 / std::tanh(cc.sigma)), "<", 1e-12),
      InvariantCheck::make("tau_consistency", std::abs(cc.tau - cc.sigma * std::cosh(cc.sigma)), "<", 1e-14),
      InvariantCheck::make("boundary_on_sphere", std::abs(std::hypot(h, cc.radius(h)) - 1.0), "<", 1e-12),
      InvariantCheck::make("orthogonality", std::abs(h * cc.slope(h) - cc.radius(h)), "<", 1e-10),
      InvariantCheck::make("numeric_vs_closed_form", route, "<", 1e-8),
      InvariantCheck::make("mesh_manifold", mc.manifold, "==", 1),
      InvariantCheck::make("mesh_oriented", mc.oriented, "==", 1),
      InvariantCheck::make("mesh_in_ball", mc.max_vertex_norm, "<=", 1.0 + 1e-6),
  };
  return r;
}

RunOutput uniqueness(const CliConfig& c, const fs::path& dir) {
  const auto grid = parse_grid(c.eps_grid, {0.1, 0.25, 0.5, 1.0, 1.5, 2.0});
  for (double v : grid) {
    if (!(v >= 0.0) || !std::isfinite(v)) invalid("--eps-grid", "shift values must be finite and >= 0");
  }
  const auto rep = catenoid::uniqueness_sweep(c.n, grid);
  std::vector<std::vector<double>> rows;
  Json pts = Json::array();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : rep.points) {
    rows.push_back({p.c, p.in_domain ? 1.0 : 0.0, p.in_domain ? p.gap : nan, p.third_gap.value_or(nan),
                    p.in_domain ? p.reciprocal_term : nan});
    pts.push_back({{"c", p.c},
                   {"in_domain", p.in_domain},
                   {"gap", p.in_domain ? Json(p.gap) : Json(nullptr)},
                   {"third_gap", p.third_gap ? Json(*p.third_gap) : Json(nullptr)},
                   {"reciprocal_term", p.in_domain ? Json(p.reciprocal_term) : Json(nullptr)}});
  }
  RunOutput r;
  if (!rows.empty()) {
    io::write_csv({"c", "in_domain", "gap", "third_gap", "reciprocal_term"}, rows, dir / "sweep.csv");
    r.files = {"sweep.csv"};
  }
  r.doc.kind = "catenoid";
  r.doc.parameters = {{"n", c.n}, {"c_grid", grid}, {"third_derivative_step", catenoid::kThirdDerivativeStep}};
  r.doc.results = {{"points", pts},
                   {"r_z0", rep.r_z0},
                   {"r_bound", rep.r_bound},
                   {"first_derivative_1_at_0", rep.first_derivative_1_at_0},
                   {"first_derivative_2_at_0", rep.first_derivative_2_at_0},
                   {"second_derivative_gap_at_0", rep.second_derivative_gap_at_0},
                   {"gap_positive", rep.gap_positive},
                   {"min_third_gap", rep.min_third_gap ? Json(*rep.min_third_gap) : Json(nullptr)},
                   {"max_reciprocal_term", rep.max_reciprocal_term},
                   {"reciprocal_exceeds_3", rep.reciprocal_exceeds_3},
                   {"skipped", rep.skipped}};
  r.doc.checks = {
      InvariantCheck::make("gap_positive", rep.gap_positive, "==", 1),
      InvariantCheck::make("second_derivative_gap_at_0", rep.second_derivative_gap_at_0, "<", 1e-8),
      InvariantCheck::make("r_z0_minus_bound", rep.r_z0 - rep.r_bound, ">=", 0.0),
      InvariantCheck::make("first_derivative_1_at_0", rep.first_derivative_1_at_0, ">", 0.0),
      InvariantCheck::make("first_derivative_2_at_0", rep.first_derivative_2_at_0, "<", 0.0),
  };
  if (rep.min_third_gap) {
    r.doc.checks.push_back(InvariantCheck::make("min_third_gap", *rep.min_third_gap, ">=", -1e-6));
  }
  return r;
}

RunOutput balance(const CliConfig& c, const fs::path& dir) {
  using namespace balancing;
  const auto nodes = static_cast<std::size_t>(c.quad_nodes);
  const auto fb = catenoid::free_boundary_catenoid(c.n);
  const auto circles = free_boundary_circles(fb);
  const std::optional<Subspace3> sub = c.n == 2 ? std::nullopt : std::optional<Subspace3>(Subspace3{});
  RunOutput r;
  r.doc.kind = "balancing";
  r.doc.parameters = {{"n", c.n}, {"quad_nodes", c.quad_nodes}};
  Json circ = Json::array();
  std::vector<std::vector<double>> rows;
  double ortho = 0.0;
  for (const auto& b : circles) {
    const auto F = flux(b, nodes);
    const auto T = torque(b, nodes, sub);
    circ.push_back({{"height", b.height()},
                    {"radius", b.radius},
                    {"conormal", Json::array({b.conormal_axial, b.conormal_radial})},
                    {"flux", Json::array({F[0], F[1], F[2]})},
                    {"torque", Json::array({T[0], T[1], T[2]})}});
    rows.push_back({b.height(), b.radius, b.conormal_axial, b.conormal_radial, F[2]});
    // eta = X on a free boundary
    ortho = std::max(ortho, std::hypot(b.radius - b.conormal_radial, b.height() - b.conormal_axial));
  }
  io::write_csv({"height", "radius", "conormal_axial", "conormal_radial", "flux_axial"}, rows,
                dir / "circles.csv");
  r.files = {"circles.csv"};
  const double vertical = balancing_residual(circles, KillingFieldSpec::translation({0, 0, 1}), nodes);
  double rot = 0.0;
  Json rot_json = Json::array();
  for (const Vec3& v : {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}, Vec3{1, 2, 3}}) {
    const double res = balancing_residual(circles, KillingFieldSpec::rotation(v), nodes, sub);
    rot = std::max(rot, res);
    rot_json.push_back({{"axis", Json::array({v[0], v[1], v[2]})}, {"residual", res}});
  }
  r.doc.results = {{"circles", circ},
                   {"scale", fb.scale},
                   {"vertical_translation_residual", vertical},
                   {"rotation_residuals", rot_json},
                   {"subspace", c.n == 2 ? Json(nullptr) : Json::array({0, 1})}};
  r.doc.checks = {
      InvariantCheck::make("vertical_translation_residual", vertical, "<", 1e-8),
      InvariantCheck::make("rotation_residual", rot, "<", 1e-8),
      InvariantCheck::make("conormal_equals_position", ortho, "<", 1e-8),
  };
  return r;
}

RunOutput verify_all(const CliConfig&, const fs::path&, std::ostream& out) {
  RunOutput r;
  r.doc.kind = "verification";
  Json crit = Json::array();
  const auto results = verify::run_all([&out](const verify::CriterionResult& res) {
    out << verify::summary_line(res) << '\n' << std::flush;
  });
  for (const auto& res : results) {
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "c%02d.", res.id);
    crit.push_back({{"id", res.id},
                    {"title", res.title},
                    {"passed", res.passed()},
                    {"notes", res.notes},
                    {"error", res.error.empty() ? Json(nullptr) : Json(res.error)}});
    for (auto chk : res.checks) {
      chk.name = prefix + chk.name;
      r.doc.checks.push_back(std::move(chk));
    }
    if (!res.error.empty()) r.doc.checks.push_back(InvariantCheck::make(prefix + std::string("error"), 1, "==", 0));
    r.doc.checks.push_back(InvariantCheck::make(prefix + std::string("within_time_budget"),
                                                res.seconds <= res.budget_seconds, "==", 1));
  }
  r.doc.results = {{"criteria", crit}};
  return r;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionUnsupported:
    case ErrorKind::IoError:
      return kExitValidation;
    default:
      return kExitNumeric;
  }
}

}  // namespace

Json CliConfig::to_json() const {
  return {{"subcommand", subcommand}, {"m", m},
          {"n", n},                   {"k", k},
          {"radius", radius},         {"eps_grid", eps_grid},
          {"tol_abs", tol_abs},       {"tol_rel", tol_rel},
          {"tol_root", tol_root},     {"radius_cap", radius_cap},
          {"quad_nodes", quad_nodes}, {"segments", segments}};
}

std::string CliConfig::run_name() const {
  const std::string mn = "-m" + std::to_string(m) + "-n" + std::to_string(n);
  const std::string cn = "-n" + std::to_string(n);
  if (subcommand == "classify") return subcommand + mn;
  if (subcommand == "family") return subcommand + mn + "-k" + std::to_string(k);
  if (subcommand == "annulus") return subcommand + mn + "-R" + short_double(radius);
  if (subcommand == "catenoid" || subcommand == "uniqueness" || subcommand == "balance") {
    return subcommand + cn;
  }
  return subcommand;
}

std::vector<double> parse_grid(const std::string& spec, const std::vector<double>& fallback) {
  if (spec.empty()) return fallback;
  if (const auto range = parse_range(spec)) {
    const auto [lo, hi, count] = *range;
    std::vector<double> out;
    const int n = static_cast<int>(count);
    for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      invalid("--eps-grid", "cannot read '" + part + "'");
    }
  }
  return out;
}

void validate(const CliConfig& c) {
  if (std::find(kSubcommands.begin(), kSubcommands.end(), c.subcommand) == kSubcommands.end()) {
    invalid("subcommand", "unknown '" + c.subcommand + "'");
  }
  if (c.m < 2) invalid("--m", "must be at least 2");
  if (c.n < 2) invalid("--n", "must be at least 2");
  if (c.k < 1) invalid("--k", "must be at least 1");
  check_positive("--radius", c.radius);
  check_positive("--tol-abs", c.tol_abs);
  check_positive("--tol-rel", c.tol_rel);
  check_positive("--tol-root", c.tol_root);
  check_positive("radius_cap", c.radius_cap);
  if (c.quad_nodes < 8 || c.quad_nodes % 2) invalid("--quad-nodes", "must be even and at least 8");
  if (c.segments < 8) invalid("--segments", "must be at least 8");
  if (c.out.empty()) invalid("--out", "must not be empty");
  if (c.subcommand == "annulus" && !c.eps_grid.empty()) {
    const auto range = parse_range(c.eps_grid);
    if (!range) invalid("--eps-grid", "annulus takes a range lo:hi:count");
    if (!((*range)[0] > 0.0) || !((*range)[1] < kPi)) invalid("--eps-grid", "range must lie inside (0, pi)");
  }
  if (c.subcommand == "uniqueness") (void)parse_grid(c.eps_grid, {});
}

CliConfig parse(const std::vector<std::string>& args) {
  CliConfig c;
  Flags f(c);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    f.app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::InvalidArgument, e.what());
  }
  if (c.config) merge_config_file(c, f);
  validate(c);
  return c;
}

int execute(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = c.out / c.run_name();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  RunOutput r;
  const auto& s = c.subcommand;
  if (s == "classify") r = classify(c, dir);
  else if (s == "family") r = family(c, dir);
  else if (s == "annulus") r = annulus(c, dir);
  else if (s == "catenoid") r = catenoid_run(c, dir);
  else if (s == "critical-catenoid") r = critical(c, dir);
  else if (s == "uniqueness") r = uniqueness(c, dir);
  else if (s == "balance") r = balance(c, dir);
  else r = verify_all(c, dir, out);

  io::write_report(r.doc, dir / "report.json");
  r.files.push_back("report.json");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto manifest = io::RunManifest::build(kToolVersion, c.to_json(), dir, r.files, seconds);
  io::write_manifest(manifest, dir / "manifest.json");

  std::size_t failed = 0;
  for (const auto& chk : r.doc.checks) {
    if (chk.passed) continue;
    ++failed;
    err << "check failed: " << chk.name << " = " << io::format_double(chk.measured) << " (need "
        << chk.relation << ' ' << io::format_double(chk.tolerance) << ")\n";
  }
  out << s << ": " << r.doc.checks.size() - failed << '/' << r.doc.checks.size()
      << " checks passed, output in " << dir.string() << '\n';
  return failed ? kExitInvariant : kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || std::any_of(args.begin(), args.end(),
                                  [](const std::string& a) { return a == "-h" || a == "--help"; })) {
    CliConfig c;
    Flags f(c);
    out << f.app.help();
    return args.empty() ? kExitValidation : kExitOk;
  }
  try {
    return execute(parse(args), out, err);
  } catch (const Error& e) {
    err << "fbms: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "fbms: " << e.what() << '\n';
    return kExitValidation;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace fbms::cli
