#include "fbms/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "fbms/balancing.hpp"
#include "fbms/catenoid.hpp"
#include "fbms/cli.hpp"
#include "fbms/equivariant.hpp"
#include "fbms/error.hpp"
#include "fbms/ode.hpp"

namespace fbms::verify {
namespace {

constexpr double kPi = std::numbers::pi;

using io::InvariantCheck;
using Checks = std::vector<InvariantCheck>;

// Oracles below deliberately avoid the library's own solvers.

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a);
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double sigma_oracle() {
  return bisect([](double x) { return 1.0 / std::tanh(x) - x; }, 1.0, 2.0, 1e-15);
}

// omega_{k} for k = 1..5 in closed form.
double sphere_area_oracle(int k) {
  switch (k) {
    case 1: return 2.0 * kPi;
    case 2: return 4.0 * kPi;
    case 3: return 2.0 * kPi * kPi;
    case 4: return 8.0 * kPi * kPi / 3.0;
    case 5: return kPi * kPi * kPi;
    default: throw Error(ErrorKind::InvalidArgument, "no closed form stored");
  }
}

// Discriminant of a central-difference Jacobian of V at p1.
double fd_discriminant(const equivariant::OrbitParams& p) {
  const double a = p.alpha(), h = 1e-6;
  std::array<std::array<double, 2>, 2> J{};
  for (int j = 0; j < 2; ++j) {
    const double dp = j == 0 ? h : 0.0, dt = j == 1 ? h : 0.0;
    const auto fp = equivariant::v_field(p, a + dp, a + dt);
    const auto fm = equivariant::v_field(p, a - dp, a - dt);
    for (int i = 0; i < 2; ++i) J[i][j] = (fp[i] - fm[i]) / (2 * h);
  }
  const double tr = J[0][0] + J[1][1], det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  return tr * tr - 4 * det;
}

std::string tag(const char* base, int a) { return std::string(base) + "_" + std::to_string(a); }
std::string tag(const char* base, int a, int b) {
  return std::string(base) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

InvariantCheck lt(std::string name, double v, double tol) {
  return InvariantCheck::make(std::move(name), v, "<", tol);
}

double catenoid_zmax(int n) { return n == 2 ? 2.0 : 0.9 * catenoid::half_width(n); }

// ---------------------------------------------------------------------------

void c01(Checks& out, std::vector<std::string>&) {
  int mismatch = 0, oracle_mismatch = 0;
  for (int m = 2; m <= 12; ++m) {
    for (int n = 2; n <= 12; ++n) {
      const auto p = equivariant::OrbitParams::make(m, n);
      const bool focal = equivariant::singular_points(p).classification ==
                         equivariant::SingularityType::Focal;
      if (focal != (m + n < 8)) ++mismatch;
      if ((fd_discriminant(p) < 0.0) != (m + n < 8)) ++oracle_mismatch;
    }
  }
  out.push_back(InvariantCheck::make("classification_mismatches", mismatch, "==", 0));
  out.push_back(InvariantCheck::make("fd_discriminant_mismatches", oracle_mismatch, "==", 0));
}

void c02(Checks& out, std::vector<std::string>&) {
  for (const auto& [m, n] : {std::pair{2, 2}, {2, 3}, {3, 3}, {4, 2}, {2, 5}}) {
    const auto p = equivariant::OrbitParams::make(m, n);
    double res = 0.0, rad = 0.0;
    int bad_order = 0;
    for (int k = 1; k <= 5; ++k) {
      const auto mem = equivariant::construct_family_member(p, k);
      // residual recomputed from the last node: position minus unit tangent
      const auto& b = mem.nodes.back();
      res = std::max(res, std::hypot(b.x - std::cos(b.theta), b.y - std::sin(b.theta)));
      rad = std::max(rad, std::abs(std::hypot(b.x, b.y) - 1.0));
      for (std::size_t i = 1; i < mem.nodes.size(); ++i) {
        if (!(mem.nodes[i].r > mem.nodes[i - 1].r)) ++bad_order;
      }
    }
    out.push_back(lt(tag("boundary_residual", m, n), res, 1e-6));
    out.push_back(lt(tag("boundary_radius_error", m, n), rad, 1e-9));
    out.push_back(InvariantCheck::make(tag("r_not_increasing", m, n), bad_order, "==", 0));
  }
}

void c03(Checks& out, std::vector<std::string>& notes) {
  for (const auto& [m, n] : {std::pair{2, 2}, {2, 3}}) {
    const auto p = equivariant::OrbitParams::make(m, n);
    std::vector<double> d;
    for (int k = 1; k <= 6; ++k) {
      d.push_back(equivariant::cone_distance(equivariant::construct_family_member(p, k), 0.5, 1.0));
    }
    int increases = 0;
    for (std::size_t i = 1; i < d.size(); ++i) increases += d[i] > d[i - 1];
    std::ostringstream ss;
    ss << "(" << m << "," << n << ") distances:";
    for (double v : d) ss << ' ' << io::format_double(v);
    notes.push_back(ss.str());
    out.push_back(InvariantCheck::make(tag("distance_increases", m, n), increases, "==", 0));
    out.push_back(lt(tag("final_over_first", m, n), d.back() / d.front(), 0.2));
  }
}

void c04(Checks& out, std::vector<std::string>& notes) {
  for (const auto& [m, n] : {std::pair{9, 3}, {4, 4}, {5, 3}, {2, 6}}) {
    const auto p = equivariant::OrbitParams::make(m, n);
    const auto sol = equivariant::solve_annulus(p);
    const auto shot = equivariant::shoot_annulus(p, sol.R, sol.eps_bar);
    const auto& a = sol.nodes.front();
    const auto& b = sol.nodes.back();
    const double res_minus = std::hypot(a.x + std::cos(a.theta), a.y + std::sin(a.theta));
    const double res_plus = std::hypot(b.x - std::cos(b.theta), b.y - std::sin(b.theta));
    notes.push_back("(" + std::to_string(m) + "," + std::to_string(n) +
                    ") eps_bar = " + io::format_double(sol.eps_bar));
    out.push_back(lt(tag("gap", m, n), std::abs(shot.r_minus - shot.r_plus), 1e-9));
    out.push_back(lt(tag("residual_minus", m, n), res_minus, 1e-6));
    out.push_back(lt(tag("residual_plus", m, n), res_plus, 1e-6));
    if (m == n) out.push_back(lt(tag("eps_bar_symmetry", m, n), std::abs(sol.eps_bar - kPi / 2), 1e-8));
  }
}

void c05(Checks& out, std::vector<std::string>&) {
  auto kind = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::WrongRegime ? 1.0 : 0.0;
    }
    return 0.0;
  };
  out.push_back(InvariantCheck::make(
      "family_4_4_wrong_regime",
      kind([] { (void)equivariant::construct_family_member(equivariant::OrbitParams::make(4, 4), 1); }),
      "==", 1.0));
  out.push_back(InvariantCheck::make(
      "annulus_2_2_wrong_regime",
      kind([] { (void)equivariant::solve_annulus(equivariant::OrbitParams::make(2, 2)); }), "==", 1.0));
}

void c06(Checks& out, std::vector<std::string>&) {
  const auto cc = catenoid::critical_catenoid();
  out.push_back(lt("sigma_vs_bisection", std::abs(cc.sigma - sigma_oracle()), 1e-10));
  out.push_back(lt("sigma_fixed_point", std::abs(cc.sigma - 1.0 / std::tanh(cc.sigma)), 1e-12));
  out.push_back(lt("tau_consistency", std::abs(cc.tau - cc.sigma * std::cosh(cc.sigma)), 1e-14));
}

void c07(Checks& out, std::vector<std::string>&) {
  for (int n = 2; n <= 6; ++n) {
    const auto prof = catenoid::solve_profile(n, catenoid_zmax(n));
    double worst = 0.0;
    for (const auto& s : prof.samples()) {
      worst = std::max(worst, std::abs(1.0 + s.rdot * s.rdot - std::pow(s.r, 2 * n - 2)));
    }
    out.push_back(lt(tag("first_integral", n), worst, 1e-8));
    if (n == 2) {
      double dev = 0.0;
      for (const auto& s : prof.samples()) dev = std::max(dev, std::abs(s.r - std::cosh(s.z)));
      out.push_back(lt("cosh_match", dev, 1e-8));
    }
  }
}

void c08(Checks& out, std::vector<std::string>&) {
  for (int n = 3; n <= 5; ++n) {
    const auto rp = catenoid::reparam_profile(n, 2.0);
    const auto prof = catenoid::solve_profile(n, catenoid_zmax(n));
    double worst = 0.0;
    for (std::size_t i = 0; i < rp.t.size() && rp.psi[i] <= prof.z_max(); ++i) {
      worst = std::max(worst, std::abs(prof.at(rp.psi[i]).r - rp.phi[i]));
    }
    out.push_back(lt(tag("two_route", n), worst, 1e-6));
  }
  // T(3) = B(1/4, 1/2) / 4
  const double oracle = std::beta(0.25, 0.5) / 4.0;
  out.push_back(lt("half_width_3", std::abs(catenoid::half_width(3) - oracle), 1e-8));
}

void c09(Checks& out, std::vector<std::string>& notes) {
  for (int n = 2; n <= 10; ++n) {
    // r at the tangency point z0 of z r'(z) = r(z), found here by bisection on the profile
    const auto& prof = catenoid::shift_profile(n);
    const double hi = n == 2 ? 3.0 : prof.z_max();
    const double z0 = bisect(
        [&](double z) {
          const auto s = prof.at(z);
          return z * s.rdot - s.r;
        },
        1e-3, hi, 1e-13);
    const double rz0 = prof.at(z0).r;
    const double bound = std::pow(n, 1.0 / (2 * n - 2));
    if (n == 2) notes.push_back("r(z0) for n = 2: " + io::format_double(rz0));
    out.push_back(InvariantCheck::make(tag("r_z0_minus_bound", n), rz0 - bound, ">=", 0.0));
  }
  for (int n = 3; n <= 10; ++n) {
    const auto rp = catenoid::reparam_profile(n, 3.0, 65);
    out.push_back(lt(tag("cosh_v", n), std::abs(std::cosh((n - 1) * rp.v) - std::sqrt(double(n))), 1e-12));
    out.push_back(InvariantCheck::make(tag("claim_lhs_minus_bound", n),
                                       rp.claim_lhs - std::pow(n, 1.0 / (2 * n - 2)), "<", 0.0));
  }
}

void c10(Checks& out, std::vector<std::string>& notes) {
  const double h = 1e-5;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); };
  for (int n = 2; n <= 6; ++n) {
    double dz = 0.0, df = 0.0;
    int tested = 0;
    for (double c : {0.1, 0.25, 0.5, 1.0}) {
      catenoid::ShiftCertificate m, p, x;
      try {
        m = catenoid::shift_certificate(n, c - h);
        p = catenoid::shift_certificate(n, c + h);
        x = catenoid::shift_certificate(n, c);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DomainExceeded) throw;
        notes.push_back("n = " + std::to_string(n) + ", c = " + io::format_double(c) +
                        ": root outside the profile domain, skipped");
        continue;
      }
      ++tested;
      dz = std::max({dz, rel((p.roots.z1 - m.roots.z1) / (2 * h), x.dz1),
                     rel((p.roots.z2 - m.roots.z2) / (2 * h), x.dz2)});
      df = std::max({df, rel((p.f1 - m.f1) / (2 * h), x.df1), rel((p.f2 - m.f2) / (2 * h), x.df2)});
    }
    out.push_back(InvariantCheck::make(tag("points_tested", n), tested, ">=", 1));
    out.push_back(lt(tag("dz_rel_error", n), dz, 1e-4));
    out.push_back(lt(tag("df_rel_error", n), df, 1e-4));
    const auto c0 = catenoid::shift_certificate(n, 0.0);
    out.push_back(lt(tag("d2f_gap_at_0", n), std::abs(c0.d2f1 - c0.d2f2), 1e-8));
  }
}

void c11(Checks& out, std::vector<std::string>& notes) {
  std::vector<double> grid;
  for (int i = 1; i <= 8; ++i) grid.push_back(0.25 * i);
  grid.insert(grid.begin(), 0.1);
  for (int n = 2; n <= 6; ++n) {
    const auto rep = catenoid::uniqueness_sweep(n, grid);
    double min_gap = INFINITY;
    for (const auto& pt : rep.points) {
      if (pt.in_domain) min_gap = std::min(min_gap, pt.gap);
    }
    if (rep.skipped) {
      notes.push_back("n = " + std::to_string(n) + ": " + std::to_string(rep.skipped) +
                      " grid points outside the profile domain");
    }
    out.push_back(InvariantCheck::make(tag("min_gap", n), min_gap, ">", 0.0));
    if (rep.min_third_gap) {
      out.push_back(InvariantCheck::make(tag("min_third_gap", n), *rep.min_third_gap, ">=", -1e-6));
    }
    if (rep.reciprocal_exceeds_3) notes.push_back("n = " + std::to_string(n) + ": reciprocal term above 3");
  }
}

void c12(Checks& out, std::vector<std::string>&) {
  using namespace balancing;
  for (int n = 2; n <= 6; ++n) {
    const double zmax = catenoid_zmax(n);
    const auto prof = catenoid::solve_profile(n, zmax);
    double lo = INFINITY, hi = -INFINITY, dev = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double z = -0.9 * zmax + 1.8 * zmax * i / 9.0;
      const double F = flux(latitude_circle(prof, z, Orientation::Upward))[2];
      lo = std::min(lo, F);
      hi = std::max(hi, F);
      dev = std::max(dev, std::abs(F - sphere_area_oracle(n - 1)));
    }
    out.push_back(lt(tag("flux_spread", n), hi - lo, 1e-8));
    out.push_back(lt(tag("flux_vs_sphere_area", n), dev, 1e-8));
  }

  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double ang = kPi * u(rng);
    const auto c = BoundaryCircle::make(2, {u(rng), u(rng), u(rng)}, 0.2 + std::abs(u(rng)),
                                        std::cos(ang), std::sin(ang), Orientation::Outward);
    const Vec3 W{2 * u(rng), 2 * u(rng), 2 * u(rng)};
    const auto lhs = torque_about(W, c);
    const auto T = torque(c);
    const auto WF = cross(W, flux(c));
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(lhs[j] - (T[j] - WF[j])));
  }
  out.push_back(lt("torque_identity", worst, 1e-9));

  std::normal_distribution<double> g;
  for (int n = 2; n <= 4; ++n) {
    const auto circles = free_boundary_circles(catenoid::free_boundary_catenoid(n));
    const std::optional<Subspace3> sub = n == 2 ? std::nullopt : std::optional<Subspace3>(Subspace3{});
    double res = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto K = KillingFieldSpec::rotation({g(rng), g(rng), g(rng)});
      res = std::max(res, balancing_residual(circles, K, kDefaultQuadNodes, sub));
    }
    out.push_back(lt(tag("rotational_residual", n), res, 1e-8));
  }
}

void c13(Checks& out, std::vector<std::string>& notes) {
  auto endpoint_error = [](double tol) {
    ode::IvpProblem p;
    p.dimension = 1;
    p.rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
    p.initial_state = {1.0};
    p.horizon = 1.0;
    p.abs_tol = tol;
    p.rel_tol = tol;
    return std::abs(ode::integrate(p).trajectory.evaluate(1.0)[0] - std::exp(-1.0));
  };
  const double coarse = endpoint_error(1e-10), fine = endpoint_error(5e-11);
  notes.push_back("endpoint errors " + io::format_double(coarse) + " -> " + io::format_double(fine));
  out.push_back(InvariantCheck::make("error_ratio", coarse / fine, ">=", 2.0));
}

void c14(Checks& out, std::vector<std::string>& notes) {
  namespace fs = std::filesystem;
  static int counter = 0;
  const fs::path root = fs::temp_directory_path() /
                        ("fbms_determinism_" + std::to_string(std::random_device{}()) + "_" +
                         std::to_string(counter++));
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs = {
      {"classify", "--m", "2", "--n", "2"},
      {"family", "--m", "2", "--n", "3", "--k", "2"},
      {"annulus", "--m", "4", "--n", "4"},
      {"catenoid", "--n", "2", "--segments", "64"},
      {"catenoid", "--n", "3"},
      {"critical-catenoid", "--segments", "128"},
      {"uniqueness", "--n", "3", "--eps-grid", "0.1,0.5"},
      {"balance", "--n", "2"},
  };
  std::ostringstream sink;
  int bad_exit = 0;
  for (const char* side : {"a", "b"}) {
    for (auto args : runs) {
      args.push_back("--out");
      args.push_back((root / side).string());
      if (cli::run(args, sink, sink) != cli::kExitOk) ++bad_exit;
    }
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    const auto other = root / "b" / rel;
    ++files;
    if (!fs::exists(other)) {
      ++differing;
      continue;
    }
    std::string x = io::read_text(e.path()), y = io::read_text(other);
    if (rel.filename() == "manifest.json") {
      // wall-clock time is the one field allowed to differ
      auto jx = io::Json::parse(x), jy = io::Json::parse(y);
      jx.erase("duration_seconds");
      jy.erase("duration_seconds");
      x = io::canonical_json(jx);
      y = io::canonical_json(jy);
    }
    if (x != y) {
      ++differing;
      notes.push_back("differs: " + rel.string());
    }
  }
  notes.push_back(std::to_string(files) + " output files compared");
  out.push_back(InvariantCheck::make("nonzero_exit_codes", bad_exit, "==", 0));
  out.push_back(InvariantCheck::make("files_compared", static_cast<double>(files), ">=", 16));
  out.push_back(InvariantCheck::make("differing_files", static_cast<double>(differing), "==", 0));

  fs::path obj;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    if (e.path().filename().string().rfind("critical-catenoid", 0) == 0) obj = e.path() / "mesh.obj";
  }
  const auto mc = io::check_mesh(io::read_obj(obj));
  out.push_back(InvariantCheck::make("mesh_manifold", mc.manifold, "==", 1));
  out.push_back(InvariantCheck::make("mesh_oriented", mc.oriented, "==", 1));
  out.push_back(InvariantCheck::make("mesh_euler", static_cast<double>(mc.euler_characteristic), "==", 0));
  out.push_back(InvariantCheck::make("mesh_max_norm", mc.max_vertex_norm, "<=", 1.0 + 1e-6));
  fs::remove_all(root);
}

struct Entry {
  const char* title;
  double budget;
  void (*fn)(Checks&, std::vector<std::string>&);
};

constexpr Entry kEntries[kCriterionCount] = {
    {"dimension-8 dichotomy", 1.0, c01},
    {"family construction", 10.0, c02},
    {"cone convergence", 10.0, c03},
    {"annulus construction", 20.0, c04},
    {"regime errors", 1.0, c05},
    {"critical catenoid", 1.0, c06},
    {"catenoid first integral", 5.0, c07},
    {"two-route consistency", 5.0, c08},
    {"tangency radius bounds", 5.0, c09},
    {"derivative certificates", 10.0, c10},
    {"uniqueness gap", 10.0, c11},
    {"balancing", 5.0, c12},
    {"integrator order", 1.0, c13},
    {"serialization", 5.0, c14},
};

}  // namespace

bool CriterionResult::passed() const {
  if (!error.empty() || checks.empty() || seconds > budget_seconds) return false;
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

CriterionResult run_criterion(int id) {
  if (id < 1 || id > kCriterionCount) throw Error(ErrorKind::InvalidArgument, "no such criterion");
  const auto& e = kEntries[id - 1];
  CriterionResult r;
  r.id = id;
  r.title = e.title;
  r.budget_seconds = e.budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    e.fn(r.checks, r.notes);
  } catch (const std::exception& ex) {
    r.error = ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_all(const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    out.push_back(run_criterion(id));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string summary_line(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d %-26s %7.3fs (budget %.0fs)", r.passed() ? "PASS" : "FAIL",
                r.id, r.title.c_str(), r.seconds, r.budget_seconds);
  std::string line = head;
  if (!r.error.empty()) return line + "  error: " + r.error;
  if (r.seconds > r.budget_seconds) line += "  over time budget";
  for (const auto& c : r.checks) {
    if (!c.passed) {
      return line + "  " + c.name + " = " + io::format_double(c.measured) + " (need " + c.relation +
             " " + io::format_double(c.tolerance) + ")";
    }
  }
  return line;
}

}  // namespace fbms::verify
