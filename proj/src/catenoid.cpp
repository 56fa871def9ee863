#include "fbms/catenoid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "fbms/error.hpp"

namespace fbms::catenoid {
namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr double kQuadTol = 1e-14;
constexpr unsigned kQuadDepth = 15;
// Offset from c at which the outward root scans start; r/r' is 0/0 at c.
constexpr double kRootScanStart = 1e-4;
constexpr double kRootTol = 1e-15;
constexpr double kN2ShiftDomain = 12.0;

void require_dimension(int n, int lowest) {
  if (n < lowest) {
    throw Error(ErrorKind::InvalidArgument,
                "n must be at least " + std::to_string(lowest) + " (got " + std::to_string(n) + ")");
  }
}

ode::DenseTrajectory integrate_half(int n, double z_end, double tol) {
  ode::IvpProblem prob;
  prob.dimension = 2;
  const double a = n - 1;
  const int e = 2 * n - 3;
  prob.rhs = [a, e](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = a * std::pow(y[0], e);
  };
  prob.initial_state = {1.0, 0.0};
  prob.horizon = z_end;
  prob.direction = z_end > 0.0 ? ode::Direction::Forward : ode::Direction::Backward;
  prob.abs_tol = tol;
  prob.rel_tol = tol;
  return ode::integrate(prob).trajectory;
}

double big_r(int n, double r) { return std::pow(r, 2 * n - 2); }

}  // namespace

// ---------------------------------------------------------------------------
// Profiles

CatenoidProfile::CatenoidProfile(int n, double z_max, ode::DenseTrajectory pos,
                                 ode::DenseTrajectory neg, std::size_t grid_nodes)
    : n_(n), z_max_(z_max), pos_(std::move(pos)), neg_(std::move(neg)) {
  samples_.reserve(grid_nodes);
  const double step = 2.0 * z_max / static_cast<double>(grid_nodes - 1);
  const std::size_t mid = (grid_nodes - 1) / 2;
  for (std::size_t i = 0; i < grid_nodes; ++i) {
    const double z = i == mid ? 0.0 : -z_max + step * static_cast<double>(i);
    samples_.push_back(at(std::clamp(z, -z_max, z_max)));
  }
}

ProfileSample CatenoidProfile::at(double z) const {
  if (!(std::abs(z) <= z_max_)) {
    throw Error(ErrorKind::DomainExceeded,
                "z = " + std::to_string(z) + " outside profile domain |z| <= " +
                    std::to_string(z_max_));
  }
  const auto y = z >= 0.0 ? pos_.evaluate(z) : neg_.evaluate(z);
  return {z, y[0], y[1]};
}

double CatenoidProfile::first_integral_error() const {
  double worst = 0.0;
  for (const auto& s : samples_) {
    worst = std::max(worst, std::abs(1.0 + s.rdot * s.rdot - big_r(n_, s.r)));
  }
  return worst;
}

double CatenoidProfile::scaled_first_integral_error() const {
  double worst = 0.0;
  for (const auto& s : samples_) {
    const double R = big_r(n_, s.r);
    worst = std::max(worst, std::abs(1.0 + s.rdot * s.rdot - R) / std::max(1.0, R));
  }
  return worst;
}

double CatenoidProfile::asymmetry() const {
  double worst = 0.0;
  const std::size_t N = samples_.size();
  for (std::size_t i = 0; i < N / 2; ++i) {
    worst = std::max(worst, std::abs(samples_[i].r - samples_[N - 1 - i].r));
  }
  return worst;
}

CatenoidProfile solve_profile(int n, double z_max, double tol, std::size_t grid_nodes) {
  require_dimension(n, 2);
  if (!(z_max > 0.0) || !std::isfinite(z_max)) {
    throw Error(ErrorKind::InvalidArgument, "z_max must be positive and finite");
  }
  if (grid_nodes < 3 || grid_nodes % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "grid must have an odd number (>= 3) of nodes");
  }
  if (n > 2) {
    const double T = half_width(n);
    if (z_max > kDomainBudget * T) {
      throw Error(ErrorKind::DomainExceeded,
                  "z_max = " + std::to_string(z_max) + " beyond " + std::to_string(kDomainBudget) +
                      " T(" + std::to_string(n) + ") = " + std::to_string(kDomainBudget * T));
    }
  }
  return CatenoidProfile(n, z_max, integrate_half(n, z_max, tol), integrate_half(n, -z_max, tol),
                         grid_nodes);
}

// ---------------------------------------------------------------------------
// Half width

double half_width(int n) {
  require_dimension(n, 2);
  if (n == 2) throw Error(ErrorKind::Unbounded, "the n = 2 profile cosh z exists for all z");
  const int p = 2 * n - 2;
  // 1 - t^p = (1 - t) P(t) with P(t) = sum_{j<p} t^j, and 1 - t = u^2.
  auto f = [n, p](double u) {
    const double t = 1.0 - u * u;
    double P = 0.0;
    for (int j = p - 1; j >= 0; --j) P = P * t + 1.0;
    return 2.0 * std::pow(t, n - 3) / std::sqrt(P);
  };
  return GK::integrate(f, 0.0, 1.0, kQuadDepth, kQuadTol);
}

double half_width_raw(int n) {
  require_dimension(n, 2);
  if (n == 2) throw Error(ErrorKind::Unbounded, "the n = 2 profile cosh z exists for all z");
  const double p = 2.0 * n - 2.0;
  const double d = 1e-4;
  const double Z = 4.0;

  // (1 + s)^p - 1 = p s (1 + a1 s + a2 s^2 + ...)
  const double a1 = (p - 1.0) / 2.0;
  const double a2 = (p - 1.0) * (p - 2.0) / 6.0;
  const double b1 = -a1 / 2.0;
  const double b2 = 3.0 * a1 * a1 / 8.0 - a2 / 2.0;
  const double head = (2.0 * std::sqrt(d) + (2.0 / 3.0) * b1 * std::pow(d, 1.5) +
                       (2.0 / 5.0) * b2 * std::pow(d, 2.5)) /
                      std::sqrt(p);

  auto f = [p](double s) { return 1.0 / std::sqrt(std::expm1(p * std::log1p(s))); };
  const double body = GK::integrate(f, d, Z - 1.0, kQuadDepth, kQuadTol);

  // (z^p - 1)^{-1/2} = sum_k binom(2k, k) / 4^k z^{-p(k + 1/2)}
  double tail = 0.0;
  double coeff = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double e = p * (k + 0.5) - 1.0;
    const double term = coeff * std::pow(Z, -e) / e;
    tail += term;
    if (term < 1e-18 * tail) break;
    coeff *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
  }
  return head + body + tail;
}

// ---------------------------------------------------------------------------
// Critical catenoid

double CritCatParams::radius(double z) const { return std::cosh(tau * z) / tau; }
double CritCatParams::slope(double z) const { return std::sinh(tau * z); }

CritCatParams critical_catenoid() {
  CritCatParams p;
  p.sigma = ode::refine_root([](double x) { return 1.0 / std::tanh(x) - x; }, 1.0, 2.0, 1e-15);
  p.tau = p.sigma * std::cosh(p.sigma);
  return p;
}

// ---------------------------------------------------------------------------
// Reparametrisation

double reparam_phi(int n, double t) { return std::pow(std::cosh((n - 1) * t), 1.0 / (n - 1)); }

namespace {

double psi_integrand(int n, double s) {
  return std::pow(std::cosh((n - 1) * s), (2.0 - n) / (n - 1.0));
}

// Fixed panels of one 61-point rule each. The integrand is analytic within
// pi / (2(n-1)) of the real axis, so this is exact to rounding for these widths.
double psi_segment(int n, double a, double b) {
  if (a == b) return 0.0;
  constexpr double kPanel = 0.02;
  const auto panels = static_cast<std::size_t>(std::ceil(std::abs(b - a) / kPanel));
  const double w = (b - a) / static_cast<double>(panels);
  auto f = [n](double s) { return psi_integrand(n, s); };
  double sum = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + w * static_cast<double>(i);
    const double hi = i + 1 == panels ? b : lo + w;
    sum += GK::integrate(f, lo, hi, 0);
  }
  return sum;
}

double tangency_gap(int n, double t) {
  return std::sinh((n - 1) * t) * reparam_psi(n, t) - reparam_phi(n, t);
}

}  // namespace

double reparam_psi(int n, double t) { return psi_segment(n, 0.0, t); }

ReparamProfile reparam_profile(int n, double t_max, std::size_t grid_nodes) {
  require_dimension(n, 3);
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw Error(ErrorKind::InvalidArgument, "t_max must be positive and finite");
  }
  if (grid_nodes < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 nodes");
  ReparamProfile rp;
  rp.n = n;
  rp.t.resize(grid_nodes);
  rp.phi.resize(grid_nodes);
  rp.psi.resize(grid_nodes);
  for (std::size_t i = 0; i < grid_nodes; ++i) {
    rp.t[i] = t_max * static_cast<double>(i) / static_cast<double>(grid_nodes - 1);
    rp.phi[i] = reparam_phi(n, rp.t[i]);
    rp.psi[i] = i == 0 ? 0.0 : rp.psi[i - 1] + psi_segment(n, rp.t[i - 1], rp.t[i]);
  }
  if (!(tangency_gap(n, t_max) > 0.0)) {
    throw Error(ErrorKind::RootNotBracketed,
                "tangency root lies beyond t_max = " + std::to_string(t_max));
  }
  rp.t0 = ode::refine_root([n](double t) { return tangency_gap(n, t); }, 0.0, t_max, 1e-15);
  rp.v = std::acosh(std::sqrt(static_cast<double>(n))) / (n - 1);
  rp.claim_lhs = std::sinh((n - 1) * rp.v) * reparam_psi(n, rp.v);
  rp.claim_bound = std::pow(static_cast<double>(n), 1.0 / (2.0 * n - 2.0));
  return rp;
}

// ---------------------------------------------------------------------------
// Shifted profiles

const CatenoidProfile& shift_profile(int n) {
  require_dimension(n, 2);
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<CatenoidProfile>> cache;
  std::lock_guard lock(mtx);
  auto& slot = cache[n];
  if (!slot) {
    const double z_max = n == 2 ? kN2ShiftDomain : kDomainBudget * half_width(n);
    slot = std::make_unique<CatenoidProfile>(solve_profile(n, z_max, 1e-13, 3));
  }
  return *slot;
}

namespace {

// Root of z r'(z - c) - r(z - c) with s = z - c scanned outward from 0 in the
// direction `side` (+1 or -1).
double tangency_root(const CatenoidProfile& prof, double c, int side) {
  auto g = [&](double s) {
    const auto p = prof.at(s);
    return (c + s) * p.rdot - p.r;
  };
  const double end = prof.z_max();
  double lo = kRootScanStart;
  double glo = g(side * lo);
  if (glo > 0.0) {
    throw Error(ErrorKind::DomainExceeded, "tangency function positive at the scan start");
  }
  for (;;) {
    const double hi = std::min(2.0 * lo, end);
    const double ghi = g(side * hi);
    if (ghi > 0.0) {
      const double s = ode::refine_root(g, side * lo, side * hi, kRootTol);
      return c + s;
    }
    if (hi >= end) {
      throw Error(ErrorKind::DomainExceeded,
                  "tangency root for c = " + std::to_string(c) + " lies beyond |z - c| = " +
                      std::to_string(end));
    }
    lo = hi;
    glo = ghi;
  }
}

}  // namespace

TangencyRoots tangency_roots(int n, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw Error(ErrorKind::InvalidArgument, "shift c must be nonnegative and finite");
  }
  const auto& prof = shift_profile(n);
  TangencyRoots tr;
  tr.z2 = tangency_root(prof, c, +1);
  tr.z1 = tangency_root(prof, c, -1);
  const auto p1 = prof.at(tr.z1 - c), p2 = prof.at(tr.z2 - c);
  tr.residual1 = std::abs(tr.z1 * p1.rdot - p1.r);
  tr.residual2 = std::abs(tr.z2 * p2.rdot - p2.r);
  return tr;
}

ShiftCertificate shift_certificate(int n, double c) {
  ShiftCertificate sc;
  sc.n = n;
  sc.c = c;
  sc.roots = tangency_roots(n, c);
  const auto& prof = shift_profile(n);
  const double a = n - 1;

  struct Side {
    double dz, ds, f, df, d2f, q;
  };
  auto side = [&](double z) {
    const auto p = prof.at(z - c);
    const double rd2 = p.rdot * p.rdot;
    const double R = big_r(n, p.r);
    Side s;
    s.ds = -rd2 / (a * (1.0 + rd2));
    s.dz = 1.0 + s.ds;
    s.f = z * z + p.r * p.r;
    s.df = 2.0 * z * (n - R) / a;
    s.d2f = 2.0 / a * (n - 3.0 - 2.0 / a + n / a * (R + 1.0 / R));
    // d/dc of 1/R(z_i - c)
    s.q = 2.0 * rd2 * p.rdot / (std::pow(p.r, 2 * n - 1) * (1.0 + rd2));
    return s;
  };
  const Side s1 = side(sc.roots.z1), s2 = side(sc.roots.z2);
  sc.dz1 = s1.dz;
  sc.dz2 = s2.dz;
  sc.ds1 = s1.ds;
  sc.ds2 = s2.ds;
  sc.f1 = s1.f;
  sc.f2 = s2.f;
  sc.df1 = s1.df;
  sc.df2 = s2.df;
  sc.d2f1 = s1.d2f;
  sc.d2f2 = s2.d2f;
  sc.reciprocal_term = n / a * (s2.q - s1.q);
  return sc;
}

UniquenessReport uniqueness_sweep(int n, const std::vector<double>& c_grid) {
  UniquenessReport rep;
  rep.n = n;
  const auto base = shift_certificate(n, 0.0);
  rep.second_derivative_gap_at_0 = std::abs(base.d2f1 - base.d2f2);
  rep.first_derivative_1_at_0 = base.df1;
  rep.first_derivative_2_at_0 = base.df2;
  rep.r_z0 = shift_profile(n).at(base.roots.z2).r;
  rep.r_bound = std::pow(static_cast<double>(n), 1.0 / (2.0 * n - 2.0));
  rep.max_reciprocal_term = base.reciprocal_term;

  const double h = kThirdDerivativeStep;
  for (double c : c_grid) {
    SweepPoint pt;
    pt.c = c;
    try {
      const auto sc = shift_certificate(n, c);
      pt.gap = sc.f1 - sc.f2;
      pt.reciprocal_term = sc.reciprocal_term;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DomainExceeded) throw;
      pt.in_domain = false;
      ++rep.skipped;
      rep.points.push_back(pt);
      continue;
    }
    if (c > 0.0 && !(pt.gap > 0.0)) rep.gap_positive = false;
    rep.max_reciprocal_term = std::max(rep.max_reciprocal_term, pt.reciprocal_term);
    if (c - 2.0 * h >= 0.0) {
      try {
        auto dgap = [n](double x) {
          const auto s = shift_certificate(n, x);
          return s.df1 - s.df2;
        };
        const double d3 = (-dgap(c + 2 * h) + 16.0 * dgap(c + h) - 30.0 * dgap(c) +
                           16.0 * dgap(c - h) - dgap(c - 2 * h)) /
                          (12.0 * h * h);
        pt.third_gap = d3;
        rep.min_third_gap = rep.min_third_gap ? std::min(*rep.min_third_gap, d3) : d3;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DomainExceeded) throw;
      }
    }
    rep.points.push_back(pt);
  }
  rep.reciprocal_exceeds_3 = rep.max_reciprocal_term > 3.0;
  return rep;
}

FreeBoundaryCatenoid free_boundary_catenoid(int n, std::size_t grid_nodes) {
  require_dimension(n, 2);
  if (grid_nodes < 3 || grid_nodes % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "grid must have an odd number (>= 3) of nodes");
  }
  const auto& prof = shift_profile(n);
  const auto roots = tangency_roots(n, 0.0);
  const double z2 = roots.z2;
  const auto top = prof.at(z2);
  const auto bottom = prof.at(-z2);

  FreeBoundaryCatenoid fb;
  fb.n = n;
  fb.scale = 1.0 / std::hypot(z2, top.r);
  fb.boundary_height = fb.scale * z2;
  fb.boundary_radius = fb.scale * top.r;
  fb.radius_error = std::abs(std::hypot(fb.boundary_height, fb.boundary_radius) - 1.0);
  fb.tangency_residual =
      std::max(std::abs(fb.boundary_height * top.rdot - fb.boundary_radius),
               std::abs(-fb.boundary_height * bottom.rdot - fb.scale * bottom.r));
  fb.waist = fb.scale;
  const std::size_t mid = (grid_nodes - 1) / 2;
  for (std::size_t i = 0; i < grid_nodes; ++i) {
    double z = -z2 + 2.0 * z2 * static_cast<double>(i) / static_cast<double>(grid_nodes - 1);
    if (i == mid) z = 0.0;
    if (i == grid_nodes - 1) z = z2;
    const auto p = prof.at(z);
    fb.nodes.push_back({fb.scale * z, fb.scale * p.r, p.rdot});
  }
  return fb;
}

}  // namespace fbms::catenoid
