#include <cmath>
#include <functional>

#include "doctest.h"
#include "fbms/catenoid.hpp"
#include "fbms/error.hpp"

using namespace fbms;
using namespace fbms::catenoid;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no fbms::Error thrown");
  return ErrorKind::InvalidArgument;
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a);
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// z(r) on the n = 3 profile from dz = dr / sqrt(r^4 - 1), with r = 1 + w^2.
double n3_height(double r) {
  const double W = std::sqrt(r - 1.0);
  auto g = [](double w) {
    const double x = 1.0 + w * w;
    return 2.0 / std::sqrt(x * x * x + x * x + x + 1.0);
  };
  return simpson(g, 0.0, W, 2000);
}

double sigma_oracle() {
  return bisect([](double x) { return 1.0 / std::tanh(x) - x; }, 1.0, 2.0, 1e-14);
}

}  // namespace

TEST_CASE("half width") {
  // int_0^1 t^{n-3} (1 - t^p)^{-1/2} dt = B((n-2)/p, 1/2) / p with p = 2n - 2
  for (int n = 3; n <= 8; ++n) {
    const double p = 2.0 * n - 2.0;
    const double oracle = std::beta((n - 2.0) / p, 0.5) / p;
    CAPTURE(n);
    CHECK(std::abs(half_width(n) - oracle) < 1e-12);
    CHECK(std::abs(half_width_raw(n) - half_width(n)) < 1e-8);
  }
  CHECK(half_width(3) == doctest::Approx(1.311029).epsilon(1e-6));
  CHECK(kind_of([] { (void)half_width(2); }) == ErrorKind::Unbounded);
  CHECK(kind_of([] { (void)half_width_raw(2); }) == ErrorKind::Unbounded);
}

TEST_CASE("catenoid profiles") {
  SUBCASE("n = 2 is cosh") {
    const auto prof = solve_profile(2, 3.0);
    double worst = 0.0;
    for (const auto& s : prof.samples()) worst = std::max(worst, std::abs(s.r - std::cosh(s.z)));
    CHECK(worst < 1e-8);
  }
  SUBCASE("initial condition and symmetric grid") {
    const auto prof = solve_profile(3, 1.0);
    const auto s0 = prof.at(0.0);
    CHECK(s0.r == 1.0);
    CHECK(s0.rdot == 0.0);
    CHECK(prof.samples().size() == kProfileGridNodes);
    CHECK(prof.samples()[kProfileGridNodes / 2].z == 0.0);
    CHECK(prof.samples().front().z == -1.0);
    CHECK(prof.samples().back().z == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("n = 3 against the first-integral quadrature") {
    const auto prof = solve_profile(3, 1.0);
    const double r = bisect([](double x) { return n3_height(x) - 0.5; }, 1.0, 3.0, 1e-13);
    CHECK(std::abs(prof.at(0.5).r - r) < 1e-7);
  }
  SUBCASE("first integral, evenness, r >= 1") {
    for (int n = 2; n <= 6; ++n) {
      CAPTURE(n);
      const double zmax = n == 2 ? 2.0 : 0.9 * half_width(n);
      const auto prof = solve_profile(n, zmax);
      CHECK(prof.first_integral_error() < 1e-8);
      CHECK(prof.asymmetry() < 1e-10);
      for (const auto& s : prof.samples()) {
        if (s.z != 0.0) CHECK(s.r > 1.0);
      }
      const auto near = solve_profile(n, n == 2 ? 12.0 : kDomainBudget * half_width(n));
      CHECK(near.scaled_first_integral_error() < 1e-8);
    }
  }
  SUBCASE("domain budget") {
    CHECK(kind_of([] { (void)solve_profile(3, half_width(3)); }) == ErrorKind::DomainExceeded);
    const auto prof = solve_profile(3, 1.0);
    CHECK(kind_of([&] { (void)prof.at(1.5); }) == ErrorKind::DomainExceeded);
    CHECK(kind_of([] { (void)solve_profile(1, 1.0); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("critical catenoid") {
  const auto cc = critical_catenoid();
  const double s = sigma_oracle();
  CHECK(std::abs(cc.sigma - s) < 1e-10);
  CHECK(std::abs(cc.sigma - 1.0 / std::tanh(cc.sigma)) < 1e-12);
  CHECK(std::abs(cc.tau - cc.sigma * std::cosh(cc.sigma)) < 1e-14);
  CHECK(std::abs(cc.tau - s * std::cosh(s)) < 1e-9);
  const double zb = cc.boundary_height();
  CHECK(std::abs(zb * cc.slope(zb) - cc.radius(zb)) < 1e-10);
  CHECK(std::abs(std::hypot(zb, cc.radius(zb)) - 1.0) < 1e-12);
}

TEST_CASE("reparametrised profile") {
  for (int n = 3; n <= 5; ++n) {
    CAPTURE(n);
    const auto rp = reparam_profile(n, 2.0);
    const auto prof = solve_profile(n, 0.9 * half_width(n));
    double worst = 0.0;
    for (std::size_t i = 0; i < rp.t.size(); ++i) {
      if (rp.psi[i] > prof.z_max()) break;
      worst = std::max(worst, std::abs(prof.at(rp.psi[i]).r - rp.phi[i]));
    }
    CHECK(worst < 1e-6);

    // dpsi/dt = phi^{2-n} by fourth-order differences of the table
    const double h = rp.t[1] - rp.t[0];
    double dworst = 0.0;
    for (std::size_t i = 2; i + 2 < rp.t.size(); i += 37) {
      const double d = (-rp.psi[i + 2] + 8.0 * rp.psi[i + 1] - 8.0 * rp.psi[i - 1] + rp.psi[i - 2]) /
                       (12.0 * h);
      dworst = std::max(dworst, std::abs(d - std::pow(rp.phi[i], 2.0 - n)));
    }
    CHECK(dworst < 1e-9);
  }
  for (int n = 3; n <= 10; ++n) {
    CAPTURE(n);
    const auto rp = reparam_profile(n, 3.0, 65);
    CHECK(std::abs(std::cosh((n - 1) * rp.v) - std::sqrt(static_cast<double>(n))) < 1e-12);
    CHECK(rp.claim_lhs < rp.claim_bound);
    CHECK(rp.claim_bound == doctest::Approx(std::pow(n, 1.0 / (2 * n - 2))));
    CHECK(rp.t0 > rp.v);
  }
  CHECK(kind_of([] { (void)reparam_profile(3, 0.1); }) == ErrorKind::RootNotBracketed);
  CHECK(kind_of([] { (void)reparam_profile(2, 1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("tangency roots") {
  const double s = sigma_oracle();
  const auto r0 = tangency_roots(2, 0.0);
  CHECK(std::abs(r0.z2 - s) < 1e-10);
  CHECK(std::abs(r0.z1 + r0.z2) < 1e-12);

  const auto rp = reparam_profile(3, 2.0, 65);
  CHECK(std::abs(tangency_roots(3, 0.0).z2 - reparam_psi(3, rp.t0)) < 1e-8);

  const auto r3 = tangency_roots(2, 0.3);
  const double u = r3.z2 - 0.3;
  CHECK(std::abs(r3.z2 - std::cosh(u) / std::sinh(u)) < 1e-12);
  CHECK(r3.z2 > r0.z2);
  CHECK(r3.z1 < 0.0);

  for (int n = 2; n <= 6; ++n) {
    for (double c : {0.0, 0.1, 0.25}) {
      const auto r = tangency_roots(n, c);
      CHECK(r.residual1 < 1e-10);
      CHECK(r.residual2 < 1e-10);
      CHECK(r.z1 < 0.0);
      CHECK(r.z2 > c);
    }
    // h_+(z) = z - r/r' increases on (c, c + z_max)
    const auto& prof = shift_profile(n);
    double prev = -1e300;
    for (int i = 1; i < 200; ++i) {
      const double sft = prof.z_max() * i / 200.0;
      const auto p = prof.at(sft);
      const double hp = (0.25 + sft) - p.r / p.rdot;
      CHECK(hp > prev);
      prev = hp;
    }
  }
  CHECK(kind_of([] { (void)tangency_roots(4, 1.0); }) == ErrorKind::DomainExceeded);
  CHECK(kind_of([] { (void)tangency_roots(2, -0.1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("shift certificates") {
  const double s = sigma_oracle();
  const auto c0 = shift_certificate(2, 0.0);
  CHECK(std::abs(c0.f1 - c0.f2) < 1e-12);
  CHECK(c0.df1 > 0.0);
  CHECK(std::abs(c0.df1 + c0.df2) < 1e-10);
  CHECK(std::abs(c0.dz2 - 1.0 / (std::cosh(s) * std::cosh(s))) < 1e-10);
  CHECK(c0.dz2 == doctest::Approx(0.30517).epsilon(1e-4));

  for (double c : {0.1, 0.5, 1.0}) CHECK(shift_certificate(3, c).f1 - shift_certificate(3, c).f2 > 0.0);

  // analytic derivatives against central differences in c
  const double h = 1e-5;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); };
  for (int n = 2; n <= 6; ++n) {
    for (double c : {0.1, 0.25, 0.5, 1.0}) {
      ShiftCertificate m, p, x;
      try {
        m = shift_certificate(n, c - h);
        p = shift_certificate(n, c + h);
        x = shift_certificate(n, c);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainExceeded);
        continue;
      }
      CAPTURE(n);
      CAPTURE(c);
      CHECK(rel((p.roots.z1 - m.roots.z1) / (2 * h), x.dz1) < 1e-4);
      CHECK(rel((p.roots.z2 - m.roots.z2) / (2 * h), x.dz2) < 1e-4);
      CHECK(rel((p.f1 - m.f1) / (2 * h), x.df1) < 1e-4);
      CHECK(rel((p.f2 - m.f2) / (2 * h), x.df2) < 1e-4);
      CHECK(rel((p.df1 - m.df1) / (2 * h), x.d2f1) < 1e-4);
      CHECK(rel((p.df2 - m.df2) / (2 * h), x.d2f2) < 1e-4);
      const auto& prof = shift_profile(n);
      auto recip = [&](const ShiftCertificate& q) {
        const double R2 = std::pow(prof.at(q.roots.z2 - q.c).r, 2 * n - 2);
        const double R1 = std::pow(prof.at(q.roots.z1 - q.c).r, 2 * n - 2);
        return n / (n - 1.0) * (1.0 / R2 - 1.0 / R1);
      };
      CHECK(rel((recip(p) - recip(m)) / (2 * h), x.reciprocal_term) < 1e-4);
    }
  }
}

TEST_CASE("uniqueness sweep") {
  for (int n = 2; n <= 10; ++n) {
    CAPTURE(n);
    const auto rep = uniqueness_sweep(n, {0.05, 0.1});
    CHECK(rep.second_derivative_gap_at_0 < 1e-8);
    CHECK(rep.r_z0 >= rep.r_bound);
    CHECK(rep.first_derivative_1_at_0 > 0.0);
    CHECK(rep.first_derivative_2_at_0 < 0.0);
    CHECK(rep.gap_positive);
  }
  CHECK(uniqueness_sweep(3, {}).r_bound == doctest::Approx(1.31607).epsilon(1e-5));

  const auto rep2 = uniqueness_sweep(2, {0.25, 0.5, 1.0, 1.5});
  REQUIRE(rep2.min_third_gap.has_value());
  CHECK(*rep2.min_third_gap >= -1e-6);
  CHECK(rep2.skipped == 0);

  // the gap closes as c -> 0+
  double prev = 1e300;
  for (double c : {0.4, 0.2, 0.1, 0.05, 0.01}) {
    const auto sc = shift_certificate(3, c);
    CHECK(sc.f1 - sc.f2 > 0.0);
    CHECK(sc.f1 - sc.f2 < prev);
    prev = sc.f1 - sc.f2;
  }
  CHECK(prev < 0.1);

  const auto rep6 = uniqueness_sweep(6, {0.1, 1.0});
  CHECK(rep6.skipped == 1);
  CHECK_FALSE(rep6.points[1].in_domain);
}

TEST_CASE("free boundary catenoid") {
  const auto cc = critical_catenoid();
  const auto fb2 = free_boundary_catenoid(2);
  double worst = 0.0;
  for (const auto& p : fb2.nodes) worst = std::max(worst, std::abs(p.r - cc.radius(p.z)));
  CHECK(worst < 1e-8);
  CHECK(std::abs(fb2.boundary_height - cc.boundary_height()) < 1e-10);
  CHECK(std::abs(fb2.waist - 1.0 / cc.tau) < 1e-10);

  for (int n = 3; n <= 6; ++n) {
    const auto fb = free_boundary_catenoid(n);
    CHECK(fb.radius_error < 1e-12);
    CHECK(fb.tangency_residual < 1e-10);
    CHECK(fb.nodes.front().z == doctest::Approx(-fb.boundary_height));
    CHECK(fb.nodes.back().z == fb.boundary_height);
    for (const auto& p : fb.nodes) CHECK(std::hypot(p.z, p.r) <= 1.0 + 1e-12);
  }
}
