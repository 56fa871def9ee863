#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fbms/balancing.hpp"
#include "fbms/error.hpp"

using namespace fbms;
using namespace fbms::balancing;

namespace {

constexpr double kPi = std::numbers::pi;

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

double max_abs_diff(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

double tau_oracle() {
  double a = 1.0, b = 2.0;
  while (b - a > 1e-14) {
    const double m = 0.5 * (a + b);
    ((1.0 / std::tanh(m) - m) > 0.0 ? a : b) = m;
  }
  const double s = 0.5 * (a + b);
  return s * std::cosh(s);
}

BoundaryCircle random_circle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double ang = kPi * u(rng);
  return BoundaryCircle::make(2, {u(rng), u(rng), u(rng)}, 0.2 + std::abs(u(rng)), std::cos(ang),
                              std::sin(ang), Orientation::Outward);
}

}  // namespace

TEST_CASE("sphere areas") {
  CHECK(sphere_area(1) == doctest::Approx(2 * kPi));
  CHECK(sphere_area(2) == doctest::Approx(4 * kPi));
  CHECK(sphere_area(3) == doctest::Approx(2 * kPi * kPi));
  CHECK(sphere_area(4) == doctest::Approx(8 * kPi * kPi / 3));
  CHECK(sphere_area(5) == doctest::Approx(kPi * kPi * kPi));
}

TEST_CASE("circle validation") {
  CHECK(kind_of([] { (void)BoundaryCircle::make(2, {}, 1.0, 1.0, 0.1, Orientation::Upward); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)BoundaryCircle::make(2, {}, 0.0, 1.0, 0.0, Orientation::Upward); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)flux(critical_waist(), 7); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)KillingFieldSpec::rotation({0, 0, 0}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("flux of the critical catenoid waist") {
  const auto F = flux(critical_waist());
  CHECK(F[0] == 0.0);
  CHECK(F[1] == 0.0);
  CHECK(std::abs(F[2] - 2 * kPi / tau_oracle()) < 1e-12);
}

TEST_CASE("axial flux is constant along a catenoid") {
  for (int n = 2; n <= 6; ++n) {
    CAPTURE(n);
    const double zmax = n == 2 ? 2.0 : 0.9 * catenoid::half_width(n);
    const auto prof = catenoid::solve_profile(n, zmax);
    for (double z : {0.0, 0.3 * zmax / 0.9, -0.5 * zmax, 0.6 * zmax}) {
      const auto c = latitude_circle(prof, z, Orientation::Upward);
      const auto F = flux(c);
      CHECK(F[0] == 0.0);
      CHECK(F[1] == 0.0);
      CHECK(std::abs(F[2] - sphere_area(n - 1)) < 1e-8);
    }
  }
}

TEST_CASE("torque") {
  const auto waist = critical_waist();
  CHECK(norm(torque(waist)) < 1e-15);

  const auto fb = catenoid::free_boundary_catenoid(2);
  for (const auto& c : free_boundary_circles(fb)) CHECK(norm(torque(c)) < 1e-8);

  // a circle displaced off the axis by C has torque C x F
  auto shifted = waist;
  shifted.center = {0.4, -0.7, 0.2};
  const auto expect = cross(shifted.center, flux(shifted));
  CHECK(max_abs_diff(torque(shifted), expect) < 1e-12);

  auto c3 = BoundaryCircle::make(3, {}, 1.0, 1.0, 0.0, Orientation::Upward);
  CHECK(kind_of([&] { (void)torque(c3); }) == ErrorKind::DimensionUnsupported);
  CHECK(norm(torque(c3, 256, Subspace3{0, 2})) < 1e-15);
  CHECK(kind_of([&] { (void)torque(c3, 256, Subspace3{0, 3}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("base-point torque") {
  const auto waist = critical_waist();
  CHECK(max_abs_diff(torque_about({0, 0, 0}, waist), torque(waist)) == 0.0);
  const Vec3 W{0.3, -0.2, 0.0};
  const auto lhs = torque_about(W, waist);
  const auto T = torque(waist);
  const auto WF = cross(W, flux(waist));
  CHECK(max_abs_diff(lhs, {T[0] - WF[0], T[1] - WF[1], T[2] - WF[2]}) < 1e-10);
  CHECK(norm(torque_about({0, 0, 0.8}, waist)) < 1e-15);

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto c = random_circle(rng);
    const Vec3 V{u(rng), u(rng), u(rng)};
    const auto a = torque_about(V, c);
    const auto t = torque(c);
    const auto vf = cross(V, flux(c));
    worst = std::max(worst, max_abs_diff(a, {t[0] - vf[0], t[1] - vf[1], t[2] - vf[2]}));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("balancing formula instances") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int n = 2; n <= 4; ++n) {
    const auto fb = catenoid::free_boundary_catenoid(n);
    const auto circles = free_boundary_circles(fb);
    for (int i = 0; i < 10; ++i) {
      const auto K = KillingFieldSpec::rotation({g(rng), g(rng), g(rng)});
      const std::optional<Subspace3> sub =
          n == 2 ? std::nullopt : std::optional<Subspace3>(Subspace3{0, 1});
      CHECK(balancing_residual(circles, K, kDefaultQuadNodes, sub) < 1e-8);
      for (const auto& c : circles) CHECK(std::abs(killing_flux(c, K, kDefaultQuadNodes, sub)) < 1e-8);
    }
    // vertical translation balances over the two boundary spheres
    CHECK(balancing_residual(circles, KillingFieldSpec::translation({0, 0, 1})) < 1e-8);
  }

  for (int n = 2; n <= 6; ++n) {
    const double zmax = n == 2 ? 2.0 : 0.9 * catenoid::half_width(n);
    const auto prof = catenoid::solve_profile(n, zmax);
    const std::array<BoundaryCircle, 2> seg{latitude_circle(prof, -0.3 * zmax, Orientation::Outward),
                                            latitude_circle(prof, 0.7 * zmax, Orientation::Outward)};
    const auto up = KillingFieldSpec::translation({0, 0, 1});
    CHECK(balancing_residual(seg, up) < 1e-8);
    CHECK(std::abs(balancing_residual(std::span(seg).first(1), up) - sphere_area(n - 1)) < 1e-8);
  }
  CHECK(kind_of([] {
          const auto c = BoundaryCircle::make(3, {}, 1.0, 1.0, 0.0, Orientation::Upward);
          (void)killing_flux(c, KillingFieldSpec::rotation({1, 0, 0}));
        }) == ErrorKind::DimensionUnsupported);
}

TEST_CASE("quadrature properties") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const auto c = random_circle(rng);
    CHECK(max_abs_diff(flux(c, 64), flux(c, 128)) < 1e-10);
    CHECK(max_abs_diff(torque(c, 64), torque(c, 128)) < 1e-10);
  }
  // linear in K and additive over circles
  const auto a = random_circle(rng), b = random_circle(rng);
  const auto K1 = KillingFieldSpec::rotation({1, 2, 3}, {0.1, 0, 0});
  const auto K2 = KillingFieldSpec::rotation({-1, 0.5, 2}, {0.1, 0, 0});
  const auto K12 = KillingFieldSpec::rotation({0, 2.5, 5}, {0.1, 0, 0});
  CHECK(std::abs(killing_flux(a, K12) - killing_flux(a, K1) - killing_flux(a, K2)) < 1e-12);
  const std::array<BoundaryCircle, 2> ab{a, b};
  CHECK(std::abs(balancing_residual(ab, K1) - std::abs(killing_flux(a, K1) + killing_flux(b, K1))) <
        1e-14);
  // translation flux is v . F
  const Vec3 v{0.3, -1.2, 0.7};
  CHECK(std::abs(killing_flux(a, KillingFieldSpec::translation(v)) - dot(v, flux(a))) < 1e-12);
}
