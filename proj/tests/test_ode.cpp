#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fbms/error.hpp"
#include "fbms/ode.hpp"

using namespace fbms;
using namespace fbms::ode;

namespace {

// Plain bisection, kept separate from refine_root.
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

IvpProblem decay(double tol) {
  IvpProblem p;
  p.dimension = 1;
  p.rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
  p.initial_state = {1.0};
  p.horizon = 1.0;
  p.abs_tol = tol;
  p.rel_tol = tol;
  return p;
}

IvpProblem oscillator() {
  IvpProblem p;
  p.dimension = 2;
  p.rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  p.initial_state = {1.0, 0.0};
  p.horizon = 10.0;
  p.abs_tol = 1e-12;
  p.rel_tol = 1e-12;
  return p;
}

}  // namespace

TEST_CASE("zero field keeps the state constant") {
  IvpProblem p;
  p.dimension = 2;
  p.rhs = [](double, std::span<const double>, std::span<double> dy) { dy[0] = dy[1] = 0.0; };
  p.initial_state = {1.0, 2.0};
  p.horizon = 5.0;
  const auto res = integrate(p);
  const auto y = res.trajectory.evaluate(5.0);
  CHECK(res.trajectory.back_time() == 5.0);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 2.0);
}

TEST_CASE("exponential decay matches the closed form") {
  const auto res = integrate(decay(1e-10));
  const double y1 = res.trajectory.state(res.trajectory.size() - 1)[0];
  CHECK(std::abs(y1 - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("backward integration") {
  auto p = decay(1e-11);
  p.direction = Direction::Backward;
  p.horizon = -1.0;
  const auto res = integrate(p);
  CHECK(res.trajectory.back_time() == -1.0);
  CHECK(std::abs(res.trajectory.evaluate(-1.0)[0] - std::exp(1.0)) < 1e-8);
  CHECK(std::abs(res.trajectory.evaluate(-0.37)[0] - std::exp(0.37)) < 1e-8);
}

TEST_CASE("halving tolerances reduces the endpoint error") {
  const double coarse = std::abs(integrate(decay(1e-10)).trajectory.evaluate(1.0)[0] - std::exp(-1.0));
  const double fine = std::abs(integrate(decay(5e-11)).trajectory.evaluate(1.0)[0] - std::exp(-1.0));
  CHECK(coarse / fine >= 2.0);
}

TEST_CASE("falling zero of the oscillator is located at pi/2") {
  EventSpec ev;
  ev.function = [](double, std::span<const double> y) { return y[0]; };
  ev.direction = Crossing::Falling;
  ev.terminal = true;
  const auto res = integrate(oscillator(), std::span(&ev, 1));
  REQUIRE(res.events.size() == 1);
  CHECK(res.stopped_by_event);
  CHECK(std::abs(res.events[0].time - std::numbers::pi / 2) < 1e-8);
  CHECK(std::abs(ev.function(res.events[0].time, res.events[0].state)) < ev.tolerance);
  CHECK(res.trajectory.back_time() == res.events[0].time);
}

TEST_CASE("non-terminal events are all reported with small residuals") {
  EventSpec ev;
  ev.function = [](double, std::span<const double> y) { return y[0]; };
  const auto res = integrate(oscillator(), std::span(&ev, 1));
  // zeros of cos t in (0, 10): pi/2 + j pi, j = 0..2
  REQUIRE(res.events.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(res.events[j].time - (0.5 + static_cast<double>(j)) * std::numbers::pi) < 1e-8);
    CHECK(std::abs(res.events[j].state[0]) < ev.tolerance);
  }
}

TEST_CASE("require_terminal raises HorizonReached") {
  EventSpec ev;
  ev.function = [](double, std::span<const double> y) { return y[0] - 5.0; };
  ev.terminal = true;
  try {
    (void)integrate(oscillator(), std::span(&ev, 1), true);
    FAIL("expected HorizonReached");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HorizonReached);
  }
}

TEST_CASE("singular field underflows the step size") {
  IvpProblem p;
  p.dimension = 1;
  // y' = 1/(1-t) blows up at t = 1
  p.rhs = [](double t, std::span<const double>, std::span<double> dy) { dy[0] = 1.0 / (1.0 - t); };
  p.initial_state = {0.0};
  p.horizon = 2.0;
  p.abs_tol = p.rel_tol = 1e-10;
  try {
    (void)integrate(p);
    FAIL("expected StepSizeUnderflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepSizeUnderflow);
  }
}

TEST_CASE("interpolant agrees with restarted integrations") {
  const auto base = integrate(oscillator());
  const auto& tr = base.trajectory;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto y = tr.evaluate(tr.times()[i]);
    CHECK(std::abs(y[0] - tr.state(i)[0]) <= 1e-12);
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = u(rng);
    const auto& ts = tr.times();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t node = static_cast<std::size_t>(std::distance(ts.begin(), it)) - 1;
    auto p = oscillator();
    p.initial_time = ts[node];
    p.initial_state.assign(tr.state(node).begin(), tr.state(node).end());
    p.horizon = t;
    if (p.horizon <= p.initial_time) continue;
    const auto fresh = integrate(p);
    const auto a = tr.evaluate(t);
    const auto b = fresh.trajectory.evaluate(t);
    worst = std::max({worst, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
  }
  CHECK(worst < 10 * 1e-12);
}

TEST_CASE("integration is deterministic") {
  const auto a = integrate(oscillator());
  const auto b = integrate(oscillator());
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory.times()[i] == b.trajectory.times()[i]);
    CHECK(a.trajectory.state(i)[0] == b.trajectory.state(i)[0]);
  }
}

TEST_CASE("invalid problems are rejected") {
  auto p = decay(1e-8);
  p.abs_tol = 0.0;
  CHECK_THROWS_AS((void)integrate(p), Error);
  p = decay(1e-8);
  p.horizon = -1.0;  // behind a forward start
  CHECK_THROWS_AS((void)integrate(p), Error);
}

TEST_CASE("refine_root") {
  SUBCASE("linear root") {
    CHECK(std::abs(refine_root([](double x) { return x - 1.0; }, 0.0, 2.0, 1e-12) - 1.0) < 1e-12);
  }
  SUBCASE("coth x = x against a bisection oracle") {
    auto f = [](double x) { return 1.0 / std::tanh(x) - x; };
    const double oracle = bisect(f, 1.0, 2.0, 1e-14);
    CHECK(std::abs(oracle - 1.1996786402577) < 1e-12);
    CHECK(std::abs(refine_root(f, 1.0, 2.0, 1e-12) - oracle) < 1e-10);
  }
  SUBCASE("no sign change") {
    try {
      (void)refine_root([](double x) { return x * x + 1.0; }, 0.0, 1.0, 1e-12);
      FAIL("expected NoSignChange");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoSignChange);
    }
  }
  SUBCASE("deterministic") {
    auto f = [](double x) { return std::cos(x) - x; };
    CHECK(refine_root(f, 0.0, 1.0, 1e-13) == refine_root(f, 0.0, 1.0, 1e-13));
  }
}
