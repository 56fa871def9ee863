#pragma once

/// Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)) with
/// continuous output and bracketed event location, plus a bracketed scalar
/// root refiner. Every construction in the library is built on these.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace fbms::ode {

using State = std::vector<double>;

/// Right-hand side: writes dy/dt for (t, y) into `dydt`. Non-finite output is
/// treated as a failed step, so a field may return NaN outside its domain.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

enum class Direction { Forward, Backward };

struct IvpProblem {
  std::size_t dimension = 0;
  Rhs rhs;
  double initial_time = 0.0;
  State initial_state;
  Direction direction = Direction::Forward;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double horizon = 0.0;
  std::size_t max_steps = 2'000'000;
  /// Length scale for the step-size underflow test. Defaults to
  /// |horizon - initial_time| when unset.
  std::optional<double> underflow_scale;
};

enum class Crossing { Rising, Falling, Any };

struct EventSpec {
  std::function<double(double t, std::span<const double> y)> function;
  Crossing direction = Crossing::Any;
  bool terminal = false;
  /// Bound on |function| at the reported event point.
  double tolerance = 1e-10;
};

struct EventHit {
  std::size_t index = 0;
  double time = 0.0;
  State state;
};

/// Accepted nodes of an integration together with the per-step continuous
/// extension. Times are strictly monotone in the integration direction.
class DenseTrajectory {
 public:
  DenseTrajectory() = default;
  explicit DenseTrajectory(std::size_t dimension) : dim_(dimension) {}

  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dim_, dim_};
  }
  [[nodiscard]] double front_time() const { return times_.front(); }
  [[nodiscard]] double back_time() const { return times_.back(); }
  [[nodiscard]] bool forward() const noexcept { return forward_; }

  /// True when t lies between the first and last node (inclusive).
  [[nodiscard]] bool covers(double t) const;
  /// Continuous state at t; throws DomainError outside the covered range.
  [[nodiscard]] State evaluate(double t) const;
  /// Time derivative of the continuous extension at t.
  [[nodiscard]] State derivative(double t) const;

  /// Drops everything after t; the final node becomes the state at t.
  void truncate(double t);

  [[nodiscard]] std::size_t accepted_steps() const noexcept { return accepted_; }
  [[nodiscard]] std::size_t rejected_steps() const noexcept { return rejected_; }

 private:
  friend class Stepper;

  [[nodiscard]] std::size_t locate(double t) const;

  std::size_t dim_ = 0;
  bool forward_ = true;
  std::vector<double> times_;
  std::vector<double> states_;
  // Five interpolation vectors per step plus the step's own start and length.
  std::vector<double> coeffs_;
  std::vector<double> step_start_;
  std::vector<double> step_length_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

struct IntegrationResult {
  DenseTrajectory trajectory;
  std::vector<EventHit> events;
  bool stopped_by_event = false;
};

/// Integrates `problem` up to its horizon or the first terminal event.
/// If `require_terminal` is set, reaching the horizon without a terminal
/// event raises HorizonReached.
[[nodiscard]] IntegrationResult integrate(const IvpProblem& problem,
                                          std::span<const EventSpec> events = {},
                                          bool require_terminal = false);

/// Brent's method on a sign-changing bracket; stops once the bracket is
/// narrower than `tol`. Throws NoSignChange if f(a) and f(b) share a sign.
[[nodiscard]] double refine_root(const std::function<double(double)>& f, double a, double b,
                                 double tol);

/// Bracket width below which event times are considered located, relative to
/// max(1, |t|).
inline constexpr double kEventTimeTolerance = 1e-12;

}  // namespace fbms::ode
