#include "fbms/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbms/error.hpp"

namespace fbms {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SingularConfiguration: return "SingularConfiguration";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorKind::HorizonReached: return "HorizonReached";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::RegularizationDiverged: return "RegularizationDiverged";
    case ErrorKind::WrongRegime: return "WrongRegime";
    case ErrorKind::CrossingNotFound: return "CrossingNotFound";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::EventNotFound: return "EventNotFound";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::DomainExceeded: return "DomainExceeded";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fbms

namespace fbms::ode {
namespace {

// Dormand-Prince 5(4) tableau and its continuous extension (Hairer, Norsett, Wanner).
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;   // largest shrink is 1/5
constexpr double kFacMax = 10.0;  // largest growth is 10x
constexpr double kBeta = 0.04;    // PI stabilisation
constexpr double kExpo = 0.2 - kBeta * 0.75;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double sign_of(Direction d) { return d == Direction::Forward ? 1.0 : -1.0; }

}  // namespace

bool DenseTrajectory::covers(double t) const {
  if (times_.empty()) return false;
  const double lo = std::min(times_.front(), times_.back());
  const double hi = std::max(times_.front(), times_.back());
  return t >= lo && t <= hi;
}

std::size_t DenseTrajectory::locate(double t) const {
  if (!covers(t)) {
    throw Error(ErrorKind::DomainError, "time " + std::to_string(t) + " outside trajectory");
  }
  if (times_.size() < 2) return 0;
  // Step i spans [times_[i], times_[i+1]].
  std::size_t idx = 0;
  if (forward_) {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
  } else {
    auto it = std::upper_bound(times_.begin(), times_.end(), t, std::greater<>());
    idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
  }
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, times_.size() - 2);
}

State DenseTrajectory::evaluate(double t) const {
  const std::size_t i = locate(t);
  if (times_.size() < 2) return State(state(0).begin(), state(0).end());
  const double s = (t - step_start_[i]) / step_length_[i];
  const double s1 = 1.0 - s;
  const double* r = coeffs_.data() + i * 5 * dim_;
  State y(dim_);
  for (std::size_t j = 0; j < dim_; ++j) {
    const double r1 = r[j], r2 = r[dim_ + j], r3 = r[2 * dim_ + j], r4 = r[3 * dim_ + j],
                 r5 = r[4 * dim_ + j];
    y[j] = r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
  }
  return y;
}

State DenseTrajectory::derivative(double t) const {
  const std::size_t i = locate(t);
  State dy(dim_, 0.0);
  if (times_.size() < 2) return dy;
  const double h = step_length_[i];
  const double s = (t - step_start_[i]) / h;
  const double* r = coeffs_.data() + i * 5 * dim_;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double r2 = r[dim_ + j], r3 = r[2 * dim_ + j], r4 = r[3 * dim_ + j],
                 r5 = r[4 * dim_ + j];
    // d/ds of r2 s + r3 s(1-s) + r4 s^2(1-s) + r5 s^2(1-s)^2
    const double ds = r2 + r3 * (1.0 - 2.0 * s) + r4 * (2.0 * s - 3.0 * s * s) +
                      r5 * (2.0 * s - 6.0 * s * s + 4.0 * s * s * s);
    dy[j] = ds / h;
  }
  return dy;
}

void DenseTrajectory::truncate(double t) {
  const std::size_t i = locate(t);
  if (times_.size() < 2) return;
  const State y = evaluate(t);
  // Keep steps 0..i; node i+1 becomes t.
  const std::size_t keep_nodes = i + 2;
  times_.resize(keep_nodes);
  states_.resize(keep_nodes * dim_);
  coeffs_.resize((i + 1) * 5 * dim_);
  step_start_.resize(i + 1);
  step_length_.resize(i + 1);
  times_.back() = t;
  std::copy(y.begin(), y.end(), states_.end() - static_cast<std::ptrdiff_t>(dim_));
  if (times_[keep_nodes - 2] == t) {
    times_.pop_back();
    states_.resize(states_.size() - dim_);
    coeffs_.resize(i * 5 * dim_);
    step_start_.pop_back();
    step_length_.pop_back();
  }
}

class Stepper {
 public:
  Stepper(const IvpProblem& p, std::span<const EventSpec> events)
      : p_(p), events_(events), n_(p.dimension), dir_(sign_of(p.direction)) {}

  IntegrationResult run(bool require_terminal);

 private:
  void eval(double t, std::span<const double> y, std::span<double> out) {
    p_.rhs(t, y, out);
  }
  double initial_step(double t, const State& y, const State& f0);
  double error_norm(const State& y0, const State& y1, const State& err) const;
  double locate_event(const DenseTrajectory& tr, std::size_t step, const EventSpec& ev,
                      double t_lo, double g_lo, double t_hi) const;

  const IvpProblem& p_;
  std::span<const EventSpec> events_;
  std::size_t n_;
  double dir_;
};

double Stepper::error_norm(const State& y0, const State& y1, const State& err) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sc = p_.abs_tol + p_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(n_));
}

double Stepper::initial_step(double t, const State& y, const State& f0) {
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = p_.abs_tol + p_.rel_tol * std::abs(y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, p_.max_step);
  const double span = std::abs(p_.horizon - p_.initial_time);
  h = std::min(h, span);
  State y1(n_), f1(n_);
  for (std::size_t i = 0; i < n_; ++i) y1[i] = y[i] + dir_ * h * f0[i];
  eval(t + dir_ * h, y1, f1);
  double der2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = p_.abs_tol + p_.rel_tol * std::abs(y[i]);
    const double q = (f1[i] - f0[i]) / sk;
    der2 += q * q;
  }
  der2 = std::sqrt(der2) / h;
  if (!std::isfinite(der2)) return h * 1e-3;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                   : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, p_.max_step, span});
}

double Stepper::locate_event(const DenseTrajectory& tr, std::size_t step, const EventSpec& ev,
                             double t_lo, double g_lo, double t_hi) const {
  (void)step;
  double lo = t_lo, hi = t_hi;
  double glo = g_lo;
  auto g_at = [&](double t) {
    const State y = tr.evaluate(t);
    return ev.function(t, y);
  };
  double ghi = g_at(hi);
  for (int it = 0; it < 400; ++it) {
    const double width = std::abs(hi - lo);
    const double scale = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    const bool narrow = width <= kEventTimeTolerance * scale;
    if (narrow && std::min(std::abs(glo), std::abs(ghi)) < ev.tolerance) break;
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g_at(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  return std::abs(glo) <= std::abs(ghi) ? lo : hi;
}

IntegrationResult Stepper::run(bool require_terminal) {
  if (n_ == 0 || p_.initial_state.size() != n_) {
    throw Error(ErrorKind::InvalidArgument, "state dimension mismatch");
  }
  if (!(p_.abs_tol > 0.0) || !(p_.rel_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerances must be positive");
  }
  if (!(p_.max_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "max_step must be positive");
  if (!((p_.horizon - p_.initial_time) * dir_ > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "horizon must lie ahead of the initial time");
  }

  IntegrationResult out;
  DenseTrajectory& tr = out.trajectory;
  tr.dim_ = n_;
  tr.forward_ = dir_ > 0.0;

  double t = p_.initial_time;
  State y = p_.initial_state;
  State k1(n_), k2(n_), k3(n_), k4(n_), k5(n_), k6(n_), k7(n_), ytmp(n_), ynew(n_), err(n_);
  eval(t, y, k1);
  if (!all_finite(k1) || !all_finite(y)) {
    throw Error(ErrorKind::InvalidArgument, "right-hand side not finite at the initial state");
  }
  tr.times_.push_back(t);
  tr.states_.insert(tr.states_.end(), y.begin(), y.end());

  std::vector<double> g_prev(events_.size());
  for (std::size_t e = 0; e < events_.size(); ++e) g_prev[e] = events_[e].function(t, y);

  const double underflow =
      1e-14 * p_.underflow_scale.value_or(std::abs(p_.horizon - p_.initial_time));
  double h = initial_step(t, y, k1);
  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (dir_ * (p_.horizon - t) > 0.0) {
    if (++steps > p_.max_steps) {
      throw Error(ErrorKind::MaxStepsExceeded, "step budget exhausted at t=" + std::to_string(t));
    }
    h = std::min(h, p_.max_step);
    bool final_step = false;
    if (dir_ * (t + dir_ * h - p_.horizon) >= 0.0) {
      h = std::abs(p_.horizon - t);
      final_step = true;
    }
    const double floor_h = std::max(underflow, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
    if (h < floor_h && !final_step) {
      throw Error(ErrorKind::StepSizeUnderflow,
                  "step " + std::to_string(h) + " at t=" + std::to_string(t));
    }
    const double hs = dir_ * h;

    for (std::size_t i = 0; i < n_; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    eval(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n_; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    eval(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n_; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n_; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n_; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = final_step ? p_.horizon : t + hs;
    eval(t_new, ytmp, k6);
    for (std::size_t i = 0; i < n_; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(t_new, ynew, k7);
    for (std::size_t i = 0; i < n_; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    double en = error_norm(y, ynew, err);
    if (!std::isfinite(en) || !all_finite(ynew) || !all_finite(k7)) {
      ++tr.rejected_;
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(std::max(en, 1e-300), kExpo);
    if (en > 1.0) {
      ++tr.rejected_;
      h /= std::min(1.0 / kFacMin, fac11 / kSafety);
      last_rejected = true;
      continue;
    }

    // Accept.
    ++tr.accepted_;
    const std::size_t step_index = tr.step_start_.size();
    tr.step_start_.push_back(t);
    tr.step_length_.push_back(t_new - t);
    const std::size_t base = tr.coeffs_.size();
    tr.coeffs_.resize(base + 5 * n_);
    double* rc = tr.coeffs_.data() + base;
    for (std::size_t i = 0; i < n_; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = hs * k1[i] - ydiff;
      rc[i] = y[i];
      rc[n_ + i] = ydiff;
      rc[2 * n_ + i] = bspl;
      rc[3 * n_ + i] = ydiff - hs * k7[i] - bspl;
      rc[4 * n_ + i] =
          hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    tr.times_.push_back(t_new);
    tr.states_.insert(tr.states_.end(), ynew.begin(), ynew.end());

    // Events: collect sign changes within this step and locate them.
    struct Pending {
      std::size_t index;
      double time;
    };
    std::vector<Pending> pending;
    std::vector<double> g_new(events_.size());
    for (std::size_t e = 0; e < events_.size(); ++e) {
      g_new[e] = events_[e].function(t_new, ynew);
      const double g0 = g_prev[e], g1 = g_new[e];
      const bool rising = g0 < 0.0 && g1 >= 0.0;
      const bool falling = g0 > 0.0 && g1 <= 0.0;
      const Crossing want = events_[e].direction;
      if ((rising && want != Crossing::Falling) || (falling && want != Crossing::Rising)) {
        pending.push_back({e, locate_event(tr, step_index, events_[e], t, g0, t_new)});
      }
    }
    std::sort(pending.begin(), pending.end(), [&](const Pending& a, const Pending& b) {
      return dir_ * a.time < dir_ * b.time || (a.time == b.time && a.index < b.index);
    });
    bool stop = false;
    double stop_time = t_new;
    for (const auto& ev : pending) {
      if (stop && dir_ * (ev.time - stop_time) > 0.0) break;
      out.events.push_back({ev.index, ev.time, tr.evaluate(ev.time)});
      if (events_[ev.index].terminal && !stop) {
        stop = true;
        stop_time = ev.time;
      }
    }
    if (stop) {
      // Truncate the final node to the terminal event; the step keeps its
      // original interpolant.
      const State ys = tr.evaluate(stop_time);
      tr.times_.back() = stop_time;
      std::copy(ys.begin(), ys.end(), tr.states_.end() - static_cast<std::ptrdiff_t>(n_));
      if (stop_time == t) {
        // Event exactly at the previous node: drop the degenerate step.
        tr.times_.pop_back();
        tr.states_.resize(tr.states_.size() - n_);
        tr.coeffs_.resize(base);
        tr.step_start_.pop_back();
        tr.step_length_.pop_back();
      }
      out.stopped_by_event = true;
      return out;
    }
    g_prev = std::move(g_new);

    facold = std::max(en, 1e-4);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;
    if (last_rejected) hnew = std::min(hnew, h);
    last_rejected = false;

    t = t_new;
    y = ynew;
    k1 = k7;  // FSAL
    h = hnew;
  }

  if (require_terminal) {
    throw Error(ErrorKind::HorizonReached,
                "horizon " + std::to_string(p_.horizon) + " reached without a terminal event");
  }
  return out;
}

IntegrationResult integrate(const IvpProblem& problem, std::span<const EventSpec> events,
                            bool require_terminal) {
  Stepper stepper(problem, events);
  return stepper.run(require_terminal);
}

double refine_root(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "root tolerance must be positive");
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!std::isfinite(fa) || !std::isfinite(fb) || (fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::NoSignChange,
                "f(a)=" + std::to_string(fa) + ", f(b)=" + std::to_string(fb));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = b, fc = fb, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

}  // namespace fbms::ode
