#include "fbms/equivariant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fbms/error.hpp"

namespace fbms::equivariant {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Distance to the edges of Q at which an annulus shot is declared to have left it.
constexpr double kEdgeMargin = 1e-7;

double second_component(const OrbitParams& p, double phi, double theta) {
  return 2.0 * ((p.n - 1) * std::cos(theta) * std::cos(phi) -
                (p.m - 1) * std::sin(theta) * std::sin(phi));
}

void angular_rhs(const OrbitParams& p, std::span<const double> y, std::span<double> dy) {
  const double r = y[0], phi = y[1], theta = y[2];
  if (!(r > 0.0) || !(phi > 0.0) || !(phi < kPi / 2)) {
    dy[0] = dy[1] = dy[2] = kNaN;
    return;
  }
  const double delta = theta - phi;
  dy[0] = std::cos(delta);
  dy[1] = std::sin(delta) / r;
  dy[2] = second_component(p, phi, theta) / (r * std::sin(2.0 * phi));
}

// V^2 written as a sum of products that vanish at p1, so that it keeps full
// relative accuracy for arbitrarily small offsets u = phi - alpha, d = theta - phi.
double second_component_offset(const OrbitParams& p, double alpha, double u, double d) {
  const double w = 2.0 * u + d;
  const double sd = std::sin(0.5 * d);
  return -2.0 * (p.n - p.m) * sd * sd -
         2.0 * (p.m + p.n - 2) * std::sin(2.0 * alpha + 0.5 * w) * std::sin(0.5 * w);
}

// State (r, log rho, omega) with (u, d) = rho (cos omega, sin omega).
void focal_rhs(const OrbitParams& p, double alpha, std::span<const double> y,
               std::span<double> dy) {
  const double r = y[0];
  const double rho = std::exp(y[1]);
  const double c = std::cos(y[2]), s = std::sin(y[2]);
  const double u = rho * c, d = rho * s;
  const double phi = alpha + u;
  if (!(r > 0.0) || !(phi > 0.0) || !(phi < kPi / 2) || !(rho > 0.0)) {
    dy[0] = dy[1] = dy[2] = kNaN;
    return;
  }
  const double s2 = std::sin(2.0 * phi);
  const double u_dot = std::sin(d) / rho / r;  // phi' / rho
  const double theta_dot = second_component_offset(p, alpha, u, d) / rho / (r * s2);
  const double d_dot = theta_dot - u_dot;  // (theta - phi)' / rho
  dy[0] = std::cos(d);
  dy[1] = c * u_dot + s * d_dot;
  dy[2] = c * d_dot - s * u_dot;
}

AngularState series_start(const OrbitParams& p, double x0, double t) {
  const double slope = static_cast<double>(p.m - 1) / (p.n * x0);
  return AngularState::from(std::hypot(x0, t), t / x0, kPi / 2 - slope * t);
}

ode::State to_focal(const OrbitParams& p, const AngularState& s) {
  const double u = s.phi - p.alpha();
  return {s.r, std::log(std::hypot(u, s.delta)), std::atan2(s.delta, u)};
}

double dist(std::array<double, 2> a, std::array<double, 2> b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

CurveNode rescaled(CurveNode c, double scale) {
  c.t /= scale;
  c.x /= scale;
  c.y /= scale;
  c.r /= scale;
  return c;
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive and finite");
  }
}

}  // namespace

OrbitParams OrbitParams::make(int m, int n) {
  if (m < 2 || n < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "m and n must both be at least 2 (got " + std::to_string(m) + ", " +
                    std::to_string(n) + ")");
  }
  return {m, n};
}

double OrbitParams::cone_slope() const {
  return std::sqrt(static_cast<double>(n - 1) / static_cast<double>(m - 1));
}

double OrbitParams::alpha() const { return std::atan(cone_slope()); }

double AngularState::x() const { return r * std::cos(phi); }
double AngularState::y() const { return r * std::sin(phi); }

std::array<double, 2> v_field(const OrbitParams& params, double phi, double theta) {
  return {std::sin(2.0 * phi) * std::sin(theta - phi), second_component(params, phi, theta)};
}

Nullclines nullclines(const OrbitParams& params, double phi) {
  if (!(phi > 0.0) || !(phi < kPi / 2)) {
    throw Error(ErrorKind::DomainError, "phi must lie in (0, pi/2)");
  }
  const double ratio = static_cast<double>(params.n - 1) / static_cast<double>(params.m - 1);
  const double t21 = std::atan(ratio / std::tan(phi));
  return {phi, phi - kPi, t21, t21 - kPi};
}

const char* to_string(SingularityType type) noexcept {
  return type == SingularityType::Focal ? "focal" : "nodal";
}

std::array<std::array<double, 2>, 2> v_jacobian(const OrbitParams& p, double phi,
                                                double theta) {
  const double d = theta - phi;
  const double a = p.n - 1, b = p.m - 1;
  const double v1_phi = 2.0 * std::cos(2.0 * phi) * std::sin(d) - std::sin(2.0 * phi) * std::cos(d);
  const double v1_theta = std::sin(2.0 * phi) * std::cos(d);
  const double v2_phi =
      -2.0 * (a * std::cos(theta) * std::sin(phi) + b * std::sin(theta) * std::cos(phi));
  const double v2_theta =
      -2.0 * (a * std::sin(theta) * std::cos(phi) + b * std::cos(theta) * std::sin(phi));
  return {{{v1_phi, v1_theta}, {v2_phi, v2_theta}}};
}

SingularityReport singular_points(const OrbitParams& params) {
  SingularityReport rep;
  const double a = params.alpha();
  rep.p1 = {a, a};
  rep.p2 = {a, a - kPi};
  rep.jacobian_p1 = v_jacobian(params, a, a);
  const auto& J = rep.jacobian_p1;
  const double tr = J[0][0] + J[1][1];
  const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  rep.discriminant = tr * tr - 4.0 * det;
  const std::complex<double> root = std::sqrt(std::complex<double>(rep.discriminant, 0.0));
  rep.eigenvalues = {0.5 * (tr + root), 0.5 * (tr - root)};
  rep.classification = rep.discriminant < 0.0 ? SingularityType::Focal : SingularityType::Nodal;
  for (const auto& p : {rep.p1, rep.p2}) {
    const auto v = v_field(params, p[0], p[1]);
    rep.max_field_residual = std::max({rep.max_field_residual, std::abs(v[0]), std::abs(v[1])});
  }
  return rep;
}

std::array<double, 3> reduced_rhs(const OrbitParams& params, const AngularState& s) {
  if (!(s.r > 0.0) || !(s.phi > 0.0) || !(s.phi < kPi / 2)) {
    throw Error(ErrorKind::SingularConfiguration,
                "reduced system requires r > 0 and 0 < phi < pi/2");
  }
  return {std::cos(s.delta), std::sin(s.delta) / s.r,
          second_component(params, s.phi, s.theta) / (s.r * std::sin(2.0 * s.phi))};
}

// ---------------------------------------------------------------------------
// ProfileTrajectory

ProfileTrajectory::ProfileTrajectory(OrbitParams params, Chart chart,
                                     ode::DenseTrajectory trajectory,
                                     std::vector<CrossingEvent> crossings)
    : params_(params), chart_(chart), traj_(std::move(trajectory)),
      crossings_(std::move(crossings)) {}

CurveNode ProfileTrajectory::convert(double t, std::span<const double> y) const {
  CurveNode c;
  c.t = t;
  c.r = y[0];
  const double alpha = params_.alpha();
  if (chart_ == Chart::Angular) {
    c.phi = y[1];
    c.theta = y[2];
    c.delta = y[2] - y[1];
    c.phi_offset = y[1] - alpha;
  } else {
    const double rho = std::exp(y[1]);
    c.phi_offset = rho * std::cos(y[2]);
    c.delta = rho * std::sin(y[2]);
    c.phi = alpha + c.phi_offset;
    c.theta = c.phi + c.delta;
  }
  c.x = c.r * std::cos(c.phi);
  c.y = c.r * std::sin(c.phi);
  return c;
}

CurveNode ProfileTrajectory::curve_node(std::size_t i) const {
  return convert(traj_.times()[i], traj_.state(i));
}

CurveNode ProfileTrajectory::curve_at(double t) const { return convert(t, traj_.evaluate(t)); }

AngularState ProfileTrajectory::node(std::size_t i) const {
  const auto c = curve_node(i);
  return {c.r, c.phi, c.theta, c.delta};
}

AngularState ProfileTrajectory::at(double t) const {
  const auto c = curve_at(t);
  return {c.r, c.phi, c.theta, c.delta};
}

std::array<double, 2> ProfileTrajectory::velocity(double t) const {
  const auto y = traj_.evaluate(t);
  const auto dy = traj_.derivative(t);
  const auto c = convert(t, y);
  double phi_dot = 0.0;
  if (chart_ == Chart::Angular) {
    phi_dot = dy[1];
  } else {
    const double rho = std::exp(y[1]);
    phi_dot = rho * (dy[1] * std::cos(y[2]) - dy[2] * std::sin(y[2]));
  }
  const double r_dot = dy[0];
  return {r_dot * std::cos(c.phi) - c.r * std::sin(c.phi) * phi_dot,
          r_dot * std::sin(c.phi) + c.r * std::cos(c.phi) * phi_dot};
}

// ---------------------------------------------------------------------------
// Integration from the axis

namespace {

struct FocalRun {
  ode::IntegrationResult result;
  std::vector<double> crossing_times;
};

FocalRun run_focal(const OrbitParams& p, double x0, double t_start, double t_end,
                   double radius_cap, const IntegrationSettings& settings) {
  const double alpha = p.alpha();
  ode::IvpProblem prob;
  prob.dimension = 3;
  prob.rhs = [p, alpha](double, std::span<const double> y, std::span<double> dy) {
    focal_rhs(p, alpha, y, dy);
  };
  prob.initial_time = t_start;
  prob.initial_state = to_focal(p, series_start(p, x0, t_start));
  prob.horizon = t_end;
  prob.abs_tol = settings.abs_tol;
  prob.rel_tol = settings.rel_tol;
  prob.underflow_scale = x0;

  std::vector<ode::EventSpec> events(2);
  events[0].function = [](double, std::span<const double> y) { return std::sin(y[2]); };
  events[1].function = [radius_cap](double, std::span<const double> y) {
    return y[0] - radius_cap;
  };
  events[1].direction = ode::Crossing::Rising;
  events[1].terminal = true;

  FocalRun run;
  run.result = ode::integrate(prob, events);
  for (const auto& ev : run.result.events) {
    if (ev.index == 0) run.crossing_times.push_back(ev.time);
  }
  return run;
}

}  // namespace

ProfileTrajectory integrate_from_axis(const OrbitParams& params, double x0, double t_eps,
                                      double radius_cap, const IntegrationSettings& settings) {
  check_positive(x0, "x0");
  check_positive(t_eps, "t_eps");
  if (!(radius_cap > x0)) throw Error(ErrorKind::InvalidArgument, "radius cap must exceed x0");
  if (t_eps > 1e-2 * x0) {
    throw Error(ErrorKind::InvalidArgument, "t_eps must be small relative to x0");
  }

  // The series start is only first-order accurate; confirm that moving it
  // closer to the axis leaves a checkpoint state essentially unchanged.
  const double checkpoint = 0.25 * x0;
  std::array<CurveNode, 3> probe{};
  for (int j = 0; j < 3; ++j) {
    const double start = t_eps / static_cast<double>(1 << j);
    auto run = run_focal(params, x0, start, checkpoint, 1e300, settings);
    ProfileTrajectory tr(params, Chart::Focal, std::move(run.result.trajectory), {});
    probe[static_cast<std::size_t>(j)] = tr.curve_at(checkpoint);
  }
  for (std::size_t j = 1; j < 3; ++j) {
    const double change = std::max({std::abs(probe[j].r - probe[j - 1].r),
                                    std::abs(probe[j].phi - probe[j - 1].phi),
                                    std::abs(probe[j].theta - probe[j - 1].theta)});
    if (!(change < settings.regularization_tol)) {
      throw Error(ErrorKind::RegularizationDiverged,
                  "checkpoint moved by " + std::to_string(change) + " when t_eps was halved");
    }
  }

  // r' <= 1, so the cap is reached before t = radius_cap + x0 unless the curve
  // turns back; the extra factor leaves room for that.
  auto run = run_focal(params, x0, t_eps, 4.0 * radius_cap + 10.0 * x0, radius_cap, settings);
  auto& times = run.crossing_times;
  if (settings.max_crossings > 0 && times.size() > settings.max_crossings) {
    run.result.trajectory.truncate(times[settings.max_crossings - 1]);
    times.resize(settings.max_crossings);
  }
  ProfileTrajectory tmp(params, Chart::Focal, std::move(run.result.trajectory), {});
  std::vector<CrossingEvent> crossings;
  crossings.reserve(times.size());
  for (double t : times) crossings.push_back({t, CrossingLabel::Aligned, tmp.at(t)});
  return ProfileTrajectory(params, Chart::Focal, tmp.trajectory(), std::move(crossings));
}

ProfileTrajectory integrate_angular(const OrbitParams& params, const AngularState& start,
                                    double duration, const IntegrationSettings& settings) {
  (void)reduced_rhs(params, start);  // validates the start state
  if (duration == 0.0 || !std::isfinite(duration)) {
    throw Error(ErrorKind::InvalidArgument, "duration must be nonzero and finite");
  }
  ode::IvpProblem prob;
  prob.dimension = 3;
  prob.rhs = [params](double, std::span<const double> y, std::span<double> dy) {
    angular_rhs(params, y, dy);
  };
  prob.initial_state = {start.r, start.phi, start.theta};
  prob.horizon = duration;
  prob.direction = duration > 0.0 ? ode::Direction::Forward : ode::Direction::Backward;
  prob.abs_tol = settings.abs_tol;
  prob.rel_tol = settings.rel_tol;
  auto res = ode::integrate(prob);
  return ProfileTrajectory(params, Chart::Angular, std::move(res.trajectory), {});
}

// ---------------------------------------------------------------------------
// Family members

FamilyMember construct_family_member(const OrbitParams& params, int k,
                                     const IntegrationSettings& settings) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be a positive integer");
  if (!params.focal_regime()) {
    throw Error(ErrorKind::WrongRegime,
                "m + n >= 8: the axis curve never meets theta = phi, no family exists");
  }
  IntegrationSettings s = settings;
  s.max_crossings = static_cast<std::size_t>(k) + 2;
  const double x0 = 1.0;
  const auto tr = integrate_from_axis(params, x0, 1e-6 * x0, s.radius_cap, s);
  const auto& cr = tr.crossings();
  if (cr.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::CrossingNotFound,
                "only " + std::to_string(cr.size()) + " crossings before |gamma| = " +
                    std::to_string(s.radius_cap));
  }
  const double tk = cr[static_cast<std::size_t>(k) - 1].time;
  const CurveNode end = tr.curve_at(tk);

  FamilyMember mem;
  mem.params = params;
  mem.k = k;
  mem.scale = end.r;
  mem.crossing_time = tk / mem.scale;
  for (std::size_t i = 0; i < tr.size() && tr.time(i) < tk; ++i) {
    mem.nodes.push_back(rescaled(tr.curve_node(i), mem.scale));
  }
  mem.nodes.push_back(rescaled(end, mem.scale));
  const CurveNode& b = mem.nodes.back();
  mem.boundary_point = {b.x, b.y};
  mem.boundary_tangent = {std::cos(b.theta), std::sin(b.theta)};
  mem.residual = dist(mem.boundary_point, mem.boundary_tangent);
  mem.crossings_before = static_cast<std::size_t>(
      std::count_if(cr.begin(), cr.end(), [tk](const CrossingEvent& e) { return e.time <= tk; }));
  return mem;
}

double cone_distance(const OrbitParams& params, std::span<const CurveNode> nodes, double r_min,
                     double r_max) {
  (void)params;
  if (!(r_min > 0.0) || !(r_min < r_max)) {
    throw Error(ErrorKind::InvalidArgument, "cone window requires 0 < r_min < r_max");
  }
  bool any = false;
  double worst = 0.0;
  for (const auto& c : nodes) {
    if (c.r < r_min || c.r > r_max) continue;
    any = true;
    worst = std::max(worst, c.r * std::abs(std::sin(c.phi_offset)));
  }
  if (!any) throw Error(ErrorKind::EmptyWindow, "no nodes with r in the requested window");
  return worst;
}

double cone_distance(const FamilyMember& member, double r_min, double r_max) {
  if (!(r_max <= 1.0)) throw Error(ErrorKind::InvalidArgument, "r_max must not exceed 1");
  return cone_distance(member.params, member.nodes, r_min, r_max);
}

// ---------------------------------------------------------------------------
// Annulus

namespace {

struct ShotLeg {
  ProfileTrajectory trajectory;
  double event_time;
};

ShotLeg shoot_leg(const OrbitParams& p, const AngularState& start, bool forward, double span,
                  const IntegrationSettings& settings) {
  ode::IvpProblem prob;
  prob.dimension = 3;
  prob.rhs = [p](double, std::span<const double> y, std::span<double> dy) {
    angular_rhs(p, y, dy);
  };
  prob.initial_state = {start.r, start.phi, start.theta};
  prob.direction = forward ? ode::Direction::Forward : ode::Direction::Backward;
  prob.horizon = forward ? span : -span;
  prob.abs_tol = settings.abs_tol;
  prob.rel_tol = settings.rel_tol;

  std::vector<ode::EventSpec> events(3);
  const double target = forward ? 0.0 : -kPi;
  events[0].function = [target](double, std::span<const double> y) {
    return (y[2] - y[1]) - target;
  };
  events[0].terminal = true;
  events[1].function = [](double, std::span<const double> y) { return y[1] - kEdgeMargin; };
  events[1].direction = ode::Crossing::Falling;
  events[1].terminal = true;
  events[2].function = [](double, std::span<const double> y) {
    return y[1] - (kPi / 2 - kEdgeMargin);
  };
  events[2].direction = ode::Crossing::Rising;
  events[2].terminal = true;

  const char* leg = forward ? "forward" : "backward";
  ode::IntegrationResult res;
  try {
    res = ode::integrate(prob, events);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::StepSizeUnderflow || e.kind() == ErrorKind::MaxStepsExceeded) {
      throw Error(ErrorKind::EventNotFound, std::string(leg) + " leg failed: " + e.what());
    }
    throw;
  }
  if (!res.stopped_by_event) {
    throw Error(ErrorKind::EventNotFound, std::string(leg) + " leg reached the time horizon");
  }
  const auto& last = res.events.back();
  if (last.index != 0) {
    throw Error(ErrorKind::EventNotFound,
                std::string(leg) + " leg left the quadrant through phi = " +
                    (last.index == 1 ? "0" : "pi/2"));
  }
  const double te = last.time;
  return {ProfileTrajectory(p, Chart::Angular, std::move(res.trajectory), {}), te};
}

struct FullShot {
  AnnulusShot shot;
  ProfileTrajectory backward;
  ProfileTrajectory forward;
};

FullShot shoot_full(const OrbitParams& p, double R, double eps,
                    const IntegrationSettings& settings) {
  check_positive(R, "R");
  if (!(eps > 0.0) || !(eps < kPi)) {
    throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, pi)");
  }
  const double alpha = p.alpha();
  const AngularState start = AngularState::from(R, alpha, alpha - eps);
  const double span = 1e4 * R;
  auto fwd = shoot_leg(p, start, true, span, settings);
  auto bwd = shoot_leg(p, start, false, span, settings);

  AnnulusShot s;
  s.eps = eps;
  s.t_plus = fwd.event_time;
  s.t_minus = bwd.event_time;
  s.state_plus = fwd.trajectory.at(s.t_plus);
  s.state_minus = bwd.trajectory.at(s.t_minus);
  s.r_plus = s.state_plus.r;
  s.r_minus = s.state_minus.r;
  const double scale = s.r_minus;
  // Outward conormal is gamma' at the forward end and -gamma' at the backward end.
  s.residual_plus = dist({s.state_plus.x() / scale, s.state_plus.y() / scale},
                         {std::cos(s.state_plus.theta), std::sin(s.state_plus.theta)});
  s.residual_minus = dist({s.state_minus.x() / scale, s.state_minus.y() / scale},
                          {-std::cos(s.state_minus.theta), -std::sin(s.state_minus.theta)});

  // Nodes in increasing time: backward leg reversed, then the forward leg.
  std::vector<AngularState> ordered;
  for (std::size_t i = bwd.trajectory.size(); i-- > 0;) ordered.push_back(bwd.trajectory.node(i));
  for (std::size_t i = 1; i < fwd.trajectory.size(); ++i) ordered.push_back(fwd.trajectory.node(i));
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (!(ordered[i].theta > ordered[i - 1].theta)) s.theta_increasing = false;
    if (!(ordered[i].phi < ordered[i - 1].phi)) s.phi_decreasing = false;
  }
  return {s, std::move(bwd.trajectory), std::move(fwd.trajectory)};
}

}  // namespace

AnnulusShot shoot_annulus(const OrbitParams& params, double R, double eps,
                          const IntegrationSettings& settings) {
  return shoot_full(params, R, eps, settings).shot;
}

AnnulusSolution solve_annulus(const OrbitParams& params, double R,
                              const AnnulusSettings& settings) {
  if (params.focal_regime()) {
    throw Error(ErrorKind::WrongRegime,
                "m + n < 8: oscillating trajectories defeat the continuity argument");
  }
  check_positive(R, "R");
  if (settings.scan_samples < 2 || !(settings.scan_lo > 0.0) ||
      !(settings.scan_hi < kPi) || !(settings.scan_lo < settings.scan_hi)) {
    throw Error(ErrorKind::InvalidArgument, "invalid eps scan settings");
  }
  auto gap = [&](double eps) {
    const auto s = shoot_annulus(params, R, eps, settings.integration);
    return s.r_minus - s.r_plus;
  };

  AnnulusSolution sol;
  sol.params = params;
  sol.R = R;
  const std::size_t N = settings.scan_samples;
  const double step = (settings.scan_hi - settings.scan_lo) / static_cast<double>(N - 1);
  std::optional<std::size_t> bracket;
  for (std::size_t j = 0; j < N; ++j) {
    const double eps = settings.scan_lo + step * static_cast<double>(j);
    double g = std::numeric_limits<double>::quiet_NaN();
    try {
      g = gap(eps);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EventNotFound) throw;
    }
    sol.scan.push_back({eps, g});
    if (!bracket && j > 0) {
      const double g0 = sol.scan[j - 1][1];
      if (std::isfinite(g0) && std::isfinite(g) && ((g0 > 0.0) != (g > 0.0) || g == 0.0)) {
        bracket = j - 1;
      }
    }
  }
  if (!bracket) {
    throw Error(ErrorKind::BracketNotFound, "r_minus - r_plus has no sign change on the scan");
  }
  const double lo = sol.scan[*bracket][0], hi = sol.scan[*bracket + 1][0];
  sol.eps_bar = ode::refine_root(gap, lo, hi, settings.root_tol);

  auto full = shoot_full(params, R, sol.eps_bar, settings.integration);
  const auto& s = full.shot;
  sol.gap = s.r_minus - s.r_plus;
  sol.t_minus = s.t_minus;
  sol.t_plus = s.t_plus;
  sol.scale = s.r_minus;
  sol.residual_minus = s.residual_minus;
  sol.residual_plus = s.residual_plus;
  for (std::size_t i = full.backward.size(); i-- > 0;) {
    sol.nodes.push_back(rescaled(full.backward.curve_node(i), sol.scale));
  }
  for (std::size_t i = 1; i < full.forward.size(); ++i) {
    sol.nodes.push_back(rescaled(full.forward.curve_node(i), sol.scale));
  }
  for (const auto& c : sol.nodes) sol.max_radius = std::max(sol.max_radius, c.r);
  sol.t_minus /= sol.scale;
  sol.t_plus /= sol.scale;
  return sol;
}

}  // namespace fbms::equivariant
