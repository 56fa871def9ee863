#pragma once

/// O(m) x O(n)-invariant minimal hypersurfaces reduced to curves in the
/// quadrant Q = {x >= 0, y >= 0}. A profile curve parametrised by arclength
/// is described by its radius r = |gamma|, the polar angle phi of gamma and the
/// angle theta of gamma'. The angular pair (phi, theta) follows the planar
/// field V; its singular point p1 = (alpha, alpha) is the cone line
/// y = tan(alpha) x.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "fbms/ode.hpp"

namespace fbms::equivariant {

struct OrbitParams {
  int m = 2;
  int n = 2;

  /// Validated constructor; both dimensions must be at least 2.
  [[nodiscard]] static OrbitParams make(int m, int n);

  /// arctan sqrt((n-1)/(m-1)), the polar angle of the cone line.
  [[nodiscard]] double alpha() const;
  /// Slope sqrt((n-1)/(m-1)) of the cone line.
  [[nodiscard]] double cone_slope() const;
  /// Ambient dimension m + n below 8: the singular points are spiral foci.
  [[nodiscard]] bool focal_regime() const { return m + n < 8; }
};

struct AngularState {
  double r = 1.0;
  double phi = 0.0;
  double theta = 0.0;
  double delta = 0.0;  // theta - phi, carried separately so it keeps full precision near 0

  [[nodiscard]] static AngularState from(double r, double phi, double theta) {
    return {r, phi, theta, theta - phi};
  }
  [[nodiscard]] double x() const;
  [[nodiscard]] double y() const;
};

[[nodiscard]] std::array<double, 2> v_field(const OrbitParams& params, double phi, double theta);

struct Nullclines {
  double theta11;  // V^1 = 0: theta = phi
  double theta12;  // V^1 = 0: theta = phi - pi
  double theta21;  // V^2 = 0: arctan((n-1)/(m-1) cot phi)
  double theta22;  // V^2 = 0: theta21 - pi
};

/// Throws DomainError unless 0 < phi < pi/2.
[[nodiscard]] Nullclines nullclines(const OrbitParams& params, double phi);

enum class SingularityType { Focal, Nodal };

[[nodiscard]] const char* to_string(SingularityType type) noexcept;

struct SingularityReport {
  std::array<double, 2> p1{};  // (phi, theta)
  std::array<double, 2> p2{};
  std::array<std::array<double, 2>, 2> jacobian_p1{};
  std::array<std::complex<double>, 2> eigenvalues{};
  double discriminant = 0.0;  // trace^2 - 4 det of the Jacobian
  SingularityType classification = SingularityType::Focal;
  double max_field_residual = 0.0;  // max |V| over p1 and p2
};

[[nodiscard]] SingularityReport singular_points(const OrbitParams& params);

/// Analytic Jacobian of V at (phi, theta).
[[nodiscard]] std::array<std::array<double, 2>, 2> v_jacobian(const OrbitParams& params,
                                                              double phi, double theta);

/// d/dt of (r, phi, theta) along a unit-speed profile curve. Throws
/// SingularConfiguration on the boundary of Q or at r <= 0.
[[nodiscard]] std::array<double, 3> reduced_rhs(const OrbitParams& params,
                                                const AngularState& state);

enum class CrossingLabel {
  Aligned,      // theta - phi = 0: gamma' points away from the origin
  AntiAligned,  // theta - phi = -pi: gamma' points toward the origin
};

struct CrossingEvent {
  double time = 0.0;
  CrossingLabel label = CrossingLabel::Aligned;
  AngularState state;
};

/// One node of a profile curve, optionally rescaled.
struct CurveNode {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  double delta = 0.0;       // theta - phi
  double phi_offset = 0.0;  // phi - alpha
};

/// State coordinates used for a trajectory. `Angular` integrates (r, phi,
/// theta) directly. `Focal` integrates (r, log rho, omega) where
/// (phi - alpha, theta - phi) = rho (cos omega, sin omega); this resolves the
/// spiral around p1 far below the resolution of phi itself.
enum class Chart { Angular, Focal };

class ProfileTrajectory {
 public:
  ProfileTrajectory(OrbitParams params, Chart chart, ode::DenseTrajectory trajectory,
                    std::vector<CrossingEvent> crossings);

  [[nodiscard]] const OrbitParams& params() const noexcept { return params_; }
  [[nodiscard]] Chart chart() const noexcept { return chart_; }
  [[nodiscard]] const ode::DenseTrajectory& trajectory() const noexcept { return traj_; }
  [[nodiscard]] const std::vector<CrossingEvent>& crossings() const noexcept { return crossings_; }

  [[nodiscard]] std::size_t size() const noexcept { return traj_.size(); }
  [[nodiscard]] double time(std::size_t i) const { return traj_.times()[i]; }
  [[nodiscard]] AngularState node(std::size_t i) const;
  [[nodiscard]] AngularState at(double t) const;
  [[nodiscard]] CurveNode curve_node(std::size_t i) const;
  [[nodiscard]] CurveNode curve_at(double t) const;
  /// Velocity (x', y') from the continuous extension of the integrated state.
  [[nodiscard]] std::array<double, 2> velocity(double t) const;

 private:
  [[nodiscard]] CurveNode convert(double t, std::span<const double> y) const;

  OrbitParams params_;
  Chart chart_;
  ode::DenseTrajectory traj_;
  std::vector<CrossingEvent> crossings_;
};

struct IntegrationSettings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  /// Stop once |gamma| reaches this radius (relative to x0 = 1).
  double radius_cap = 1e15;
  /// Keep only the first `max_crossings` aligned crossings (0 keeps all).
  std::size_t max_crossings = 0;
  /// Allowed change of the checkpoint state when the axis offset is halved.
  double regularization_tol = 1e-6;
};

/// Integrates the profile curve leaving the x-axis orthogonally at (x0, 0),
/// starting from the first-order series at t = t_eps, until |gamma| reaches
/// `radius_cap`. Every theta = phi crossing is recorded.
[[nodiscard]] ProfileTrajectory integrate_from_axis(const OrbitParams& params, double x0,
                                                    double t_eps, double radius_cap,
                                                    const IntegrationSettings& settings = {});

/// Integrates the reduced system in the angular chart from an arbitrary
/// interior state over [0, duration] (duration may be negative).
[[nodiscard]] ProfileTrajectory integrate_angular(const OrbitParams& params,
                                                  const AngularState& start, double duration,
                                                  const IntegrationSettings& settings = {});

struct FamilyMember {
  OrbitParams params;
  int k = 1;
  double crossing_time = 0.0;  // rescaled t_k
  double scale = 1.0;          // |gamma(t_k)| of the unscaled curve started at x0 = 1
  std::array<double, 2> boundary_point{};
  std::array<double, 2> boundary_tangent{};
  double residual = 0.0;  // |gamma_k(t_k) - gamma_k'(t_k)|
  /// Rescaled nodes on [t_eps, t_k]; the last node is the boundary point.
  std::vector<CurveNode> nodes;
  std::size_t crossings_before = 0;  // crossings at times <= t_k
};

/// k-th member of the family for m + n < 8. Throws WrongRegime for
/// m + n >= 8 and CrossingNotFound if the radius cap is hit first.
[[nodiscard]] FamilyMember construct_family_member(const OrbitParams& params, int k,
                                                   const IntegrationSettings& settings = {});

/// Largest distance in Q from the nodes with r in [r_min, r_max] to the cone
/// line. Throws EmptyWindow if no node qualifies.
[[nodiscard]] double cone_distance(const OrbitParams& params, std::span<const CurveNode> nodes,
                                   double r_min, double r_max);
[[nodiscard]] double cone_distance(const FamilyMember& member, double r_min, double r_max);

struct AnnulusShot {
  double eps = 0.0;
  double t_minus = 0.0;
  double t_plus = 0.0;
  double r_minus = 0.0;
  double r_plus = 0.0;
  AngularState state_minus;
  AngularState state_plus;
  /// Free-boundary residuals of gamma / r_minus at the two ends.
  double residual_minus = 0.0;
  double residual_plus = 0.0;
  bool theta_increasing = true;  // at every stored node on [t_minus, t_plus]
  bool phi_decreasing = true;
};

/// Shoots from |gamma(0)| = R, phi(0) = alpha, theta(0) = alpha - eps forward
/// to theta = phi and backward to theta = phi - pi. Throws EventNotFound when
/// the curve leaves 0 < phi < pi/2 first.
[[nodiscard]] AnnulusShot shoot_annulus(const OrbitParams& params, double R, double eps,
                                        const IntegrationSettings& settings = {});

struct AnnulusSettings {
  IntegrationSettings integration{};
  std::size_t scan_samples = 64;
  double scan_lo = 0.01;
  double scan_hi = 3.141592653589793 - 0.01;
  double root_tol = 1e-13;
};

struct AnnulusSolution {
  OrbitParams params;
  double R = 0.5;
  double eps_bar = 0.0;
  double gap = 0.0;  // r_minus - r_plus at eps_bar
  double t_minus = 0.0;
  double t_plus = 0.0;
  double scale = 1.0;  // r_minus
  double residual_minus = 0.0;
  double residual_plus = 0.0;
  double max_radius = 0.0;  // of the rescaled curve
  /// Rescaled nodes on [t_minus, t_plus].
  std::vector<CurveNode> nodes;
  std::vector<std::array<double, 2>> scan;  // (eps, gap) samples
};

/// Throws WrongRegime for m + n < 8 and BracketNotFound if the scan finds no
/// sign change of r_minus - r_plus.
[[nodiscard]] AnnulusSolution solve_annulus(const OrbitParams& params, double R = 0.5,
                                            const AnnulusSettings& settings = {});

}  // namespace fbms::equivariant
