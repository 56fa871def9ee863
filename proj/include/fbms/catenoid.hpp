#pragma once

/// O(n)-invariant minimal hypersurfaces of R^{n+1} with profile (z, r(z)),
/// normalised by r(0) = 1, r'(0) = 0. The profile solves
/// r'' = (n-1) r^{2n-3}, with first integral 1 + r'^2 = r^{2n-2}; for n > 2 it
/// exists only on |z| < T(n).

#include <cstddef>
#include <optional>
#include <vector>

#include "fbms/ode.hpp"

namespace fbms::catenoid {

struct ProfileSample {
  double z = 0.0;
  double r = 1.0;
  double rdot = 0.0;
};

class CatenoidProfile {
 public:
  CatenoidProfile(int n, double z_max, ode::DenseTrajectory positive,
                  ode::DenseTrajectory negative, std::size_t grid_nodes);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double z_max() const noexcept { return z_max_; }
  [[nodiscard]] bool normalized() const noexcept { return true; }
  /// Symmetric grid on [-z_max, z_max] including z = 0.
  [[nodiscard]] const std::vector<ProfileSample>& samples() const noexcept { return samples_; }

  /// Continuous profile at z; throws DomainExceeded for |z| > z_max.
  [[nodiscard]] ProfileSample at(double z) const;

  /// max |1 + r'^2 - r^{2n-2}| over the samples.
  [[nodiscard]] double first_integral_error() const;
  /// Same, divided by max(1, r^{2n-2}) at each sample.
  [[nodiscard]] double scaled_first_integral_error() const;
  /// max |r(z) - r(-z)| over the samples; the two halves are integrated separately.
  [[nodiscard]] double asymmetry() const;

 private:
  int n_;
  double z_max_;
  ode::DenseTrajectory pos_;  // (r, r') on [0, z_max]
  ode::DenseTrajectory neg_;  // (r, r') on [-z_max, 0]
  std::vector<ProfileSample> samples_;
};

inline constexpr std::size_t kProfileGridNodes = 2049;
/// Fraction of T(n) a profile request may reach for n > 2.
inline constexpr double kDomainBudget = 0.999;

/// Throws DomainExceeded if n > 2 and z_max > kDomainBudget * T(n).
[[nodiscard]] CatenoidProfile solve_profile(int n, double z_max, double tol = 1e-13,
                                            std::size_t grid_nodes = kProfileGridNodes);

/// T(n) = int_1^inf dz / sqrt(z^{2n-2} - 1) via z = 1/t followed by t = 1 - u^2.
/// Throws Unbounded for n = 2.
[[nodiscard]] double half_width(int n);
/// Same integral on the original variable: adaptive quadrature on [1 + d, Z]
/// plus series for the endpoint singularity and the tail.
[[nodiscard]] double half_width_raw(int n);

struct CritCatParams {
  double sigma = 0.0;  // positive root of coth x = x
  double tau = 0.0;    // sigma cosh sigma

  /// Profile height cosh(tau z) / tau.
  [[nodiscard]] double radius(double z) const;
  [[nodiscard]] double slope(double z) const;
  /// Boundary height sigma / tau.
  [[nodiscard]] double boundary_height() const { return sigma / tau; }
};

[[nodiscard]] CritCatParams critical_catenoid();

struct ReparamProfile {
  int n = 3;
  std::vector<double> t;
  std::vector<double> phi;  // cosh((n-1) t)^{1/(n-1)}
  std::vector<double> psi;  // int_0^t phi^{2-n}
  double t0 = 0.0;          // positive root of sinh((n-1) t) psi(t) = phi(t)
  double v = 0.0;           // cosh((n-1) v) = sqrt(n)
  double claim_lhs = 0.0;   // sinh((n-1) v) psi(v)
  double claim_bound = 0.0; // n^{1/(2n-2)}
};

[[nodiscard]] double reparam_phi(int n, double t);
[[nodiscard]] double reparam_psi(int n, double t);

/// Tabulates (psi, phi) on a uniform grid of [0, t_max]. Throws
/// RootNotBracketed if t0 > t_max.
[[nodiscard]] ReparamProfile reparam_profile(int n, double t_max,
                                             std::size_t grid_nodes = kProfileGridNodes);

/// Catenoid profile on a domain large enough for the shift computations:
/// kDomainBudget * T(n) for n > 2, a fixed 12 for n = 2.
[[nodiscard]] const CatenoidProfile& shift_profile(int n);

struct TangencyRoots {
  double z1 = 0.0;  // < 0
  double z2 = 0.0;  // > 0
  double residual1 = 0.0;  // |z r'(z - c) - r(z - c)|
  double residual2 = 0.0;
};

/// Roots of z r'(z - c) = r(z - c) on either side of c. Throws
/// DomainExceeded when a root would lie outside the profile domain.
[[nodiscard]] TangencyRoots tangency_roots(int n, double c);

struct ShiftCertificate {
  int n = 2;
  double c = 0.0;
  TangencyRoots roots;
  double dz1 = 0.0, dz2 = 0.0;          // dz_i / dc
  double ds1 = 0.0, ds2 = 0.0;          // d(z_i - c) / dc
  double f1 = 0.0, f2 = 0.0;            // z_i^2 + r(z_i - c)^2
  double df1 = 0.0, df2 = 0.0;          // f_i'
  double d2f1 = 0.0, d2f2 = 0.0;        // f_i''
  double reciprocal_term = 0.0;         // n/(n-1) (1/R(z2-c) - 1/R(z1-c))'
};

[[nodiscard]] ShiftCertificate shift_certificate(int n, double c);

struct SweepPoint {
  double c = 0.0;
  bool in_domain = true;
  double gap = 0.0;                    // f1 - f2
  std::optional<double> third_gap;     // finite-difference f1''' - f2'''
  double reciprocal_term = 0.0;
};

struct UniquenessReport {
  int n = 2;
  std::vector<SweepPoint> points;
  double second_derivative_gap_at_0 = 0.0;  // |f1''(0) - f2''(0)|
  double first_derivative_1_at_0 = 0.0;     // f1'(0), expected > 0
  double first_derivative_2_at_0 = 0.0;     // f2'(0), expected < 0
  double r_z0 = 0.0;
  double r_bound = 0.0;  // n^{1/(2n-2)}
  bool gap_positive = true;        // over in-domain points with c > 0
  std::optional<double> min_third_gap;
  double max_reciprocal_term = 0.0;
  bool reciprocal_exceeds_3 = false;
  std::size_t skipped = 0;  // grid points outside the profile domain
};

/// Finite-difference step for third derivatives of f_i.
inline constexpr double kThirdDerivativeStep = 0.01;

[[nodiscard]] UniquenessReport uniqueness_sweep(int n, const std::vector<double>& c_grid);

struct FreeBoundaryCatenoid {
  int n = 2;
  double scale = 1.0;            // 1 / |gamma(z2(0))|
  double boundary_height = 0.0;  // scaled z2
  double boundary_radius = 0.0;  // scaled r(z2)
  double radius_error = 0.0;     // | |gamma(z2)| - 1 | after scaling
  double tangency_residual = 0.0;  // max over both boundary heights of |z r' - r|
  double waist = 0.0;            // scaled r(0)
  std::vector<ProfileSample> nodes;  // scaled, on [-h, h]
};

[[nodiscard]] FreeBoundaryCatenoid free_boundary_catenoid(
    int n, std::size_t grid_nodes = kProfileGridNodes);

}  // namespace fbms::catenoid
