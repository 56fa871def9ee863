#pragma once

/// Flux, torque and Killing-field balancing integrals over the boundary
/// spheres of rotationally symmetric hypersurfaces in R^{n+1}.
///
/// Vectors live in a working 3-space (e1, e2, axis). A boundary "circle" of an
/// n-dimensional surface of revolution is an (n-1)-sphere of radius rho about
/// the axis; its unit conormal is eta = a * axis + b * omega, with omega the
/// unit radial direction. Integrals are evaluated by the periodic trapezoid
/// rule in the angle beta of omega = (cos beta, sin beta, 0); since every
/// integrand here is affine in omega, the mean over the circle equals the mean
/// over the sphere and the integral is rho^{n-1} omega_{n-1} times that mean.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fbms/catenoid.hpp"

namespace fbms::balancing {

using Vec3 = std::array<double, 3>;

[[nodiscard]] Vec3 cross(const Vec3& a, const Vec3& b);
[[nodiscard]] double dot(const Vec3& a, const Vec3& b);

/// Area of the unit k-sphere, 2 pi^{(k+1)/2} / Gamma((k+1)/2).
[[nodiscard]] double sphere_area(int k);

enum class Orientation { Outward, Upward };

[[nodiscard]] const char* to_string(Orientation o) noexcept;

struct BoundaryCircle {
  int n = 2;  // surface dimension; ambient R^{n+1}
  Vec3 center{};
  double radius = 1.0;
  double conormal_axial = 1.0;
  double conormal_radial = 0.0;
  Orientation orientation = Orientation::Upward;

  /// Validates n >= 2, radius > 0 and a unit conormal generator (to 1e-12).
  [[nodiscard]] static BoundaryCircle make(int n, Vec3 center, double radius, double axial,
                                           double radial, Orientation orientation);
  [[nodiscard]] double height() const { return center[2]; }
};

struct KillingFieldSpec {
  enum class Kind { Translation, Rotation };
  Kind kind = Kind::Translation;
  Vec3 v{0.0, 0.0, 1.0};
  Vec3 base{};  // W for rotations

  [[nodiscard]] static KillingFieldSpec translation(const Vec3& v);
  /// K(X) = v x (X - W); throws InvalidArgument for v = 0.
  [[nodiscard]] static KillingFieldSpec rotation(const Vec3& v, const Vec3& W = {});
  [[nodiscard]] Vec3 at(const Vec3& X) const;
};

/// Selects the 3-subspace spanned by two lateral coordinates and the axis; the
/// boundary sphere is then replaced by its great circle in that subspace.
struct Subspace3 {
  int first = 0;   // lateral coordinate indices in 0..n-1
  int second = 1;
};

inline constexpr std::size_t kDefaultQuadNodes = 256;

/// Flux of eta. Lateral components are exact zeros.
[[nodiscard]] Vec3 flux(const BoundaryCircle& circle, std::size_t quad_nodes = kDefaultQuadNodes);

/// Integral of X x eta. Needs n = 2 or a subspace (DimensionUnsupported otherwise).
[[nodiscard]] Vec3 torque(const BoundaryCircle& circle, std::size_t quad_nodes = kDefaultQuadNodes,
                          std::optional<Subspace3> subspace = std::nullopt);

/// Integral of (X - W) x eta, by its own quadrature.
[[nodiscard]] Vec3 torque_about(const Vec3& W, const BoundaryCircle& circle,
                                std::size_t quad_nodes = kDefaultQuadNodes,
                                std::optional<Subspace3> subspace = std::nullopt);

/// Integral of K . eta over one circle. Rotations need n = 2 or a subspace.
[[nodiscard]] double killing_flux(const BoundaryCircle& circle, const KillingFieldSpec& K,
                                  std::size_t quad_nodes = kDefaultQuadNodes,
                                  std::optional<Subspace3> subspace = std::nullopt);

/// |sum over circles of int K . eta|.
[[nodiscard]] double balancing_residual(std::span<const BoundaryCircle> circles,
                                        const KillingFieldSpec& K,
                                        std::size_t quad_nodes = kDefaultQuadNodes,
                                        std::optional<Subspace3> subspace = std::nullopt);

/// Latitude sphere of a normalised profile at height z. Outward points away
/// from z = 0 along the profile (upward at z = 0); Upward follows +z.
[[nodiscard]] BoundaryCircle latitude_circle(const catenoid::CatenoidProfile& profile, double z,
                                             Orientation orientation);

/// The two boundary spheres of the free boundary catenoid, outward conormals.
[[nodiscard]] std::array<BoundaryCircle, 2> free_boundary_circles(
    const catenoid::FreeBoundaryCatenoid& fb);

/// Waist circle of the critical catenoid (radius 1/tau), upward conormal.
[[nodiscard]] BoundaryCircle critical_waist();

}  // namespace fbms::balancing
