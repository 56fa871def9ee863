#include "fbms/balancing.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "fbms/error.hpp"

namespace fbms::balancing {
namespace {

constexpr double kPi = std::numbers::pi;

void check_nodes(std::size_t nodes) {
  if (nodes < 8 || nodes % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument, "quadrature needs an even number (>= 8) of nodes");
  }
}

void check_subspace(const BoundaryCircle& c, const std::optional<Subspace3>& sub,
                    const char* what) {
  if (c.n == 2 && !sub) return;
  if (!sub) {
    throw Error(ErrorKind::DimensionUnsupported,
                std::string(what) + " in R^" + std::to_string(c.n + 1) +
                    " needs a 3-subspace containing the axis");
  }
  if (sub->first < 0 || sub->second < 0 || sub->first >= c.n || sub->second >= c.n ||
      sub->first == sub->second) {
    throw Error(ErrorKind::InvalidArgument, "subspace must name two distinct lateral coordinates");
  }
}

// rho^{n-1} omega_{n-1} * mean over beta, or the great-circle length in a subspace.
double measure(const BoundaryCircle& c, bool in_subspace) {
  if (in_subspace || c.n == 2) return 2.0 * kPi * c.radius;
  return std::pow(c.radius, c.n - 1) * sphere_area(c.n - 1);
}

// Trapezoid rule with beta and beta + pi evaluated as a pair (omega, -omega),
// so odd parts cancel exactly.
Vec3 circle_mean(const BoundaryCircle& c, std::size_t nodes,
                 const std::function<Vec3(const Vec3& X, const Vec3& eta)>& f) {
  Vec3 sum{};
  const std::size_t half = nodes / 2;
  for (std::size_t j = 0; j < half; ++j) {
    const double beta = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(nodes);
    const Vec3 w{std::cos(beta), std::sin(beta), 0.0};
    for (double sgn : {1.0, -1.0}) {
      const Vec3 om{sgn * w[0], sgn * w[1], 0.0};
      const Vec3 X{c.center[0] + c.radius * om[0], c.center[1] + c.radius * om[1], c.center[2]};
      const Vec3 eta{c.conormal_radial * om[0], c.conormal_radial * om[1], c.conormal_axial};
      const Vec3 v = f(X, eta);
      for (int i = 0; i < 3; ++i) sum[i] += v[i];
    }
  }
  for (double& s : sum) s /= static_cast<double>(nodes);
  return sum;
}

}  // namespace

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double sphere_area(int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "sphere dimension must be nonnegative");
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(kPi, h) / std::tgamma(h);
}

const char* to_string(Orientation o) noexcept {
  return o == Orientation::Outward ? "outward" : "upward";
}

BoundaryCircle BoundaryCircle::make(int n, Vec3 center, double radius, double axial,
                                    double radial, Orientation orientation) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "n must be at least 2");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidArgument, "circle radius must be positive");
  }
  if (!(std::abs(std::hypot(axial, radial) - 1.0) < 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "conormal generator must have unit length");
  }
  return {n, center, radius, axial, radial, orientation};
}

KillingFieldSpec KillingFieldSpec::translation(const Vec3& v) {
  return {Kind::Translation, v, {}};
}

KillingFieldSpec KillingFieldSpec::rotation(const Vec3& v, const Vec3& W) {
  if (dot(v, v) == 0.0) throw Error(ErrorKind::InvalidArgument, "rotation axis must be nonzero");
  return {Kind::Rotation, v, W};
}

Vec3 KillingFieldSpec::at(const Vec3& X) const {
  if (kind == Kind::Translation) return v;
  return cross(v, {X[0] - base[0], X[1] - base[1], X[2] - base[2]});
}

Vec3 flux(const BoundaryCircle& circle, std::size_t quad_nodes) {
  check_nodes(quad_nodes);
  Vec3 m = circle_mean(circle, quad_nodes, [](const Vec3&, const Vec3& eta) { return eta; });
  const double w = measure(circle, false);
  return {w * m[0], w * m[1], w * m[2]};
}

Vec3 torque(const BoundaryCircle& circle, std::size_t quad_nodes,
            std::optional<Subspace3> subspace) {
  return torque_about({0.0, 0.0, 0.0}, circle, quad_nodes, subspace);
}

Vec3 torque_about(const Vec3& W, const BoundaryCircle& circle, std::size_t quad_nodes,
                  std::optional<Subspace3> subspace) {
  check_nodes(quad_nodes);
  check_subspace(circle, subspace, "torque");
  const Vec3 m = circle_mean(circle, quad_nodes, [&W](const Vec3& X, const Vec3& eta) {
    return cross({X[0] - W[0], X[1] - W[1], X[2] - W[2]}, eta);
  });
  const double w = measure(circle, subspace.has_value());
  return {w * m[0], w * m[1], w * m[2]};
}

double killing_flux(const BoundaryCircle& circle, const KillingFieldSpec& K,
                    std::size_t quad_nodes, std::optional<Subspace3> subspace) {
  check_nodes(quad_nodes);
  const bool sub = K.kind == KillingFieldSpec::Kind::Rotation;
  if (sub) check_subspace(circle, subspace, "rotation field");
  const Vec3 m = circle_mean(circle, quad_nodes, [&K](const Vec3& X, const Vec3& eta) {
    return Vec3{dot(K.at(X), eta), 0.0, 0.0};
  });
  return measure(circle, sub && subspace.has_value()) * m[0];
}

double balancing_residual(std::span<const BoundaryCircle> circles, const KillingFieldSpec& K,
                          std::size_t quad_nodes, std::optional<Subspace3> subspace) {
  double total = 0.0;
  for (const auto& c : circles) total += killing_flux(c, K, quad_nodes, subspace);
  return std::abs(total);
}

BoundaryCircle latitude_circle(const catenoid::CatenoidProfile& profile, double z,
                               Orientation orientation) {
  const auto s = profile.at(z);
  const double len = std::hypot(1.0, s.rdot);
  double axial = 1.0 / len, radial = s.rdot / len;
  if (orientation == Orientation::Outward && z < 0.0) {
    axial = -axial;
    radial = -radial;
  }
  return BoundaryCircle::make(profile.n(), {0.0, 0.0, z}, s.r, axial, radial, orientation);
}

std::array<BoundaryCircle, 2> free_boundary_circles(const catenoid::FreeBoundaryCatenoid& fb) {
  const auto& top = fb.nodes.back();
  const auto& bottom = fb.nodes.front();
  auto make = [&](const catenoid::ProfileSample& s, double sign) {
    const double len = std::hypot(1.0, s.rdot);
    return BoundaryCircle::make(fb.n, {0.0, 0.0, s.z}, s.r, sign / len, sign * s.rdot / len,
                                Orientation::Outward);
  };
  return {make(bottom, -1.0), make(top, 1.0)};
}

BoundaryCircle critical_waist() {
  const auto cc = catenoid::critical_catenoid();
  return BoundaryCircle::make(2, {0.0, 0.0, 0.0}, 1.0 / cc.tau, 1.0, 0.0, Orientation::Upward);
}

}  // namespace fbms::balancing
