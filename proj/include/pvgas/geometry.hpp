#pragma once

#include "pvgas/common.hpp"

/// Closed-form Green function and Biot-Savart kernels of the unit-area disk.
///
/// With R = 1/sqrt(pi) and the image point y* = R^2 y / |y|^2,
///
///   G(x, y) = -(1/2pi) log|x - y| + g(x, y),
///   g(x, y) = (1/4pi) log( (|x|^2 |y|^2 - 2 R^2 x.y + R^4) / R^2 ),
///
/// which is the image formula (1/2pi) log(|y| |x - y*| / R) written in a form
/// that is manifestly symmetric and finite at y = 0.
namespace pvgas::geometry {

struct DiskDomain {
  double radius = kRadius;
  double area() const;
  bool contains(const Vec2& x) const { return norm_sq(x) < radius * radius; }
  /// Distance to the boundary circle (negative outside).
  double boundary_distance(const Vec2& x) const { return radius - norm(x); }
};

/// Throws DomainError unless |x| < R.
void require_interior(const Vec2& x);

/// G(x, y); x != y, both interior.
double green(const Vec2& x, const Vec2& y);

/// g(x, y); diagonal allowed.
double harmonic_part(const Vec2& x, const Vec2& y);

/// g(x, x) = (1/2pi) log((R^2 - |x|^2) / R).
double harmonic_part_diag(const Vec2& x);

/// K(x, y) = grad_x^perp G(x, y).
Vec2 biot_savart(const Vec2& x, const Vec2& y);

/// grad_x^perp g(x, y), the boundary part of the Biot-Savart kernel.
Vec2 grad_perp_harmonic(const Vec2& x, const Vec2& y);

/// grad_x^perp g(x, y) at y = x, equal to -(1/2pi) x^perp / (R^2 - |x|^2).
Vec2 grad_perp_g_diag(const Vec2& x);

/// K(x, y) - grad_x^perp g(x, y) = grad_x^perp(-(1/2pi) log|x - y|).
Vec2 free_kernel(const Vec2& x, const Vec2& y);

// Unchecked variants for inner loops; callers guarantee the preconditions.
namespace detail {

inline double image_quadratic(const Vec2& x, const Vec2& y) {
  return norm_sq(x) * norm_sq(y) - 2.0 * kRadiusSq * dot(x, y) + kRadiusSq * kRadiusSq;
}

inline double green(const Vec2& x, const Vec2& y) {
  const Vec2 d = x - y;
  return kInvFourPi * std::log(image_quadratic(x, y) / (kRadiusSq * norm_sq(d)));
}

inline double harmonic_part_diag(const Vec2& x) {
  return kInvTwoPi * std::log((kRadiusSq - norm_sq(x)) / kRadius);
}

inline Vec2 biot_savart(const Vec2& x, const Vec2& y) {
  const Vec2 d = x - y;
  const double q = image_quadratic(x, y);
  const double inv_d2 = 1.0 / norm_sq(d);
  const double inv_q = 1.0 / q;
  const double ys = norm_sq(y);
  // grad_x G = -(1/2pi) d/|d|^2 + (1/2pi)(|y|^2 x - R^2 y)/Q
  const Vec2 grad{kInvTwoPi * (-d.x * inv_d2 + (ys * x.x - kRadiusSq * y.x) * inv_q),
                  kInvTwoPi * (-d.y * inv_d2 + (ys * x.y - kRadiusSq * y.y) * inv_q)};
  return perp(grad);
}

inline Vec2 grad_perp_g_diag(const Vec2& x) {
  return (-kInvTwoPi / (kRadiusSq - norm_sq(x))) * perp(x);
}

}  // namespace detail

}  // namespace pvgas::geometry
