#include "pvgas/geometry.hpp"

namespace pvgas::geometry {

double DiskDomain::area() const { return std::numbers::pi * radius * radius; }

void require_interior(const Vec2& x) {
  if (!(norm_sq(x) < kRadiusSq)) throw DomainError("point outside the open disk");
}

namespace {

void require_separated(const Vec2& x, const Vec2& y) {
  if (norm(x - y) < kCoincidenceGuard) throw DomainError("coincident points");
}

}  // namespace

double green(const Vec2& x, const Vec2& y) {
  require_interior(x);
  require_interior(y);
  require_separated(x, y);
  return detail::green(x, y);
}

double harmonic_part(const Vec2& x, const Vec2& y) {
  require_interior(x);
  require_interior(y);
  return kInvFourPi * std::log(detail::image_quadratic(x, y) / kRadiusSq);
}

double harmonic_part_diag(const Vec2& x) {
  require_interior(x);
  return detail::harmonic_part_diag(x);
}

Vec2 biot_savart(const Vec2& x, const Vec2& y) {
  require_interior(x);
  require_interior(y);
  require_separated(x, y);
  return detail::biot_savart(x, y);
}

Vec2 grad_perp_harmonic(const Vec2& x, const Vec2& y) {
  require_interior(x);
  require_interior(y);
  const double q = detail::image_quadratic(x, y);
  const double ys = norm_sq(y);
  return (kInvTwoPi / q) * perp(ys * x - kRadiusSq * y);
}

Vec2 grad_perp_g_diag(const Vec2& x) {
  require_interior(x);
  return detail::grad_perp_g_diag(x);
}

Vec2 free_kernel(const Vec2& x, const Vec2& y) {
  require_separated(x, y);
  const Vec2 d = x - y;
  return (-kInvTwoPi / norm_sq(d)) * perp(d);
}

}  // namespace pvgas::geometry
