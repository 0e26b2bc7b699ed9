#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pvgas {

/// Disk radius chosen so that the domain has unit area.
inline const double kRadius = 1.0 / std::sqrt(std::numbers::pi);
inline const double kRadiusSq = 1.0 / std::numbers::pi;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInvTwoPi = 1.0 / (2.0 * std::numbers::pi);
inline constexpr double kInvFourPi = 1.0 / (4.0 * std::numbers::pi);

/// Pairs closer than this are treated as coincident.
inline constexpr double kCoincidenceGuard = 1e-12;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double norm_sq(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Counterclockwise rotation a^perp = (-a2, a1); the only convention used in the library.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

inline Vec2 rotate(const Vec2& a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// A point outside the open disk, or a coincident pair.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical certification failed (quadrature too coarse, matrix not positive definite).
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two vortices at the same position; carries the offending indices.
class SingularConfiguration : public std::runtime_error {
 public:
  SingularConfiguration(std::size_t i, std::size_t j)
      : std::runtime_error("coincident vortices " + std::to_string(i) + " and " +
                           std::to_string(j)),
        first(i),
        second(j) {}
  std::size_t first;
  std::size_t second;
};

}  // namespace pvgas
