#include "pvgas/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pvgas {

namespace {

double frob(const Jet& j) { return std::sqrt(j.hxx * j.hxx + 2 * j.hxy * j.hxy + j.hyy * j.hyy); }

double tabulate_c2(const TestFunction::Evaluator& f) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  constexpr int kRadii = 64, kAngles = 128;
  for (int a = 0; a <= kRadii; ++a) {
    const double r = kRadius * a / kRadii * (1.0 - 1e-12);
    for (int b = 0; b < kAngles; ++b) {
      const double t = kTwoPi * b / kAngles;
      const Jet j = f({r * std::cos(t), r * std::sin(t)});
      s0 = std::max(s0, std::abs(j.value));
      s1 = std::max(s1, norm(j.grad));
      s2 = std::max(s2, frob(j));
    }
  }
  return s0 + s1 + s2;
}

// Product rule for u * v.
Jet times(const Jet& u, const Jet& v) {
  Jet p;
  p.value = u.value * v.value;
  p.grad = v.value * u.grad + u.value * v.grad;
  p.hxx = u.hxx * v.value + 2 * u.grad.x * v.grad.x + u.value * v.hxx;
  p.hxy = u.hxy * v.value + u.grad.x * v.grad.y + u.grad.y * v.grad.x + u.value * v.hxy;
  p.hyy = u.hyy * v.value + 2 * u.grad.y * v.grad.y + u.value * v.hyy;
  return p;
}

}  // namespace

TestFunction::TestFunction(std::string name, Evaluator jet, double support_radius)
    : name_(std::move(name)), jet_(std::move(jet)), support_radius_(support_radius) {
  if (!jet_) throw ArgumentError("test function needs an evaluator");
  if (!(support_radius_ > 0.0 && support_radius_ <= kRadius)) throw ArgumentError("support radius out of range");
  value_ = [j = jet_](const Vec2& x) { return j(x).value; };
  c2_bound_ = tabulate_c2(jet_);
  if (!std::isfinite(c2_bound_)) throw ArgumentError("test function '" + name_ + "' is not C2 on the closed disk");
}

TestFunction TestFunction::values_only(std::string name, std::function<double(const Vec2&)> f) {
  TestFunction t;
  t.name_ = std::move(name);
  t.value_ = std::move(f);
  t.c2_bound_ = std::numeric_limits<double>::infinity();
  return t;
}

TestFunction TestFunction::constant(double c) {
  return TestFunction("constant", [c](const Vec2&) { return Jet{c, {}, 0, 0, 0}; });
}

TestFunction TestFunction::cutoff_polynomial(int id) {
  const double rho = 0.85 * kRadius, r2 = rho * rho;
  auto cutoff = [r2](const Vec2& x) {
    const double u = 1.0 - norm_sq(x) / r2;
    if (u <= 0.0) return Jet{};
    const double u2 = u * u, u3 = u2 * u;
    Jet j;
    j.value = u2 * u2;
    j.grad = (-8.0 * u3 / r2) * x;
    const double a = 48.0 * u2 / (r2 * r2), b = -8.0 * u3 / r2;
    j.hxx = a * x.x * x.x + b;
    j.hxy = a * x.x * x.y;
    j.hyy = a * x.y * x.y + b;
    return j;
  };
  std::function<Jet(const Vec2&)> poly;
  std::string name;
  switch (id) {
    case 0:
      name = "bump";
      poly = [](const Vec2&) { return Jet{1.0, {}, 0, 0, 0}; };
      break;
    case 1:
      name = "bump_x";
      poly = [](const Vec2& x) { return Jet{x.x, {1.0, 0.0}, 0, 0, 0}; };
      break;
    case 2:
      name = "bump_quadratic";
      poly = [](const Vec2& x) {
        return Jet{x.x * x.x - x.y * x.y + 0.5 * x.y, {2 * x.x, -2 * x.y + 0.5}, 2.0, 0.0, -2.0};
      };
      break;
    default:
      throw ArgumentError("unknown default test function id " + std::to_string(id));
  }
  return TestFunction(name, [cutoff, poly](const Vec2& x) { return times(cutoff(x), poly(x)); }, rho);
}

std::vector<TestFunction> TestFunction::defaults() {
  return {cutoff_polynomial(0), cutoff_polynomial(1), cutoff_polynomial(2)};
}

double TestFunction::operator()(const Vec2& x) const { return value_(x); }

Vec2 TestFunction::grad(const Vec2& x) const { return jet(x).grad; }

Jet TestFunction::jet(const Vec2& x) const {
  if (!jet_) throw ArgumentError("test function '" + name_ + "' has no derivatives");
  return jet_(x);
}

double TestFunction::boundary_ring_defect() const {
  if (!compact()) return 0.0;
  double d = 0.0;
  for (int a = 0; a <= 8; ++a) {
    const double r = support_radius_ + (kRadius - support_radius_) * a / 8.0;
    for (int b = 0; b < 256; ++b) {
      const double t = kTwoPi * b / 256.0;
      const Jet j = jet({r * std::cos(t), r * std::sin(t)});
      d = std::max(d, std::abs(j.value) + norm(j.grad));
    }
  }
  return d;
}

}  // namespace pvgas
