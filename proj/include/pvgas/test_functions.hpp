#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pvgas/common.hpp"

namespace pvgas {

/// Value, gradient and Hessian of a scalar function at a point.
struct Jet {
  double value = 0.0;
  Vec2 grad;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
};

/// Smooth test function on the closed disk with derivatives up to order two.
class TestFunction {
 public:
  using Evaluator = std::function<Jet(const Vec2&)>;

  /// `support_radius` < R marks compact support inside |x| <= support_radius.
  /// The C2 bound sup|phi| + sup|grad phi| + sup|Hess phi| is tabulated on a polar grid.
  TestFunction(std::string name, Evaluator jet, double support_radius = kRadius);

  /// Value-only function: usable for pairings, rejected wherever derivatives are needed.
  static TestFunction values_only(std::string name, std::function<double(const Vec2&)> f);

  static TestFunction constant(double c);

  /// (1 - |x|^2/rho^2)^4_+ with rho = 0.85 R, times p in {1, x, x^2 - y^2 + y/2} for id 0, 1, 2.
  static TestFunction cutoff_polynomial(int id);
  static std::vector<TestFunction> defaults();

  const std::string& name() const { return name_; }
  double operator()(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
  Jet jet(const Vec2& x) const;

  bool has_derivatives() const { return static_cast<bool>(jet_); }
  bool compact() const { return support_radius_ < kRadius; }
  double support_radius() const { return support_radius_; }
  /// R - support radius.
  double margin() const { return kRadius - support_radius_; }
  double c2_bound() const { return c2_bound_; }

  /// Max of |phi| + |grad phi| over a ring of points outside the support (0 for compact functions).
  double boundary_ring_defect() const;

 private:
  TestFunction() = default;

  std::string name_;
  Evaluator jet_;
  std::function<double(const Vec2&)> value_;
  double support_radius_ = kRadius;
  double c2_bound_ = 0.0;
};

}  // namespace pvgas
