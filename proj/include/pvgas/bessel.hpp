#pragma once

#include <vector>

namespace pvgas::bessel {

/// J_n(z) to full double precision (slow reference path).
double j(int order, double z);

/// Positive zeros j_{n,k} of J_n for every order n whose first zero lies below
/// `limit`. Each order lists all zeros below `limit` plus the first one above it.
///
/// Zeros of order n+1 are bracketed by consecutive zeros of order n
/// (j_{n,k} < j_{n+1,k} < j_{n,k+1}); order 0 uses the brackets
/// [(k - 1/2) pi, k pi]. Each bracket is refined by bisection and polished
/// with Newton steps to relative accuracy 1e-12 or better.
std::vector<std::vector<double>> zeros_below(double limit);

/// The first `count` zeros of J_n (used as a reference in tests).
std::vector<double> zeros(int order, int count);

/// Piecewise quintic Hermite table of J_n(z), 0 <= n <= max_order, 0 <= z <= max_argument.
///
/// Nodal values and first/second derivatives come from a backward-recurrence
/// array evaluation, derivatives via J_n' = (J_{n-1} - J_{n+1})/2 and
/// J_n'' = (J_{n-2} - 2 J_n + J_{n+2})/4. With spacing 0.1 the interpolation
/// error is below 1e-10 uniformly.
class Table {
 public:
  Table(int max_order, double max_argument, double spacing = 0.1);

  double operator()(int order, double z) const {
    double u = z * inv_h_;
    auto i = static_cast<std::size_t>(u);
    if (i >= nodes_ - 1) i = nodes_ - 2;
    const double t = u - static_cast<double>(i);
    const double* p = &data_[(static_cast<std::size_t>(order) * nodes_ + i) * 3];
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    const double h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
    const double h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    const double h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    return p[0] * h0 + p[1] * h1 + p[2] * h2 + p[5] * h3 + p[4] * h4 + p[3] * h5;
  }

  int max_order() const { return max_order_; }
  double max_argument() const { return max_argument_; }

 private:
  int max_order_;
  double max_argument_;
  double h_;
  double inv_h_;
  std::size_t nodes_;
  // Per order, per node: J, h J', h^2 J''.
  std::vector<double> data_;
};

}  // namespace pvgas::bessel
