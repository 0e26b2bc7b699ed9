#include "pvgas/bessel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pvgas::bessel {

double j(int order, double z) {
  if (order < 0) return (order % 2 == 0 ? 1.0 : -1.0) * j(-order, z);
  return std::cyl_bessel_j(static_cast<double>(order), z);
}

namespace {

double refine(int order, double lo, double hi) {
  double flo = j(order, lo), fhi = j(order, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::runtime_error("bessel: bracket without sign change");
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fm = j(order, mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double f = j(order, x);
    const double df = 0.5 * (j(order - 1, x) - j(order + 1, x));
    const double step = f / df;
    double next = x - step;
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

// Next zero of J_order beyond `from`, found by a sign-change scan with step
// well below the minimum zero spacing.
double next_zero_after(int order, double from) {
  constexpr double step = 0.25;
  double a = from + 1e-9 * (1.0 + from);
  double fa = j(order, a);
  for (int i = 0; i < 100000; ++i) {
    const double b = a + step;
    const double fb = j(order, b);
    if ((fa > 0) != (fb > 0) || fb == 0.0) return refine(order, a, b);
    a = b;
    fa = fb;
  }
  throw std::runtime_error("bessel: zero scan failed");
}

}  // namespace

std::vector<std::vector<double>> zeros_below(double limit) {
  std::vector<std::vector<double>> out;
  {
    std::vector<double> z0;
    for (int k = 1;; ++k) {
      const double z = refine(0, (k - 0.5) * std::numbers::pi, k * std::numbers::pi);
      z0.push_back(z);
      if (z >= limit) break;
    }
    out.push_back(std::move(z0));
  }
  for (int n = 1;; ++n) {
    const auto& prev = out.back();
    std::vector<double> zn;
    for (std::size_t k = 0; k + 1 < prev.size(); ++k) {
      const double z = refine(n, prev[k], prev[k + 1]);
      zn.push_back(z);
      if (z >= limit) break;
    }
    if (zn.empty() || zn.back() < limit) {
      zn.push_back(next_zero_after(n, zn.empty() ? static_cast<double>(n) : zn.back()));
    }
    if (zn.front() >= limit) break;
    out.push_back(std::move(zn));
  }
  return out;
}

std::vector<double> zeros(int order, int count) {
  if (order < 0 || count < 0) throw std::invalid_argument("bessel::zeros: negative argument");
  std::vector<double> z;
  double from = order;
  while (static_cast<int>(z.size()) < count) {
    from = next_zero_after(order, from);
    z.push_back(from);
  }
  return z;
}

Table::Table(int max_order, double max_argument, double spacing)
    : max_order_(max_order), max_argument_(max_argument), h_(spacing), inv_h_(1.0 / spacing) {
  if (max_order < 0 || max_argument <= 0.0 || spacing <= 0.0) throw std::invalid_argument("bessel::Table");
  gsl_set_error_handler_off();
  nodes_ = static_cast<std::size_t>(std::ceil(max_argument / spacing)) + 2;
  const int top = max_order + 2;
  data_.assign(static_cast<std::size_t>(max_order + 1) * nodes_ * 3, 0.0);
  std::vector<double> row(static_cast<std::size_t>(top) + 1);
  for (std::size_t i = 0; i < nodes_; ++i) {
    const double z = static_cast<double>(i) * h_;
    if (z == 0.0) {
      std::fill(row.begin(), row.end(), 0.0);
      row[0] = 1.0;
    } else {
      // The backward recurrence breaks down once J_top(z) underflows.
      int live = top;
      while (live > 0 && live * std::log(0.5 * z) - std::lgamma(live + 1.0) < -650.0) --live;
      std::fill(row.begin(), row.end(), 0.0);
      if (gsl_sf_bessel_Jn_array(0, live, z, row.data()) != 0) {
        for (int n = 0; n <= live; ++n) row[static_cast<std::size_t>(n)] = j(n, z);
      }
    }
    auto at = [&](int n) {
      if (n >= 0) return row[static_cast<std::size_t>(n)];
      return (n % 2 == 0 ? 1.0 : -1.0) * row[static_cast<std::size_t>(-n)];
    };
    for (int n = 0; n <= max_order; ++n) {
      double* p = &data_[(static_cast<std::size_t>(n) * nodes_ + i) * 3];
      p[0] = at(n);
      p[1] = h_ * 0.5 * (at(n - 1) - at(n + 1));
      p[2] = h_ * h_ * 0.25 * (at(n - 2) - 2.0 * at(n) + at(n + 2));
    }
  }
}

}  // namespace pvgas::bessel
