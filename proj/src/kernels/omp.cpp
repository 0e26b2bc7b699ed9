#include <atomic>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgas/geometry.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/stats.hpp"

namespace pvgas::kernels::omp {

namespace gd = geometry::detail;

namespace {

// Smallest (i, j) coincident pair found by any thread, reported after the loop.
struct Singular {
  std::atomic<std::size_t> first{std::numeric_limits<std::size_t>::max()};
  std::size_t second = 0;

  void note(std::size_t i, std::size_t j) {
#pragma omp critical(pvgas_singular)
    {
      if (i < first.load()) {
        first.store(i);
        second = j;
      }
    }
  }
  void raise() const {
    if (first.load() != std::numeric_limits<std::size_t>::max()) throw SingularConfiguration(first.load(), second);
  }
};

bool coincident(const Vec2& a, const Vec2& b) { return norm_sq(a - b) < kCoincidenceGuard * kCoincidenceGuard; }

}  // namespace

double pair_energy(std::span<const Vec2> x, std::span<const double> xi) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> rows(x.size(), 0.0);
  Singular bad;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      if (coincident(x[i], x[j])) {
        bad.note(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        break;
      }
      s += xi[j] * gd::green(x[i], x[j]);
    }
    rows[i] = xi[i] * s;
  }
  bad.raise();
  return stats::tree_sum(rows);
}

void velocity(std::span<const Vec2> x, std::span<const double> xi, double scale, std::span<Vec2> out) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  Singular bad;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Vec2 v = xi[i] * gd::grad_perp_g_diag(x[i]);
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (coincident(x[i], x[j])) {
        bad.note(static_cast<std::size_t>(std::min(i, j)), static_cast<std::size_t>(std::max(i, j)));
        break;
      }
      v += xi[j] * gd::biot_savart(x[i], x[j]);
    }
    out[i] = scale * v;
  }
  bad.raise();
}

void mode_projection(const spectral::SpectralBasis& basis, std::span<const Vec2> x, std::span<const double> xi,
                     std::span<double> out) {
  const std::size_t K = out.size();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> vals(x.size() * K);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    basis.evaluate_all(x[i], std::span<double>(&vals[static_cast<std::size_t>(i) * K], K));
  const auto kk = static_cast<std::ptrdiff_t>(K);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < kk; ++k) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) s += xi[i] * vals[static_cast<std::size_t>(i) * K + k];
    out[k] = s;
  }
}

double bilinear(std::span<const Vec2> x, std::span<const double> xi, const TwoPoint& f, bool include_diagonal) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> rows(x.size(), 0.0);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    try {
      for (std::ptrdiff_t j = 0; j < n; ++j) {
        if (j == i && !include_diagonal) continue;
        try {
          s += xi[j] * f(x[i], x[j]);
        } catch (const std::exception& e) {
          throw std::runtime_error("bilinear: f failed at (" + std::to_string(i) + ", " + std::to_string(j) +
                                   "): " + e.what());
        }
      }
    } catch (const std::exception& e) {
#pragma omp critical(pvgas_bilinear)
      if (failure.empty()) failure = e.what();
    }
    rows[i] = xi[i] * s;
  }
  if (!failure.empty()) throw std::runtime_error(failure);
  return stats::tree_sum(rows);
}

}  // namespace pvgas::kernels::omp
