#include "pvgas/geometry.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/stats.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace pvgas::kernels {

namespace gd = geometry::detail;

namespace {

void check_pair(const Vec2& a, const Vec2& b, std::size_t i, std::size_t j) {
  if (norm_sq(a - b) < kCoincidenceGuard * kCoincidenceGuard) throw SingularConfiguration(i, j);
}

}  // namespace

namespace serial {

double pair_energy(std::span<const Vec2> x, std::span<const double> xi) {
  const std::size_t n = x.size();
  std::vector<double> rows(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      check_pair(x[i], x[j], i, j);
      s += xi[j] * gd::green(x[i], x[j]);
    }
    rows[i] = xi[i] * s;
  }
  return stats::tree_sum(rows);
}

double self_energy(std::span<const Vec2> x, std::span<const double> xi) {
  std::vector<double> rows(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) rows[i] = 0.5 * xi[i] * xi[i] * gd::harmonic_part_diag(x[i]);
  return stats::tree_sum(rows);
}

void velocity(std::span<const Vec2> x, std::span<const double> xi, double scale, std::span<Vec2> out) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 v = xi[i] * gd::grad_perp_g_diag(x[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      check_pair(x[i], x[j], i, j);
      v += xi[j] * gd::biot_savart(x[i], x[j]);
    }
    out[i] = scale * v;
  }
}

void mode_projection(const spectral::SpectralBasis& basis, std::span<const Vec2> x, std::span<const double> xi,
                     std::span<double> out) {
  const std::size_t K = out.size();
  std::vector<double> vals(K);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    basis.evaluate_all(x[i], vals);
    for (std::size_t k = 0; k < K; ++k) out[k] += xi[i] * vals[k];
  }
}

double bilinear(std::span<const Vec2> x, std::span<const double> xi, const TwoPoint& f, bool include_diagonal) {
  const std::size_t n = x.size();
  std::vector<double> rows(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i && !include_diagonal) continue;
      try {
        s += xi[j] * f(x[i], x[j]);
      } catch (const std::exception& e) {
        throw std::runtime_error("bilinear: f failed at (" + std::to_string(i) + ", " + std::to_string(j) +
                                 "): " + e.what());
      }
    }
    rows[i] = xi[i] * s;
  }
  return stats::tree_sum(rows);
}

}  // namespace serial

double delta_energy_move(std::span<const Vec2> x, std::span<const double> xi, std::size_t i, const Vec2& to) {
  const Vec2 from = x[i];
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j == i) continue;
    check_pair(to, x[j], i, j);
    s += xi[j] * (gd::green(to, x[j]) - gd::green(from, x[j]));
  }
  return xi[i] * s + 0.5 * xi[i] * xi[i] * (gd::harmonic_part_diag(to) - gd::harmonic_part_diag(from));
}

double delta_energy_swap(std::span<const Vec2> x, std::span<const double> xi, std::size_t i, std::size_t j) {
  if (xi[i] == xi[j]) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k == i || k == j) continue;
    s += xi[k] * (gd::green(x[j], x[k]) - gd::green(x[i], x[k]));
  }
  return (xi[i] - xi[j]) * s;
}

double pair_energy(std::span<const Vec2> x, std::span<const double> xi) {
  return x.size() >= kParallelPairThreshold ? omp::pair_energy(x, xi) : serial::pair_energy(x, xi);
}

void velocity(std::span<const Vec2> x, std::span<const double> xi, double scale, std::span<Vec2> out) {
  if (x.size() >= kParallelPairThreshold)
    omp::velocity(x, xi, scale, out);
  else
    serial::velocity(x, xi, scale, out);
}

void mode_projection(const spectral::SpectralBasis& basis, std::span<const Vec2> x, std::span<const double> xi,
                     std::span<double> out) {
  if (x.size() * out.size() >= 64 * 1024)
    omp::mode_projection(basis, x, xi, out);
  else
    serial::mode_projection(basis, x, xi, out);
}

}  // namespace pvgas::kernels
