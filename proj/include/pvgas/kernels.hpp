#pragma once

#include <functional>
#include <span>

#include "pvgas/common.hpp"
#include "pvgas/spectral.hpp"

/// O(N^2) pair sums and O(NK) projections behind the ensemble, dynamics and
/// fluctuation modules. Every routine exists as a serial reference and an
/// OpenMP version; both accumulate per-row partial sums and combine them with
/// the same pairwise tree, so their results agree bit for bit.
namespace pvgas::kernels {

using TwoPoint = std::function<double(const Vec2&, const Vec2&)>;

namespace serial {

/// sum_{i<j} xi_i xi_j G(x_i, x_j); throws SingularConfiguration on coincidence.
double pair_energy(std::span<const Vec2> x, std::span<const double> xi);
/// (1/2) sum_i xi_i^2 g(x_i, x_i).
double self_energy(std::span<const Vec2> x, std::span<const double> xi);
/// out_i = scale * (sum_{j != i} xi_j K(x_i, x_j) + xi_i grad_perp_g_diag(x_i)).
void velocity(std::span<const Vec2> x, std::span<const double> xi, double scale, std::span<Vec2> out);
/// out_n = sum_i xi_i e_n(x_i), for n < out.size().
void mode_projection(const spectral::SpectralBasis& basis, std::span<const Vec2> x, std::span<const double> xi,
                     std::span<double> out);
/// sum_{i,j} xi_i xi_j f(x_i, x_j), diagonal optional (no 1/N factor).
double bilinear(std::span<const Vec2> x, std::span<const double> xi, const TwoPoint& f, bool include_diagonal);

}  // namespace serial

namespace omp {

double pair_energy(std::span<const Vec2> x, std::span<const double> xi);
void velocity(std::span<const Vec2> x, std::span<const double> xi, double scale, std::span<Vec2> out);
void mode_projection(const spectral::SpectralBasis& basis, std::span<const Vec2> x, std::span<const double> xi,
                     std::span<double> out);
double bilinear(std::span<const Vec2> x, std::span<const double> xi, const TwoPoint& f, bool include_diagonal);

}  // namespace omp

/// Energy change when vortex i moves from x[i] to `to` (others fixed). O(N).
double delta_energy_move(std::span<const Vec2> x, std::span<const double> xi, std::size_t i, const Vec2& to);

/// Energy change when vortices i and j exchange positions. O(N).
double delta_energy_swap(std::span<const Vec2> x, std::span<const double> xi, std::size_t i, std::size_t j);

/// Sizes above which the dispatching wrappers use the OpenMP versions.
inline constexpr std::size_t kParallelPairThreshold = 256;

double pair_energy(std::span<const Vec2> x, std::span<const double> xi);
void velocity(std::span<const Vec2> x, std::span<const double> xi, double scale, std::span<Vec2> out);
void mode_projection(const spectral::SpectralBasis& basis, std::span<const Vec2> x, std::span<const double> xi,
                     std::span<double> out);

}  // namespace pvgas::kernels
