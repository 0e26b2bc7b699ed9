#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pvgas/dynamics.hpp"
#include "pvgas/ensemble.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/spectral.hpp"
#include "pvgas/stats.hpp"
#include "pvgas/test_functions.hpp"

/// The fluctuation field omega^N = (1/sqrt N) sum_i xi_i delta_{x_i} and its statistics.
namespace pvgas::fluctuation {

using ensemble::VortexConfiguration;
using kernels::TwoPoint;

class FluctuationField {
 public:
  explicit FluctuationField(const VortexConfiguration& config);

  const VortexConfiguration& config() const { return *config_; }
  double scale() const { return scale_; }

  double pair_with(const TestFunction& phi) const;
  double pair_with(const std::function<double(const Vec2&)>& phi) const;
  /// (1/N) sum_{i,j} xi_i xi_j f(x_i, x_j).
  double bilinear(const TwoPoint& f, bool include_diagonal) const;
  /// omega_n = (1/sqrt N) sum_i xi_i e_n(x_i) for the first `count` modes (all if 0).
  std::vector<double> coefficients(const spectral::SpectralBasis& basis, std::size_t count = 0) const;

 private:
  const VortexConfiguration* config_;
  double scale_;
};

double pair_with(const VortexConfiguration& config, const TestFunction& phi);
double bilinear(const VortexConfiguration& config, const TwoPoint& f, bool include_diagonal);

/// sum_n lambda_n^{-(1+delta)} omega_n^2, O(NK).
double sobolev_norm_sq(const VortexConfiguration& config, double delta, const spectral::SpectralBasis& basis);
/// (1/N) sum_{i,j} xi_i xi_j G_{1+delta}(x_i, x_j) at the same truncation, O(N^2 K).
double sobolev_norm_sq_double_sum(const VortexConfiguration& config, double delta,
                                  const spectral::SpectralBasis& basis);
/// Uniform-ensemble mean sum_n lambda_n^{-(1+delta)} (1 - ebar_n^2).
double sobolev_norm_sq_uniform_mean(double delta, const spectral::SpectralBasis& basis);

/// Sum over ordered n-tuples of distinct indices of xi_{i_1} ... xi_{i_m} for a neutral
/// configuration of N vortices; exact, throws std::overflow_error past int64.
std::int64_t alpha(int m, int n, int N);
/// Exhaustive enumeration of the same sum (small N only).
std::int64_t alpha_enumerate(int m, int n, int N);

struct WeakKernels {
  TwoPoint H;  // free part, zero on the diagonal
  TwoPoint h;  // boundary part
};

/// H_phi(x, y) = (1/2) K^free(x, y).(grad phi(x) - grad phi(y)),
/// h_phi(x, y) = (1/2)(grad_x^perp g(x, y).grad phi(x) + grad_x^perp g(y, x).grad phi(y)).
WeakKernels weak_kernels(const TestFunction& phi);

/// Smooth step s(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}) on [0, 1], clamped outside.
double smooth_step(double t);
/// 1 for |u| <= delta/2, 0 for |u| >= delta.
double pair_bump(const Vec2& u, double delta);
/// 1 within delta/2 of the boundary, 0 beyond delta.
double boundary_bump(const Vec2& x, double delta);

/// Kernels multiplied by (1 - pair_bump(x - y))(1 - boundary_bump(x))(1 - boundary_bump(y)).
WeakKernels mollified_kernels(const TestFunction& phi, double delta);

/// (integral over D x D of |a - b|^2)^{1/2} by the tensor quadrature of the given order.
double l2_distance(const TwoPoint& a, const TwoPoint& b, int quadrature_order = 24);

/// Max |f| over random pairs at distances drawn log-uniformly in [min_gap, 0.1 R].
double near_diagonal_sup(const TwoPoint& f, std::size_t samples, double min_gap, std::uint64_t seed);

struct ResidualReport {
  std::vector<double> times;
  std::vector<double> residual;
  std::vector<double> drift;  // integrand at every sample time
  double max_abs = 0.0;
};

/// r(t) = <omega_t, phi> - <omega_0, phi> - int_0^t (1/N)[sum_{i!=j} H_phi + sum_{i,j} h_phi] ds
/// on a uniform sample grid with composite Simpson weights.
ResidualReport weak_residual(const dynamics::TrajectoryRecord& record, const TestFunction& phi);

/// Cumulative integrals of uniformly sampled values: Simpson at even indices, a 3/8 panel at
/// odd indices >= 3, a four-point cubic rule on the first interval.
std::vector<double> cumulative_simpson(const std::vector<double>& values, double step);

/// Symmetric two-point kernel f(x, y) = sum_{a,b} c_ab e_a(x) e_b(y) over a handful of low modes.
/// Trace-zero c gives zero diagonal integral (admissible for the bilinear bounds).
class ModeKernel {
 public:
  /// Modes are indices into the basis (at most 10 distinct).
  ModeKernel(std::shared_ptr<const spectral::SpectralBasis> basis, std::vector<std::size_t> modes,
             std::vector<double> coefficients);
  /// Two fixed admissible kernels, id 0 and 1.
  static ModeKernel fixed(int id);

  double operator()(const Vec2& x, const Vec2& y) const;
  /// (1/N) sum_{i,j} xi_i xi_j f(x_i, x_j) in O(N L).
  double bilinear(const VortexConfiguration& config) const;
  /// (integral over D x D of |f|^p)^{1/p}.
  double lp_norm(double p) const;
  double diagonal_integral() const;
  /// Uniform-ensemble mean: diagonal integral minus double integral.
  double uniform_mean() const;
  bool admissible() const;

  const spectral::SpectralBasis& basis() const { return *basis_; }
  const std::vector<std::size_t>& modes() const { return modes_; }
  const std::vector<double>& coefficients() const { return c_; }

 private:
  std::shared_ptr<const spectral::SpectralBasis> basis_;
  std::vector<std::size_t> modes_;
  std::vector<double> c_;  // row-major L x L
};

struct CltReport {
  std::vector<std::string> names;
  std::size_t samples = 0;
  std::vector<double> covariance;           // empirical, row-major
  std::vector<double> covariance_stderr;    // autocorrelation-corrected
  std::vector<double> q_beta;               // sum_n (1 + beta lambda_n)^{-1} <M phi_a, e_n><M phi_b, e_n>
  std::vector<double> gibbs_limit;          // <phi_a, (I + beta M G M)^{-1} M phi_b>
  std::vector<double> exact_uniform;        // ||phi_a phi_b||_1 - (int phi_a)(int phi_b); beta = 0 only
  std::vector<stats::KsResult> normality;   // omega(phi_a) against N(0, gibbs_limit_aa)
  double max_z(const std::vector<double>& prediction) const;
};

/// Samples omega^N(phi_a) over the Gibbs ensemble and compares second moments with the predictions.
CltReport clt_experiment(const ensemble::GibbsParams& params, const std::vector<TestFunction>& tests,
                         std::size_t sample_count, const spectral::SpectralBasis& basis, std::uint64_t seed);

/// Same report from precomputed pairings X[a][s] = omega^N_s(phi_a).
CltReport clt_summarize(const std::vector<std::vector<double>>& X, double beta, const std::vector<TestFunction>& tests,
                        const spectral::SpectralBasis& basis);

struct CumulantRow {
  double time = 0.0;
  std::string quantity;
  int order = 0;
  double value = 0.0;
  double std_error = 0.0;
  bool flagged = false;  // |value| above 3 standard errors where a Gaussian would give 0
};

struct CumulantReport {
  std::size_t trajectories = 0;
  std::vector<CumulantRow> rows;
};

inline constexpr std::size_t kMinCumulantEnsemble = 1000;

/// Joint cumulants of (<omega_0, phi>, <omega_t, phi>) and cumulants of the increment at the
/// requested sample indices. Diagnostic only.
CumulantReport multitime_cumulants(const std::vector<dynamics::TrajectoryRecord>& ensemble, const TestFunction& phi,
                                   const std::vector<std::size_t>& sample_indices);

}  // namespace pvgas::fluctuation
