#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pvgas/ensemble.hpp"
#include "pvgas/fluctuation.hpp"
#include "pvgas/spectral.hpp"
#include "pvgas/stats.hpp"

/// Spectral Gaussian fields on the disk: the energy-enstrophy measure mu_beta, the
/// regularized field F_m, Wiener-chaos integrals and the objects built on them.
namespace pvgas::gaussianfield {

enum class FieldKind { kMuBeta, kFm };

std::string to_string(FieldKind kind);
FieldKind parse_kind(const std::string& s);

/// Per-mode variances: (1 + beta lambda)^{-1} for mu_beta, m^2/(lambda(m^2 + lambda)) for F_m.
std::vector<double> mode_variances(FieldKind kind, double parameter, const spectral::SpectralBasis& basis);

/// omega = sum_n a_n zeta_n (e_n - ebar_n), zeta_n iid standard normal.
struct GaussianFieldSample {
  FieldKind kind = FieldKind::kMuBeta;
  double parameter = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<double> zeta;
  std::vector<double> weights;  // a_n
  const spectral::SpectralBasis* basis = nullptr;

  std::size_t size() const { return zeta.size(); }
  double coefficient(std::size_t n) const { return weights[n] * zeta[n]; }
  /// <omega, f> from the projections fhat_n = <f, e_n> and fbar = int f.
  double pairing(std::span<const double> fhat, double fbar) const;
  double pairing(const std::function<double(const Vec2&)>& f) const;
  /// Point value of the truncated field.
  double evaluate(const Vec2& x) const;
  /// Values at every node of the basis quadrature.
  std::vector<double> evaluate_nodes() const;
  /// ||omega||^2_{L^2} in coefficient space.
  double l2_norm_sq() const;
};

/// Stream `index` of `seed`; parameter is beta (>= 0) or m (> 0).
GaussianFieldSample sample_field(FieldKind kind, double parameter, const spectral::SpectralBasis& basis,
                                 std::uint64_t seed, std::uint64_t index = 0);

/// Field-sample dump: one row per sample (kind, parameter, K, seed, index, zeta).
void write_samples(std::ostream& os, const std::vector<GaussianFieldSample>& samples);
/// Reattaches the basis (which must have at least K modes) and recomputes the weights.
std::vector<GaussianFieldSample> read_samples(std::istream& is, const spectral::SpectralBasis& basis);

/// Truncated covariance <f, Q f> = sum_n a_n^2 (fhat_n - ebar_n fbar)^2 cross form.
double covariance(FieldKind kind, double parameter, const spectral::SpectralBasis& basis,
                  std::span<const double> fhat, double fbar, std::span<const double> ghat, double gbar);

double chaos1(const GaussianFieldSample& s, std::span<const double> fhat, double fbar);

/// Two-point kernel seen through the zero-average sector: H_nm = <(e_n - ebar_n) (x) (e_m - ebar_m), h>
/// for the first L modes, so that <omega (x) omega, h> = sum_nm c_n c_m H_nm.
struct ModeMatrix {
  std::size_t size = 0;
  std::vector<double> h;  // row-major L x L
  /// Projection of a two-point function on the first L centered modes by the basis quadrature.
  static ModeMatrix project(const std::function<double(const Vec2&, const Vec2&)>& f,
                            const spectral::SpectralBasis& basis, std::size_t L);
  /// Random symmetric matrix with entries uniform in [-1, 1] scaled by 1/(1 + n + m).
  static ModeMatrix random(std::size_t L, std::uint64_t seed, std::uint64_t index);
};

/// <omega (x) omega, h> - E<omega (x) omega, h>.
double chaos2(const GaussianFieldSample& s, const ModeMatrix& h);
/// Var chaos2 = tr(B (B + B^T)) with B = A H A.
double chaos2_variance(FieldKind kind, double parameter, const spectral::SpectralBasis& basis, const ModeMatrix& h);

struct SineGordonReport {
  double lhs = 0.0;          // exp(-(beta/N) H_{V_m})
  double rhs_closed = 0.0;   // exp((beta/2) V_free(0)) * exp(-(beta/2N) Var)
  double residual = 0.0;     // |lhs - rhs| / max(1, |lhs|)
  double rhs_mc = 0.0;
  double mc_stderr = 0.0;
  double z = 0.0;            // |rhs_mc - rhs_closed| / stderr
  std::size_t samples = 0;
};

SineGordonReport sine_gordon_check(const ensemble::VortexConfiguration& config, double beta, double m,
                                   const spectral::SpectralBasis& basis, std::size_t mc_samples, std::uint64_t seed);

struct ExpansionResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// prod (a_j + b) against b^n + sum_{k<J} b^{n-k} S'_k + S'_J(...) with S' over strictly
/// decreasing index tuples n >= j_1 > ... > j_k >= 1.
ExpansionResult algebraic_expansion(const std::vector<double>& a, double b, int J);

/// Visits every strictly decreasing tuple n >= j_1 > j_2 > ... > j_k >= 1 (1-based).
void for_each_decreasing(int n, int k, const std::function<void(const std::vector<int>&)>& visit);

/// Functionals f_i, f_ij, f^ij, f_ijk, f^ijk of (f, F) by the basis quadrature; f is a mode kernel.
class FieldFunctionals {
 public:
  FieldFunctionals(const fluctuation::ModeKernel& f, const GaussianFieldSample& sample);
  /// Index strings such as "f_2", "f_10", "f^{01}", "f_{110}", "f^011".
  double evaluate(const std::string& index) const;

 private:
  double moment(std::size_t a, int power) const;     // int e_a F^power
  double diag_moment(std::size_t a, int power) const;  // int f(x,x) e_a F^power

  const fluctuation::ModeKernel* f_;
  std::vector<double> w_, F_, diag_;
  std::vector<std::vector<double>> e_;  // e_a at nodes
};

double f_functional(const fluctuation::ModeKernel& f, const GaussianFieldSample& sample, const std::string& index);

struct ExpAsymptoticReport {
  std::size_t n = 0;
  int r = 0;
  std::vector<double> difference;  // |product - main term| per sample
  std::vector<double> main_term;
  double median = 0.0;
  double mean = 0.0;
};

/// Compares prod_{j not in subset} int exp(i sqrt(beta/N) xi_j F) with exp(-beta (N - r)/(2N) ||F||^2)
/// over F_m samples; the subset is the first r indices of the configuration.
ExpAsymptoticReport exp_asymptotic_check(const ensemble::VortexConfiguration& config, int r, double beta, double m,
                                         int lambda, const spectral::SpectralBasis& basis, std::size_t mc_samples,
                                         std::uint64_t seed);

struct ZBeta {
  double value = 0.0;
  double log_value = 0.0;
  double half_truncation = 0.0;  // same formula on the first K/2 modes
  double drift = 0.0;            // |value - half| / value
};

/// E_{mu_0}[exp(-beta chaos2(G))] by the determinant formula with C = I - ebar ebar^T, A = diag(1/lambda).
ZBeta z_beta_continuum(double beta, const spectral::SpectralBasis& basis);
double log_z_beta(double beta, const spectral::SpectralBasis& basis, std::size_t modes);

/// Monte Carlo of the same expectation with mu_0 draws C^{1/2} zeta, C^{1/2} = I - gamma ebar ebar^T.
stats::Estimate z_beta_monte_carlo(double beta, const spectral::SpectralBasis& basis, std::size_t samples,
                                   std::uint64_t seed);

/// E ||F_m||^2 = sum_n c_n (1 - ebar_n^2).
double fm_mean_norm_sq(double m, const spectral::SpectralBasis& basis);
/// E exp(-alpha ||F_m||^2) = [prod(1 + 2 alpha c_n)(1 - 2 alpha sum c_n ebar_n^2/(1 + 2 alpha c_n))]^{-1/2}.
double fm_exponential_moment(double alpha, double m, const spectral::SpectralBasis& basis);

}  // namespace pvgas::gaussianfield
