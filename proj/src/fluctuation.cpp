#include "pvgas/fluctuation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pvgas/geometry.hpp"

namespace pvgas::fluctuation {

FluctuationField::FluctuationField(const VortexConfiguration& config)
    : config_(&config), scale_(1.0 / std::sqrt(static_cast<double>(config.size()))) {}

double FluctuationField::pair_with(const std::function<double(const Vec2&)>& phi) const {
  const auto& c = *config_;
  std::vector<double> t(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) t[i] = c.intensity(i) * phi(c.position(i));
  return scale_ * stats::tree_sum(t);
}

double FluctuationField::pair_with(const TestFunction& phi) const {
  return pair_with([&phi](const Vec2& x) { return phi(x); });
}

double FluctuationField::bilinear(const TwoPoint& f, bool include_diagonal) const {
  const auto& c = *config_;
  const double s = c.size() >= kernels::kParallelPairThreshold
                       ? kernels::omp::bilinear(c.positions(), c.intensities(), f, include_diagonal)
                       : kernels::serial::bilinear(c.positions(), c.intensities(), f, include_diagonal);
  return s / static_cast<double>(c.size());
}

std::vector<double> FluctuationField::coefficients(const spectral::SpectralBasis& basis, std::size_t count) const {
  if (count == 0 || count > basis.size()) count = basis.size();
  std::vector<double> out(count);
  kernels::mode_projection(basis, config_->positions(), config_->intensities(), out);
  for (double& v : out) v *= scale_;
  return out;
}

double pair_with(const VortexConfiguration& config, const TestFunction& phi) {
  return FluctuationField(config).pair_with(phi);
}

double bilinear(const VortexConfiguration& config, const TwoPoint& f, bool include_diagonal) {
  return FluctuationField(config).bilinear(f, include_diagonal);
}

namespace {

void require_delta(double delta) {
  if (!(delta > 0.0)) throw ArgumentError("Sobolev exponent offset delta must be positive");
}

}  // namespace

double sobolev_norm_sq(const VortexConfiguration& config, double delta, const spectral::SpectralBasis& basis) {
  require_delta(delta);
  const auto w = FluctuationField(config).coefficients(basis);
  std::vector<double> t(w.size());
  for (std::size_t n = 0; n < w.size(); ++n) t[n] = std::pow(basis.mode(n).eigenvalue, -(1.0 + delta)) * w[n] * w[n];
  return stats::tree_sum(t);
}

double sobolev_norm_sq_double_sum(const VortexConfiguration& config, double delta,
                                  const spectral::SpectralBasis& basis) {
  require_delta(delta);
  const auto spec = spectral::KernelSpec::fractional(1.0 + delta, basis);
  const auto m = spectral::kernel_matrix(spec, config.positions());
  const std::size_t n = config.size();
  std::vector<double> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += config.intensity(j) * m[i * n + j];
    rows[i] = config.intensity(i) * s;
  }
  return stats::tree_sum(rows) / static_cast<double>(n);
}

double sobolev_norm_sq_uniform_mean(double delta, const spectral::SpectralBasis& basis) {
  require_delta(delta);
  std::vector<double> t(basis.size());
  for (std::size_t n = 0; n < basis.size(); ++n) {
    const auto& md = basis.mode(n);
    t[n] = std::pow(md.eigenvalue, -(1.0 + delta)) * (1.0 - md.mean * md.mean);
  }
  return stats::tree_sum(t);
}

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("alpha exceeds 64-bit range");
  return r;
}

std::int64_t falling(int top, int count) {
  std::int64_t r = 1;
  for (int k = 0; k < count; ++k) r = checked_mul(r, top - k);
  return r;
}

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = checked_mul(r, n - k + i);
    r /= i;
  }
  return r;
}

}  // namespace

std::int64_t alpha(int m, int n, int N) {
  if (m < 0 || m > n || n > N) throw ArgumentError("alpha requires 0 <= m <= n <= N");
  if (N % 2 != 0) throw ArgumentError("alpha requires N even");
  if (m % 2 != 0) return 0;
  // C(N/2, m/2) m! (N-m)!/(N-n)! with (N-m)!/(N-n)! = falling(N-m, n-m).
  std::int64_t r = checked_mul(binomial(N / 2, m / 2), falling(m, m));
  r = checked_mul(r, falling(N - m, n - m));
  return (m / 2) % 2 == 0 ? r : -r;
}

std::int64_t alpha_enumerate(int m, int n, int N) {
  if (m < 0 || m > n || n > N) throw ArgumentError("alpha requires 0 <= m <= n <= N");
  if (N % 2 != 0) throw ArgumentError("alpha requires N even");
  if (N > 12) throw ArgumentError("enumeration limited to N <= 12");
  std::vector<int> xi(N);
  for (int i = 0; i < N; ++i) xi[i] = i < N / 2 ? 1 : -1;
  std::vector<int> idx(n);
  std::vector<char> used(N, 0);
  std::int64_t total = 0;
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == n) {
      std::int64_t p = 1;
      for (int k = 0; k < m; ++k) p *= xi[idx[k]];
      total += p;
      return;
    }
    for (int i = 0; i < N; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      idx[depth] = i;
      self(self, depth + 1);
      used[i] = 0;
    }
  };
  rec(rec, 0);
  return total;
}

WeakKernels weak_kernels(const TestFunction& phi) {
  if (!phi.has_derivatives() || !std::isfinite(phi.c2_bound()))
    throw ArgumentError("weak kernels need a C2 test function, got '" + phi.name() + "'");
  WeakKernels k;
  k.H = [phi](const Vec2& x, const Vec2& y) {
    if (norm_sq(x - y) < kCoincidenceGuard * kCoincidenceGuard) return 0.0;
    return 0.5 * dot(geometry::free_kernel(x, y), phi.grad(x) - phi.grad(y));
  };
  k.h = [phi](const Vec2& x, const Vec2& y) {
    return 0.5 * (dot(geometry::grad_perp_harmonic(x, y), phi.grad(x)) +
                  dot(geometry::grad_perp_harmonic(y, x), phi.grad(y)));
  };
  return k;
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double pair_bump(const Vec2& u, double delta) {
  const double r = norm(u);
  if (r <= 0.5 * delta) return 1.0;
  if (r >= delta) return 0.0;
  return smooth_step((delta - r) / (0.5 * delta));
}

double boundary_bump(const Vec2& x, double delta) {
  const double v = std::abs((kRadius - norm(x)) / delta);
  if (v <= 0.5) return 1.0;
  if (v >= 1.0) return 0.0;
  return smooth_step(2.0 * (1.0 - v));
}

WeakKernels mollified_kernels(const TestFunction& phi, double delta) {
  if (!(delta > 0.0)) throw ArgumentError("mollification width must be positive");
  const WeakKernels base = weak_kernels(phi);
  auto cut = [delta](const Vec2& x, const Vec2& y) {
    return (1.0 - pair_bump(x - y, delta)) * (1.0 - boundary_bump(x, delta)) * (1.0 - boundary_bump(y, delta));
  };
  WeakKernels k;
  k.H = [H = base.H, cut](const Vec2& x, const Vec2& y) {
    const double c = cut(x, y);
    return c == 0.0 ? 0.0 : c * H(x, y);
  };
  k.h = [h = base.h, cut](const Vec2& x, const Vec2& y) {
    const double c = cut(x, y);
    return c == 0.0 ? 0.0 : c * h(x, y);
  };
  return k;
}

double l2_distance(const TwoPoint& a, const TwoPoint& b, int quadrature_order) {
  const auto q = spectral::DiskQuadrature::make(quadrature_order);
  const auto& x = q.nodes();
  const auto& w = q.weights();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> rows(x.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = a(x[i], x[j]) - b(x[i], x[j]);
      s += w[j] * d * d;
    }
    rows[i] = w[i] * s;
  }
  return std::sqrt(stats::tree_sum(rows));
}

double near_diagonal_sup(const TwoPoint& f, std::size_t samples, double min_gap, std::uint64_t seed) {
  if (!(min_gap > 0.0)) throw ArgumentError("minimum gap must be positive");
  const double lo = std::log(min_gap), hi = std::log(0.1 * kRadius);
  constexpr std::size_t kBlocks = 64;
  std::vector<double> sup(kBlocks, 0.0);
  const auto blocks = static_cast<std::ptrdiff_t>(kBlocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    Rng rng(seed, stream_id(0x5EED, static_cast<std::uint64_t>(b)));
    const std::size_t count = (static_cast<std::size_t>(b) + 1) * samples / kBlocks -
                              static_cast<std::size_t>(b) * samples / kBlocks;
    double m = 0.0;
    for (std::size_t s = 0; s < count;) {
      const Vec2 x = rng.disk_point();
      const double gap = std::exp(rng.uniform(lo, hi)), t = rng.uniform(0.0, kTwoPi);
      const Vec2 y = x + gap * Vec2{std::cos(t), std::sin(t)};
      if (!(norm_sq(y) < kRadiusSq)) continue;
      m = std::max(m, std::abs(f(x, y)));
      ++s;
    }
    sup[b] = m;
  }
  return *std::max_element(sup.begin(), sup.end());
}

std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> I(n, 0.0);
  if (n < 2) return I;
  if (n == 2) {
    I[1] = 0.5 * h * (f[0] + f[1]);
    return I;
  }
  if (n == 3)
    I[1] = h * (5 * f[0] + 8 * f[1] - f[2]) / 12.0;
  else
    I[1] = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0;
  for (std::size_t k = 2; k < n; k += 2) I[k] = I[k - 2] + h / 3.0 * (f[k - 2] + 4 * f[k - 1] + f[k]);
  for (std::size_t k = 3; k < n; k += 2)
    I[k] = I[k - 3] + 3.0 * h / 8.0 * (f[k - 3] + 3 * f[k - 2] + 3 * f[k - 1] + f[k]);
  return I;
}

ResidualReport weak_residual(const dynamics::TrajectoryRecord& record, const TestFunction& phi) {
  if (!record.conservative) throw ArgumentError("trajectory is flagged non-conservative");
  const std::size_t n = record.times.size();
  if (n < 4) throw ArgumentError("weak residual needs at least four samples");
  const double h = record.times[1] - record.times[0];
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(record.times[k] - static_cast<double>(k) * h) > 1e-9 * record.times.back())
      throw ArgumentError("weak residual needs a uniform sample grid");
  const WeakKernels w = weak_kernels(phi);
  ResidualReport rep;
  rep.times = record.times;
  rep.drift.resize(n);
  std::vector<double> pairing(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto c = record.state(k);
    const FluctuationField field(c);
    pairing[k] = field.pair_with(phi);
    rep.drift[k] = field.bilinear(w.H, false) + field.bilinear(w.h, true);
  }
  const auto integral = cumulative_simpson(rep.drift, h);
  rep.residual.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    rep.residual[k] = pairing[k] - pairing[0] - integral[k];
    rep.max_abs = std::max(rep.max_abs, std::abs(rep.residual[k]));
  }
  return rep;
}

ModeKernel::ModeKernel(std::shared_ptr<const spectral::SpectralBasis> basis, std::vector<std::size_t> modes,
                       std::vector<double> coefficients)
    : basis_(std::move(basis)), modes_(std::move(modes)), c_(std::move(coefficients)) {
  const std::size_t L = modes_.size();
  if (!basis_ || L == 0 || L > 10) throw ArgumentError("mode kernel needs 1 to 10 modes");
  if (c_.size() != L * L) throw ArgumentError("mode kernel coefficient matrix has the wrong size");
  for (auto m : modes_)
    if (m >= basis_->size()) throw ArgumentError("mode index beyond the basis");
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = 0; b < L; ++b)
      if (c_[a * L + b] != c_[b * L + a]) throw ArgumentError("mode kernel coefficients must be symmetric");
  }
}

bool ModeKernel::admissible() const {
  const std::size_t L = modes_.size();
  double tr = 0.0;
  for (std::size_t a = 0; a < L; ++a) tr += c_[a * L + a];
  return std::abs(tr) <= 1e-14;
}

ModeKernel ModeKernel::fixed(int id) {
  static const auto basis = std::make_shared<const spectral::SpectralBasis>(
      spectral::SpectralBasis::build({.modes = 10, .quadrature_order = 0, .certify = 10, .evaluator = true}));
  switch (id) {
    case 0:
      return ModeKernel(basis, {0, 1, 2}, {1.0, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, -0.5});
    case 1:
      return ModeKernel(basis, {0, 3, 4, 5},
                        {0.0, 0.0, 0.0, 1.0,  //
                         0.0, 1.0, 0.0, 0.0,  //
                         0.0, 0.0, -1.0, 0.0,  //
                         1.0, 0.0, 0.0, 0.0});
    default:
      throw ArgumentError("unknown fixed kernel id " + std::to_string(id));
  }
}

double ModeKernel::operator()(const Vec2& x, const Vec2& y) const {
  const std::size_t L = modes_.size();
  double ex[10], ey[10];
  for (std::size_t a = 0; a < L; ++a) {
    ex[a] = basis_->evaluate(modes_[a], x);
    ey[a] = basis_->evaluate(modes_[a], y);
  }
  double s = 0.0;
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) s += c_[a * L + b] * ex[a] * ey[b];
  return s;
}

double ModeKernel::bilinear(const VortexConfiguration& config) const {
  const std::size_t L = modes_.size();
  std::vector<double> v(L);
  std::vector<double> t(config.size());
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t i = 0; i < config.size(); ++i)
      t[i] = config.intensity(i) * basis_->evaluate(modes_[a], config.position(i));
    v[a] = stats::tree_sum(t);
  }
  double s = 0.0;
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) s += c_[a * L + b] * v[a] * v[b];
  return s / static_cast<double>(config.size());
}

double ModeKernel::lp_norm(double p) const {
  const auto q = spectral::DiskQuadrature::make(40);
  const auto& x = q.nodes();
  const auto& w = q.weights();
  const std::size_t L = modes_.size(), n = x.size();
  std::vector<double> e(n * L), u(n * L, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < L; ++a) e[i * L + a] = basis_->evaluate(modes_[a], x[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = 0; b < L; ++b) u[i * L + a] += c_[a * L + b] * e[i * L + b];
  std::vector<double> rows(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double f = 0.0;
      for (std::size_t a = 0; a < L; ++a) f += u[i * L + a] * e[j * L + a];
      s += w[j] * std::pow(std::abs(f), p);
    }
    rows[i] = w[i] * s;
  }
  return std::pow(stats::tree_sum(rows), 1.0 / p);
}

double ModeKernel::diagonal_integral() const {
  return basis_->quadrature().integrate([this](const Vec2& x) { return (*this)(x, x); });
}

double ModeKernel::uniform_mean() const {
  const std::size_t L = modes_.size();
  double s = 0.0;
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) s += c_[a * L + b] * basis_->mode(modes_[a]).mean * basis_->mode(modes_[b]).mean;
  return diagonal_integral() - s;
}

double CltReport::max_z(const std::vector<double>& prediction) const {
  double z = 0.0;
  for (std::size_t k = 0; k < covariance.size(); ++k) {
    const double d = std::abs(covariance[k] - prediction[k]);
    z = std::max(z, covariance_stderr[k] > 0.0 ? d / covariance_stderr[k] : (d > 0.0 ? INFINITY : 0.0));
  }
  return z;
}

CltReport clt_experiment(const ensemble::GibbsParams& params, const std::vector<TestFunction>& tests,
                         std::size_t sample_count, const spectral::SpectralBasis& basis, std::uint64_t seed) {
  params.validate();
  if (tests.empty()) throw ArgumentError("clt experiment needs at least one test function");
  if (sample_count < 2) throw ArgumentError("clt experiment needs at least two samples");
  const std::size_t F = tests.size();
  const auto states = dynamics::gibbs_initial_states(params, sample_count, seed);
  std::vector<std::vector<double>> X(F, std::vector<double>(sample_count));
  const auto S = static_cast<std::ptrdiff_t>(sample_count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < F; ++a) X[a][s] = pair_with(states[s], tests[a]);
  return clt_summarize(X, params.beta, tests, basis);
}

CltReport clt_summarize(const std::vector<std::vector<double>>& X, double beta, const std::vector<TestFunction>& tests,
                        const spectral::SpectralBasis& basis) {
  const std::size_t F = tests.size();
  if (X.size() != F || X.empty() || X[0].size() < 2) throw ArgumentError("clt summary needs one sample column per test");
  const std::size_t sample_count = X[0].size();
  CltReport rep;
  rep.samples = sample_count;
  for (const auto& t : tests) rep.names.push_back(t.name());

  rep.covariance.resize(F * F);
  rep.covariance_stderr.resize(F * F);
  std::vector<double> prod(sample_count);
  for (std::size_t a = 0; a < F; ++a)
    for (std::size_t b = 0; b < F; ++b) {
      for (std::size_t s = 0; s < sample_count; ++s) prod[s] = X[a][s] * X[b][s];
      const stats::Estimate e = beta == 0.0 ? stats::Estimate{stats::mean(prod), stats::standard_error(prod)}
                                                   : stats::mean_with_ess(prod);
      rep.covariance[a * F + b] = e.value;
      rep.covariance_stderr[a * F + b] = e.std_error;
    }

  // Exact L2 pairings on a fine rule, spectral projections on the basis rule.
  const auto fine = spectral::DiskQuadrature::make(48);
  std::vector<double> avg(F);
  for (std::size_t a = 0; a < F; ++a) avg[a] = fine.integrate([&](const Vec2& x) { return tests[a](x); });
  rep.exact_uniform.resize(F * F);
  for (std::size_t a = 0; a < F; ++a)
    for (std::size_t b = 0; b < F; ++b)
      rep.exact_uniform[a * F + b] =
          fine.integrate([&](const Vec2& x) { return tests[a](x) * tests[b](x); }) - avg[a] * avg[b];

  std::vector<std::function<double(const Vec2&)>> fs;
  for (const auto& t : tests) fs.emplace_back([&t](const Vec2& x) { return t(x); });
  const auto proj = basis.project_many(fs);
  const std::size_t K = basis.size();
  std::vector<std::vector<double>> mf(F, std::vector<double>(K));
  for (std::size_t a = 0; a < F; ++a)
    for (std::size_t n = 0; n < K; ++n) mf[a][n] = proj[a][n] - basis.mode(n).mean * avg[a];

  rep.q_beta.resize(F * F);
  for (std::size_t a = 0; a < F; ++a)
    for (std::size_t b = 0; b < F; ++b) {
      std::vector<double> t(K);
      for (std::size_t n = 0; n < K; ++n) t[n] = mf[a][n] * mf[b][n] / (1.0 + beta * basis.mode(n).eigenvalue);
      rep.q_beta[a * F + b] = stats::tree_sum(t);
    }

  const std::size_t Kg = std::min<std::size_t>(K, 800);
  Eigen::VectorXd ebar(Kg), ginv(Kg);
  for (std::size_t n = 0; n < Kg; ++n) {
    ebar[n] = basis.mode(n).mean;
    ginv[n] = 1.0 / basis.mode(n).eigenvalue;
  }
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(Kg, Kg) - ebar * ebar.transpose();
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(Kg, Kg) + beta * P * ginv.asDiagonal() * P;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  rep.gibbs_limit.resize(F * F);
  for (std::size_t a = 0; a < F; ++a) {
    const Eigen::VectorXd va = Eigen::Map<const Eigen::VectorXd>(mf[a].data(), Kg);
    const Eigen::VectorXd sa = ldlt.solve(va);
    for (std::size_t b = 0; b < F; ++b) {
      const Eigen::VectorXd vb = Eigen::Map<const Eigen::VectorXd>(mf[b].data(), Kg);
      rep.gibbs_limit[a * F + b] = rep.exact_uniform[a * F + b] + sa.dot(vb) - va.dot(vb);
    }
  }

  for (std::size_t a = 0; a < F; ++a) {
    const double sd = std::sqrt(rep.gibbs_limit[a * F + a]);
    rep.normality.push_back(stats::ks_one_sample(
        X[a], [sd](double v) { return 0.5 * std::erfc(-v / (sd * std::numbers::sqrt2)); }));
  }
  return rep;
}

CumulantReport multitime_cumulants(const std::vector<dynamics::TrajectoryRecord>& ensemble, const TestFunction& phi,
                                   const std::vector<std::size_t>& sample_indices) {
  if (ensemble.size() < kMinCumulantEnsemble)
    throw ArgumentError("multitime cumulants need at least " + std::to_string(kMinCumulantEnsemble) +
                        " trajectories, got " + std::to_string(ensemble.size()));
  const std::size_t M = ensemble.size();
  CumulantReport rep;
  rep.trajectories = M;
  std::vector<double> x0(M);
  for (std::size_t m = 0; m < M; ++m) x0[m] = pair_with(ensemble[m].state(0), phi);

  constexpr std::size_t kBlocks = 20;
  auto subset = [](const std::vector<double>& v, std::span<const std::size_t> keep) {
    std::vector<double> out(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) out[i] = v[keep[i]];
    return out;
  };

  for (std::size_t k : sample_indices) {
    std::vector<double> xt(M), inc(M);
    double time = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      if (k >= ensemble[m].times.size()) throw ArgumentError("sample index beyond a trajectory");
      time = ensemble[m].times[k];
      xt[m] = pair_with(ensemble[m].state(k), phi);
      inc[m] = xt[m] - x0[m];
    }
    auto add = [&](std::string q, int order, const std::function<double(const std::vector<double>&,
                                                                         const std::vector<double>&)>& stat,
                   bool gaussian_zero) {
      CumulantRow row;
      row.time = time;
      row.quantity = std::move(q);
      row.order = order;
      row.value = stat(x0, xt);
      row.std_error = stats::jackknife_stderr(M, kBlocks, [&](std::span<const std::size_t> keep) {
        return stat(subset(x0, keep), subset(xt, keep));
      });
      row.flagged = gaussian_zero && std::abs(row.value) > 3.0 * row.std_error;
      rep.rows.push_back(std::move(row));
    };
    using V = std::vector<double>;
    auto joint = [](std::initializer_list<int> pick) {
      std::vector<int> p(pick);
      return [p](const V& a, const V& b) {
        std::vector<std::span<const double>> cols;
        for (int s : p) cols.emplace_back(s == 0 ? a : b);
        return stats::joint_cumulant(cols);
      };
    };
    add("joint(0,t)", 2, joint({0, 1}), false);
    add("joint(0,0,t)", 3, joint({0, 0, 1}), true);
    add("joint(0,t,t)", 3, joint({0, 1, 1}), true);
    add("joint(0,0,t,t)", 4, joint({0, 0, 1, 1}), true);
    auto incr = [](int order) {
      return [order](const V& a, const V& b) {
        V d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
        const auto c = stats::cumulants(d);
        return order == 2 ? c.k2 : order == 3 ? c.k3 : c.k4;
      };
    };
    add("increment", 2, incr(2), false);
    add("increment", 3, incr(3), true);
    add("increment", 4, incr(4), true);
    add("marginal_kurtosis_0", 4, [](const V& a, const V&) { return stats::cumulants(a).k4; }, false);
    add("marginal_kurtosis_t", 4, [](const V&, const V& b) { return stats::cumulants(b).k4; }, false);
  }
  return rep;
}

}  // namespace pvgas::fluctuation
