#include "pvgas/gaussianfield.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pvgas/format.hpp"

namespace pvgas::gaussianfield {

std::string to_string(FieldKind kind) { return kind == FieldKind::kMuBeta ? "mu_beta" : "F_m"; }

FieldKind parse_kind(const std::string& s) {
  if (s == "mu_beta") return FieldKind::kMuBeta;
  if (s == "F_m") return FieldKind::kFm;
  throw ArgumentError("unknown field kind '" + s + "'");
}

namespace {

void check_parameter(FieldKind kind, double p) {
  if (kind == FieldKind::kMuBeta && !(p >= 0.0)) throw ArgumentError("mu_beta needs beta >= 0");
  if (kind == FieldKind::kFm && !(p > 0.0)) throw ArgumentError("F_m needs m > 0");
}

double variance_at(FieldKind kind, double p, double lambda) {
  if (kind == FieldKind::kMuBeta) return 1.0 / (1.0 + p * lambda);
  const double m2 = p * p;
  return m2 / (lambda * (m2 + lambda));
}

}  // namespace

std::vector<double> mode_variances(FieldKind kind, double parameter, const spectral::SpectralBasis& basis) {
  check_parameter(kind, parameter);
  std::vector<double> v(basis.size());
  for (std::size_t n = 0; n < basis.size(); ++n) v[n] = variance_at(kind, parameter, basis.mode(n).eigenvalue);
  return v;
}

double GaussianFieldSample::pairing(std::span<const double> fhat, double fbar) const {
  const std::size_t K = std::min(size(), fhat.size());
  std::vector<double> t(K);
  for (std::size_t n = 0; n < K; ++n) t[n] = coefficient(n) * (fhat[n] - basis->mode(n).mean * fbar);
  return stats::tree_sum(t);
}

double GaussianFieldSample::pairing(const std::function<double(const Vec2&)>& f) const {
  const auto fhat = basis->project(f);
  return pairing(fhat, basis->quadrature().integrate(f));
}

double GaussianFieldSample::evaluate(const Vec2& x) const {
  thread_local std::vector<double> e;
  e.resize(size());
  basis->evaluate_all(x, e);
  double s = 0.0;
  for (std::size_t n = 0; n < size(); ++n) s += coefficient(n) * (e[n] - basis->mode(n).mean);
  return s;
}

std::vector<double> GaussianFieldSample::evaluate_nodes() const {
  const auto& nodes = basis->quadrature().nodes();
  std::vector<double> out(nodes.size());
  const auto n = static_cast<std::ptrdiff_t>(nodes.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = evaluate(nodes[i]);
  return out;
}

double GaussianFieldSample::l2_norm_sq() const {
  std::vector<double> sq(size()), mean(size());
  for (std::size_t n = 0; n < size(); ++n) {
    const double c = coefficient(n);
    sq[n] = c * c;
    mean[n] = c * basis->mode(n).mean;
  }
  const double m = stats::tree_sum(mean);
  return stats::tree_sum(sq) - m * m;
}

GaussianFieldSample sample_field(FieldKind kind, double parameter, const spectral::SpectralBasis& basis,
                                 std::uint64_t seed, std::uint64_t index) {
  GaussianFieldSample s;
  s.kind = kind;
  s.parameter = parameter;
  s.seed = seed;
  s.index = index;
  s.basis = &basis;
  s.weights = mode_variances(kind, parameter, basis);
  for (double& w : s.weights) w = std::sqrt(w);
  Rng rng(seed, stream_id(0xF1E1Dull, index));
  s.zeta.resize(basis.size());
  for (double& z : s.zeta) z = rng.normal();
  return s;
}

void write_samples(std::ostream& os, const std::vector<GaussianFieldSample>& samples) {
  os << "pvgas-fields 1\n";
  for (const auto& s : samples) {
    os << to_string(s.kind) << ' ' << format::hex(s.parameter) << ' ' << s.size() << ' ' << s.seed << ' ' << s.index;
    for (double z : s.zeta) os << ' ' << format::hex(z);
    os << '\n';
  }
}

std::vector<GaussianFieldSample> read_samples(std::istream& is, const spectral::SpectralBasis& basis) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "pvgas-fields" || version != 1)
    throw ArgumentError("field dump: bad header");
  std::vector<GaussianFieldSample> out;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind, param, tok;
    std::size_t K = 0;
    GaussianFieldSample s;
    if (!(ls >> kind >> param >> K >> s.seed >> s.index)) throw ArgumentError("field dump: malformed row");
    if (K > basis.size()) throw ArgumentError("field dump: basis has fewer modes than the sample");
    s.kind = parse_kind(kind);
    s.parameter = format::parse_real(param);
    s.basis = &basis;
    s.zeta.resize(K);
    for (auto& z : s.zeta) {
      if (!(ls >> tok)) throw ArgumentError("field dump: truncated row");
      z = format::parse_real(tok);
    }
    auto w = mode_variances(s.kind, s.parameter, basis);
    w.resize(K);
    for (double& v : w) v = std::sqrt(v);
    s.weights = std::move(w);
    out.push_back(std::move(s));
  }
  return out;
}

double covariance(FieldKind kind, double parameter, const spectral::SpectralBasis& basis,
                  std::span<const double> fhat, double fbar, std::span<const double> ghat, double gbar) {
  const auto v = mode_variances(kind, parameter, basis);
  const std::size_t K = std::min({v.size(), fhat.size(), ghat.size()});
  std::vector<double> t(K);
  for (std::size_t n = 0; n < K; ++n) {
    const double e = basis.mode(n).mean;
    t[n] = v[n] * (fhat[n] - e * fbar) * (ghat[n] - e * gbar);
  }
  return stats::tree_sum(t);
}

double chaos1(const GaussianFieldSample& s, std::span<const double> fhat, double fbar) { return s.pairing(fhat, fbar); }

ModeMatrix ModeMatrix::project(const std::function<double(const Vec2&, const Vec2&)>& f,
                               const spectral::SpectralBasis& basis, std::size_t L) {
  if (L == 0 || L > basis.size()) throw ArgumentError("mode matrix size out of range");
  const auto q = spectral::DiskQuadrature::make(std::max(16, basis.quadrature().order() / 2));
  const auto& x = q.nodes();
  const auto& w = q.weights();
  const std::size_t Q = x.size();
  std::vector<double> c(L * Q);  // w_q (e_n(x_q) - ebar_n)
  std::vector<double> e(L);
  for (std::size_t i = 0; i < Q; ++i) {
    basis.evaluate_all(x[i], e);
    for (std::size_t n = 0; n < L; ++n) c[n * Q + i] = w[i] * (e[n] - basis.mode(n).mean);
  }
  std::vector<double> fq(Q * Q);
  const auto QQ = static_cast<std::ptrdiff_t>(Q);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < QQ; ++i)
    for (std::size_t j = 0; j < Q; ++j) fq[i * Q + j] = f(x[i], x[j]);
  ModeMatrix m;
  m.size = L;
  m.h.assign(L * L, 0.0);
  std::vector<double> tmp(L * Q, 0.0);  // tmp[n, j] = sum_i c[n, i] f[i, j]
  for (std::size_t n = 0; n < L; ++n)
    for (std::size_t i = 0; i < Q; ++i) {
      const double cn = c[n * Q + i];
      for (std::size_t j = 0; j < Q; ++j) tmp[n * Q + j] += cn * fq[i * Q + j];
    }
  for (std::size_t n = 0; n < L; ++n)
    for (std::size_t k = 0; k < L; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < Q; ++j) s += tmp[n * Q + j] * c[k * Q + j];
      m.h[n * L + k] = s;
    }
  return m;
}

ModeMatrix ModeMatrix::random(std::size_t L, std::uint64_t seed, std::uint64_t index) {
  if (L == 0) throw ArgumentError("mode matrix size must be positive");
  Rng rng(seed, stream_id(0x4A7Bull, index));
  ModeMatrix m;
  m.size = L;
  m.h.assign(L * L, 0.0);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = a; b < L; ++b) {
      const double v = rng.uniform(-1.0, 1.0) / static_cast<double>(1 + a + b);
      m.h[a * L + b] = m.h[b * L + a] = v;
    }
  return m;
}

double chaos2(const GaussianFieldSample& s, const ModeMatrix& h) {
  const std::size_t L = h.size;
  if (L > s.size()) throw ArgumentError("kernel has more modes than the sample");
  std::vector<double> rows(L);
  for (std::size_t a = 0; a < L; ++a) {
    double r = 0.0;
    for (std::size_t b = 0; b < L; ++b) r += h.h[a * L + b] * s.coefficient(b);
    rows[a] = s.coefficient(a) * r - s.weights[a] * s.weights[a] * h.h[a * L + a];
  }
  return stats::tree_sum(rows);
}

double chaos2_variance(FieldKind kind, double parameter, const spectral::SpectralBasis& basis, const ModeMatrix& h) {
  const std::size_t L = h.size;
  if (L > basis.size()) throw ArgumentError("kernel has more modes than the basis");
  const auto v = mode_variances(kind, parameter, basis);
  std::vector<double> rows(L);
  for (std::size_t a = 0; a < L; ++a) {
    double r = 0.0;
    // B = A H A with A = diag(sqrt v): B_ab (B_ba + B_ab) = v_a v_b H_ab (H_ba + H_ab).
    for (std::size_t b = 0; b < L; ++b) r += v[b] * h.h[a * L + b] * (h.h[b * L + a] + h.h[a * L + b]);
    rows[a] = v[a] * r;
  }
  return stats::tree_sum(rows);
}

SineGordonReport sine_gordon_check(const ensemble::VortexConfiguration& config, double beta, double m,
                                   const spectral::SpectralBasis& basis, std::size_t mc_samples, std::uint64_t seed) {
  if (!(beta >= 0.0)) throw ArgumentError("beta must be nonnegative");
  if (!(m > 0.0)) throw ArgumentError("m must be positive");
  const std::size_t N = config.size(), K = basis.size();
  const double Nd = static_cast<double>(N);
  const double vf0 = spectral::v_free_zero(m);

  const auto km = spectral::kernel_matrix(spectral::KernelSpec::zero_avg_regular(m, basis), config.positions());
  std::vector<double> rows(N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += config.intensity(j) * km[i * N + j];
    rows[i] = config.intensity(i) * s;
  }
  const double pair = stats::tree_sum(rows);

  std::vector<double> v(K, 0.0), e(K);
  for (std::size_t j = 0; j < N; ++j) {
    basis.evaluate_all(config.position(j), e);
    for (std::size_t n = 0; n < K; ++n) v[n] += config.intensity(j) * (e[n] - basis.mode(n).mean);
  }
  const auto c = mode_variances(FieldKind::kFm, m, basis);
  std::vector<double> t(K);
  for (std::size_t n = 0; n < K; ++n) t[n] = c[n] * v[n] * v[n];
  const double var = stats::tree_sum(t);

  SineGordonReport rep;
  rep.lhs = std::exp(-(beta / (2.0 * Nd)) * pair + 0.5 * beta * vf0);
  rep.rhs_closed = std::exp(0.5 * beta * vf0) * std::exp(-(beta / (2.0 * Nd)) * var);
  rep.residual = std::abs(rep.lhs - rep.rhs_closed) / std::max(1.0, std::abs(rep.lhs));
  rep.samples = mc_samples;
  if (mc_samples > 1) {
    const double scale = std::sqrt(beta / Nd);
    std::vector<double> cosx(mc_samples);
    const auto S = static_cast<std::ptrdiff_t>(mc_samples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < S; ++s) {
      Rng rng(seed, stream_id(0x5160ull, static_cast<std::uint64_t>(s)));
      double x = 0.0;
      for (std::size_t n = 0; n < K; ++n) x += std::sqrt(c[n]) * rng.normal() * v[n];
      cosx[s] = std::cos(scale * x);
    }
    const double pref = std::exp(0.5 * beta * vf0);
    rep.rhs_mc = pref * stats::mean(cosx);
    rep.mc_stderr = pref * stats::standard_error(cosx);
    const double d = std::abs(rep.rhs_mc - rep.rhs_closed);
    rep.z = rep.mc_stderr > 0.0 ? d / rep.mc_stderr : (d > 1e-14 ? INFINITY : 0.0);
  }
  return rep;
}

void for_each_decreasing(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  if (k < 0 || k > n) return;
  std::vector<int> j(k);
  auto rec = [&](auto&& self, int depth, int upper) -> void {
    if (depth == k) {
      visit(j);
      return;
    }
    // j_depth ranges over [k - depth, upper] so that the remaining indices fit below it.
    for (int v = upper; v >= k - depth; --v) {
      j[depth] = v;
      self(self, depth + 1, v - 1);
    }
  };
  rec(rec, 0, n);
}

ExpansionResult algebraic_expansion(const std::vector<double>& a, double b, int J) {
  const int n = static_cast<int>(a.size());
  if (J < 1 || J > n) throw ArgumentError("expansion order J must satisfy 1 <= J <= n");
  ExpansionResult r;
  r.lhs = 1.0;
  for (double v : a) r.lhs *= v + b;

  // prefix[i] = prod_{l <= i} (a_l + b), 1-based.
  std::vector<double> prefix(n + 1, 1.0);
  for (int i = 1; i <= n; ++i) prefix[i] = prefix[i - 1] * (a[i - 1] + b);

  double rhs = std::pow(b, n);
  for (int k = 1; k <= J - 1; ++k) {
    double s = 0.0;
    for_each_decreasing(n, k, [&](const std::vector<int>& j) {
      double p = 1.0;
      for (int v : j) p *= a[v - 1];
      s += p;
    });
    rhs += std::pow(b, n - k) * s;
  }
  double last = 0.0;
  for_each_decreasing(n, J, [&](const std::vector<int>& j) {
    double p = 1.0;
    for (int v : j) p *= a[v - 1];
    const int jJ = j.back();
    last += p * std::pow(b, n - J + 1 - jJ) * prefix[jJ - 1];
  });
  r.rhs = rhs + last;
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

FieldFunctionals::FieldFunctionals(const fluctuation::ModeKernel& f, const GaussianFieldSample& sample) : f_(&f) {
  const auto& q = sample.basis->quadrature();
  w_ = q.weights();
  F_ = sample.evaluate_nodes();
  const std::size_t L = f.modes().size(), Q = w_.size();
  e_.assign(L, std::vector<double>(Q));
  diag_.resize(Q);
  for (std::size_t i = 0; i < Q; ++i) {
    const Vec2& x = q.nodes()[i];
    for (std::size_t a = 0; a < L; ++a) e_[a][i] = f.basis().evaluate(f.modes()[a], x);
    double d = 0.0;
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = 0; b < L; ++b) d += f.coefficients()[a * L + b] * e_[a][i] * e_[b][i];
    diag_[i] = d;
  }
}

double FieldFunctionals::moment(std::size_t a, int power) const {
  std::vector<double> t(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) t[i] = w_[i] * e_[a][i] * std::pow(F_[i], power);
  return stats::tree_sum(t);
}

double FieldFunctionals::diag_moment(std::size_t a, int power) const {
  std::vector<double> t(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) t[i] = w_[i] * diag_[i] * e_[a][i] * std::pow(F_[i], power);
  return stats::tree_sum(t);
}

double FieldFunctionals::evaluate(const std::string& index) const {
  auto bad = [&]() { return ArgumentError("unknown functional index pattern '" + index + "'"); };
  if (index.size() < 3 || index[0] != 'f' || (index[1] != '_' && index[1] != '^')) throw bad();
  const bool upper = index[1] == '^';
  std::string body = index.substr(2);
  if (!body.empty() && body.front() == '{') {
    if (body.back() != '}') throw bad();
    body = body.substr(1, body.size() - 2);
  }
  std::vector<int> d;
  for (char ch : body) {
    if (ch < '0' || ch > '9') throw bad();
    d.push_back(ch - '0');
  }
  const std::size_t L = f_->modes().size(), Q = w_.size();
  const auto& c = f_->coefficients();
  auto fi = [&](int i) {
    std::vector<double> t(Q);
    for (std::size_t q = 0; q < Q; ++q) t[q] = w_[q] * diag_[q] * std::pow(F_[q], i);
    return stats::tree_sum(t);
  };
  auto fij = [&](int i, int j) {
    double s = 0.0;
    for (std::size_t a = 0; a < L; ++a) {
      const double ma = moment(a, i);
      for (std::size_t b = 0; b < L; ++b) s += c[a * L + b] * ma * moment(b, j);
    }
    return s;
  };
  if (!upper && d.size() == 1) return fi(d[0]);
  if (!upper && d.size() == 2) return fij(d[0], d[1]);
  if (!upper && d.size() == 3) return fi(d[0]) * fij(d[1], d[2]);
  if (upper && d.size() == 2) {
    double s = 0.0;
    for (std::size_t a = 0; a < L; ++a) {
      const double da = diag_moment(a, d[0]);
      for (std::size_t b = 0; b < L; ++b) s += c[a * L + b] * da * moment(b, d[1]);
    }
    return s;
  }
  if (upper && d.size() == 3) {
    // g_p(x) = int f(x, y) F(y)^p dy = sum_ab c_ab e_a(x) <e_b, F^p>.
    std::vector<double> mj(L), mk(L);
    for (std::size_t b = 0; b < L; ++b) {
      mj[b] = moment(b, d[1]);
      mk[b] = moment(b, d[2]);
    }
    std::vector<double> t(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      double gj = 0.0, gk = 0.0;
      for (std::size_t a = 0; a < L; ++a)
        for (std::size_t b = 0; b < L; ++b) {
          gj += c[a * L + b] * e_[a][q] * mj[b];
          gk += c[a * L + b] * e_[a][q] * mk[b];
        }
      t[q] = w_[q] * std::pow(F_[q], d[0]) * gj * gk;
    }
    return stats::tree_sum(t);
  }
  throw bad();
}

double f_functional(const fluctuation::ModeKernel& f, const GaussianFieldSample& sample, const std::string& index) {
  return FieldFunctionals(f, sample).evaluate(index);
}

ExpAsymptoticReport exp_asymptotic_check(const ensemble::VortexConfiguration& config, int r, double beta, double m,
                                         int lambda, const spectral::SpectralBasis& basis, std::size_t mc_samples,
                                         std::uint64_t seed) {
  if (r < 2 || r > 4) throw ArgumentError("subset size r must be 2, 3 or 4");
  if (lambda < 3) throw ArgumentError("expansion order lambda must be at least 3");
  if (!(beta >= 0.0)) throw ArgumentError("beta must be nonnegative");
  const std::size_t N = config.size();
  if (static_cast<std::size_t>(r) >= N) throw ArgumentError("subset larger than the configuration");
  int np = 0, nm = 0;
  for (std::size_t j = static_cast<std::size_t>(r); j < N; ++j) (config.intensity(j) > 0 ? np : nm)++;
  const double Nd = static_cast<double>(N), c = std::sqrt(beta / Nd);
  const auto& w = basis.quadrature().weights();

  ExpAsymptoticReport rep;
  rep.n = N;
  rep.r = r;
  rep.difference.resize(mc_samples);
  rep.main_term.resize(mc_samples);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    const auto F = sample_field(FieldKind::kFm, m, basis, seed, s).evaluate_nodes();
    std::vector<double> cs(F.size()), sn(F.size()), sq(F.size());
    for (std::size_t q = 0; q < F.size(); ++q) {
      cs[q] = w[q] * std::cos(c * F[q]);
      sn[q] = w[q] * std::sin(c * F[q]);
      sq[q] = w[q] * F[q] * F[q];
    }
    const std::complex<double> E(stats::tree_sum(cs), stats::tree_sum(sn));
    const std::complex<double> prod = std::pow(E, np) * std::pow(std::conj(E), nm);
    const double main = std::exp(-beta * (Nd - r) / (2.0 * Nd) * stats::tree_sum(sq));
    rep.main_term[s] = main;
    rep.difference[s] = std::abs(prod - main);
  }
  if (mc_samples > 0) {
    std::vector<double> d = rep.difference;
    std::sort(d.begin(), d.end());
    rep.median = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
    rep.mean = stats::mean(rep.difference);
  }
  return rep;
}

double log_z_beta(double beta, const spectral::SpectralBasis& basis, std::size_t modes) {
  if (!(beta >= 0.0)) throw ArgumentError("beta must be nonnegative");
  modes = std::min(modes, basis.size());
  std::vector<double> tr(modes), ld(modes), u(modes);
  for (std::size_t n = 0; n < modes; ++n) {
    const double lam = basis.mode(n).eigenvalue, e2 = basis.mode(n).mean * basis.mode(n).mean;
    tr[n] = (1.0 - e2) / lam;
    ld[n] = std::log1p(2.0 * beta / lam);
    u[n] = (2.0 * beta * e2 / lam) / (1.0 + 2.0 * beta / lam);
  }
  const double factor = 1.0 - stats::tree_sum(u);
  if (!(factor > 0.0)) throw DiagnosticError("quadratic form is not positive definite");
  return beta * stats::tree_sum(tr) - 0.5 * stats::tree_sum(ld) - 0.5 * std::log(factor);
}

ZBeta z_beta_continuum(double beta, const spectral::SpectralBasis& basis) {
  ZBeta z;
  z.log_value = log_z_beta(beta, basis, basis.size());
  z.value = std::exp(z.log_value);
  z.half_truncation = std::exp(log_z_beta(beta, basis, std::max<std::size_t>(1, basis.size() / 2)));
  z.drift = std::abs(z.value - z.half_truncation) / z.value;
  return z;
}

stats::Estimate z_beta_monte_carlo(double beta, const spectral::SpectralBasis& basis, std::size_t samples,
                                   std::uint64_t seed) {
  if (samples < 2) throw ArgumentError("Monte Carlo needs at least two samples");
  const std::size_t K = basis.size();
  std::vector<double> e(K), tr(K);
  for (std::size_t n = 0; n < K; ++n) {
    e[n] = basis.mode(n).mean;
    tr[n] = (1.0 - e[n] * e[n]) / basis.mode(n).eigenvalue;
  }
  const double trace = stats::tree_sum(tr);
  std::vector<double> e2(K);
  for (std::size_t n = 0; n < K; ++n) e2[n] = e[n] * e[n];
  const double s = stats::tree_sum(e2);
  const double gamma = (1.0 - std::sqrt(1.0 - s)) / s;
  std::vector<double> vals(samples);
  const auto S = static_cast<std::ptrdiff_t>(samples);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < S; ++i) {
    Rng rng(seed, stream_id(0x2B7Aull, static_cast<std::uint64_t>(i)));
    std::vector<double> z(K);
    double proj = 0.0;
    for (std::size_t n = 0; n < K; ++n) {
      z[n] = rng.normal();
      proj += e[n] * z[n];
    }
    double q = 0.0;
    for (std::size_t n = 0; n < K; ++n) {
      const double w = z[n] - gamma * proj * e[n];
      q += w * w / basis.mode(n).eigenvalue;
    }
    vals[i] = std::exp(-beta * (q - trace));
  }
  return {stats::mean(vals), stats::standard_error(vals)};
}

double fm_mean_norm_sq(double m, const spectral::SpectralBasis& basis) {
  const auto c = mode_variances(FieldKind::kFm, m, basis);
  std::vector<double> t(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) t[n] = c[n] * (1.0 - basis.mode(n).mean * basis.mode(n).mean);
  return stats::tree_sum(t);
}

double fm_exponential_moment(double alpha, double m, const spectral::SpectralBasis& basis) {
  if (!(alpha >= 0.0)) throw ArgumentError("alpha must be nonnegative");
  const auto c = mode_variances(FieldKind::kFm, m, basis);
  std::vector<double> ld(c.size()), u(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double e = basis.mode(n).mean;
    ld[n] = std::log1p(2.0 * alpha * c[n]);
    u[n] = 2.0 * alpha * c[n] * e * e / (1.0 + 2.0 * alpha * c[n]);
  }
  const double factor = 1.0 - stats::tree_sum(u);
  if (!(factor > 0.0)) throw DiagnosticError("quadratic form is not positive definite");
  return std::exp(-0.5 * (stats::tree_sum(ld) + std::log(factor)));
}

}  // namespace pvgas::gaussianfield
