#include "pvgas/spectral.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace pvgas::spectral {

namespace {

constexpr std::size_t kReductionBlocks = 64;

struct GslQuiet {
  GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet gsl_quiet;

double mode_norm(int n, double zero) {
  const double jn1 = bessel::j(n + 1, zero);
  return (n == 0 ? 1.0 : std::numbers::sqrt2) / std::abs(jn1);
}

double mode_mean(int n, double zero) {
  if (n != 0) return 0.0;
  const double j1 = bessel::j(1, zero);
  return 2.0 * j1 / (zero * std::abs(j1));
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_real(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ArgumentError("basis cache: bad number '" + tok + "'");
  return v;
}

}  // namespace

DiskQuadrature DiskQuadrature::make(int order) {
  if (order < 2) throw ArgumentError("quadrature order must be >= 2");
  DiskQuadrature q;
  q.order_ = order;
  const int angles = 2 * order;
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(order));
  q.nodes_.reserve(static_cast<std::size_t>(order * angles));
  q.weights_.reserve(static_cast<std::size_t>(order * angles));
  const double dtheta = kTwoPi / angles;
  for (int i = 0; i < order; ++i) {
    double r = 0.0, w = 0.0;
    gsl_integration_glfixed_point(0.0, kRadius, static_cast<std::size_t>(i), &r, &w, table);
    for (int a = 0; a < angles; ++a) {
      const double th = (a + 0.5) * dtheta;
      q.nodes_.push_back({r * std::cos(th), r * std::sin(th)});
      q.weights_.push_back(w * r * dtheta);
    }
  }
  gsl_integration_glfixed_table_free(table);
  return q;
}

double DiskQuadrature::integrate(const std::function<double(const Vec2&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
  return s;
}

int auto_quadrature_order(double top_zero) {
  return static_cast<int>(std::ceil(4.0 * top_zero / std::numbers::pi)) + 8;
}

SpectralBasis SpectralBasis::build(const BasisOptions& options) {
  if (options.modes == 0) throw ArgumentError("build_basis: K must be >= 1");
  const std::size_t K = options.modes;
  double limit = 2.0 * std::sqrt(static_cast<double>(K)) + 10.0;
  std::vector<Mode> all;
  for (;;) {
    const auto zeros = bessel::zeros_below(limit);
    all.clear();
    for (std::size_t n = 0; n < zeros.size(); ++n) {
      for (std::size_t k = 0; k < zeros[n].size(); ++k) {
        const double z = zeros[n][k];
        if (z >= limit) break;
        Mode m;
        m.order = static_cast<int>(n);
        m.radial = static_cast<int>(k) + 1;
        m.zero = z;
        m.eigenvalue = z * z / kRadiusSq;
        all.push_back(m);
        if (n > 0) {
          m.parity = Parity::kSine;
          all.push_back(m);
        }
      }
    }
    if (all.size() >= K) break;
    limit *= 1.5;
  }
  std::sort(all.begin(), all.end(), [](const Mode& a, const Mode& b) {
    if (a.zero != b.zero) return a.zero < b.zero;
    if (a.order != b.order) return a.order < b.order;
    return a.parity < b.parity;
  });
  all.resize(K);
  for (auto& m : all) {
    m.norm = mode_norm(m.order, m.zero);
    m.mean = mode_mean(m.order, m.zero);
  }
  return from_modes(std::move(all), options.quadrature_order, options.certify, options.evaluator);
}

SpectralBasis SpectralBasis::from_modes(std::vector<Mode> modes, int quadrature_order, std::size_t certify,
                                        bool evaluator) {
  SpectralBasis b;
  b.modes_ = std::move(modes);
  for (const auto& m : b.modes_) b.max_order_ = std::max(b.max_order_, m.order);
  if (!evaluator) return b;
  const double top = b.modes_.back().zero;
  b.table_ = std::make_shared<bessel::Table>(b.max_order_, top + 0.5);
  b.quadrature_ = DiskQuadrature::make(quadrature_order > 0 ? quadrature_order : auto_quadrature_order(top));

  const std::size_t c = std::min(certify, b.modes_.size());
  if (c > 0) {
    std::vector<double> gram(c * c, 0.0), vals(c);
    const auto& nodes = b.quadrature_.nodes();
    const auto& w = b.quadrature_.weights();
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      b.evaluate_all(nodes[q], vals);
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i; j < c; ++j) gram[i * c + j] += w[q] * vals[i] * vals[j];
    }
    double defect = 0.0;
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = i; j < c; ++j) defect = std::max(defect, std::abs(gram[i * c + j] - (i == j ? 1.0 : 0.0)));
    b.gram_defect_ = defect;
    if (defect > 1e-8) {
      throw DiagnosticError("quadrature order " + std::to_string(b.quadrature_.order()) +
                            " cannot certify orthonormality (Gram defect " + std::to_string(defect) + ")");
    }
  }
  return b;
}

SpectralBasis build_basis(std::size_t K, int quadrature_order) {
  BasisOptions o;
  o.modes = K;
  o.quadrature_order = quadrature_order;
  return SpectralBasis::build(o);
}

std::vector<double> SpectralBasis::eigenvalues() const {
  std::vector<double> v(modes_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = modes_[i].eigenvalue;
  return v;
}

std::vector<double> SpectralBasis::means() const {
  std::vector<double> v(modes_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = modes_[i].mean;
  return v;
}

double SpectralBasis::evaluate(std::size_t i, const Vec2& x) const {
  if (!table_) throw ArgumentError("basis built without point evaluation");
  const Mode& m = modes_.at(i);
  const double r = norm(x);
  const double radial = (*table_)(m.order, m.zero * r / kRadius);
  if (m.order == 0) return m.norm * radial;
  const double th = std::atan2(x.y, x.x);
  const double ang = m.parity == Parity::kCosine ? std::cos(m.order * th) : std::sin(m.order * th);
  return m.norm * radial * ang;
}

void SpectralBasis::evaluate_all(const Vec2& x, std::span<double> out) const {
  if (!table_) throw ArgumentError("basis built without point evaluation");
  const std::size_t count = std::min(out.size(), modes_.size());
  thread_local std::vector<double> cs, sn;
  const auto orders = static_cast<std::size_t>(max_order_) + 1;
  if (cs.size() < orders) {
    cs.resize(orders);
    sn.resize(orders);
  }
  const double r = norm(x);
  double c1 = 1.0, s1 = 0.0;
  if (r > 0.0) {
    c1 = x.x / r;
    s1 = x.y / r;
  }
  cs[0] = 1.0;
  sn[0] = 0.0;
  for (std::size_t n = 1; n < orders; ++n) {
    cs[n] = cs[n - 1] * c1 - sn[n - 1] * s1;
    sn[n] = sn[n - 1] * c1 + cs[n - 1] * s1;
  }
  const double scale = r / kRadius;
  const bessel::Table& t = *table_;
  for (std::size_t i = 0; i < count; ++i) {
    const Mode& m = modes_[i];
    const double radial = t(m.order, m.zero * scale);
    const auto n = static_cast<std::size_t>(m.order);
    const double ang = m.parity == Parity::kCosine ? cs[n] : sn[n];
    out[i] = m.norm * radial * ang;
  }
}

std::vector<std::vector<double>> SpectralBasis::project_many(
    const std::vector<std::function<double(const Vec2&)>>& fs) const {
  const std::size_t K = modes_.size(), F = fs.size();
  const auto& nodes = quadrature_.nodes();
  const auto& w = quadrature_.weights();
  const std::size_t Q = nodes.size();
  std::vector<std::vector<double>> partial(kReductionBlocks, std::vector<double>(F * K, 0.0));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t blk = 0; blk < kReductionBlocks; ++blk) {
    std::vector<double> vals(K), fv(F);
    auto& acc = partial[blk];
    const std::size_t lo = blk * Q / kReductionBlocks, hi = (blk + 1) * Q / kReductionBlocks;
    for (std::size_t q = lo; q < hi; ++q) {
      evaluate_all(nodes[q], vals);
      for (std::size_t f = 0; f < F; ++f) fv[f] = w[q] * fs[f](nodes[q]);
      for (std::size_t f = 0; f < F; ++f) {
        double* a = &acc[f * K];
        const double c = fv[f];
        for (std::size_t i = 0; i < K; ++i) a[i] += c * vals[i];
      }
    }
  }
  std::vector<std::vector<double>> out(F, std::vector<double>(K, 0.0));
  for (std::size_t blk = 0; blk < kReductionBlocks; ++blk)
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t i = 0; i < K; ++i) out[f][i] += partial[blk][f * K + i];
  return out;
}

std::vector<double> SpectralBasis::project(const std::function<double(const Vec2&)>& f) const {
  return project_many({f}).front();
}

void SpectralBasis::save(std::ostream& os) const {
  os << "pvgas-basis 1\n";
  os << "radius " << hex(kRadius) << "\n";
  os << "modes " << modes_.size() << "\n";
  os << "quadrature_order " << quadrature_.order() << "\n";
  os << "evaluator " << (table_ ? 1 : 0) << "\n";
  for (const auto& m : modes_) {
    os << m.order << ' ' << m.radial << ' ' << (m.parity == Parity::kCosine ? 'c' : 's') << ' ' << hex(m.zero)
       << ' ' << hex(m.eigenvalue) << ' ' << hex(m.norm) << ' ' << hex(m.mean) << "\n";
  }
}

SpectralBasis SpectralBasis::load(std::istream& is) {
  std::string tag, tok;
  int version = 0;
  is >> tag >> version;
  if (tag != "pvgas-basis" || version != 1) throw ArgumentError("basis cache: bad header");
  std::size_t K = 0;
  int qorder = 0, evaluator = 0;
  is >> tag >> tok;
  if (tag != "radius" || parse_real(tok) != kRadius) throw ArgumentError("basis cache: radius mismatch");
  is >> tag >> K;
  if (tag != "modes" || K == 0) throw ArgumentError("basis cache: bad mode count");
  is >> tag >> qorder;
  if (tag != "quadrature_order") throw ArgumentError("basis cache: missing quadrature order");
  is >> tag >> evaluator;
  if (tag != "evaluator") throw ArgumentError("basis cache: missing evaluator flag");
  std::vector<Mode> modes(K);
  for (auto& m : modes) {
    char parity = 0;
    std::string z, l, n, e;
    if (!(is >> m.order >> m.radial >> parity >> z >> l >> n >> e)) throw ArgumentError("basis cache: truncated");
    if (parity != 'c' && parity != 's') throw ArgumentError("basis cache: bad parity");
    m.parity = parity == 'c' ? Parity::kCosine : Parity::kSine;
    m.zero = parse_real(z);
    m.eigenvalue = parse_real(l);
    m.norm = parse_real(n);
    m.mean = parse_real(e);
  }
  return from_modes(std::move(modes), qorder, 0, evaluator != 0);
}

void SpectralBasis::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  save(os);
}

SpectralBasis SpectralBasis::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load(is);
}

KernelSpec KernelSpec::fractional(double s, const SpectralBasis& b) {
  KernelSpec k{KernelKind::kFractional, s, &b};
  k.validate();
  return k;
}
KernelSpec KernelSpec::yukawa(double m, const SpectralBasis& b) {
  KernelSpec k{KernelKind::kYukawa, m, &b};
  k.validate();
  return k;
}
KernelSpec KernelSpec::regular_part(double m, const SpectralBasis& b) {
  KernelSpec k{KernelKind::kRegularPart, m, &b};
  k.validate();
  return k;
}
KernelSpec KernelSpec::zero_avg_regular(double m, const SpectralBasis& b) {
  KernelSpec k{KernelKind::kZeroAvgRegular, m, &b};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!basis) throw ArgumentError("kernel without basis");
  if (kind == KernelKind::kFractional) {
    if (!(parameter > 0.0 && parameter <= 3.0)) throw ArgumentError("fractional order s must lie in (0, 3]");
  } else if (!(parameter > 0.0)) {
    throw ArgumentError("kernel mass m must be positive");
  }
}

double KernelSpec::coefficient(double lambda) const {
  switch (kind) {
    case KernelKind::kFractional:
      return std::pow(lambda, -parameter);
    case KernelKind::kYukawa:
      return 1.0 / (parameter * parameter + lambda);
    case KernelKind::kRegularPart:
    case KernelKind::kZeroAvgRegular: {
      const double m2 = parameter * parameter;
      return m2 / (lambda * (m2 + lambda));
    }
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, const Vec2& x, const Vec2& y) {
  spec.validate();
  if (!(norm_sq(x) < kRadiusSq) || !(norm_sq(y) < kRadiusSq)) throw DomainError("kernel_eval: exterior point");
  if (spec.kind == KernelKind::kFractional && spec.parameter == 1.0 && norm(x - y) < kFractionalOneFloor)
    throw ArgumentError("kernel_eval: s = 1 needs separation >= 0.05 R");
  const SpectralBasis& b = *spec.basis;
  const std::size_t K = b.size();
  thread_local std::vector<double> ex, ey;
  ex.resize(K);
  ey.resize(K);
  b.evaluate_all(x, ex);
  b.evaluate_all(y, ey);
  const bool centered = spec.centered();
  double s = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const Mode& m = b.mode(i);
    const double a = centered ? ex[i] - m.mean : ex[i];
    const double c = centered ? ey[i] - m.mean : ey[i];
    s += spec.coefficient(m.eigenvalue) * a * c;
  }
  return s;
}

std::vector<double> kernel_matrix(const KernelSpec& spec, std::span<const Vec2> points) {
  spec.validate();
  const SpectralBasis& b = *spec.basis;
  const std::size_t n = points.size(), K = b.size();
  std::vector<double> vals(n * K), coef(K);
  for (std::size_t i = 0; i < K; ++i) coef[i] = spec.coefficient(b.mode(i).eigenvalue);
  for (std::size_t p = 0; p < n; ++p) {
    b.evaluate_all(points[p], std::span<double>(&vals[p * K], K));
    if (spec.centered())
      for (std::size_t i = 0; i < K; ++i) vals[p * K + i] -= b.mode(i).mean;
  }
  std::vector<double> out(n * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p; q < n; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < K; ++i) s += coef[i] * vals[p * K + i] * vals[q * K + i];
      out[p * n + q] = out[q * n + p] = s;
    }
  return out;
}

double v_free_zero(double m) {
  if (!(m > 0.0)) throw ArgumentError("v_free_zero: m must be positive");
  return kInvTwoPi * (std::log(m / 2.0) + std::numbers::egamma);
}

double w_m_harmonic_part(double m, const SpectralBasis& basis, const Vec2& x, const Vec2& y) {
  const double d = norm(x - y);
  if (d < kCoincidenceGuard) throw DomainError("w_m_harmonic_part: coincident points");
  const double W = kernel_eval(KernelSpec::yukawa(m, basis), x, y);
  return W - kInvTwoPi * std::cyl_bessel_k(0.0, m * d);
}

namespace {

// rho[n] = I_{n+1}(x) / I_n(x) for n < count, by backward recurrence.
std::vector<double> i_ratios(double x, std::size_t count) {
  std::vector<double> rho(count);
  double r = 0.0;
  for (std::size_t n = count + 64; n-- > 0;) {
    r = x / (2.0 * static_cast<double>(n + 1) + x * r);
    if (n < count) rho[n] = r;
  }
  return rho;
}

// P[n] = I_n(z) K_n(z) for n < count, using the Wronskian-free product recurrence
// P_{n+1} = P_n * (I_{n+1}/I_n) * (K_{n+1}/K_n).
std::vector<double> ik_products(double z, const std::vector<double>& rho) {
  const std::size_t count = rho.size();
  std::vector<double> p(count);
  p[0] = gsl_sf_bessel_I0_scaled(z) * gsl_sf_bessel_K0_scaled(z);
  double sigma = gsl_sf_bessel_K1_scaled(z) / gsl_sf_bessel_K0_scaled(z);
  for (std::size_t n = 0; n + 1 < count; ++n) {
    p[n + 1] = p[n] * rho[n] * sigma;
    sigma = 1.0 / sigma + 2.0 * static_cast<double>(n + 1) / z;
  }
  return p;
}

}  // namespace

double w_m_exact(double m, const Vec2& x, const Vec2& y) {
  if (!(m > 0.0)) throw ArgumentError("w_m_exact: m must be positive");
  if (!(norm_sq(x) < kRadiusSq) || !(norm_sq(y) < kRadiusSq)) throw DomainError("w_m_exact: exterior point");
  const double z = m * kRadius, a = m * norm(x), b = m * norm(y);
  const double i0 = gsl_sf_bessel_I0_scaled(z);
  const double k0 = gsl_sf_bessel_K0_scaled(z);
  const double base = k0 / i0 * gsl_sf_bessel_I0_scaled(a) * gsl_sf_bessel_I0_scaled(b) * std::exp(a + b - 2.0 * z);
  if (a == 0.0 || b == 0.0) return -kInvTwoPi * base;
  const double q = a * b / (z * z);
  const double lq = -std::log(q);
  const auto count = static_cast<std::size_t>(std::min(1e6, std::ceil(z + 24.0 + 42.0 / std::max(lq, 1e-7))));
  const auto rz = i_ratios(z, count), ra = i_ratios(a, count), rb = i_ratios(b, count);
  const auto p = ik_products(z, rz);
  const double dtheta = std::atan2(x.y, x.x) - std::atan2(y.y, y.x);
  // term_n = eps_n P_n (I_n(a)/I_n(z)) (I_n(b)/I_n(z)) cos(n dtheta)
  double ratio = gsl_sf_bessel_I0_scaled(a) / i0 * gsl_sf_bessel_I0_scaled(b) / i0 * std::exp(a + b - 2.0 * z);
  double sum = p[0] * ratio;
  for (std::size_t n = 1; n < count; ++n) {
    ratio *= (ra[n - 1] / rz[n - 1]) * (rb[n - 1] / rz[n - 1]);
    const double term = 2.0 * p[n] * ratio * std::cos(static_cast<double>(n) * dtheta);
    sum += term;
    if (static_cast<double>(n) > z + 10.0 && std::abs(p[n] * ratio) <= 1e-18 * std::abs(sum)) break;
  }
  return -kInvTwoPi * sum;
}

double w_m_diagonal_integral(double m) {
  if (!(m > 0.0)) throw ArgumentError("w_m_diagonal_integral: m must be positive");
  const double z = m * kRadius;
  const auto count = static_cast<std::size_t>(std::max(2e5, 1000.0 * z));
  const auto rho = i_ratios(z, count + 1);
  const auto p = ik_products(z, rho);
  // int_0^R I_n(mr)^2 r dr = (R^2/2)(I_n^2 - I_{n-1} I_{n+1}), so
  // term_n = eps_n (R^2/2) P_n (1 - rho_n / rho_{n-1}),  rho_{-1} = 1 / rho_0.
  double sum = 0.5 * kRadiusSq * p[0] * (1.0 - rho[0] * rho[0]);
  std::vector<double> terms(count - 1);
  for (std::size_t n = 1; n < count; ++n) terms[n - 1] = kRadiusSq * p[n] * (1.0 - rho[n] / rho[n - 1]);
  for (std::size_t n = terms.size(); n-- > 0;) sum += terms[n];
  // tail: term_n ~ R^2 / (2 n (n + 1))
  sum += 0.5 * kRadiusSq / static_cast<double>(count);
  return -sum;
}

}  // namespace pvgas::spectral
