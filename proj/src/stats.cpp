#include "pvgas/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pvgas::stats {

namespace {

double tree_sum_range(const double* p, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return tree_sum_range(p, half) + tree_sum_range(p + half, n - half);
}

}  // namespace

double tree_sum(std::span<const double> values) { return tree_sum_range(values.data(), values.size()); }

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty sample");
  return tree_sum(values) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m) * (values[i] - m);
  return tree_sum(sq) / static_cast<double>(values.size() - 1);
}

double standard_error(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  return std::sqrt(variance(values) / static_cast<double>(values.size()));
}

double integrated_autocorrelation_time(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) return 1.0;
  const double m = mean(series);
  double c0 = 0.0;
  for (double v : series) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (series[i] - m) * (series[i + lag] - m);
    c /= static_cast<double>(n);
    tau += 2.0 * c / c0;
    if (static_cast<double>(lag) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

double effective_sample_size(std::span<const double> series) {
  return static_cast<double>(series.size()) / integrated_autocorrelation_time(series);
}

Estimate mean_with_ess(std::span<const double> series) {
  const double tau = integrated_autocorrelation_time(series);
  return {mean(series), std::sqrt(variance(series) * tau / static_cast<double>(series.size()))};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = std::sqrt(n * m / (n + m));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> y_stderr) {
  if (x.size() != y.size() || x.size() != y_stderr.size() || x.size() < 2)
    throw std::invalid_argument("weighted_linear_fit: mismatched or short inputs");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (y_stderr[i] * y_stderr[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  LinearFit fit;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swy - fit.slope * swx) / sw;
  fit.slope_stderr = std::sqrt(sw / det);
  fit.ci_low = fit.slope - 1.959963984540054 * fit.slope_stderr;
  fit.ci_high = fit.slope + 1.959963984540054 * fit.slope_stderr;
  return fit;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw std::invalid_argument("linear_fit: need >= 3 points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - t * fit.slope_stderr;
  fit.ci_high = fit.slope + t * fit.slope_stderr;
  return fit;
}

Cumulants cumulants(std::span<const double> values) {
  const double m = mean(values);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : values) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(values.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  return {m, m2, m3, m4 - 3.0 * m2 * m2};
}

double joint_cumulant(const std::vector<std::span<const double>>& columns) {
  const std::size_t k = columns.size();
  if (k == 0 || k > 4) throw std::invalid_argument("joint_cumulant: order must be 1..4");
  const std::size_t n = columns[0].size();
  std::vector<std::vector<double>> c(k, std::vector<double>(n));
  for (std::size_t a = 0; a < k; ++a) {
    if (columns[a].size() != n) throw std::invalid_argument("joint_cumulant: ragged columns");
    const double m = mean(columns[a]);
    for (std::size_t i = 0; i < n; ++i) c[a][i] = columns[a][i] - m;
  }
  if (k == 1) return mean(columns[0]);
  auto moment = [&](std::initializer_list<std::size_t> idx) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t a : idx) p *= c[a][i];
      s += p;
    }
    return s / static_cast<double>(n);
  };
  if (k == 2) return moment({0, 1});
  if (k == 3) return moment({0, 1, 2});
  return moment({0, 1, 2, 3}) - moment({0, 1}) * moment({2, 3}) - moment({0, 2}) * moment({1, 3}) -
         moment({0, 3}) * moment({1, 2});
}

double jackknife_stderr(std::size_t n, std::size_t blocks,
                        const std::function<double(std::span<const std::size_t>)>& statistic) {
  blocks = std::min(blocks, n);
  if (blocks < 2) return 0.0;
  std::vector<double> partial(blocks);
  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
    keep.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (i < lo || i >= hi) keep.push_back(i);
    partial[b] = statistic(keep);
  }
  const double m = mean(partial);
  double ss = 0.0;
  for (double v : partial) ss += (v - m) * (v - m);
  const double g = static_cast<double>(blocks);
  return std::sqrt((g - 1.0) / g * ss);
}

}  // namespace pvgas::stats
