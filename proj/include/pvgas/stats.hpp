#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pvgas::stats {

/// Pairwise (tree) sum; the result depends only on the input order, never on
/// how the work was split across threads.
double tree_sum(std::span<const double> values);

double mean(std::span<const double> values);
/// Unbiased sample variance.
double variance(std::span<const double> values);
/// Standard error of the mean assuming independent samples.
double standard_error(std::span<const double> values);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Mean with an autocorrelation-corrected standard error.
Estimate mean_with_ess(std::span<const double> series);

/// Integrated autocorrelation time with Sokal's automatic window (c = 5).
double integrated_autocorrelation_time(std::span<const double> series);

/// n / tau_int.
double effective_sample_size(std::span<const double> series);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// One-sample test against a continuous CDF (Stephens' small-sample correction).
KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample test with effective size n m / (n + m).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value of the one-sample statistic at level alpha.
double ks_critical_value(std::size_t n, double alpha);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;   // 95%
  double ci_high = 0.0;  // 95%
  bool ci_contains(double v) const { return ci_low <= v && v <= ci_high; }
};

/// Weighted least squares with known per-point standard errors; normal 95% interval.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> y_stderr);

/// Ordinary least squares; Student-t 95% interval with n - 2 degrees of freedom.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Sample cumulants kappa_1..kappa_4 (central-moment estimators).
struct Cumulants {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
};
Cumulants cumulants(std::span<const double> values);

/// Joint cumulant of the listed variables (each entry indexes `columns`), up to order 4.
double joint_cumulant(const std::vector<std::span<const double>>& columns);

/// Delete-one-block jackknife standard error of a statistic.
double jackknife_stderr(std::size_t n, std::size_t blocks,
                        const std::function<double(std::span<const std::size_t>)>& statistic);

}  // namespace pvgas::stats
