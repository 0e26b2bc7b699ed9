#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pvgas/ensemble.hpp"
#include "pvgas/stats.hpp"

namespace pvgas::dynamics {

using ensemble::VortexConfiguration;

/// Near-collision or boundary hit that step-size control could not resolve.
class BlowUp : public std::runtime_error {
 public:
  explicit BlowUp(double t, const std::string& what = "step size underflow")
      : std::runtime_error(what + " at t = " + std::to_string(t)), time(t) {}
  double time;
};

/// x_i' = (1/sqrt N) [sum_{j != i} xi_j K(x_i, x_j) + xi_i grad_perp g(x_i, x_i)].
std::vector<Vec2> velocity(const VortexConfiguration& config);

/// Angular impulse sum_i xi_i |x_i|^2.
double angular_impulse(const VortexConfiguration& config);

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-10;
  double min_step = 1e-12;
  double initial_step = 1e-3;
  double drift_limit = 1e-6;  // relative H drift above which a record is flagged
  double min_separation = 1e-10;
  std::uint64_t max_steps = 0;  // accepted-step budget, 0 = unlimited; exceeding it is a blow-up
};

struct TrajectoryRecord {
  std::size_t n = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  Tolerances tolerances;
  std::vector<double> intensities;
  std::vector<double> times;
  std::vector<std::vector<Vec2>> states;
  std::vector<double> energy;
  std::vector<double> impulse;
  std::vector<double> min_pair;
  std::vector<double> min_boundary;
  std::uint64_t steps = 0;
  std::uint64_t rejections = 0;
  bool conservative = true;

  VortexConfiguration state(std::size_t k) const;
  double max_energy_drift() const;   // relative to max(1, |H(0)|)
  double max_impulse_drift() const;  // absolute

  void save(std::ostream& os) const;
  static TrajectoryRecord load(std::istream& is);
  void save_file(const std::string& path) const;
  static TrajectoryRecord load_file(const std::string& path);
};

/// Uniform grid of `count` + 1 times on [0, horizon].
std::vector<double> uniform_grid(double horizon, std::size_t count);

/// Dormand-Prince 5(4) with cubic Hermite dense output at `sample_times`
/// (increasing, starting at 0, ending at most at the horizon). Throws BlowUp.
TrajectoryRecord integrate(const VortexConfiguration& config, double horizon, const Tolerances& tol,
                           const std::vector<double>& sample_times);

struct KsRow {
  std::string observable;
  stats::KsResult ks;
};

struct InvarianceReport {
  std::size_t members = 0;
  std::size_t blowups = 0;
  std::vector<KsRow> rows;
  bool any_rejection(double level) const;
};

/// Observable f evaluated on a configuration.
using Observable = std::function<double(const VortexConfiguration&)>;

/// Draw M initial states from the Gibbs ensemble, evolve each to time T and
/// compare the laws of the observables at 0 and T by two-sample KS tests.
InvarianceReport invariance_experiment(const ensemble::GibbsParams& params, double horizon, std::size_t members,
                                       std::uint64_t seed, const std::vector<std::pair<std::string, Observable>>& obs,
                                       const Tolerances& tol = {});

/// Initial states for ensemble experiments: exact uniform draws at beta = 0,
/// otherwise a thinned Metropolis chain.
std::vector<VortexConfiguration> gibbs_initial_states(const ensemble::GibbsParams& params, std::size_t members,
                                                      std::uint64_t seed);

}  // namespace pvgas::dynamics
