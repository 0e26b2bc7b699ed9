#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pvgas/common.hpp"
#include "pvgas/rng.hpp"
#include "pvgas/stats.hpp"

namespace pvgas::ensemble {

/// N signed unit vortices in the open disk.
class VortexConfiguration {
 public:
  VortexConfiguration() = default;
  /// Requires N even, intensities in {+1, -1} summing to 0, interior and pairwise distinct positions.
  VortexConfiguration(std::vector<Vec2> positions, std::vector<double> intensities);

  /// Same checks except neutrality (single-vortex and other unit-test setups).
  static VortexConfiguration without_neutrality(std::vector<Vec2> positions, std::vector<double> intensities);

  /// Uniform positions; first N/2 intensities +1, the rest -1.
  static VortexConfiguration uniform(std::size_t n, Rng& rng);

  /// First n/2 entries +1, remaining -1.
  static std::vector<double> balanced_intensities(std::size_t n);

  std::size_t size() const { return positions_.size(); }
  const std::vector<Vec2>& positions() const { return positions_; }
  const std::vector<double>& intensities() const { return intensities_; }
  const Vec2& position(std::size_t i) const { return positions_[i]; }
  double intensity(std::size_t i) const { return intensities_[i]; }
  bool neutral() const;

  /// Moves vortex i; the target must be interior (coincidence is checked by energy evaluation).
  void set_position(std::size_t i, const Vec2& x);
  void swap_positions(std::size_t i, std::size_t j);

  double min_pair_distance() const;
  double min_boundary_distance() const;

  /// Same positions, intensities negated.
  VortexConfiguration reversed() const;
  /// Positions rotated about the origin by `angle`.
  VortexConfiguration rotated(double angle) const;
  VortexConfiguration permuted(const std::vector<std::size_t>& order) const;

 private:
  void validate(bool require_neutral) const;

  std::vector<Vec2> positions_;
  std::vector<double> intensities_;
};

struct ProposalWeights {
  double local = 0.6;
  double redraw = 0.3;
  double swap = 0.1;
};

struct GibbsParams {
  double beta = 0.0;
  std::size_t n = 2;
  double proposal_scale = 0.05;
  std::size_t samples = 1000;   // retained states
  std::size_t burn_in = 100;    // sweeps (one sweep = N proposals)
  std::size_t thinning = 1;     // sweeps between retained states
  std::vector<double> ladder;   // optional tempering ladder; must contain beta
  ProposalWeights weights;

  void validate() const;
};

double hamiltonian(const VortexConfiguration& config);
double log_unnormalized_density(const VortexConfiguration& config, double beta);

/// min(1, exp(delta_log_density)).
double metropolis_acceptance(double delta_log_density);

struct MoveStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct ChainStats {
  MoveStats local, redraw, swap, tempering;
  double ess_energy = 0.0;  // effective sample size of H/N over retained states
  double tau_energy = 0.0;
};

/// Metropolis-Hastings chain (optionally a tempered family of replicas) for exp(-(beta/N) H).
class GibbsSampler {
 public:
  GibbsSampler(const GibbsParams& params, std::uint64_t seed, std::uint64_t chain_index = 0);
  /// Start from a given configuration (all replicas).
  GibbsSampler(const GibbsParams& params, std::uint64_t seed, std::uint64_t chain_index,
               const VortexConfiguration& start);

  const VortexConfiguration& state() const { return replicas_[target_].config; }
  double energy() const { return replicas_[target_].energy; }
  const ChainStats& stats() const { return stats_; }

  /// One proposal on every replica.
  void step();
  /// N proposals on every replica, then one round of adjacent tempering swaps.
  void sweep();

  using Visitor = std::function<void(const VortexConfiguration&, double energy, std::size_t index)>;
  /// Burn-in, then `samples` retained states spaced by `thinning` sweeps.
  void run(const Visitor& visit);
  std::vector<VortexConfiguration> run();

 private:
  struct Replica {
    double beta;
    VortexConfiguration config;
    double energy;
    Rng rng;
  };
  void step(Replica& r);
  void temper();

  GibbsParams params_;
  std::vector<Replica> replicas_;
  std::size_t target_ = 0;
  std::vector<std::size_t> positive_, negative_;
  Rng swap_rng_;
  ChainStats stats_;
};

/// Direct Monte Carlo estimate of Z^N_beta = E_uniform[exp(-(beta/N) H)].
stats::Estimate partition_ratio(double beta, std::size_t n, std::size_t sample_count, std::uint64_t seed);

/// Integral of g(x, x) over D, (R^2/2)(log R - 1).
double gbar();

/// One record of the configuration stream file.
struct StreamRecord {
  std::size_t n = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  double energy = 0.0;
  VortexConfiguration config;
};

void write_stream_header(std::ostream& os);
void write_stream_record(std::ostream& os, const StreamRecord& rec);
std::vector<StreamRecord> read_stream(std::istream& is);

}  // namespace pvgas::ensemble
