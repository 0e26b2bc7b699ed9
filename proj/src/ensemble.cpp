#include "pvgas/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pvgas/format.hpp"
#include "pvgas/geometry.hpp"
#include "pvgas/kernels.hpp"

namespace pvgas::ensemble {

VortexConfiguration::VortexConfiguration(std::vector<Vec2> positions, std::vector<double> intensities)
    : positions_(std::move(positions)), intensities_(std::move(intensities)) {
  validate(true);
}

VortexConfiguration VortexConfiguration::without_neutrality(std::vector<Vec2> positions,
                                                            std::vector<double> intensities) {
  VortexConfiguration c;
  c.positions_ = std::move(positions);
  c.intensities_ = std::move(intensities);
  c.validate(false);
  return c;
}

std::vector<double> VortexConfiguration::balanced_intensities(std::size_t n) {
  std::vector<double> xi(n, -1.0);
  std::fill(xi.begin(), xi.begin() + static_cast<std::ptrdiff_t>(n / 2), 1.0);
  return xi;
}

VortexConfiguration VortexConfiguration::uniform(std::size_t n, Rng& rng) {
  if (n == 0 || n % 2 != 0) throw ArgumentError("N must be even and positive");
  std::vector<Vec2> x(n);
  for (auto& p : x) p = rng.disk_point();
  return VortexConfiguration(std::move(x), balanced_intensities(n));
}

void VortexConfiguration::validate(bool require_neutral) const {
  if (positions_.size() != intensities_.size()) throw ArgumentError("positions and intensities differ in length");
  if (positions_.empty()) throw ArgumentError("empty configuration");
  for (double v : intensities_)
    if (v != 1.0 && v != -1.0) throw ArgumentError("intensities must be +1 or -1");
  if (require_neutral && (positions_.size() % 2 != 0 || !neutral()))
    throw ArgumentError("configuration violates the neutrality condition");
  for (const auto& p : positions_)
    if (!(norm_sq(p) < kRadiusSq)) throw DomainError("vortex outside the open disk");
  if (positions_.size() <= 4096) {
    for (std::size_t i = 0; i < positions_.size(); ++i)
      for (std::size_t j = i + 1; j < positions_.size(); ++j)
        if (norm_sq(positions_[i] - positions_[j]) < kCoincidenceGuard * kCoincidenceGuard)
          throw SingularConfiguration(i, j);
  }
}

bool VortexConfiguration::neutral() const {
  double s = 0.0;
  for (double v : intensities_) s += v;
  return s == 0.0;
}

void VortexConfiguration::set_position(std::size_t i, const Vec2& x) {
  if (!(norm_sq(x) < kRadiusSq)) throw DomainError("vortex outside the open disk");
  positions_.at(i) = x;
}

void VortexConfiguration::swap_positions(std::size_t i, std::size_t j) { std::swap(positions_.at(i), positions_.at(j)); }

double VortexConfiguration::min_pair_distance() const {
  double d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions_.size(); ++i)
    for (std::size_t j = i + 1; j < positions_.size(); ++j) d2 = std::min(d2, norm_sq(positions_[i] - positions_[j]));
  return std::sqrt(d2);
}

double VortexConfiguration::min_boundary_distance() const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : positions_) d = std::min(d, kRadius - norm(p));
  return d;
}

VortexConfiguration VortexConfiguration::reversed() const {
  VortexConfiguration c = *this;
  for (auto& v : c.intensities_) v = -v;
  return c;
}

VortexConfiguration VortexConfiguration::rotated(double angle) const {
  VortexConfiguration c = *this;
  for (auto& p : c.positions_) {
    p = rotate(p, angle);
    if (!(norm_sq(p) < kRadiusSq)) p = (kRadius * (1.0 - 1e-15) / norm(p)) * p;
  }
  return c;
}

VortexConfiguration VortexConfiguration::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != size()) throw ArgumentError("permutation size mismatch");
  VortexConfiguration c = *this;
  for (std::size_t i = 0; i < order.size(); ++i) {
    c.positions_[i] = positions_.at(order[i]);
    c.intensities_[i] = intensities_.at(order[i]);
  }
  return c;
}

void GibbsParams::validate() const {
  if (n == 0 || n % 2 != 0) throw ArgumentError("N must be even and positive");
  if (!(beta >= 0.0) || !(beta < kTwoPi * static_cast<double>(n)))
    throw ArgumentError("beta outside the admissible window [0, 2 pi N)");
  if (!(proposal_scale > 0.0)) throw ArgumentError("proposal scale must be positive");
  if (samples == 0) throw ArgumentError("chain length must be positive");
  if (thinning == 0) throw ArgumentError("thinning must be positive");
  if (weights.local < 0 || weights.redraw < 0 || weights.swap < 0 ||
      weights.local + weights.redraw + weights.swap <= 0)
    throw ArgumentError("invalid proposal weights");
  if (!ladder.empty()) {
    if (std::find(ladder.begin(), ladder.end(), beta) == ladder.end())
      throw ArgumentError("tempering ladder must contain beta");
    for (double b : ladder)
      if (!(b >= 0.0) || !(b < kTwoPi * static_cast<double>(n))) throw ArgumentError("ladder beta outside window");
  }
}

double hamiltonian(const VortexConfiguration& config) {
  const auto& x = config.positions();
  const auto& xi = config.intensities();
  return kernels::pair_energy(x, xi) + kernels::serial::self_energy(x, xi);
}

double log_unnormalized_density(const VortexConfiguration& config, double beta) {
  if (!(beta >= 0.0) || !(beta < kTwoPi * static_cast<double>(config.size())))
    throw ArgumentError("beta outside the admissible window");
  if (beta == 0.0) return 0.0;
  return -(beta / static_cast<double>(config.size())) * hamiltonian(config);
}

double metropolis_acceptance(double delta_log_density) {
  return delta_log_density >= 0.0 ? 1.0 : std::exp(delta_log_density);
}

namespace {

VortexConfiguration initial_state(const GibbsParams& params, std::uint64_t seed, std::uint64_t chain_index) {
  params.validate();
  Rng init(seed, stream_id(chain_index, 0x1417ull));
  return VortexConfiguration::uniform(params.n, init);
}

}  // namespace

GibbsSampler::GibbsSampler(const GibbsParams& params, std::uint64_t seed, std::uint64_t chain_index)
    : GibbsSampler(params, seed, chain_index, initial_state(params, seed, chain_index)) {}

GibbsSampler::GibbsSampler(const GibbsParams& params, std::uint64_t seed, std::uint64_t chain_index,
                           const VortexConfiguration& start)
    : params_(params), swap_rng_(seed, stream_id(chain_index, 0xC0FFEEull)) {
  params_.validate();
  if (start.size() != params_.n) throw ArgumentError("start configuration has the wrong size");
  std::vector<double> betas = params_.ladder.empty() ? std::vector<double>{params_.beta} : params_.ladder;
  std::sort(betas.begin(), betas.end());
  const double h = hamiltonian(start);
  for (std::size_t k = 0; k < betas.size(); ++k) {
    replicas_.push_back({betas[k], start, h, Rng(seed, stream_id(chain_index, k + 1))});
    if (betas[k] == params_.beta) target_ = k;
  }
  for (std::size_t i = 0; i < start.size(); ++i) (start.intensity(i) > 0 ? positive_ : negative_).push_back(i);
  if (positive_.empty() || negative_.empty()) params_.weights.swap = 0.0;
}

void GibbsSampler::step(Replica& r) {
  const std::size_t n = params_.n;
  const auto& w = params_.weights;
  const double total = w.local + w.redraw + w.swap;
  const double u = r.rng.uniform() * total;
  const auto& x = r.config.positions();
  const auto& xi = r.config.intensities();
  const double scale = r.beta / static_cast<double>(n);

  auto accept = [&](double dh) {
    if (r.beta == 0.0) return true;
    const double a = metropolis_acceptance(-scale * dh);
    return a >= 1.0 || r.rng.uniform() < a;
  };

  if (u < w.local + w.redraw) {
    const bool local = u < w.local;
    MoveStats& ms = local ? stats_.local : stats_.redraw;
    ms.proposed++;
    const std::size_t i = r.rng.below(n);
    Vec2 to;
    if (local) {
      const double dx = r.rng.normal(), dy = r.rng.normal();
      to = x[i] + params_.proposal_scale * Vec2{dx, dy};
      if (!(norm_sq(to) < kRadiusSq)) return;
    } else {
      to = r.rng.disk_point();
    }
    double dh = 0.0;
    if (r.beta != 0.0) {
      try {
        dh = kernels::delta_energy_move(x, xi, i, to);
      } catch (const SingularConfiguration&) {
        return;
      }
    }
    if (accept(dh)) {
      r.config.set_position(i, to);
      r.energy += dh;
      ms.accepted++;
    }
  } else {
    stats_.swap.proposed++;
    const std::size_t a = positive_[r.rng.below(positive_.size())];
    const std::size_t b = negative_[r.rng.below(negative_.size())];
    const double dh = r.beta != 0.0 ? kernels::delta_energy_swap(x, xi, a, b) : 0.0;
    if (accept(dh)) {
      r.config.swap_positions(a, b);
      r.energy += dh;
      stats_.swap.accepted++;
    }
  }
}

void GibbsSampler::step() {
  for (auto& r : replicas_) step(r);
}

void GibbsSampler::temper() {
  const double inv_n = 1.0 / static_cast<double>(params_.n);
  for (std::size_t k = 0; k + 1 < replicas_.size(); ++k) {
    Replica& a = replicas_[k];
    Replica& b = replicas_[k + 1];
    a.energy = hamiltonian(a.config);
    b.energy = hamiltonian(b.config);
    stats_.tempering.proposed++;
    const double acc = metropolis_acceptance((a.beta - b.beta) * (a.energy - b.energy) * inv_n);
    if (acc >= 1.0 || swap_rng_.uniform() < acc) {
      std::swap(a.config, b.config);
      std::swap(a.energy, b.energy);
      stats_.tempering.accepted++;
    }
  }
}

void GibbsSampler::sweep() {
  for (std::size_t s = 0; s < params_.n; ++s) step();
  if (replicas_.size() > 1) temper();
}

void GibbsSampler::run(const Visitor& visit) {
  for (std::size_t s = 0; s < params_.burn_in; ++s) sweep();
  std::vector<double> series;
  series.reserve(params_.samples);
  for (std::size_t k = 0; k < params_.samples; ++k) {
    for (std::size_t t = 0; t < params_.thinning; ++t) sweep();
    Replica& r = replicas_[target_];
    r.energy = hamiltonian(r.config);
    series.push_back(r.energy / static_cast<double>(params_.n));
    visit(r.config, r.energy, k);
  }
  stats_.tau_energy = stats::integrated_autocorrelation_time(series);
  stats_.ess_energy = static_cast<double>(series.size()) / stats_.tau_energy;
}

std::vector<VortexConfiguration> GibbsSampler::run() {
  std::vector<VortexConfiguration> out;
  out.reserve(params_.samples);
  run([&](const VortexConfiguration& c, double, std::size_t) { out.push_back(c); });
  return out;
}

stats::Estimate partition_ratio(double beta, std::size_t n, std::size_t sample_count, std::uint64_t seed) {
  if (sample_count == 0) throw ArgumentError("partition_ratio: sample_count must be positive");
  if (!(beta >= 0.0) || !(beta < kTwoPi * static_cast<double>(n))) throw ArgumentError("beta outside window");
  if (n == 0 || n % 2 != 0) throw ArgumentError("N must be even and positive");
  if (beta == 0.0) return {1.0, 0.0};
  std::vector<double> w(sample_count);
  const auto count = static_cast<std::ptrdiff_t>(sample_count);
  const double scale = beta / static_cast<double>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    Rng rng(seed, stream_id(0x9A27ull, static_cast<std::uint64_t>(s)));
    std::vector<Vec2> x(n);
    for (auto& p : x) p = rng.disk_point();
    const auto xi = VortexConfiguration::balanced_intensities(n);
    double h = 0.0;
    try {
      h = kernels::serial::pair_energy(x, xi) + kernels::serial::self_energy(x, xi);
    } catch (const SingularConfiguration&) {
      h = 0.0;  // probability-zero event; counted at the neutral value
    }
    w[static_cast<std::size_t>(s)] = std::exp(-scale * h);
  }
  return {stats::mean(w), stats::standard_error(w)};
}

double gbar() { return 0.5 * kRadiusSq * (std::log(kRadius) - 1.0); }

void write_stream_header(std::ostream& os) { os << "pvgas-configs 1\n"; }

void write_stream_record(std::ostream& os, const StreamRecord& rec) {
  os << "record " << rec.n << ' ' << format::hex(rec.beta) << ' ' << rec.seed << ' ' << rec.step << ' '
     << format::hex(rec.energy) << '\n';
  for (std::size_t i = 0; i < rec.config.size(); ++i) {
    const auto& p = rec.config.position(i);
    os << format::hex(p.x) << ' ' << format::hex(p.y) << ' ' << (rec.config.intensity(i) > 0 ? "+1" : "-1") << '\n';
  }
}

std::vector<StreamRecord> read_stream(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "pvgas-configs" || version != 1)
    throw ArgumentError("configuration stream: bad header");
  std::vector<StreamRecord> out;
  while (is >> tag) {
    if (tag != "record") throw ArgumentError("configuration stream: expected record");
    StreamRecord rec;
    std::string beta, energy;
    if (!(is >> rec.n >> beta >> rec.seed >> rec.step >> energy)) throw ArgumentError("configuration stream: truncated");
    rec.beta = format::parse_real(beta);
    rec.energy = format::parse_real(energy);
    std::vector<Vec2> x(rec.n);
    std::vector<double> xi(rec.n);
    for (std::size_t i = 0; i < rec.n; ++i) {
      std::string a, b, s;
      if (!(is >> a >> b >> s)) throw ArgumentError("configuration stream: truncated");
      x[i] = {format::parse_real(a), format::parse_real(b)};
      xi[i] = format::parse_real(s);
    }
    rec.config = VortexConfiguration::without_neutrality(std::move(x), std::move(xi));
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace pvgas::ensemble
