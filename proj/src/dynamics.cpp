#include "pvgas/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "pvgas/format.hpp"
#include "pvgas/kernels.hpp"

namespace pvgas::dynamics {

std::vector<Vec2> velocity(const VortexConfiguration& config) {
  std::vector<Vec2> v(config.size());
  kernels::velocity(config.positions(), config.intensities(), 1.0 / std::sqrt(static_cast<double>(config.size())), v);
  return v;
}

double angular_impulse(const VortexConfiguration& config) {
  std::vector<double> t(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) t[i] = config.intensity(i) * norm_sq(config.position(i));
  return stats::tree_sum(t);
}

std::vector<double> uniform_grid(double horizon, std::size_t count) {
  if (count == 0) throw ArgumentError("sample grid needs at least one interval");
  std::vector<double> t(count + 1);
  for (std::size_t k = 0; k <= count; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(count);
  t.back() = horizon;
  return t;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using State = std::vector<Vec2>;

struct System {
  std::vector<double> xi;
  double scale;

  bool admissible(const State& y, double min_sep) const {
    for (const auto& p : y)
      if (!(norm_sq(p) < kRadiusSq)) return false;
    if (min_sep > 0.0) {
      const double s2 = min_sep * min_sep;
      for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = i + 1; j < y.size(); ++j)
          if (norm_sq(y[i] - y[j]) < s2) return false;
    }
    return true;
  }

  void rhs(const State& y, State& out) const { kernels::velocity(y, xi, scale, out); }
};

void combine(State& out, const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    Vec2 acc{0.0, 0.0};
    for (const auto& [c, k] : terms)
      if (c != 0.0) acc += c * (*k)[i];
    out[i] = y[i] + h * acc;
  }
}

void record_sample(TrajectoryRecord& rec, double t, const State& y) {
  const VortexConfiguration c = VortexConfiguration::without_neutrality(y, rec.intensities);
  rec.times.push_back(t);
  rec.states.push_back(y);
  rec.energy.push_back(ensemble::hamiltonian(c));
  rec.impulse.push_back(angular_impulse(c));
  rec.min_pair.push_back(y.size() > 1 ? c.min_pair_distance() : std::numeric_limits<double>::infinity());
  rec.min_boundary.push_back(c.min_boundary_distance());
}

}  // namespace

TrajectoryRecord integrate(const VortexConfiguration& config, double horizon, const Tolerances& tol,
                           const std::vector<double>& sample_times) {
  if (!(horizon > 0.0)) throw ArgumentError("integration horizon must be positive");
  if (sample_times.empty() || sample_times.front() != 0.0) throw ArgumentError("sample grid must start at 0");
  for (std::size_t k = 1; k < sample_times.size(); ++k)
    if (!(sample_times[k] > sample_times[k - 1])) throw ArgumentError("sample times must increase strictly");
  if (sample_times.back() > horizon) throw ArgumentError("sample time beyond the horizon");

  TrajectoryRecord rec;
  rec.n = config.size();
  rec.horizon = horizon;
  rec.tolerances = tol;
  rec.intensities = config.intensities();
  System sys{config.intensities(), 1.0 / std::sqrt(static_cast<double>(config.size()))};

  const std::size_t n = config.size();
  State y = config.positions(), y1(n), tmp(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  sys.rhs(y, k1);
  record_sample(rec, 0.0, y);
  std::size_t next = 1;
  double t = 0.0, h = std::min(tol.initial_step, horizon);

  while (t < horizon) {
    if (t + h > horizon) h = horizon - t;
    bool ok = true;
    double err = 0.0;
    try {
      combine(tmp, y, h, {{a21, &k1}});
      if (!sys.admissible(tmp, 0.0)) throw std::range_error("stage");
      sys.rhs(tmp, k2);
      combine(tmp, y, h, {{a31, &k1}, {a32, &k2}});
      if (!sys.admissible(tmp, 0.0)) throw std::range_error("stage");
      sys.rhs(tmp, k3);
      combine(tmp, y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
      if (!sys.admissible(tmp, 0.0)) throw std::range_error("stage");
      sys.rhs(tmp, k4);
      combine(tmp, y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
      if (!sys.admissible(tmp, 0.0)) throw std::range_error("stage");
      sys.rhs(tmp, k5);
      combine(tmp, y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
      if (!sys.admissible(tmp, 0.0)) throw std::range_error("stage");
      sys.rhs(tmp, k6);
      combine(y1, y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      if (!sys.admissible(y1, tol.min_separation)) throw std::range_error("step");
      sys.rhs(y1, k7);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sx = tol.atol + tol.rtol * std::max(std::abs(y[i].x), std::abs(y1[i].x));
        const double sy = tol.atol + tol.rtol * std::max(std::abs(y[i].y), std::abs(y1[i].y));
        s += (e.x / sx) * (e.x / sx) + (e.y / sy) * (e.y / sy);
      }
      err = std::sqrt(s / static_cast<double>(2 * n));
      ok = std::isfinite(err) && err <= 1.0;
    } catch (const std::range_error&) {
      ok = false;
      err = std::numeric_limits<double>::infinity();
    } catch (const SingularConfiguration&) {
      ok = false;
      err = std::numeric_limits<double>::infinity();
    }

    if (!ok) {
      rec.rejections++;
      h *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
      if (h < tol.min_step) throw BlowUp(t);
      continue;
    }

    const double t1 = t + h;
    while (next < sample_times.size() && sample_times[next] <= t1) {
      const double ts = sample_times[next];
      State ys(n);
      if (ts == t1) {
        ys = y1;
      } else {
        const double th = (ts - t) / h, th2 = th * th, th3 = th2 * th;
        const double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + th, h01 = -2 * th3 + 3 * th2,
                     h11 = th3 - th2;
        for (std::size_t i = 0; i < n; ++i) ys[i] = h00 * y[i] + (h10 * h) * k1[i] + h01 * y1[i] + (h11 * h) * k7[i];
      }
      record_sample(rec, ts, ys);
      ++next;
    }
    rec.steps++;
    if (tol.max_steps != 0 && rec.steps >= tol.max_steps && t1 < horizon - 1e-15 * horizon)
      throw BlowUp(t1, "step budget exhausted");
    t = (t1 >= horizon - 1e-15 * horizon) ? horizon : t1;
    y.swap(y1);
    k1.swap(k7);
    const double fac = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
    h *= fac;
  }
  const double drift = rec.max_energy_drift();
  rec.conservative = drift <= tol.drift_limit;
  return rec;
}

VortexConfiguration TrajectoryRecord::state(std::size_t k) const {
  return VortexConfiguration::without_neutrality(states.at(k), intensities);
}

double TrajectoryRecord::max_energy_drift() const {
  if (energy.empty()) return 0.0;
  const double ref = std::max(1.0, std::abs(energy.front()));
  double d = 0.0;
  for (double e : energy) d = std::max(d, std::abs(e - energy.front()) / ref);
  return d;
}

double TrajectoryRecord::max_impulse_drift() const {
  double d = 0.0;
  for (double e : impulse) d = std::max(d, std::abs(e - impulse.front()));
  return d;
}

void TrajectoryRecord::save(std::ostream& os) const {
  using format::hex;
  os << "pvgas-trajectory 1\n";
  os << "n " << n << "\nbeta " << hex(beta) << "\nseed " << seed << "\nhorizon " << hex(horizon) << "\n";
  os << "tolerances " << hex(tolerances.rtol) << ' ' << hex(tolerances.atol) << ' ' << hex(tolerances.min_step) << ' '
     << hex(tolerances.initial_step) << ' ' << hex(tolerances.drift_limit) << ' ' << hex(tolerances.min_separation)
     << ' ' << tolerances.max_steps << "\n";
  os << "steps " << steps << "\nrejections " << rejections << "\nconservative " << (conservative ? 1 : 0) << "\n";
  os << "intensities";
  for (double v : intensities) os << ' ' << (v > 0 ? "+1" : "-1");
  os << "\nsamples " << times.size() << "\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << hex(times[k]) << ' ' << hex(energy[k]) << ' ' << hex(impulse[k]) << ' ' << hex(min_pair[k]) << ' '
       << hex(min_boundary[k]);
    for (const auto& p : states[k]) os << ' ' << hex(p.x) << ' ' << hex(p.y);
    os << '\n';
  }
}

TrajectoryRecord TrajectoryRecord::load(std::istream& is) {
  using format::parse_real;
  TrajectoryRecord r;
  std::string tag, a;
  int version = 0;
  auto expect = [&](const char* name) {
    if (!(is >> tag) || tag != name) throw ArgumentError(std::string("trajectory file: expected ") + name);
  };
  auto real = [&]() {
    if (!(is >> a)) throw ArgumentError("trajectory file: truncated");
    return parse_real(a);
  };
  if (!(is >> tag >> version) || tag != "pvgas-trajectory" || version != 1)
    throw ArgumentError("trajectory file: bad header");
  expect("n");
  is >> r.n;
  expect("beta");
  r.beta = real();
  expect("seed");
  is >> r.seed;
  expect("horizon");
  r.horizon = real();
  expect("tolerances");
  r.tolerances.rtol = real();
  r.tolerances.atol = real();
  r.tolerances.min_step = real();
  r.tolerances.initial_step = real();
  r.tolerances.drift_limit = real();
  r.tolerances.min_separation = real();
  is >> r.tolerances.max_steps;
  int cons = 0;
  expect("steps");
  is >> r.steps;
  expect("rejections");
  is >> r.rejections;
  expect("conservative");
  is >> cons;
  r.conservative = cons != 0;
  expect("intensities");
  r.intensities.resize(r.n);
  for (auto& v : r.intensities) v = real();
  std::size_t count = 0;
  expect("samples");
  if (!(is >> count)) throw ArgumentError("trajectory file: truncated");
  for (std::size_t k = 0; k < count; ++k) {
    r.times.push_back(real());
    r.energy.push_back(real());
    r.impulse.push_back(real());
    r.min_pair.push_back(real());
    r.min_boundary.push_back(real());
    std::vector<Vec2> s(r.n);
    for (auto& p : s) {
      p.x = real();
      p.y = real();
    }
    r.states.push_back(std::move(s));
  }
  return r;
}

void TrajectoryRecord::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  save(os);
}

TrajectoryRecord TrajectoryRecord::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load(is);
}

bool InvarianceReport::any_rejection(double level) const {
  for (const auto& r : rows)
    if (r.ks.p_value < level) return true;
  return false;
}

std::vector<VortexConfiguration> gibbs_initial_states(const ensemble::GibbsParams& params, std::size_t members,
                                                      std::uint64_t seed) {
  params.validate();
  std::vector<VortexConfiguration> out(members);
  if (params.beta == 0.0) {
    for (std::size_t m = 0; m < members; ++m) {
      Rng rng(seed, stream_id(0xBE7Aull, m));
      out[m] = VortexConfiguration::uniform(params.n, rng);
    }
    return out;
  }
  constexpr std::size_t kChains = 8;
  const auto chains = static_cast<std::ptrdiff_t>(std::min(kChains, members));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < chains; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const std::size_t lo = cc * members / static_cast<std::size_t>(chains);
    const std::size_t hi = (cc + 1) * members / static_cast<std::size_t>(chains);
    ensemble::GibbsParams p = params;
    p.samples = hi - lo;
    ensemble::GibbsSampler sampler(p, seed, stream_id(0xC4A1ull, cc));
    sampler.run([&](const VortexConfiguration& s, double, std::size_t k) { out[lo + k] = s; });
  }
  return out;
}

InvarianceReport invariance_experiment(const ensemble::GibbsParams& params, double horizon, std::size_t members,
                                       std::uint64_t seed, const std::vector<std::pair<std::string, Observable>>& obs,
                                       const Tolerances& tol) {
  if (members < 2) throw ArgumentError("invariance experiment needs at least two members");
  const auto init = gibbs_initial_states(params, members, seed);
  InvarianceReport rep;
  rep.members = members;
  std::vector<std::vector<double>> at0(obs.size(), std::vector<double>(members)),
      at1(obs.size(), std::vector<double>(members));
  std::vector<char> failed(members, 0);
  const auto m = static_cast<std::ptrdiff_t>(members);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    VortexConfiguration end = init[ii];
    if (horizon > 0.0) {
      try {
        const auto rec = integrate(init[ii], horizon, tol, {0.0, horizon});
        end = rec.state(rec.times.size() - 1);
      } catch (const BlowUp&) {
        failed[ii] = 1;
        continue;
      }
    }
    for (std::size_t k = 0; k < obs.size(); ++k) {
      at0[k][ii] = obs[k].second(init[ii]);
      at1[k][ii] = obs[k].second(end);
    }
  }
  for (std::size_t k = 0; k < obs.size(); ++k) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < members; ++i) {
      if (failed[i]) continue;
      a.push_back(at0[k][i]);
      b.push_back(at1[k][i]);
    }
    rep.rows.push_back({obs[k].first, stats::ks_two_sample(a, b)});
  }
  rep.blowups = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  return rep;
}

}  // namespace pvgas::dynamics
