#include "pvgas/harness/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pvgas/dynamics.hpp"
#include "pvgas/ensemble.hpp"
#include "pvgas/fluctuation.hpp"
#include "pvgas/format.hpp"
#include "pvgas/gaussianfield.hpp"
#include "pvgas/geometry.hpp"
#include "pvgas/harness/manifest.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/rng.hpp"
#include "pvgas/spectral.hpp"
#include "pvgas/stats.hpp"
#include "pvgas/test_functions.hpp"

namespace fs = std::filesystem;

namespace pvgas::harness {

// ---------------------------------------------------------------- tables

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("table row width mismatch");
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string cell(double v) { return format::decimal(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

// ---------------------------------------------------------------- checkpoint

namespace {

constexpr const char* kCheckpointMagic = "pvgas-checkpoint 1";

}  // namespace

Checkpoint::Checkpoint(std::string path, std::string experiment, std::string run_key, bool resume)
    : path_(std::move(path)) {
  const std::string header = std::string(kCheckpointMagic) + "\n" + experiment + " " + run_key + "\n";
  if (resume && fs::exists(path_)) {
    std::ifstream is(path_);
    std::string magic, id;
    std::getline(is, magic);
    std::getline(is, id);
    if (magic != kCheckpointMagic || id != experiment + " " + run_key)
      throw ConfigError("checkpoint " + path_ + " belongs to a different run (experiment, config or seed differ)");
    std::string line;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::size_t unit = 0, count = 0;
      if (!(ls >> unit >> count)) break;  // torn trailing line from an interrupted write
      std::vector<double> p(count);
      bool ok = true;
      for (auto& v : p) {
        std::string tok;
        if (!(ls >> tok)) {
          ok = false;
          break;
        }
        v = format::parse_real(tok);
      }
      std::string end;
      if (!ok || !(ls >> end) || end != ";") break;
      payloads_[unit] = std::move(p);
    }
    // rewrite so that any torn tail is dropped
    std::ofstream os(path_, std::ios::trunc);
    os << header;
    for (const auto& [u, p] : payloads_) {
      os << u << ' ' << p.size();
      for (double v : p) os << ' ' << format::hex(v);
      os << " ;\n";
    }
    if (!os) throw std::runtime_error("cannot write " + path_);
    return;
  }
  std::ofstream os(path_, std::ios::trunc);
  os << header;
  if (!os) throw std::runtime_error("cannot write " + path_);
}

void Checkpoint::record(std::size_t unit, const std::vector<double>& payload) {
  std::ostringstream line;
  line << unit << ' ' << payload.size();
  for (double v : payload) line << ' ' << format::hex(v);
  line << " ;\n";
  std::ofstream os(path_, std::ios::app);
  os << line.str();
  os.flush();
  if (!os) throw std::runtime_error("cannot append to " + path_);
  payloads_[unit] = payload;
}

// ---------------------------------------------------------------- schemas

namespace {

KeySpec key(std::string name, ValueType t, std::string def, std::string help) {
  return {std::move(name), t, std::move(def), std::move(help)};
}

using VT = ValueType;

Schema chain_keys() {
  return {key("burn_in", VT::kInt, "200", "burn-in sweeps"),
          key("thinning", VT::kInt, "5", "sweeps between retained states"),
          key("proposal_scale", VT::kReal, "0.05", "local move scale in units of R")};
}

Schema with_chain_keys(Schema s) {
  for (auto& k : chain_keys()) s.push_back(k);
  return s;
}

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> m = {
      {"sample",
       {key("n", VT::kInt, "20", "number of vortices"), key("beta", VT::kReal, "0", "inverse temperature"),
        key("samples", VT::kInt, "1000", "retained states per chain"),
        key("burn_in", VT::kInt, "100", "burn-in sweeps"), key("thinning", VT::kInt, "1", "sweeps between samples"),
        key("proposal_scale", VT::kReal, "0.05", "local move scale"), key("chains", VT::kInt, "4", "chains"),
        key("ladder", VT::kRealList, "", "tempering ladder (must contain beta)")}},
      {"evolve", with_chain_keys({key("n", VT::kInt, "20", "number of vortices"),
                                  key("beta", VT::kReal, "0", "inverse temperature"),
                                  key("members", VT::kInt, "16", "ensemble members"),
                                  key("horizon", VT::kReal, "1", "final time"),
                                  key("grid", VT::kInt, "100", "sample intervals"),
                                  key("rtol", VT::kReal, "1e-10", "relative tolerance"),
                                  key("atol", VT::kReal, "1e-10", "absolute tolerance"),
                                  key("max_steps", VT::kInt, "0", "step budget per member, 0 = unlimited"),
                                  key("save_trajectories", VT::kInt, "4", "members written as trajectory files")})},
      {"clt", with_chain_keys({key("n", VT::kInt, "50", "number of vortices"),
                               key("beta", VT::kReal, "0", "inverse temperature"),
                               key("samples", VT::kInt, "10000", "states"),
                               key("modes", VT::kInt, "2000", "basis truncation K"),
                               key("chains", VT::kInt, "8", "chains when beta > 0")})},
      {"norms", with_chain_keys({key("n_list", VT::kIntList, "50,100,200,400", "N ladder"),
                                 key("beta_list", VT::kRealList, "0,1", "inverse temperatures"),
                                 key("delta", VT::kReal, "0.5", "Sobolev exponent offset"),
                                 key("p_list", VT::kRealList, "1,2", "moments"),
                                 key("samples", VT::kInt, "2000", "states per cell"),
                                 key("modes", VT::kInt, "2000", "basis truncation K"),
                                 key("chains", VT::kInt, "8", "chains when beta > 0")})},
      {"bilinear", with_chain_keys({key("n_list", VT::kIntList, "50,100,200,400", "N ladder"),
                                    key("beta_list", VT::kRealList, "1", "inverse temperatures"),
                                    key("kernels", VT::kIntList, "0,1", "fixed admissible kernel ids"),
                                    key("samples", VT::kInt, "2000", "states per cell"),
                                    key("chains", VT::kInt, "8", "chains when beta > 0")})},
      {"weakres", with_chain_keys({key("n", VT::kInt, "20", "number of vortices"),
                                   key("beta", VT::kReal, "0", "inverse temperature"),
                                   key("members", VT::kInt, "1", "trajectories"),
                                   key("horizon", VT::kReal, "0.5", "final time"),
                                   key("grid", VT::kInt, "1000", "sample intervals (even)"),
                                   key("rtol", VT::kReal, "1e-10", "relative tolerance"),
                                   key("atol", VT::kReal, "1e-10", "absolute tolerance"),
                                   key("max_steps", VT::kInt, "0", "step budget per member, 0 = unlimited")})},
      {"limit", with_chain_keys({key("n_list", VT::kIntList, "20,40,80", "N ladder"),
                                 key("beta", VT::kReal, "0", "inverse temperature"),
                                 key("members", VT::kInt, "200", "trajectories per N"),
                                 key("horizon", VT::kReal, "1", "final time"),
                                 key("grid", VT::kInt, "4", "comparison intervals"),
                                 key("rtol", VT::kReal, "1e-8", "relative tolerance"),
                                 key("atol", VT::kReal, "1e-8", "absolute tolerance"),
                                 key("max_steps", VT::kInt, "0", "step budget per member, 0 = unlimited")})},
      {"partition", {key("n_list", VT::kIntList, "20,50,100,200", "N ladder"),
                     key("beta", VT::kReal, "1", "inverse temperature"),
                     key("samples", VT::kInt, "100000", "uniform draws per N"),
                     key("blocks", VT::kInt, "16", "work units per N"),
                     key("modes", VT::kInt, "400", "truncation K of the determinant formula")}},
      {"selftest", {key("modes", VT::kInt, "300", "basis size for the spectral checks")}},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"sample", "evolve",  "clt",       "norms",   "bilinear",
                                             "weakres", "limit", "partition", "selftest"};
  return s;
}

const Schema& schema_for(const std::string& subcommand) {
  const auto it = schemas().find(subcommand);
  if (it == schemas().end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

// ---------------------------------------------------------------- runner

namespace {

class InvariantFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  const RunOptions& opt;
  Config cfg;
  fs::path dir;
  std::ostream& out;
  std::ostream& log;
  std::unique_ptr<Checkpoint> ckpt;
  Table table;
  std::map<std::string, std::string> summary;
  std::vector<std::string> artifacts;
  int exit_code = kOk;
  std::string failure;

  void fail(int code, const std::string& why) {
    if (code > exit_code) exit_code = code;
    if (!failure.empty()) failure += "; ";
    failure += why;
  }
};

using Unit = std::function<std::vector<double>(std::size_t)>;

std::vector<std::vector<double>> run_units(Context& c, std::size_t count, const Unit& unit) {
  std::vector<std::size_t> pending;
  for (std::size_t u = 0; u < count; ++u)
    if (!c.ckpt->done(u)) pending.push_back(u);
  if (pending.size() < count) c.log << "resume: " << count - pending.size() << " of " << count << " units done\n";
  const std::size_t batch = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  for (std::size_t b = 0; b < pending.size(); b += batch) {
    const std::size_t e = std::min(pending.size(), b + batch);
    std::vector<std::vector<double>> out(e - b);
    std::vector<std::exception_ptr> err(e - b);
    const auto n = static_cast<std::ptrdiff_t>(e - b);
    if (n == 1) {
      out[0] = unit(pending[b]);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
          out[static_cast<std::size_t>(i)] = unit(pending[b + static_cast<std::size_t>(i)]);
        } catch (...) {
          err[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
      for (auto& x : err)
        if (x) std::rethrow_exception(x);
    }
    for (std::size_t i = 0; i < out.size(); ++i) c.ckpt->record(pending[b + i], out[i]);
  }
  std::vector<std::vector<double>> all(count);
  for (std::size_t u = 0; u < count; ++u) all[u] = c.ckpt->payload(u);
  return all;
}

std::vector<std::size_t> split(std::size_t total, std::size_t parts) {
  parts = std::max<std::size_t>(1, std::min(parts, std::max<std::size_t>(1, total)));
  std::vector<std::size_t> s(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++s[i];
  return s;
}

ensemble::GibbsParams gibbs_params(const Config& cfg, std::size_t n, double beta) {
  ensemble::GibbsParams p;
  p.n = n;
  p.beta = beta;
  p.burn_in = cfg.count("burn_in");
  p.thinning = std::max<std::size_t>(1, cfg.count("thinning"));
  p.proposal_scale = cfg.real("proposal_scale");
  p.validate();
  return p;
}

std::size_t block_count(double beta, std::size_t samples, std::size_t chains) {
  return beta == 0.0 ? std::max<std::size_t>(1, (samples + 499) / 500) : std::max<std::size_t>(1, chains);
}

/// States for work unit `block`: exact uniform draws at beta = 0, otherwise one Metropolis chain.
std::vector<ensemble::VortexConfiguration> draw_block(const ensemble::GibbsParams& params, std::size_t block,
                                                      std::size_t count, std::uint64_t seed) {
  std::vector<ensemble::VortexConfiguration> out;
  out.reserve(count);
  const std::uint64_t stream = stream_id(0xB10Cull, block);
  if (params.beta == 0.0) {
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng(seed, stream_id(stream, i));
      out.push_back(ensemble::VortexConfiguration::uniform(params.n, rng));
    }
    return out;
  }
  ensemble::GibbsParams p = params;
  p.samples = count;
  ensemble::GibbsSampler chain(p, seed, stream);
  chain.run([&](const ensemble::VortexConfiguration& c, double, std::size_t) { out.push_back(c); });
  return out;
}

std::string cell_or_empty(bool has, double v) { return has ? cell(v) : std::string(); }

dynamics::Tolerances tolerances(const Config& cfg) {
  dynamics::Tolerances t;
  t.rtol = cfg.real("rtol");
  t.atol = cfg.real("atol");
  t.max_steps = cfg.count("max_steps");
  return t;
}

double slope_ci_payload(const stats::LinearFit& f, Table& t, std::vector<std::string> prefix) {
  prefix.push_back(cell(f.slope));
  prefix.push_back(cell(f.slope_stderr));
  prefix.push_back(cell(f.ci_low));
  prefix.push_back(cell(f.ci_high));
  prefix.push_back(cell(f.ci_contains(0.0)));
  t.add(std::move(prefix));
  return f.slope;
}

void write_text(Context& c, const std::string& name, const std::string& text) {
  std::ofstream os(c.dir / name, std::ios::binary | std::ios::trunc);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + (c.dir / name).string());
  c.artifacts.push_back(name);
}

// ---------------------------------------------------------------- sample

void exp_sample(Context& c) {
  const auto& cfg = c.cfg;
  ensemble::GibbsParams p;
  p.n = cfg.count("n");
  p.beta = cfg.real("beta");
  p.samples = cfg.count("samples");
  p.burn_in = cfg.count("burn_in");
  p.thinning = std::max<std::size_t>(1, cfg.count("thinning"));
  p.proposal_scale = cfg.real("proposal_scale");
  p.ladder = cfg.reals("ladder");
  p.validate();
  const std::size_t chains = std::max<std::size_t>(1, cfg.count("chains"));
  const auto payloads = run_units(c, chains, [&](std::size_t k) {
    ensemble::GibbsSampler chain(p, c.opt.seed, k);
    std::vector<double> states;
    chain.run([&](const ensemble::VortexConfiguration& s, double energy, std::size_t) {
      states.push_back(energy);
      for (const auto& x : s.positions()) {
        states.push_back(x.x);
        states.push_back(x.y);
      }
    });
    const auto& st = chain.stats();
    std::vector<double> out;
    for (const auto* m : {&st.local, &st.redraw, &st.swap, &st.tempering}) {
      out.push_back(static_cast<double>(m->proposed));
      out.push_back(static_cast<double>(m->accepted));
    }
    out.push_back(st.ess_energy);
    out.push_back(st.tau_energy);
    out.insert(out.end(), states.begin(), states.end());
    return out;
  });

  c.table.header = {"chain", "N", "beta", "samples", "mean_energy_per_n", "stderr", "ess", "tau",
                    "acc_local", "acc_redraw", "acc_swap", "acc_tempering", "seed"};
  std::ostringstream stream;
  ensemble::write_stream_header(stream);
  const auto xi = ensemble::VortexConfiguration::balanced_intensities(p.n);
  const std::size_t row = 1 + 2 * p.n;
  for (std::size_t k = 0; k < chains; ++k) {
    const auto& v = payloads[k];
    auto rate = [&](std::size_t i) { return v[2 * i] > 0 ? v[2 * i + 1] / v[2 * i] : 0.0; };
    std::vector<double> e;
    for (std::size_t s = 0; s < p.samples; ++s) {
      const std::size_t o = 10 + s * row;
      e.push_back(v[o] / static_cast<double>(p.n));
      std::vector<Vec2> pos(p.n);
      for (std::size_t i = 0; i < p.n; ++i) pos[i] = {v[o + 1 + 2 * i], v[o + 2 + 2 * i]};
      if (!std::isfinite(v[o])) c.fail(kNumericAbort, "non-finite energy");
      ensemble::StreamRecord rec;
      rec.n = p.n;
      rec.beta = p.beta;
      rec.seed = c.opt.seed;
      rec.step = k * p.samples + s;
      rec.energy = v[o];
      rec.config = ensemble::VortexConfiguration(std::move(pos), xi);
      ensemble::write_stream_record(stream, rec);
    }
    const auto est = stats::mean_with_ess(e);
    c.table.add({cell(k), cell(p.n), cell(p.beta), cell(p.samples), cell(est.value), cell(est.std_error), cell(v[8]),
                 cell(v[9]), cell(rate(0)), cell(rate(1)), cell(rate(2)), cell(rate(3)), cell(c.opt.seed)});
    c.summary["acceptance_chain_" + std::to_string(k)] =
        format::decimal(rate(0)) + "/" + format::decimal(rate(1)) + "/" + format::decimal(rate(2));
  }
  write_text(c, "configurations.dat", stream.str());
  c.summary["proposal_weights"] = "local=0.6 redraw=0.3 swap=0.1";
}

// ---------------------------------------------------------------- evolve

void exp_evolve(Context& c) {
  const auto& cfg = c.cfg;
  const auto p = gibbs_params(cfg, cfg.count("n"), cfg.real("beta"));
  const std::size_t members = cfg.count("members");
  const double T = cfg.real("horizon");
  const auto grid = dynamics::uniform_grid(T, std::max<std::size_t>(1, cfg.count("grid")));
  const auto tol = tolerances(cfg);
  const std::size_t save = cfg.count("save_trajectories");
  const auto initial = dynamics::gibbs_initial_states(p, members, c.opt.seed);
  const auto payloads = run_units(c, members, [&](std::size_t k) {
    try {
      auto rec = dynamics::integrate(initial[k], T, tol, grid);
      rec.beta = p.beta;
      rec.seed = c.opt.seed;
      if (k < save) rec.save_file((c.dir / ("trajectory_" + std::to_string(k) + ".dat")).string());
      double min_pair = kRadius;
      for (double d : rec.min_pair) min_pair = std::min(min_pair, d);
      const double n = static_cast<double>(p.n);
      return std::vector<double>{0.0, T, rec.max_energy_drift(), rec.max_impulse_drift(),
                                 static_cast<double>(rec.steps), static_cast<double>(rec.rejections),
                                 rec.conservative ? 1.0 : 0.0, rec.energy.front() / n, rec.energy.back() / n, min_pair};
    } catch (const dynamics::BlowUp& b) {
      return std::vector<double>{1.0, b.time, 0, 0, 0, 0, 0, 0, 0, 0};
    }
  });
  for (std::size_t k = 0; k < std::min(save, members); ++k)
    if (payloads[k][0] == 0.0) c.artifacts.push_back("trajectory_" + std::to_string(k) + ".dat");
  c.table.header = {"member",        "N",     "beta",       "horizon",      "blowup", "blowup_time",
                    "energy_drift",  "impulse_drift", "steps", "rejections", "conservative",
                    "energy_per_n_0", "energy_per_n_T", "min_pair_distance", "seed"};
  std::size_t blowups = 0, flagged = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < members; ++k) {
    const auto& v = payloads[k];
    const bool blew = v[0] != 0.0;
    blowups += blew;
    if (!blew && v[6] == 0.0) ++flagged;
    if (!blew) worst = std::max(worst, v[2]);
    c.table.add({cell(k), cell(p.n), cell(p.beta), cell(T), cell(blew), cell(v[1]), cell(v[2]), cell(v[3]),
                 cell(v[4]), cell(v[5]), cell(v[6] != 0.0), cell(v[7]), cell(v[8]), cell(v[9]), cell(c.opt.seed)});
  }
  c.summary["blowups"] = std::to_string(blowups);
  c.summary["non_conservative"] = std::to_string(flagged);
  c.summary["max_energy_drift"] = format::decimal(worst);
  if (2 * blowups > members) c.fail(kNumericAbort, "blow-up-dominated run");
  if (flagged) c.fail(kInvariantFailure, std::to_string(flagged) + " members exceed the energy drift limit");
}

// ---------------------------------------------------------------- clt

void exp_clt(Context& c) {
  const auto& cfg = c.cfg;
  const auto p = gibbs_params(cfg, cfg.count("n"), cfg.real("beta"));
  const std::size_t total = cfg.count("samples");
  const auto sizes = split(total, block_count(p.beta, total, cfg.count("chains")));
  const auto tests = TestFunction::defaults();
  const auto payloads = run_units(c, sizes.size(), [&](std::size_t b) {
    std::vector<double> out;
    for (const auto& s : draw_block(p, b, sizes[b], c.opt.seed))
      for (const auto& f : tests) out.push_back(fluctuation::pair_with(s, f));
    return out;
  });
  std::vector<std::vector<double>> X(tests.size());
  for (const auto& v : payloads)
    for (std::size_t i = 0; i < v.size(); ++i) X[i % tests.size()].push_back(v[i]);
  spectral::BasisOptions bo;
  bo.modes = cfg.count("modes");
  const auto basis = spectral::SpectralBasis::build(bo);
  const auto r = fluctuation::clt_summarize(X, p.beta, tests, basis);
  c.summary["basis_modes"] = std::to_string(basis.size());
  c.summary["quadrature_order"] = std::to_string(basis.quadrature().order());
  const std::size_t m = tests.size();
  c.table.header = {"N", "beta", "phi_a", "phi_b", "estimate", "stderr", "samples", "q_beta", "gibbs_limit",
                    "exact_uniform", "z_gibbs", "ks_statistic", "ks_p_value", "modes", "seed"};
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      const std::size_t i = a * m + b;
      const double z = r.covariance_stderr[i] > 0
                           ? std::abs(r.covariance[i] - r.gibbs_limit[i]) / r.covariance_stderr[i]
                           : 0.0;
      const bool diag = a == b;
      c.table.add({cell(p.n), cell(p.beta), r.names[a], r.names[b], cell(r.covariance[i]),
                   cell(r.covariance_stderr[i]), cell(r.samples), cell(r.q_beta[i]), cell(r.gibbs_limit[i]),
                   cell_or_empty(p.beta == 0.0, r.exact_uniform.empty() ? 0.0 : r.exact_uniform[i]), cell(z),
                   cell_or_empty(diag, diag ? r.normality[a].statistic : 0.0),
                   cell_or_empty(diag, diag ? r.normality[a].p_value : 0.0), cell(basis.size()), cell(c.opt.seed)});
    }
  c.summary["max_z_gibbs_limit"] = format::decimal(r.max_z(r.gibbs_limit));
  c.summary["max_z_q_beta"] = format::decimal(r.max_z(r.q_beta));
}

// ---------------------------------------------------------------- norms and bilinear

struct Cell {
  std::size_t n;
  double beta;
};

std::vector<Cell> cells(const Config& cfg) {
  std::vector<Cell> out;
  for (double beta : cfg.reals("beta_list"))
    for (auto n : cfg.integers("n_list")) {
      if (n <= 0) throw ConfigError("n_list entries must be positive");
      out.push_back({static_cast<std::size_t>(n), beta});
    }
  if (out.empty()) throw ConfigError("empty N or beta ladder");
  return out;
}

/// Maps (cell, block) to a flat unit index and back.
struct Ladder {
  std::vector<Cell> cells;
  std::vector<std::vector<std::size_t>> sizes;
  std::vector<std::pair<std::size_t, std::size_t>> units;

  Ladder(const Config& cfg, std::size_t samples) : cells(harness::cells(cfg)) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      sizes.push_back(split(samples, block_count(cells[i].beta, samples, cfg.count("chains"))));
      for (std::size_t b = 0; b < sizes.back().size(); ++b) units.push_back({i, b});
    }
  }
  std::vector<std::vector<double>> gather(const std::vector<std::vector<double>>& payloads) const {
    std::vector<std::vector<double>> out(cells.size());
    for (std::size_t u = 0; u < units.size(); ++u)
      out[units[u].first].insert(out[units[u].first].end(), payloads[u].begin(), payloads[u].end());
    return out;
  }
};

stats::Estimate estimate(const std::vector<double>& v, double beta) {
  if (beta == 0.0) return {stats::mean(v), stats::standard_error(v)};
  return stats::mean_with_ess(v);
}

std::vector<double> column(const std::vector<double>& v, std::size_t stride, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = k; i < v.size(); i += stride) out.push_back(v[i]);
  return out;
}

void exp_norms(Context& c) {
  const auto& cfg = c.cfg;
  const double delta = cfg.real("delta");
  const auto ps = cfg.reals("p_list");
  const std::size_t samples = cfg.count("samples");
  spectral::BasisOptions bo;
  bo.modes = cfg.count("modes");
  const auto basis = spectral::SpectralBasis::build(bo);
  const Ladder lad(cfg, samples);
  const auto payloads = run_units(c, lad.units.size(), [&](std::size_t u) {
    const auto [ci, b] = lad.units[u];
    const auto p = gibbs_params(cfg, lad.cells[ci].n, lad.cells[ci].beta);
    std::vector<double> out;
    for (const auto& s : draw_block(p, b, lad.sizes[ci][b], c.opt.seed))
      out.push_back(fluctuation::sobolev_norm_sq(s, delta, basis));
    return out;
  });
  const auto data = lad.gather(payloads);
  const double closed = fluctuation::sobolev_norm_sq_uniform_mean(delta, basis);
  c.summary["basis_modes"] = std::to_string(basis.size());
  c.summary["quadrature_order"] = std::to_string(basis.quadrature().order());
  c.table.header = {"N", "beta", "delta", "p", "mean", "stderr", "samples", "ess", "closed_form", "z_closed_form",
                    "modes", "seed"};
  std::map<std::pair<double, double>, std::vector<double>> xs, ys, es;
  for (std::size_t i = 0; i < lad.cells.size(); ++i) {
    const auto& cl = lad.cells[i];
    for (double pw : ps) {
      std::vector<double> v;
      for (double x : data[i]) v.push_back(std::pow(x, 0.5 * pw));
      const auto e = estimate(v, cl.beta);
      const double ess = cl.beta == 0.0 ? static_cast<double>(v.size()) : stats::effective_sample_size(v);
      const bool has = cl.beta == 0.0 && pw == 2.0;
      const double z = has && e.std_error > 0 ? std::abs(e.value - closed) / e.std_error : 0.0;
      if (has && z > 3.0) c.summary["closed_form_miss_N" + std::to_string(cl.n)] = format::decimal(z);
      c.table.add({cell(cl.n), cell(cl.beta), cell(delta), cell(pw), cell(e.value), cell(e.std_error), cell(v.size()),
                   cell(ess), cell_or_empty(has, closed), cell_or_empty(has, z), cell(basis.size()), cell(c.opt.seed)});
      xs[{cl.beta, pw}].push_back(std::log(static_cast<double>(cl.n)));
      ys[{cl.beta, pw}].push_back(e.value);
      es[{cl.beta, pw}].push_back(e.std_error);
    }
  }
  Table trend;
  trend.header = {"beta", "p", "slope_vs_log_n", "slope_stderr", "ci_low", "ci_high", "ci_contains_zero"};
  for (const auto& [k, x] : xs)
    if (x.size() >= 3) slope_ci_payload(stats::weighted_linear_fit(x, ys[k], es[k]), trend, {cell(k.first), cell(k.second)});
  write_text(c, "trend.csv", trend.csv());
}

void exp_bilinear(Context& c) {
  const auto& cfg = c.cfg;
  const std::size_t samples = cfg.count("samples");
  std::vector<fluctuation::ModeKernel> ks;
  std::vector<int> ids;
  for (auto id : cfg.integers("kernels")) {
    ks.push_back(fluctuation::ModeKernel::fixed(static_cast<int>(id)));
    ids.push_back(static_cast<int>(id));
  }
  if (ks.empty()) throw ConfigError("no kernels selected");
  const Ladder lad(cfg, samples);
  const auto payloads = run_units(c, lad.units.size(), [&](std::size_t u) {
    const auto [ci, b] = lad.units[u];
    const auto p = gibbs_params(cfg, lad.cells[ci].n, lad.cells[ci].beta);
    std::vector<double> out;
    for (const auto& s : draw_block(p, b, lad.sizes[ci][b], c.opt.seed))
      for (const auto& k : ks) out.push_back(k.bilinear(s));
    return out;
  });
  const auto data = lad.gather(payloads);
  std::vector<double> l8;
  for (const auto& k : ks) l8.push_back(k.lp_norm(8.0));
  c.table.header = {"N", "beta", "f_id", "p", "mean_square", "stderr", "samples", "bound", "within_bound", "seed"};
  std::map<std::pair<double, int>, std::vector<double>> xs, ys, es;
  for (std::size_t i = 0; i < lad.cells.size(); ++i) {
    const auto& cl = lad.cells[i];
    for (std::size_t k = 0; k < ks.size(); ++k) {
      auto v = column(data[i], ks.size(), k);
      for (double& x : v) x *= x;
      const auto e = estimate(v, cl.beta);
      const double bound = 5.0 * l8[k] * l8[k];
      const bool ok = e.value <= bound;
      if (!ok) c.fail(kInvariantFailure, "bilinear moment above bound");
      c.table.add({cell(cl.n), cell(cl.beta), cell(ids[k]), cell(2.0), cell(e.value), cell(e.std_error), cell(v.size()),
                   cell(bound), cell(ok), cell(c.opt.seed)});
      xs[{cl.beta, ids[k]}].push_back(std::log(static_cast<double>(cl.n)));
      ys[{cl.beta, ids[k]}].push_back(e.value);
      es[{cl.beta, ids[k]}].push_back(e.std_error);
    }
  }
  Table trend;
  trend.header = {"beta", "f_id", "slope_vs_log_n", "slope_stderr", "ci_low", "ci_high", "ci_contains_zero"};
  for (const auto& [k, x] : xs)
    if (x.size() >= 3) slope_ci_payload(stats::weighted_linear_fit(x, ys[k], es[k]), trend, {cell(k.first), cell(k.second)});
  write_text(c, "trend.csv", trend.csv());
}

// ---------------------------------------------------------------- weakres

void exp_weakres(Context& c) {
  const auto& cfg = c.cfg;
  const auto p = gibbs_params(cfg, cfg.count("n"), cfg.real("beta"));
  const std::size_t members = std::max<std::size_t>(1, cfg.count("members"));
  const double T = cfg.real("horizon");
  const std::size_t grid = cfg.count("grid");
  if (grid < 3) throw ConfigError("grid must be at least 3");
  const auto tol = tolerances(cfg);
  const auto tests = TestFunction::defaults();
  const auto initial = dynamics::gibbs_initial_states(p, members, c.opt.seed);
  const auto payloads = run_units(c, members, [&](std::size_t k) {
    try {
      const auto rec = dynamics::integrate(initial[k], T, tol, dynamics::uniform_grid(T, grid));
      std::vector<double> out{0.0, rec.max_energy_drift()};
      for (const auto& f : tests) out.push_back(fluctuation::weak_residual(rec, f).max_abs);
      return out;
    } catch (const dynamics::BlowUp& b) {
      std::vector<double> out{1.0, b.time};
      out.resize(2 + tests.size(), 0.0);
      return out;
    }
  });
  c.table.header = {"member", "N", "beta", "horizon", "grid", "phi", "max_residual", "energy_drift", "blowup", "seed"};
  std::size_t blowups = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < members; ++k) {
    const auto& v = payloads[k];
    blowups += v[0] != 0.0;
    for (std::size_t f = 0; f < tests.size(); ++f) {
      if (v[0] == 0.0) worst = std::max(worst, v[2 + f]);
      c.table.add({cell(k), cell(p.n), cell(p.beta), cell(T), cell(grid), tests[f].name(), cell(v[2 + f]), cell(v[1]),
                   cell(v[0] != 0.0), cell(c.opt.seed)});
    }
  }
  c.summary["max_residual"] = format::decimal(worst);
  if (2 * blowups > members) c.fail(kNumericAbort, "blow-up-dominated run");
}

// ---------------------------------------------------------------- limit

void exp_limit(Context& c) {
  const auto& cfg = c.cfg;
  const double beta = cfg.real("beta");
  std::vector<std::size_t> ns;
  for (auto n : cfg.integers("n_list")) ns.push_back(static_cast<std::size_t>(std::max<std::int64_t>(0, n)));
  if (ns.size() < 2) throw ConfigError("n_list needs at least two entries");
  const std::size_t members = cfg.count("members");
  const double T = cfg.real("horizon");
  const auto grid = dynamics::uniform_grid(T, std::max<std::size_t>(1, cfg.count("grid")));
  const auto tol = tolerances(cfg);
  const auto tests = TestFunction::defaults();
  std::vector<std::vector<ensemble::VortexConfiguration>> initial;
  for (std::size_t i = 0; i < ns.size(); ++i)
    initial.push_back(dynamics::gibbs_initial_states(gibbs_params(cfg, ns[i], beta), members,
                                                     stream_id(c.opt.seed, ns[i])));
  const auto payloads = run_units(c, ns.size() * members, [&](std::size_t u) {
    const std::size_t i = u / members, k = u % members;
    std::vector<double> out{0.0};
    try {
      const auto rec = dynamics::integrate(initial[i][k], T, tol, grid);
      for (std::size_t t = 0; t < rec.times.size(); ++t) {
        const auto s = rec.state(t);
        for (const auto& f : tests) out.push_back(fluctuation::pair_with(s, f));
      }
    } catch (const dynamics::BlowUp&) {
      out = {1.0};
      out.resize(1 + grid.size() * tests.size(), 0.0);
    }
    return out;
  });
  c.table.header = {"n_a", "n_b", "time", "phi", "ks_statistic", "p_value", "members_a", "members_b", "seed"};
  auto series = [&](std::size_t i, std::size_t t, std::size_t f) {
    std::vector<double> v;
    for (std::size_t k = 0; k < members; ++k) {
      const auto& p = payloads[i * members + k];
      if (p[0] == 0.0) v.push_back(p[1 + t * tests.size() + f]);
    }
    return v;
  };
  std::size_t blowups = 0;
  for (const auto& p : payloads) blowups += p[0] != 0.0;
  for (std::size_t i = 0; i + 1 < ns.size(); ++i)
    for (std::size_t t = 0; t < grid.size(); ++t)
      for (std::size_t f = 0; f < tests.size(); ++f) {
        const auto a = series(i, t, f), b = series(i + 1, t, f);
        if (a.empty() || b.empty()) continue;
        const auto ks = stats::ks_two_sample(a, b);
        c.table.add({cell(ns[i]), cell(ns[i + 1]), cell(grid[t]), tests[f].name(), cell(ks.statistic),
                     cell(ks.p_value), cell(a.size()), cell(b.size()), cell(c.opt.seed)});
      }
  c.summary["blowups"] = std::to_string(blowups);
  if (2 * blowups > payloads.size()) c.fail(kNumericAbort, "blow-up-dominated run");
}

// ---------------------------------------------------------------- partition

void exp_partition(Context& c) {
  const auto& cfg = c.cfg;
  const double beta = cfg.real("beta");
  std::vector<std::size_t> ns;
  for (auto n : cfg.integers("n_list")) {
    if (n <= 0 || n % 2) throw ConfigError("n_list entries must be positive and even");
    if (!(beta < kTwoPi * static_cast<double>(n))) throw ConfigError("beta outside the admissible window");
    ns.push_back(static_cast<std::size_t>(n));
  }
  const std::size_t samples = cfg.count("samples");
  if (samples == 0) throw ConfigError("samples must be positive");
  const auto sizes = split(samples, cfg.count("blocks"));
  std::vector<std::size_t> offsets(sizes.size(), 0);
  for (std::size_t b = 1; b < sizes.size(); ++b) offsets[b] = offsets[b - 1] + sizes[b - 1];
  const auto payloads = run_units(c, ns.size() * sizes.size(), [&](std::size_t u) {
    const std::size_t i = u / sizes.size(), b = u % sizes.size(), n = ns[i];
    const auto xi = ensemble::VortexConfiguration::balanced_intensities(n);
    std::vector<double> w(sizes[b]);
    for (std::size_t s = 0; s < sizes[b]; ++s) {
      Rng rng(c.opt.seed, stream_id(0x9A27ull, offsets[b] + s));
      std::vector<Vec2> x(n);
      for (auto& q : x) q = rng.disk_point();
      double h = 0.0;
      try {
        h = kernels::serial::pair_energy(x, xi) + kernels::serial::self_energy(x, xi);
      } catch (const SingularConfiguration&) {
        h = 0.0;
      }
      w[s] = std::exp(-beta / static_cast<double>(n) * h);
    }
    return w;
  });
  spectral::BasisOptions bo;
  bo.modes = cfg.count("modes");
  bo.evaluator = false;
  bo.certify = 0;
  const auto basis = spectral::SpectralBasis::build(bo);
  const auto zb = gaussianfield::z_beta_continuum(beta, basis);
  const double limit = std::exp(beta * ensemble::gbar()) * zb.value;
  c.table.header = {"N", "beta", "z_n", "stderr", "samples", "z_limit", "abs_diff", "rel_diff", "z_beta",
                    "modes", "k_drift", "seed"};
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> w;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      const auto& p = payloads[i * sizes.size() + b];
      w.insert(w.end(), p.begin(), p.end());
    }
    const double z = stats::mean(w), se = stats::standard_error(w), d = std::abs(z - limit);
    decreasing = decreasing && d < prev;
    prev = d;
    c.table.add({cell(ns[i]), cell(beta), cell(z), cell(se), cell(w.size()), cell(limit), cell(d), cell(d / limit),
                 cell(zb.value), cell(basis.size()), cell(zb.drift), cell(c.opt.seed)});
  }
  c.summary["z_limit"] = format::decimal(limit);
  c.summary["difference_decreasing"] = decreasing ? "true" : "false";
  c.summary["k_drift"] = format::decimal(zb.drift);
  c.summary["basis_modes"] = std::to_string(basis.size());
}

// ---------------------------------------------------------------- selftest

void exp_selftest(Context& c) {
  c.table.header = {"suite", "check", "passed", "value", "tolerance"};
  std::size_t failed = 0;
  auto check = [&](const std::string& suite, const std::string& name, double value, double tol, bool le = true) {
    const bool ok = std::isfinite(value) && (le ? value <= tol : value >= tol);
    failed += !ok;
    c.table.add({suite, name, cell(ok), cell(value), cell(tol)});
    c.out << (ok ? "  ok    " : "  FAIL  ") << suite << "/" << name << " = " << format::decimal(value) << "\n";
  };

  Rng rng(c.opt.seed, stream_id(0x5E1F, 0));
  std::vector<std::pair<Vec2, Vec2>> pairs;
  for (int i = 0; i < 200; ++i) pairs.push_back({rng.disk_point(), rng.disk_point()});

  {
    double sym = 0.0, kanti = 0.0, tang = 0.0;
    for (const auto& [x, y] : pairs) {
      sym = std::max(sym, std::abs(geometry::green(x, y) - geometry::green(y, x)));
      const Vec2 k1 = geometry::free_kernel(x, y), k2 = geometry::free_kernel(y, x);
      kanti = std::max(kanti, norm(k1 + k2));
      const Vec2 b{kRadius * std::cos(x.x * 10), kRadius * std::sin(x.x * 10)};
      tang = std::max(tang, std::abs(geometry::detail::green(b, y)));
    }
    check("geometry", "green_symmetry", sym, 1e-12);
    check("geometry", "free_kernel_antisymmetry", kanti, 1e-10);
    check("geometry", "green_boundary_value", tang, 1e-12);
  }
  {
    spectral::BasisOptions bo;
    bo.modes = c.cfg.count("modes");
    const auto basis = spectral::SpectralBasis::build(bo);
    check("spectral", "gram_defect", basis.gram_defect(), 1e-8);
    const double j01 = 2.404825557695773;
    check("spectral", "first_eigenvalue", std::abs(basis.mode(0).eigenvalue - std::numbers::pi * j01 * j01), 1e-9);
    const auto proj = basis.project([](const Vec2&) { return 1.0; });
    double dm = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) dm = std::max(dm, std::abs(proj[i] - basis.mode(i).mean));
    check("spectral", "mode_means", dm, 1e-9);
    const Vec2 x{0.2, -0.1}, y{-0.25, 0.3};
    const double g1 = spectral::kernel_eval(spectral::KernelSpec::fractional(1.0, basis), x, y);
    check("spectral", "green_truncation", std::abs(g1 - geometry::green(x, y)), 5e-2);
  }
  {
    Rng r(c.opt.seed, stream_id(0x5E1F, 1));
    const auto cfg = ensemble::VortexConfiguration::uniform(12, r);
    const double h = ensemble::hamiltonian(cfg);
    check("ensemble", "rotation_invariance", std::abs(ensemble::hamiltonian(cfg.rotated(0.7)) - h), 1e-10);
    check("ensemble", "reversal_invariance", std::abs(ensemble::hamiltonian(cfg.reversed()) - h), 1e-10);
    check("ensemble", "neutrality", cfg.neutral() ? 0.0 : 1.0, 0.0);
  }
  {
    Rng r(c.opt.seed, stream_id(0x5E1F, 2));
    const auto cfg = ensemble::VortexConfiguration::uniform(6, r);
    dynamics::Tolerances tol;
    const auto rec = dynamics::integrate(cfg, 0.05, tol, dynamics::uniform_grid(0.05, 10));
    check("dynamics", "energy_drift", rec.max_energy_drift(), 1e-6);
    check("dynamics", "impulse_drift", rec.max_impulse_drift(), 1e-8);
    std::stringstream ss;
    rec.save(ss);
    const auto back = dynamics::TrajectoryRecord::load(ss);
    std::stringstream s2;
    back.save(s2);
    std::stringstream s1;
    rec.save(s1);
    check("dynamics", "trajectory_round_trip", s1.str() == s2.str() ? 0.0 : 1.0, 0.0);
  }
  {
    std::int64_t bad = 0;
    for (int N = 2; N <= 8; N += 2)
      for (int n = 0; n <= std::min(N, 5); ++n)
        for (int m = 0; m <= n; ++m) bad += fluctuation::alpha(m, n, N) != fluctuation::alpha_enumerate(m, n, N);
    check("fluctuation", "alpha_enumeration", static_cast<double>(bad), 0.0);
    Rng r(c.opt.seed, stream_id(0x5E1F, 3));
    const auto cfg = ensemble::VortexConfiguration::uniform(10, r);
    check("fluctuation", "constant_pairing",
          std::abs(fluctuation::pair_with(cfg, TestFunction::constant(1.0))), 1e-14);
    const auto k = fluctuation::ModeKernel::fixed(0);
    check("fluctuation", "admissible_kernel", std::abs(k.diagonal_integral()), 1e-10);
  }
  {
    Rng r(c.opt.seed, stream_id(0x5E1F, 4));
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const int n = 1 + static_cast<int>(r.below(10));
      std::vector<double> a(static_cast<std::size_t>(n));
      for (auto& v : a) v = r.uniform(-1.0, 1.0);
      const auto e = gaussianfield::algebraic_expansion(a, r.uniform(-1.0, 1.0), 1 + static_cast<int>(r.below(n)));
      worst = std::max(worst, e.residual);
    }
    check("gaussianfield", "algebraic_expansion", worst, 1e-12);
    spectral::BasisOptions bo;
    bo.modes = 100;
    bo.evaluator = false;
    bo.certify = 0;
    const auto basis = spectral::SpectralBasis::build(bo);
    check("gaussianfield", "z_beta_at_zero", std::abs(gaussianfield::z_beta_continuum(0.0, basis).value - 1.0), 1e-14);
  }
  {
    const Schema s = schema_for("norms");
    const auto a = Config::parse("delta = 0.25\n", s);
    check("harness", "config_round_trip", Config::parse(a.canonical(), s).canonical() == a.canonical() ? 0.0 : 1.0,
          0.0);
    Rng a1(7, 9), a2(7, 9);
    check("harness", "rng_determinism", a1.uniform() == a2.uniform() ? 0.0 : 1.0, 0.0);
  }
  c.summary["failed_checks"] = std::to_string(failed);
  if (failed) c.fail(kInvariantFailure, std::to_string(failed) + " self-test checks failed");
}

const std::map<std::string, std::function<void(Context&)>>& experiments() {
  static const std::map<std::string, std::function<void(Context&)>> m = {
      {"sample", exp_sample},   {"evolve", exp_evolve},   {"clt", exp_clt},
      {"norms", exp_norms},     {"bilinear", exp_bilinear}, {"weakres", exp_weakres},
      {"limit", exp_limit},     {"partition", exp_partition}, {"selftest", exp_selftest}};
  return m;
}

int execute(const RunOptions& o, std::ostream& out, std::ostream& log, ExperimentManifest* result) {
  const Schema& s = schema_for(o.subcommand);
  Config cfg = Config::parse(o.config_text, s);
  if (o.out_dir.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec || !fs::is_directory(o.out_dir)) throw ConfigError("cannot create output directory " + o.out_dir);
  {
    std::ofstream probe(fs::path(o.out_dir) / ".write-test");
    if (!probe) throw ConfigError("output directory is not writable: " + o.out_dir);
  }
  fs::remove(fs::path(o.out_dir) / ".write-test", ec);
  if (o.threads > 0) omp_set_num_threads(o.threads);
  omp_set_max_active_levels(1);

  ExperimentManifest man;
  man.experiment = o.subcommand;
  man.seed = o.seed;
  man.threads = omp_get_max_threads();
  man.config_text = cfg.canonical();
  man.started = utc_timestamp();
  man.inputs["config"] = sha256_hex(man.config_text);

  Context c{o, std::move(cfg), fs::path(o.out_dir), out, log, nullptr, {}, {}, {}, kOk, {}};
  const std::string key = sha256_hex(man.config_text + "seed=" + std::to_string(o.seed));
  c.ckpt = std::make_unique<Checkpoint>((c.dir / "checkpoint.dat").string(), o.subcommand, key, o.resume);
  experiments().at(o.subcommand)(c);

  const std::string csv = c.table.csv();
  write_text(c, "results.csv", csv);
  man.finished = utc_timestamp();
  for (const auto& a : c.artifacts) man.outputs[a] = sha256_file((c.dir / a).string());
  man.outputs["checkpoint.dat"] = sha256_file((c.dir / "checkpoint.dat").string());
  man.summary = c.summary;
  man.summary["rows"] = std::to_string(c.table.rows.size());
  if (!c.failure.empty()) man.summary["failure"] = c.failure;
  man.exit_code = c.exit_code;
  man.save_file((c.dir / "manifest.json").string());
  out << o.subcommand << ": " << c.table.rows.size() << " rows -> " << (c.dir / "results.csv").string() << "\n";
  for (const auto& [k, v] : c.summary) out << "  " << k << " = " << v << "\n";
  if (c.exit_code != kOk) log << "error: " << c.failure << "\n";
  if (result) *result = man;
  return c.exit_code;
}

int guarded(const std::function<int()>& body, std::ostream& log) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ArgumentError& e) {
    log << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvariantFailure& e) {
    log << "invariant failure: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const std::exception& e) {
    log << "numeric abort: " << e.what() << "\n";
    return kNumericAbort;
  }
}

}  // namespace

int run(const RunOptions& options, std::ostream& out, std::ostream& log) {
  return guarded([&] { return execute(options, out, log, nullptr); }, log);
}

int replay(const std::string& manifest_path, const std::string& out_dir, int threads, std::ostream& out,
           std::ostream& log) {
  return guarded(
      [&] {
        ExperimentManifest old;
        try {
          old = ExperimentManifest::load_file(manifest_path);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("cannot load manifest: ") + e.what());
        }
        RunOptions o;
        o.subcommand = old.experiment;
        o.config_text = old.config_text;
        o.seed = old.seed;
        o.out_dir = out_dir;
        o.threads = threads;
        ExperimentManifest fresh;
        const int code = execute(o, out, log, &fresh);
        const auto a = old.outputs.find("results.csv"), b = fresh.outputs.find("results.csv");
        if (a == old.outputs.end() || b == fresh.outputs.end() || a->second != b->second) {
          log << "replay: results.csv differs from the recorded digest\n";
          return static_cast<int>(kInvariantFailure);
        }
        out << "replay: results.csv reproduced bit-exactly (sha256 " << b->second << ")\n";
        return code;
      },
      log);
}

}  // namespace pvgas::harness
