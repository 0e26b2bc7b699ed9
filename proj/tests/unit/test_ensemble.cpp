#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "pvgas/ensemble.hpp"
#include "pvgas/geometry.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/rng.hpp"
#include "pvgas/spectral.hpp"
#include "pvgas/stats.hpp"

using namespace pvgas;
using namespace pvgas::ensemble;

namespace {

double brute_energy(const VortexConfiguration& c) {
  double h = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    h += 0.5 * geometry::harmonic_part_diag(c.position(i));
    for (std::size_t j = i + 1; j < c.size(); ++j)
      h += c.intensity(i) * c.intensity(j) * geometry::green(c.position(i), c.position(j));
  }
  return h;
}

}  // namespace

TEST_CASE("counter-based streams are reproducible and distinct") {
  Rng a(5, 7), b(5, 7), c(5, 8), d(6, 7);
  bool diff_c = false, diff_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c(), w = d();
    CHECK(x == y);
    diff_c |= x != z;
    diff_d |= x != w;
  }
  CHECK(diff_c);
  CHECK(diff_d);
  CHECK(stream_id(1, 2) != stream_id(2, 1));
}

TEST_CASE("uniform, normal and disk draws have the right laws") {
  Rng rng(31, 0);
  std::vector<double> u(20000), n(20000), r(20000);
  for (auto& v : u) v = rng.uniform();
  for (auto& v : n) v = rng.normal();
  for (auto& v : r) {
    const Vec2 p = rng.disk_point();
    CHECK(norm_sq(p) < kRadiusSq);
    v = norm_sq(p) / kRadiusSq;
  }
  auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(stats::ks_one_sample(u, unif).p_value > 1e-3);
  CHECK(stats::ks_one_sample(r, unif).p_value > 1e-3);
  CHECK(stats::ks_one_sample(n, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }).p_value > 1e-3);
  CHECK(std::abs(stats::mean(n)) < 0.03);
  CHECK(stats::variance(n) == doctest::Approx(1.0).epsilon(0.03));
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
}

TEST_CASE("basic statistics") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(stats::tree_sum(v) == 15.0);
  CHECK(stats::mean(v) == 3.0);
  CHECK(stats::variance(v) == 2.5);
  CHECK(stats::standard_error(v) == doctest::Approx(std::sqrt(0.5)));
  CHECK(stats::ks_critical_value(100, 0.05) == doctest::Approx(0.1358).epsilon(1e-2));
  CHECK(stats::kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(1e-2));

  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
  const auto f = stats::linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.ci_contains(2.0));

  Rng rng(32, 0);
  std::vector<double> g(40000), e(40000);
  for (auto& t : g) t = rng.normal();
  for (auto& t : e) t = -std::log(1.0 - rng.uniform());
  const auto cg = stats::cumulants(g), ce = stats::cumulants(e);
  CHECK(std::abs(cg.k3) < 0.05);
  CHECK(std::abs(cg.k4) < 0.15);
  CHECK(ce.k2 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(ce.k3 == doctest::Approx(2.0).epsilon(0.15));
  std::span<const double> sg(g);
  CHECK(stats::joint_cumulant({sg, sg}) == doctest::Approx(cg.k2).epsilon(1e-3));
  CHECK(std::abs(stats::joint_cumulant({sg, sg, sg, sg})) < 0.15);
  const double jk = stats::jackknife_stderr(g.size(), 20, [&](std::span<const std::size_t> keep) {
    double s = 0;
    for (auto i : keep) s += g[i];
    return s / static_cast<double>(keep.size());
  });
  CHECK(jk == doctest::Approx(stats::standard_error(g)).epsilon(0.5));

  std::vector<double> ar(20000);
  double s = 0;
  for (auto& t : ar) t = s = 0.9 * s + rng.normal();
  CHECK(stats::integrated_autocorrelation_time(ar) == doctest::Approx(19.0).epsilon(0.3));
  CHECK(stats::integrated_autocorrelation_time(g) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("configuration invariants are enforced") {
  CHECK_THROWS(VortexConfiguration({{0.1, 0}, {0.2, 0}}, {1, 1}));
  CHECK_THROWS(VortexConfiguration({{0.1, 0}, {0.1, 0}}, {1, -1}));
  CHECK_THROWS(VortexConfiguration({{0.1, 0}, {0.9, 0}}, {1, -1}));
  CHECK_THROWS(VortexConfiguration({{0.1, 0}, {0.2, 0}}, {1, -0.5}));
  CHECK_NOTHROW(VortexConfiguration::without_neutrality({{0.1, 0}}, {1}));
  Rng rng(33, 0);
  const auto c = VortexConfiguration::uniform(10, rng);
  CHECK(c.neutral());
  CHECK(c.min_pair_distance() > 0);
  CHECK(c.min_boundary_distance() > 0);
}

TEST_CASE("Hamiltonian: brute force and invariances") {
  Rng rng(34, 0);
  for (std::size_t n : {2ul, 10ul, 40ul}) {
    const auto c = VortexConfiguration::uniform(n, rng);
    const double h = hamiltonian(c);
    CHECK(h == doctest::Approx(brute_energy(c)).epsilon(1e-12));
    CHECK(hamiltonian(c.rotated(1.1)) == doctest::Approx(h).epsilon(1e-12));
    CHECK(hamiltonian(c.reversed()) == doctest::Approx(h).epsilon(1e-12));
    std::vector<std::size_t> order(n);
    std::iota(order.rbegin(), order.rend(), 0);
    CHECK(hamiltonian(c.permuted(order)) == doctest::Approx(h).epsilon(1e-12));
    CHECK(log_unnormalized_density(c, 2.0) == doctest::Approx(-2.0 / static_cast<double>(n) * h));
  }
}

TEST_CASE("serial and OpenMP kernels agree bit for bit") {
  Rng rng(35, 0);
  const auto c = VortexConfiguration::uniform(600, rng);
  const auto& x = c.positions();
  const auto& xi = c.intensities();
  CHECK(kernels::serial::pair_energy(x, xi) == kernels::omp::pair_energy(x, xi));
  std::vector<Vec2> v1(x.size()), v2(x.size());
  kernels::serial::velocity(x, xi, 0.5, v1);
  kernels::omp::velocity(x, xi, 0.5, v2);
  CHECK(v1 == v2);
  const auto basis = spectral::build_basis(200);
  std::vector<double> p1(200), p2(200);
  kernels::serial::mode_projection(basis, x, xi, p1);
  kernels::omp::mode_projection(basis, x, xi, p2);
  CHECK(p1 == p2);
  const kernels::TwoPoint f = [](const Vec2& a, const Vec2& b) { return a.x * b.y + std::cos(a.y - b.x); };
  CHECK(kernels::serial::bilinear(x, xi, f, true) == kernels::omp::bilinear(x, xi, f, true));
  CHECK(kernels::serial::bilinear(x, xi, f, false) == kernels::omp::bilinear(x, xi, f, false));
}

TEST_CASE("incremental energy updates") {
  Rng rng(36, 0);
  auto c = VortexConfiguration::uniform(30, rng);
  const double h = hamiltonian(c);
  const Vec2 to = rng.disk_point();
  const double dm = kernels::delta_energy_move(c.positions(), c.intensities(), 3, to);
  const double ds = kernels::delta_energy_swap(c.positions(), c.intensities(), 2, 20);
  auto moved = c;
  moved.set_position(3, to);
  CHECK(h + dm == doctest::Approx(hamiltonian(moved)).epsilon(1e-11));
  auto swapped = c;
  swapped.swap_positions(2, 20);
  CHECK(h + ds == doctest::Approx(hamiltonian(swapped)).epsilon(1e-11));
}

TEST_CASE("Metropolis acceptance") {
  CHECK(metropolis_acceptance(0.5) == 1.0);
  CHECK(metropolis_acceptance(-1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(metropolis_acceptance(-1000.0) == 0.0);
}

TEST_CASE("Gibbs sampler is deterministic and validates parameters") {
  GibbsParams p;
  p.n = 6;
  p.beta = 1.0;
  p.samples = 20;
  GibbsSampler a(p, 9, 0), b(p, 9, 0), c(p, 9, 1);
  const auto sa = a.run(), sb = b.run(), sc = c.run();
  CHECK(sa.back().positions() == sb.back().positions());
  CHECK(sa.back().positions() != sc.back().positions());
  GibbsParams bad = p;
  bad.n = 5;
  CHECK_THROWS(bad.validate());
  bad = p;
  bad.beta = -100.0;
  CHECK_THROWS(bad.validate());
  bad = p;
  bad.ladder = {0.5, 2.0};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("Gibbs chain matches reweighted uniform sampling (N = 4, beta = 3)") {
  GibbsParams p;
  p.n = 4;
  p.beta = 3.0;
  p.samples = 20000;
  p.burn_in = 200;
  p.thinning = 2;
  p.proposal_scale = 0.1;
  std::vector<double> e;
  GibbsSampler chain(p, 77, 0);
  chain.run([&](const VortexConfiguration&, double h, std::size_t) { e.push_back(h); });
  const auto est = stats::mean_with_ess(e);

  Rng rng(77, 1);
  double sw = 0, swh = 0, swh2 = 0;
  const std::size_t M = 200000;
  std::vector<double> w(M), wh(M);
  for (std::size_t s = 0; s < M; ++s) {
    const auto c = VortexConfiguration::uniform(4, rng);
    const double h = hamiltonian(c);
    w[s] = std::exp(-0.75 * h);
    wh[s] = w[s] * h;
    sw += w[s];
    swh += wh[s];
    swh2 += wh[s] * h;
  }
  const double ref = swh / sw;
  const double ref_se = std::sqrt(std::max(0.0, swh2 / sw - ref * ref) / static_cast<double>(M)) * 2.0;
  const double z = std::abs(est.value - ref) / std::hypot(est.std_error, ref_se);
  CHECK(z < 4.0);
}

TEST_CASE("tempered chain keeps the target marginal") {
  GibbsParams p;
  p.n = 4;
  p.beta = 3.0;
  p.samples = 300;
  p.ladder = {0.0, 1.5, 3.0};
  GibbsSampler chain(p, 3, 0);
  const auto s = chain.run();
  CHECK(s.size() == 300);
  CHECK(chain.stats().tempering.proposed > 0);
}

TEST_CASE("partition ratio") {
  CHECK(partition_ratio(0.0, 10, 10, 1).value == 1.0);
  const auto z = partition_ratio(1.0, 10, 4000, 1);
  CHECK(z.value > 0.9);
  CHECK(z.value < 1.4);
  CHECK(gbar() == doctest::Approx(0.5 * kRadiusSq * (std::log(kRadius) - 1.0)));
}

TEST_CASE("configuration stream round trip") {
  Rng rng(37, 0);
  std::stringstream ss;
  write_stream_header(ss);
  std::vector<StreamRecord> recs;
  for (int i = 0; i < 3; ++i) {
    StreamRecord r;
    r.n = 8;
    r.beta = 0.7;
    r.seed = 37;
    r.step = static_cast<std::uint64_t>(i);
    r.config = VortexConfiguration::uniform(8, rng);
    r.energy = hamiltonian(r.config);
    write_stream_record(ss, r);
    recs.push_back(r);
  }
  const auto back = read_stream(ss);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back[i].config.positions() == recs[i].config.positions());
    CHECK(back[i].config.intensities() == recs[i].config.intensities());
    CHECK(back[i].energy == recs[i].energy);
    CHECK(back[i].step == recs[i].step);
    CHECK(back[i].beta == recs[i].beta);
  }
}
