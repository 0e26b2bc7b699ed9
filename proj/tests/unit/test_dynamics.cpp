#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pvgas/dynamics.hpp"
#include "pvgas/fluctuation.hpp"
#include "pvgas/geometry.hpp"
#include "pvgas/kernels.hpp"
#include "pvgas/rng.hpp"

using namespace pvgas;
using namespace pvgas::dynamics;

namespace {

VortexConfiguration random_config(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0);
  return VortexConfiguration::uniform(n, rng);
}

double max_position_error(const VortexConfiguration& a, const VortexConfiguration& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, norm(a.position(i) - b.position(i)));
  return e;
}

}  // namespace

TEST_CASE("velocity field: brute force and scaling") {
  const auto c = random_config(8, 41);
  const auto v = velocity(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    Vec2 u = c.intensity(i) * geometry::grad_perp_g_diag(c.position(i));
    for (std::size_t j = 0; j < c.size(); ++j)
      if (j != i) u += c.intensity(j) * geometry::biot_savart(c.position(i), c.position(j));
    CHECK(norm(v[i] - (1.0 / std::sqrt(8.0)) * u) < 1e-12 * (1 + norm(u)));
  }
  double l = 0;
  for (std::size_t i = 0; i < c.size(); ++i) l += c.intensity(i) * norm_sq(c.position(i));
  CHECK(angular_impulse(c) == doctest::Approx(l));
}

TEST_CASE("single vortex rotates rigidly at the self-induced rate") {
  const Vec2 x0{0.3, 0.1};
  const auto c = VortexConfiguration::without_neutrality({x0}, {1.0});
  const double r2 = norm_sq(x0);
  const double omega = -kInvTwoPi / (kRadiusSq - r2);
  const double T = 1.0;
  const auto rec = integrate(c, T, {}, uniform_grid(T, 10));
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    const Vec2 exact = rotate(x0, omega * rec.times[k]);
    CHECK(norm(rec.states[k][0] - exact) < 1e-8);
  }
}

TEST_CASE("energy and angular impulse are conserved") {
  const auto c = random_config(20, 42);
  const auto rec = integrate(c, 0.3, {}, uniform_grid(0.3, 30));
  CHECK(rec.max_energy_drift() < 1e-6);
  CHECK(rec.max_impulse_drift() < 1e-8);
  CHECK(rec.conservative);
  CHECK(rec.energy.front() == doctest::Approx(ensemble::hamiltonian(c)).epsilon(1e-14));
  CHECK(rec.steps > 0);
}

TEST_CASE("time reversal by intensity flip") {
  const auto c = random_config(12, 43);
  const double T = 0.2;
  const auto fwd = integrate(c, T, {}, {0.0, T});
  const auto back = integrate(fwd.state(1).reversed(), T, {}, {0.0, T});
  CHECK(max_position_error(back.state(1), c.reversed()) < 1e-6);
}

TEST_CASE("dense output agrees with integration to each sample time") {
  const auto c = random_config(10, 44);
  Tolerances tol;
  tol.rtol = tol.atol = 1e-12;
  const auto rec = integrate(c, 0.2, tol, uniform_grid(0.2, 8));
  for (std::size_t k : {3ul, 5ul}) {
    const auto direct = integrate(c, rec.times[k], tol, {0.0, rec.times[k]});
    CHECK(max_position_error(direct.state(1), rec.state(k)) < 1e-8);
  }
}

TEST_CASE("integrator is invariant under rotation of the initial data") {
  const auto c = random_config(10, 45);
  const auto a = integrate(c, 0.1, {}, {0.0, 0.1});
  const auto b = integrate(c.rotated(0.4), 0.1, {}, {0.0, 0.1});
  CHECK(max_position_error(a.state(1).rotated(0.4), b.state(1)) < 1e-7);
}

TEST_CASE("unresolvable near-collision raises BlowUp") {
  const auto c = VortexConfiguration({{0.1, 0.0}, {0.1 + 1e-6, 0.0}, {-0.2, 0.1}, {-0.2, -0.1}}, {1, 1, -1, -1});
  Tolerances tol;
  tol.rtol = tol.atol = 1e-14;
  tol.min_step = 1e-3;
  CHECK_THROWS_AS(integrate(c, 0.5, tol, {0.0, 0.5}), BlowUp);
  CHECK_THROWS_AS(integrate(c, 0.5, {}, {0.1, 0.5}), ArgumentError);
  CHECK_THROWS_AS(integrate(c, 0.5, {}, {0.0, 0.7}), ArgumentError);
}

TEST_CASE("step budget turns a stiff close pair into a BlowUp") {
  const auto c = VortexConfiguration({{0.1, 0.0}, {0.1 + 1e-3, 0.0}, {-0.2, 0.1}, {-0.2, -0.1}}, {1, 1, -1, -1});
  Tolerances tol;
  tol.max_steps = 50;
  CHECK_THROWS_AS(integrate(c, 0.5, tol, {0.0, 0.5}), BlowUp);
  tol.max_steps = 0;
  CHECK(integrate(c, 0.01, tol, {0.0, 0.01}).steps > 50);
}

TEST_CASE("trajectory file round trip is bit-exact") {
  const auto c = random_config(6, 46);
  auto rec = integrate(c, 0.05, {}, uniform_grid(0.05, 5));
  rec.beta = 0.5;
  rec.seed = 46;
  rec.tolerances.max_steps = 123;
  std::stringstream a;
  rec.save(a);
  const auto back = TrajectoryRecord::load(a);
  CHECK(back.states == rec.states);
  CHECK(back.times == rec.times);
  CHECK(back.energy == rec.energy);
  CHECK(back.intensities == rec.intensities);
  CHECK(back.tolerances.rtol == rec.tolerances.rtol);
  CHECK(back.steps == rec.steps);
  std::stringstream b, c2;
  rec.save(b);
  back.save(c2);
  CHECK(b.str() == c2.str());
  std::stringstream bad("pvgas-trajectory 1\n3\n");
  CHECK_THROWS(TrajectoryRecord::load(bad));
}

TEST_CASE("initial states and a small invariance experiment") {
  ensemble::GibbsParams p;
  p.n = 10;
  const auto s = gibbs_initial_states(p, 5, 3);
  REQUIRE(s.size() == 5);
  CHECK(s[0].positions() != s[1].positions());
  CHECK(gibbs_initial_states(p, 5, 3)[4].positions() == s[4].positions());

  const auto tests = TestFunction::defaults();
  std::vector<std::pair<std::string, Observable>> obs = {
      {"H/N", [](const VortexConfiguration& c) { return ensemble::hamiltonian(c) / static_cast<double>(c.size()); }},
      {"impulse", [](const VortexConfiguration& c) { return angular_impulse(c); }},
      {"omega(bump_x)", [&](const VortexConfiguration& c) { return fluctuation::pair_with(c, tests[1]); }}};
  Tolerances tol;
  tol.rtol = tol.atol = 1e-8;
  const auto r = invariance_experiment(p, 0.1, 60, 5, obs, tol);
  CHECK(r.members == 60);
  CHECK(r.rows.size() == 3);
  CHECK(r.blowups == 0);
  CHECK_FALSE(r.any_rejection(0.01));
}
