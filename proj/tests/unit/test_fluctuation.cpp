#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pvgas/fluctuation.hpp"
#include "pvgas/geometry.hpp"
#include "pvgas/rng.hpp"

using namespace pvgas;
using namespace pvgas::fluctuation;

namespace {

VortexConfiguration random_config(std::size_t n, std::uint64_t seed, std::uint64_t stream = 0) {
  Rng rng(seed, stream);
  return VortexConfiguration::uniform(n, rng);
}

const spectral::SpectralBasis& basis300() {
  static const auto b = spectral::build_basis(300);
  return b;
}

}  // namespace

TEST_CASE("pairings with test functions") {
  const auto c = random_config(10, 51);
  const auto tests = TestFunction::defaults();
  for (const auto& f : tests) {
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c.intensity(i) * f(c.position(i));
    CHECK(pair_with(c, f) == doctest::Approx(s / std::sqrt(10.0)).epsilon(1e-14));
  }
  CHECK(std::abs(pair_with(c, TestFunction::constant(3.0))) < 1e-14);
  const FluctuationField w(c);
  CHECK(w.scale() == doctest::Approx(1 / std::sqrt(10.0)));
  const kernels::TwoPoint one = [](const Vec2&, const Vec2&) { return 1.0; };
  CHECK(std::abs(w.bilinear(one, true)) < 1e-14);
  CHECK(w.bilinear(one, false) == doctest::Approx(-1.0));
}

TEST_CASE("test functions: derivatives, support and C2 bound") {
  for (const auto& f : TestFunction::defaults()) {
    CHECK(f.has_derivatives());
    CHECK(f.compact());
    CHECK(std::isfinite(f.c2_bound()));
    CHECK(f.boundary_ring_defect() < 1e-30);
    const Vec2 x{0.12, -0.2};
    const double h = 1e-6;
    const Vec2 fd{(f({x.x + h, x.y}) - f({x.x - h, x.y})) / (2 * h), (f({x.x, x.y + h}) - f({x.x, x.y - h})) / (2 * h)};
    CHECK(norm(fd - f.grad(x)) < 1e-7);
    const auto j = f.jet(x);
    const double hxx = (f.grad({x.x + h, x.y}).x - f.grad({x.x - h, x.y}).x) / (2 * h);
    const double hxy = (f.grad({x.x, x.y + h}).x - f.grad({x.x, x.y - h}).x) / (2 * h);
    CHECK(j.hxx == doctest::Approx(hxx).epsilon(1e-6).scale(1));
    CHECK(j.hxy == doctest::Approx(hxy).epsilon(1e-6).scale(1));
  }
  CHECK_THROWS(TestFunction("bad", [](const Vec2& x) { return Jet{1.0 / norm_sq(x), {}, 0, 0, 0}; }));
  const auto v = TestFunction::values_only("v", [](const Vec2& x) { return x.x; });
  CHECK_FALSE(v.has_derivatives());
  CHECK_THROWS(v.grad({0, 0}));
  CHECK_THROWS(weak_kernels(v));
}

TEST_CASE("negative Sobolev norm: spectral and double-sum forms agree") {
  const auto& b = basis300();
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto c = random_config(12, 52, s);
    CHECK(sobolev_norm_sq(c, 0.5, b) == doctest::Approx(sobolev_norm_sq_double_sum(c, 0.5, b)).epsilon(1e-10));
  }
  CHECK_THROWS(sobolev_norm_sq(random_config(4, 1), 0.0, b));
}

TEST_CASE("negative Sobolev norm: uniform-ensemble mean is exact at finite N") {
  const auto& b = basis300();
  std::vector<double> v;
  for (std::uint64_t s = 0; s < 4000; ++s) v.push_back(sobolev_norm_sq(random_config(20, 53, s), 0.5, b));
  const double closed = sobolev_norm_sq_uniform_mean(0.5, b);
  CHECK(std::abs(stats::mean(v) - closed) < 4 * stats::standard_error(v));
}

TEST_CASE("alpha combinatorics") {
  for (int N = 2; N <= 10; N += 2)
    for (int n = 0; n <= std::min(6, N); ++n)
      for (int m = 0; m <= n; ++m) CHECK(alpha(m, n, N) == alpha_enumerate(m, n, N));
  CHECK(alpha(3, 4, 10) == 0);
  CHECK(alpha(0, 0, 4) == 1);
  CHECK(alpha(2, 2, 4) == -4);
  CHECK_THROWS_AS(alpha(40, 60, 200), std::overflow_error);
  CHECK_THROWS(alpha(2, 1, 4));
  CHECK_THROWS(alpha_enumerate(2, 2, 14));
}

TEST_CASE("weak-form kernels") {
  const auto phi = TestFunction::cutoff_polynomial(2);
  const auto k = weak_kernels(phi);
  Rng rng(54, 0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 x = rng.disk_point(), y = rng.disk_point();
    CHECK(k.H(x, y) == doctest::Approx(k.H(y, x)).epsilon(1e-12));
    CHECK(k.h(x, y) == doctest::Approx(k.h(y, x)).epsilon(1e-12));
  }
  CHECK(k.H({0.1, 0.1}, {0.1, 0.1}) == 0.0);
  const auto q = spectral::DiskQuadrature::make(40);
  CHECK(std::abs(q.integrate([&](const Vec2& x) { return k.h(x, x); })) < 1e-12);
  const double sup = near_diagonal_sup(k.H, 20000, 1e-9, 1);
  CHECK(std::isfinite(sup));
  CHECK(sup < phi.c2_bound());
}

TEST_CASE("smooth cutoffs") {
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(2.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  for (double t = 0.01; t < 1; t += 0.01) {
    CHECK(smooth_step(t) + smooth_step(1 - t) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(smooth_step(t + 0.001) >= smooth_step(t));
  }
  const double d = 0.1;
  CHECK(pair_bump({0.04, 0}, d) == 1.0);
  CHECK(pair_bump({0.1, 0}, d) == 0.0);
  CHECK(pair_bump({0.075, 0}, d) == doctest::Approx(0.5));
  CHECK(boundary_bump({kRadius - 0.04, 0}, d) == 1.0);
  CHECK(boundary_bump({kRadius - 0.11, 0}, d) == 0.0);
}

TEST_CASE("mollified kernels approach the weak-form kernels in L2") {
  const auto phi = TestFunction::cutoff_polynomial(1);
  const auto k = weak_kernels(phi);
  double prev = 1e300;
  for (double d : {0.2, 0.1, 0.05}) {
    const auto m = mollified_kernels(phi, d);
    const double dist = l2_distance(k.H, m.H, 24) + l2_distance(k.h, m.h, 24);
    CHECK(dist < prev);
    prev = dist;
  }
}

TEST_CASE("cumulative Simpson integration") {
  const double h = 0.1;
  std::vector<double> cubic, sine;
  for (int k = 0; k <= 11; ++k) {
    const double t = k * h;
    cubic.push_back(1 + t - 2 * t * t + t * t * t);
    sine.push_back(std::sin(t));
  }
  const auto I = cumulative_simpson(cubic, h);
  for (int k = 0; k <= 11; ++k) {
    const double t = k * h;
    CHECK(I[static_cast<std::size_t>(k)] ==
          doctest::Approx(t + t * t / 2 - 2 * t * t * t / 3 + t * t * t * t / 4).epsilon(1e-13).scale(1));
  }
  const auto S = cumulative_simpson(sine, h);
  for (int k = 0; k <= 11; ++k) CHECK(std::abs(S[static_cast<std::size_t>(k)] - (1 - std::cos(k * h))) < 1e-6);
  CHECK(cumulative_simpson({1.0, 2.0}, h)[1] == doctest::Approx(0.15));
}

TEST_CASE("weak vorticity residual is small on an accurate trajectory") {
  const auto c = random_config(8, 55);
  dynamics::Tolerances tol;
  tol.rtol = tol.atol = 1e-12;
  const auto rec = dynamics::integrate(c, 0.1, tol, dynamics::uniform_grid(0.1, 100));
  for (const auto& f : TestFunction::defaults()) {
    const auto r = weak_residual(rec, f);
    CHECK(r.times.size() == rec.times.size());
    CHECK(r.residual.front() == 0.0);
    CHECK(r.max_abs < 1e-6);
  }
  auto flagged = rec;
  flagged.conservative = false;
  CHECK_THROWS(weak_residual(flagged, TestFunction::cutoff_polynomial(0)));
}

TEST_CASE("mode kernels") {
  for (int id : {0, 1}) {
    const auto f = ModeKernel::fixed(id);
    CHECK(f.admissible());
    CHECK(std::abs(f.diagonal_integral()) < 1e-10);
    double fro = 0;
    for (double v : f.coefficients()) fro += v * v;
    CHECK(f.lp_norm(2.0) == doctest::Approx(std::sqrt(fro)).epsilon(1e-8));
    const auto c = random_config(12, 56, static_cast<std::uint64_t>(id));
    const kernels::TwoPoint tp = [&](const Vec2& x, const Vec2& y) { return f(x, y); };
    CHECK(f.bilinear(c) == doctest::Approx(bilinear(c, tp, true)).epsilon(1e-12));
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 4000; ++s) v.push_back(f.bilinear(random_config(10, 57, s)));
    CHECK(std::abs(stats::mean(v) - f.uniform_mean()) < 4 * stats::standard_error(v));
  }
  CHECK_THROWS(ModeKernel::fixed(7));
  CHECK_THROWS(ModeKernel(std::make_shared<const spectral::SpectralBasis>(spectral::build_basis(5)), {0, 1},
                          {1.0, 2.0, 3.0, 1.0}));
}

TEST_CASE("finite-N central limit at beta = 0 matches the exact covariance") {
  ensemble::GibbsParams p;
  p.n = 20;
  const auto tests = TestFunction::defaults();
  const auto r = clt_experiment(p, tests, 4000, basis300(), 58);
  CHECK(r.samples == 4000);
  for (std::size_t a = 0; a < tests.size(); ++a)
    for (std::size_t b = 0; b < tests.size(); ++b) {
      const std::size_t i = a * tests.size() + b;
      CHECK(std::abs(r.covariance[i] - r.exact_uniform[i]) < 4 * r.covariance_stderr[i] + 1e-12);
      CHECK(r.gibbs_limit[i] == doctest::Approx(r.exact_uniform[i]).epsilon(1e-8).scale(1e-12));
      CHECK(r.q_beta[i] == doctest::Approx(r.exact_uniform[i]).epsilon(3e-2).scale(1e-6));
    }
  CHECK(r.max_z(r.exact_uniform) < 4.0);
}

TEST_CASE("multitime cumulants") {
  const auto phi = TestFunction::cutoff_polynomial(1);
  std::vector<dynamics::TrajectoryRecord> few(3);
  CHECK_THROWS(multitime_cumulants(few, phi, {1}));
  std::vector<dynamics::TrajectoryRecord> ens;
  dynamics::Tolerances tol;
  tol.rtol = tol.atol = 1e-8;
  for (std::uint64_t s = 0; s < kMinCumulantEnsemble; ++s)
    ens.push_back(dynamics::integrate(random_config(6, 59, s), 0.02, tol, {0.0, 0.01, 0.02}));
  const auto r = multitime_cumulants(ens, phi, {1, 2});
  CHECK(r.trajectories == kMinCumulantEnsemble);
  CHECK_FALSE(r.rows.empty());
  for (const auto& row : r.rows) {
    CHECK(std::isfinite(row.value));
    CHECK(row.std_error >= 0.0);
  }
}
