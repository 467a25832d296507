#include <doctest.h>

#include <cmath>
#include <random>

#include "pqlap/barrier_builder.hpp"
#include "pqlap/errors.hpp"
#include "pqlap/system_solver.hpp"
#include "test_support.hpp"

using namespace pqlap;
using pqlap::test::unit_interval;

namespace {

struct Reference {
  ProblemParams params = pqlap::test::positive_theta_reference();
  Classification cls = validate(params);
  BarrierSetup setup = prepare_barriers(unit_interval(0.25), 256, params, cls);
  SelectionResult sel = select_C(setup, params, cls, params.lambda);
  ContinuationResult run = continuation_solve(params, params.lambda, *sel.barriers);
};

const Reference& reference() {
  static const Reference r;
  return r;
}

double sup_diff(const Field& a, const Field& b) { return (a.values() - b.values()).cwiseAbs().maxCoeff(); }

Field sine_field(const MeshPtr& m, double amp) {
  return interpolate(m, [amp](const Point& x) { return amp * std::sin(3.141592653589793 * x[0]); });
}

}  // namespace

TEST_CASE("config checks") {
  SolveConfig c;
  CHECK_NOTHROW(c.check());
  c.eps_schedule = {1e-2, 1e-2};
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c.eps_schedule = {1e-2, 1e-3};
  CHECK_NOTHROW(c.check());
  c.tol_newton = 0.0;
  CHECK_THROWS_AS(c.check(), InvalidArgument);

  const auto s = default_eps_schedule(0.5, 4);
  REQUIRE(s.size() == 4);
  CHECK(s[0] == 0.5);
  CHECK(s[3] == 0.0625);
}

TEST_CASE("fixed eps solve matches the collocation oracle") {
  const auto oracle = pqlap::test::fd_oracle();
  const ProblemParams p = pqlap::test::positive_theta_reference();
  const MeshPtr m = build_mesh(unit_interval(), 256);
  const Field init = sine_field(m, 0.1);
  const double xs[] = {0.125, 0.25, 0.5};

  const RegularizedResult r1 = solve_regularized(p, 1.0, 1e-2, std::nullopt, init, init);
  REQUIRE(r1.stats.converged);
  CHECK(r1.stats.residual_u <= 1e-8);
  CHECK(r1.stats.residual_v <= 1e-8);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(pqlap::test::value_at(r1.u, xs[k]) - oracle.at("system_eps")[k]) <= 5e-3);
    CHECK(std::abs(pqlap::test::value_at(r1.v, xs[k]) - oracle.at("system_eps")[k]) <= 5e-3);
  }

  // Doubling λ raises the solution everywhere.
  const RegularizedResult r2 = solve_regularized(p, 2.0, 1e-2, std::nullopt, init, init);
  REQUIRE(r2.stats.converged);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(pqlap::test::value_at(r2.u, xs[k]) - oracle.at("system_eps_l2")[k]) <= 5e-3);
  CHECK((r1.u.values() - r2.u.values()).maxCoeff() <= 1e-8);
  CHECK((r1.v.values() - r2.v.values()).maxCoeff() <= 1e-8);

  // The solution lies between the certified barriers of the reference.
  const Reference& ref = reference();
  const BarrierPair& b = *ref.sel.barriers;
  for (std::size_t i = 0; i < m->node_count(); ++i) {
    CHECK(b.lower_u[i] - 1e-10 <= r1.u[i]);
    CHECK(r1.u[i] <= b.upper_u[i] + 1e-10);
  }
}

TEST_CASE("barrier solve without clamping stays in the trap and sweeps upward") {
  const Reference& ref = reference();
  const BarrierPair& b = *ref.sel.barriers;
  SolveConfig cfg;
  cfg.clamp = false;
  std::vector<Field> us{b.lower_u};
  cfg.on_sweep = [&](int sweep, const Field& u, const Field&) {
    if (sweep <= 5) us.push_back(u);
  };
  const RegularizedResult r = solve_regularized(ref.params, 1.0, b.eps0(), b, b.lower_u, b.lower_v, cfg);
  CHECK(r.stats.converged);
  CHECK(r.stats.trapped);
  CHECK(r.stats.trap_violation <= 1e-10);
  REQUIRE(us.size() == 6);
  for (std::size_t k = 1; k < us.size(); ++k) CHECK((us[k - 1].values() - us[k].values()).maxCoeff() <= 1e-10);

  // Starting from the top: not guaranteed to meet the same limit, only reported.
  const RegularizedResult top = solve_regularized(ref.params, 1.0, b.eps0(), b, b.upper_u, b.upper_v, cfg);
  MESSAGE("upper/lower start difference: " << sup_diff(top.u, r.u));
  WARN(sup_diff(top.u, r.u) <= 2 * cfg.tol_fixedpoint * 10);
}

TEST_CASE("continuation on the reference instance") {
  const Reference& ref = reference();
  REQUIRE(ref.sel.found);
  const SolveReport& rep = ref.run.report;
  REQUIRE(rep.completed);
  CHECK(rep.passed);
  CHECK(rep.positive);
  REQUIRE(rep.stages.size() == 21);
  CHECK(rep.eps_schedule.back() == doctest::Approx(ref.sel.barriers->eps0() * std::ldexp(1.0, -20)));
  CHECK(rep.residual_u <= 1e-6);
  CHECK(rep.residual_v <= 1e-6);
  for (const auto& st : rep.stages) {
    CHECK(st.converged);
    CHECK(st.trapped);
  }
  // Symmetric exponents give u = v.
  CHECK(sup_diff(ref.run.u, ref.run.v) <= 1e-8);
  // With u = v the equation reads -u'' = λ, solved nodally by λ x(1-x)/2.
  double err = 0.0;
  for (std::size_t i = 0; i < ref.run.u.size(); ++i) {
    const double x = ref.run.u.mesh().node(i)[0];
    err = std::max(err, std::abs(ref.run.u[i] - 0.5 * x * (1 - x)));
  }
  CHECK(err <= 1e-6);

  REQUIRE(rep.cauchy_diffs.size() >= 5);
  const std::size_t n = rep.cauchy_diffs.size();
  for (std::size_t j = n - 4; j < n; ++j) CHECK(rep.cauchy_diffs[j] <= 2.0 * rep.cauchy_diffs[j - 1]);
  CHECK_FALSE(format_solve_report(rep).empty());
}

TEST_CASE("continuation preconditions") {
  const Reference& ref = reference();
  SolveConfig cfg;
  cfg.eps_schedule = {2.0 * ref.sel.barriers->eps0(), ref.sel.barriers->eps0()};
  CHECK_THROWS_AS(continuation_solve(ref.params, 1.0, *ref.sel.barriers, cfg), InvalidArgument);
  CHECK_THROWS_AS(continuation_solve(ref.params, 1.0, std::nullopt), InvalidArgument);
}

TEST_CASE("system residual") {
  const ProblemParams p = pqlap::test::positive_theta_reference();
  const MeshPtr m = build_mesh(unit_interval(), 16);
  Field u = interpolate(m, [](const Point& x) { return x[0] * (1 - x[0]); });
  Field bad = u;
  bad[5] = 0.0;
  CHECK_THROWS_AS(weak_residual_system(p, 1.0, bad, u), InvalidArgument);
  CHECK_THROWS_AS(weak_residual_system(p, 1.0, u, bad), InvalidArgument);

  // u = v = x(1-x): -u'' = 2 while λ u^{-1/2} v^{1/2} = 1; the missing unit goes into a source.
  double prev = INFINITY;
  for (int n : {16, 32, 64}) {
    const MeshPtr mn = build_mesh(unit_interval(), n);
    const Field w = interpolate(mn, [](const Point& x) { return x[0] * (1 - x[0]); });
    const PointSource one{[](std::size_t, double) { return 1.0; }, {}};
    const auto [ru, rv] = weak_residual_system(p, 1.0, w, w, std::make_pair(one, one));
    const double res = std::max(interior_sup(*mn, ru), interior_sup(*mn, rv)) / mn->spacing();
    CHECK(res <= std::max(1e-12, 4.0 / (n * n)));
    CHECK(res <= prev + 1e-14);
    prev = res;
  }
}

TEST_CASE("property: the u right-hand side decreases in eps") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> val(1e-6, 2.0), e(0.0, 0.5), a1(-0.99, -0.01), b1(0.01, 3.0);
  const MeshPtr m = build_mesh(unit_interval(), 32);
  for (int t = 0; t < 40; ++t) {
    const Field v = interpolate(m, [&](const Point&) { return val(rng); });
    const double alpha = a1(rng), beta = b1(rng);
    double e1 = e(rng), e2 = e(rng);
    if (e1 > e2) std::swap(e1, e2);
    const PointSource f1 = coupled_source(1.0, alpha, beta, e1, v);
    const PointSource f2 = coupled_source(1.0, alpha, beta, e2, v);
    for (std::size_t q = 0; q < m->quadrature().size(); ++q) {
      const double u = val(rng);
      CHECK(f1.value(q, u) >= f2.value(q, u));
      CHECK(f1.derivative(q, u) <= 0.0);
    }
  }
}

TEST_CASE("2D regularized solve smoke test") {
  const ProblemParams p = pqlap::test::positive_theta_reference();
  const MeshPtr m = build_mesh(pqlap::test::unit_square(), 16);
  const Field init = interpolate(m, [](const Point& x) {
    return 0.1 * std::sin(3.141592653589793 * x[0]) * std::sin(3.141592653589793 * x[1]);
  });
  const RegularizedResult r = solve_regularized(p, 1.0, 1e-2, std::nullopt, init, init);
  CHECK(r.stats.converged);
  CHECK(r.stats.residual_u <= 1e-8);
  CHECK(r.stats.min_u > 0.0);
  CHECK(sup_diff(r.u, r.v) <= 1e-8);
}
