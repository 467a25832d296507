#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pqlap/errors.hpp"
#include "pqlap/plaplace_core.hpp"
#include "test_support.hpp"

using namespace pqlap;
using pqlap::test::interval;
using pqlap::test::unit_interval;

namespace {

constexpr double kPi = std::numbers::pi;

PointSource constant_source(double c) {
  return PointSource{[c](std::size_t, double) { return c; }, {}};
}

double sup_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("residual of the zero field with zero source") {
  const MeshPtr m = build_mesh(unit_interval(), 16);
  const Field zero(m);
  CHECK(sup_abs(weak_residual(2.0, zero, constant_source(0.0))) == 0.0);
}

TEST_CASE("weak residual of x(1-x)/2 against f = 1 vanishes at order h^2") {
  // Test functions have support of size h, so the residual vector is scaled by h.
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const MeshPtr m = build_mesh(unit_interval(), n);
    const Field u = interpolate(m, [](const Point& x) { return 0.5 * x[0] * (1.0 - x[0]); });
    const double res = sup_abs(weak_residual(2.0, u, constant_source(1.0))) / m->spacing();
    CHECK(res <= 1e-12 + 1.0 / (n * n));
    if (prev > 0.0) CHECK(res <= prev);
    prev = res;
  }
}

TEST_CASE("weak residual of the sine eigenpair is O(h^2)") {
  std::vector<double> res;
  for (int n : {32, 64, 128}) {
    const MeshPtr m = build_mesh(unit_interval(), n);
    const Field phi = interpolate(m, [](const Point& x) { return std::sqrt(2.0) * std::sin(kPi * x[0]); });
    Field f = phi;
    f.values() *= kPi * kPi;
    res.push_back(sup_abs(weak_residual(2.0, phi, f)) / m->spacing());
  }
  CHECK(std::log2(res[0] / res[1]) > 1.8);
  CHECK(std::log2(res[1] / res[2]) > 1.8);
}

TEST_CASE("weak residual rejects bad input") {
  const MeshPtr m = build_mesh(unit_interval(), 8);
  const Field u(m);
  CHECK_THROWS_AS(weak_residual(1.0, u, constant_source(1.0)), InvalidArgument);
  CHECK_THROWS_AS(weak_residual(2.0, u, constant_source(std::nan(""))), InvalidArgument);
  CHECK_THROWS_AS(weak_residual(2.0, u, constant_source(INFINITY)), InvalidArgument);
}

TEST_CASE("solve_scalar reproduces -u'' = 1") {
  const MeshPtr m = build_mesh(unit_interval(), 64);
  const auto r = solve_scalar(2.0, constant_source(1.0), Field(m));
  REQUIRE(r.report.converged);
  double err = 0.0;
  for (std::size_t i = 0; i < m->node_count(); ++i) {
    const double x = m->node(i)[0];
    err = std::max(err, std::abs(r.u[i] - 0.5 * x * (1.0 - x)));
  }
  CHECK(err <= 1e-10);  // P1 is nodally exact in 1D for this problem
}

TEST_CASE("solve_scalar with f(t) = 1/(t+1) matches the collocation oracle") {
  const auto oracle = pqlap::test::fd_oracle();
  REQUIRE(oracle.count("scalar_inv"));
  const MeshPtr m = build_mesh(unit_interval(), 256);
  PointSource f{[](std::size_t, double t) { return 1.0 / (t + 1.0); },
                [](std::size_t, double t) { return -1.0 / ((t + 1.0) * (t + 1.0)); }};
  const auto r = solve_scalar(2.0, f, Field(m));
  REQUIRE(r.report.converged);
  CHECK(r.report.residual <= 1e-10);
  for (std::size_t i = 1; i + 1 < m->node_count(); ++i) CHECK(r.u[i] > 0.0);
  const double xs[] = {0.125, 0.25, 0.5};
  for (int k = 0; k < 3; ++k)
    CHECK(pqlap::test::value_at(r.u, xs[k]) == doctest::Approx(oracle.at("scalar_inv")[k]).epsilon(1e-4));
}

TEST_CASE("solve_scalar with zero source gives zero") {
  for (double r : {1.5, 2.0, 3.0}) {
    const MeshPtr m = build_mesh(unit_interval(), 32);
    const Field init = interpolate(m, [](const Point& x) { return x[0] * (1.0 - x[0]); });
    const auto res = solve_scalar(r, constant_source(0.0), init);
    REQUIRE(res.report.converged);
    CHECK(sup_abs(res.u.values()) <= 1e-8);
  }
}

TEST_CASE("solve_scalar respects bounds") {
  const MeshPtr m = build_mesh(unit_interval(), 64);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(m->node_count(), 0.05);
  ScalarSolveOptions opt;
  opt.upper = hi;
  opt.lower = Eigen::VectorXd::Zero(m->node_count());
  const auto r = solve_scalar(2.0, constant_source(1.0), Field(m), opt);
  REQUIRE(r.report.converged);
  CHECK(r.u.values().maxCoeff() <= 0.05 + 1e-15);
  CHECK(r.report.active_bounds > 0);
}

TEST_CASE("gradient regularization schedule") {
  const auto g = GradientRegularization::geometric(1.0);
  REQUIRE(!g.schedule.empty());
  for (std::size_t i = 1; i < g.schedule.size(); ++i) CHECK(g.schedule[i] < g.schedule[i - 1]);
  CHECK(g.schedule.back() <= 1e-10);
  const auto big = GradientRegularization::geometric(1e3);
  CHECK(big.schedule.back() <= 1e-10);
}

TEST_CASE("first eigenpair against the analytic and shooting oracles") {
  SUBCASE("r = 2 on (0,1)") {
    const auto e = first_eigenpair(2.0, build_mesh(unit_interval(), 512));
    CHECK(std::abs(e.eigenvalue / (kPi * kPi) - 1.0) <= 0.005);
    double err = 0.0;
    for (std::size_t i = 0; i < e.phi.size(); ++i)
      err = std::max(err, std::abs(e.phi[i] - std::sqrt(2.0) * std::sin(kPi * e.phi.mesh().node(i)[0])));
    CHECK(err <= 1e-4);
  }
  SUBCASE("r = 3 on (0,1)") {
    const double oracle = pqlap::test::eigen_oracle_value(3.0, 1.0);
    REQUIRE(oracle > 0.0);
    const auto e = first_eigenpair(3.0, build_mesh(unit_interval(), 512));
    CHECK(std::abs(e.eigenvalue / oracle - 1.0) <= 0.01);
  }
  SUBCASE("r = 2 on (0,pi)") {
    const auto e = first_eigenpair(2.0, build_mesh(interval(0.0, kPi), 512));
    CHECK(std::abs(e.eigenvalue - 1.0) <= 0.005);
  }
}

TEST_CASE("every fixture eigenvalue is reproduced") {
  const auto rows = pqlap::test::eigen_oracle();
  REQUIRE(rows.size() >= 3);
  for (const auto& row : rows) {
    CAPTURE(row.r);
    CAPTURE(row.L);
    const auto e = first_eigenpair(row.r, build_mesh(interval(0.0, row.L), 256));
    CHECK(std::abs(e.eigenvalue / row.shooting - 1.0) <= 0.01);
    if (row.closed_form > 0.0) CHECK(row.shooting == doctest::Approx(row.closed_form).epsilon(1e-7));
  }
}

TEST_CASE("eigenpair invariants and scaling in the interval length") {
  for (double r : {1.5, 2.0, 3.0}) {
    CAPTURE(r);
    const auto e1 = first_eigenpair(r, build_mesh(unit_interval(), 256));
    CHECK(std::abs(lr_norm_pow(e1.phi, r) - 1.0) <= 1e-10);
    for (std::size_t i = 1; i + 1 < e1.phi.size(); ++i) CHECK(e1.phi[i] > 0.0);
    CHECK(e1.eigenvalue > 0.0);
    CHECK(std::abs(rayleigh_quotient(e1.phi, r) / e1.eigenvalue - 1.0) <= 1e-6);

    const double L = 2.5;
    const auto eL = first_eigenpair(r, build_mesh(interval(0.0, L), 256));
    CHECK(std::abs(eL.eigenvalue * std::pow(L, r) / e1.eigenvalue - 1.0) <= 0.01);
  }
}

TEST_CASE("singular auxiliary problem") {
  const MeshPtr m = build_mesh(interval(-0.25, 1.25), 256);
  const double A = 1.0, theta = -0.5;
  const Field xi = singular_auxiliary_solve(2.0, A, theta, m);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (m->is_boundary(i))
      CHECK(xi[i] == 0.0);
    else
      CHECK(xi[i] > 0.0);
  }
  const double eta = auxiliary_final_shift(2.0, A, theta);
  CHECK(eta <= 1e-8);
  PointSource f{[&](std::size_t, double t) { return A * std::pow(t + eta, theta); }, {}};
  CHECK(sup_abs(weak_residual(2.0, xi, f, 0.0)) <= 1e-8);

  CHECK_THROWS_AS(singular_auxiliary_solve(2.0, A, -1.0, m), InvalidArgument);
  CHECK_THROWS_AS(singular_auxiliary_solve(2.0, A, 0.0, m), InvalidArgument);
  CHECK_THROWS_AS(singular_auxiliary_solve(2.0, -1.0, theta, m), InvalidArgument);
}

TEST_CASE("auxiliary homothety: c xi solves the problem with amplitude A c^(r-1-theta)") {
  for (double r : {1.5, 2.0, 3.0}) {
    CAPTURE(r);
    const MeshPtr m = build_mesh(interval(-0.25, 1.25), 128);
    const double theta = -0.4, c = 2.0;
    const Field xi = singular_auxiliary_solve(r, 1.0, theta, m);
    const Field xi2 = singular_auxiliary_solve(r, std::pow(c, r - 1.0 - theta), theta, m);
    const double scale = xi.values().maxCoeff();
    CHECK(sup_abs(xi2.values() - c * xi.values()) <= 1e-7 * scale);
  }
}

TEST_CASE("power identity for gamma = 2, r = 2 approaches -4 pi^2 cos(2 pi x)") {
  double prev = INFINITY;
  for (int n : {64, 128, 256}) {
    const MeshPtr m = build_mesh(unit_interval(), n);
    EigenPair e;
    e.r = 2.0;
    e.eigenvalue = kPi * kPi;
    e.phi = interpolate(m, [](const Point& x) { return std::sqrt(2.0) * std::sin(kPi * x[0]); });
    e.phi[0] = e.phi[static_cast<std::size_t>(n)] = 0.0;  // sin(pi) is not exactly 0
    const Field g = plap_power_identity(e, 2.0, 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(g[i] + 4 * kPi * kPi * std::cos(2 * kPi * m->node(i)[0])));
    CHECK(err <= 40.0 / n);
    CHECK(err < prev);
    prev = err;

    const Field g2 = plap_power_identity(e, 2.0, 2.0);
    CHECK(sup_abs(g2.values() - 2.0 * g.values()) <= 1e-12 * sup_abs(g.values()));

    // γ = 1 formally gives λ φ^{r-1}.
    const Field g1 = plap_power_identity(e, 1.0 + 1e-12, 1.0);
    CHECK(sup_abs(g1.values() - kPi * kPi * e.phi.values()) <= 1e-8);
  }
  EigenPair e;
  e.phi = Field(build_mesh(unit_interval(), 8));
  CHECK_THROWS_AS(plap_power_identity(e, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("discrete power identity residual decreases with h") {
  struct Case { double r, gamma; };
  for (const Case c : {Case{2.0, 2.0}, Case{3.0, 2.0}, Case{1.5, 3.0}}) {
    CAPTURE(c.r);
    double prev = INFINITY;
    for (int n : {64, 128, 256}) {
      const MeshPtr m = build_mesh(unit_interval(), n);
      const EigenPair e = first_eigenpair(c.r, m);
      Field u = e.phi;
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::pow(e.phi[i], c.gamma);
      const double res = sup_abs(weak_residual(c.r, u, plap_power_identity(e, c.gamma, 1.0)));
      CHECK(res < prev);
      prev = res;
    }
    CHECK(prev <= 0.05);
  }
}

TEST_CASE("property: solve_scalar is order preserving in the source") {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> amp(0.1, 3.0), shift(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const double r = std::vector<double>{1.5, 2.0, 3.0}[trial % 3];
    const MeshPtr m = build_mesh(unit_interval(), 64);
    const double a = amp(rng), b = a + shift(rng), c = amp(rng);
    // f_k(x, t) = a_k (1 + c x) / (1 + t): nonincreasing in t, f1 <= f2.
    auto make = [&](double k) {
      return PointSource{[k, c, m](std::size_t q, double t) { return k * (1.0 + c * m->quadrature()[q].x[0]) / (1.0 + t); },
                         [k, c, m](std::size_t q, double t) {
                           return -k * (1.0 + c * m->quadrature()[q].x[0]) / ((1.0 + t) * (1.0 + t));
                         }};
    };
    const auto u1 = solve_scalar(r, make(a), Field(m));
    const auto u2 = solve_scalar(r, make(b), Field(m));
    REQUIRE(u1.report.converged);
    REQUIRE(u2.report.converged);
    CHECK((u1.u.values() - u2.u.values()).maxCoeff() <= 1e-8);
  }
}

TEST_CASE("2D eigenvalue of the unit square") {
  const auto e = first_eigenpair(2.0, build_mesh(pqlap::test::unit_square(), 32));
  CHECK(std::abs(e.eigenvalue / (2 * kPi * kPi) - 1.0) <= 0.02);
  CHECK(std::abs(lr_norm_pow(e.phi, 2.0) - 1.0) <= 1e-10);
}
