#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pqlap/errors.hpp"
#include "pqlap/verification_suite.hpp"
#include "test_support.hpp"

using namespace pqlap;
using pqlap::test::unit_interval;

namespace {

struct Homogeneous {
  ProblemParams params = pqlap::test::zero_theta_reference();
  MeshPtr mesh = build_mesh(unit_interval(), 128);
  EigenPair eig = first_eigenpair(2.0, mesh);
  double lam_star = lambda_star(params, eig.eigenvalue, eig.eigenvalue);
};

const Homogeneous& homogeneous() {
  static const Homogeneous h;
  return h;
}

Field squared(const Field& f) {
  Field out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] * f[i];
  return out;
}

}  // namespace

TEST_CASE("energy certificate below and above the threshold") {
  const Homogeneous& h = homogeneous();
  const Field w = squared(h.eig.phi);
  const EnergyCertificate lo = energy_certificate(h.params, 0.5 * h.lam_star, w, w, h.eig.eigenvalue, h.eig.eigenvalue);
  CHECK(lo.gap_u > 0.0);
  CHECK(lo.gap_v > 0.0);
  CHECK(lo.gaps_positive);
  CHECK(lo.lhs >= 0.0);
  CHECK(lo.rhs >= 0.0);
  // A positive trial pair cannot balance energy below λ*.
  CHECK(lo.verdict == EnergyVerdict::NonexistenceEvidence);

  const EnergyCertificate hi = energy_certificate(h.params, 2.0 * h.lam_star, w, w, h.eig.eigenvalue, h.eig.eigenvalue);
  CHECK_FALSE(hi.gaps_positive);
  CHECK(hi.verdict == EnergyVerdict::NoConclusion);
  CHECK(format_energy(hi).find("NO_CONCLUSION") != std::string::npos);
}

TEST_CASE("energy of the eigenfunction pair is the Rayleigh identity") {
  const Homogeneous& h = homogeneous();
  const EnergyCertificate e =
      energy_certificate(h.params, h.lam_star, h.eig.phi, h.eig.phi, h.eig.eigenvalue, h.eig.eigenvalue);
  const double expected = h.eig.eigenvalue * (e.norm_u + e.norm_v);
  CHECK(std::abs(e.lhs / expected - 1.0) <= 1e-6);
}

TEST_CASE("gaps change sign at lambda star") {
  const Homogeneous& h = homogeneous();
  const Field w = squared(h.eig.phi);
  const double l = h.lam_star;
  const auto below = energy_certificate(h.params, l * (1 - 1e-10), w, w, h.eig.eigenvalue, h.eig.eigenvalue);
  const auto above = energy_certificate(h.params, l * (1 + 1e-10), w, w, h.eig.eigenvalue, h.eig.eigenvalue);
  CHECK(below.gaps_positive);
  CHECK_FALSE(above.gaps_positive);
  const auto at = energy_certificate(h.params, l, w, w, h.eig.eigenvalue, h.eig.eigenvalue);
  CHECK(std::min(at.gap_u, at.gap_v) == doctest::Approx(0.0).epsilon(1e-10).scale(l));
}

TEST_CASE("energy certificate preconditions") {
  const Homogeneous& h = homogeneous();
  const Field w = squared(h.eig.phi);
  CHECK_THROWS_AS(energy_certificate(pqlap::test::positive_theta_reference(), 1.0, w, w, 1.0, 1.0), InvalidArgument);
  Field z = w;
  z[10] = 0.0;
  CHECK_THROWS_AS(energy_certificate(h.params, 1.0, z, w, 1.0, 1.0), InvalidArgument);
  ProblemParams not_c2 = h.params;
  not_c2.beta1 = 1.2;
  not_c2.alpha2 = 1.875;  // keeps theta = 0 but breaks (c2)
  CHECK(validate(not_c2).theta == 0.0);
  CHECK_THROWS_AS(energy_certificate(not_c2, 1.0, w, w, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("property: random positive fields respect the Rayleigh bound") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  std::uniform_int_distribution<int> modes(1, 6);
  for (double r : {1.5, 2.0, 3.0}) {
    const MeshPtr m = build_mesh(unit_interval(), 128);
    const double lam1 = first_eigenpair(r, m).eigenvalue;
    for (int t = 0; t < 50; ++t) {
      const int k = modes(rng);
      std::vector<double> c(static_cast<std::size_t>(k));
      for (double& x : c) x = amp(rng);
      const Field w = interpolate(m, [&](const Point& p) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += c[static_cast<std::size_t>(j)] * std::sin((j + 1) * std::numbers::pi * p[0]);
        return std::abs(s) + std::sin(std::numbers::pi * p[0]) * 1e-3;
      });
      CHECK(rayleigh_lower_bound(w, r, lam1));
    }
  }
}

TEST_CASE("probe below the threshold does not produce a positive solution") {
  const Homogeneous& h = homogeneous();
  const ProbeResult r = nonexistence_probe(h.params, 0.5 * h.lam_star, h.eig, h.eig);
  CHECK(r.outcome != ProbeOutcome::ConvergedPositive);
  CHECK(format_probe(r).find("not a proof") != std::string::npos);
  CHECK_THROWS_AS(nonexistence_probe(h.params, 0.0, h.eig, h.eig), InvalidArgument);
  CHECK_THROWS_AS(nonexistence_probe(pqlap::test::positive_theta_reference(), 1.0, h.eig, h.eig), InvalidArgument);
}

TEST_CASE("lambda = 0 is rejected by validation") {
  ProblemParams p = pqlap::test::zero_theta_reference();
  p.lambda = 0.0;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
}

TEST_CASE("threshold bisection on a synthetic probe") {
  int calls = 0;
  const auto step = [&](double lam) {
    ++calls;
    return lam >= 3.7 ? ProbeOutcome::ConvergedPositive : ProbeOutcome::Collapse;
  };
  const ThresholdResult t = empirical_threshold(step, 1.0, 10.0, 20);
  CHECK(t.lo < 3.7);
  CHECK(t.hi >= 3.7);
  CHECK(t.lambda_emp == doctest::Approx(3.7).epsilon(1e-5));
  CHECK_FALSE(t.non_monotone);

  calls = 0;
  const ThresholdResult z = empirical_threshold(step, 1.0, 10.0, 0);
  CHECK(z.lambda_emp == 5.5);
  CHECK(calls == 0);

  CHECK_THROWS_AS(empirical_threshold(step, 10.0, 1.0, 5), InvalidArgument);
  CHECK_THROWS_AS(empirical_threshold(step, 4.0, 10.0, 5), InvalidArgument);
  CHECK_THROWS_AS(empirical_threshold(step, 1.0, 2.0, 5), InvalidArgument);

  // Positive on [3, 6) and above 9: the checks above the bracket catch the gap.
  const auto gap = [](double lam) {
    return (lam >= 3.0 && lam < 6.0) || lam >= 9.0 ? ProbeOutcome::ConvergedPositive : ProbeOutcome::Nonconvergence;
  };
  const ThresholdResult g = empirical_threshold(gap, 1.0, 10.0, 8, 3);
  CHECK(g.non_monotone);
  CHECK(g.lambda_emp == doctest::Approx(3.0).epsilon(1e-2));
}

TEST_CASE("manufactured convergence orders") {
  const ConvergenceStudy s2 = manufactured_convergence(2.0, {64, 128, 256});
  REQUIRE(s2.orders.size() == 2);
  for (double o : s2.orders) CHECK(o >= 1.8);
  for (double r : {1.5, 3.0}) {
    const ConvergenceStudy s = manufactured_convergence(r, {64, 128, 256});
    for (double o : s.orders) CHECK(o >= 0.9);
  }
  CHECK_THROWS_AS(manufactured_convergence(2.0, {64, 128}), InvalidArgument);
  CHECK_FALSE(format_convergence(s2).empty());
}
