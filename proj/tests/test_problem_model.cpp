#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pqlap/errors.hpp"
#include "pqlap/problem_model.hpp"
#include "test_support.hpp"

using namespace pqlap;

namespace {

ProblemParams with(double alpha1, double beta1, double alpha2, double beta2) {
  ProblemParams p;
  p.alpha1 = alpha1;
  p.beta1 = beta1;
  p.alpha2 = alpha2;
  p.beta2 = beta2;
  return p;
}

}  // namespace

TEST_CASE("theta of the worked examples") {
  CHECK(std::abs(theta(with(-0.5, 0.5, 0.5, -0.5)) - 2.0) <= 1e-12);
  CHECK(std::abs(theta(with(-0.5, 1.5, 1.5, -0.5))) <= 1e-12);
  CHECK(std::abs(theta(with(-0.5, 3.0, 3.0, -0.5)) + 6.75) <= 1e-12);
}

TEST_CASE("sigma") {
  CHECK(sigma(2.0) == -1);
  CHECK(sigma(0.0) == 0);
  CHECK(sigma(-6.75) == 1);
}

TEST_CASE("hypothesis flags of the reference instance") {
  const Classification c = validate(pqlap::test::positive_theta_reference());
  CHECK(c.h1);
  CHECK(c.h_prime);
  CHECK_FALSE(c.h_doubleprime);  // -1/2 > -1/2 is false
  CHECK(c.c);
  CHECK(c.regime == Regime::Subhomogeneous);
  CHECK(c.sigma == -1);
}

TEST_CASE("(c2) on the homogeneous reference") {
  const Classification c = validate(pqlap::test::zero_theta_reference());
  CHECK(c.c2);
  CHECK(c.theta == 0.0);
  CHECK(c.sigma == 0);
  CHECK(c.regime == Regime::Homogeneous);
  CHECK(c.k_interval.free);
  CHECK(c.k == 1.0);
}

TEST_CASE("sign pattern violations name the exponent") {
  ProblemParams p = pqlap::test::positive_theta_reference();
  p.alpha1 = 0.5;
  try {
    validate(p);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("not cooperative-singular") != std::string::npos);
    CHECK(msg.find("alpha1") != std::string::npos);
  }
  ProblemParams q = pqlap::test::positive_theta_reference();
  q.beta1 = -0.1;
  CHECK_THROWS_WITH_AS(validate(q), doctest::Contains("beta1"), InvalidArgument);
}

TEST_CASE("hard parameter errors") {
  ProblemParams p = pqlap::test::positive_theta_reference();
  p.lambda = 0.0;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
  p = pqlap::test::positive_theta_reference();
  p.p = 1.0;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
  p = pqlap::test::positive_theta_reference();
  p.gamma = 1.0;
  CHECK_THROWS_AS(validate(p), InvalidArgument);
  p = pqlap::test::positive_theta_reference();
  p.q = std::nan("");
  CHECK_THROWS_AS(validate(p), InvalidArgument);
}

TEST_CASE("k interval and choice") {
  const ProblemParams neg = with(-0.5, 3.0, 3.0, -0.5);
  const KInterval kn = k_interval(neg, theta(neg));
  CHECK(std::abs(kn.lower - 0.5) <= 1e-12);
  CHECK(std::abs(kn.upper - 2.0) <= 1e-12);
  CHECK(std::abs(choose_k(neg, validate(neg)) - 1.25) <= 1e-12);

  const ProblemParams pos = pqlap::test::positive_theta_reference();
  const KInterval kp = k_interval(pos, theta(pos));
  CHECK(std::abs(kp.lower - 1.0 / 3.0) <= 1e-12);
  CHECK(std::abs(kp.upper - 3.0) <= 1e-12);
  CHECK(std::abs(choose_k(pos, validate(pos)) - 5.0 / 3.0) <= 1e-12);

  CHECK(validate(pos, 2.0).k == 2.0);
  CHECK_THROWS_AS(validate(pos, 3.5), InvalidArgument);
}

TEST_CASE("epsilon0") {
  CHECK(std::abs(epsilon0(10.0, -1, 5.0 / 3.0) - std::pow(10.0, -5.0 / 3.0)) <= 1e-12);
  CHECK(std::abs(epsilon0(10.0, -1, 5.0 / 3.0) - 0.021544346900318846) <= 1e-12);
  CHECK(epsilon0(7.0, 0, 1.0) == 1.0);
  CHECK_THROWS_AS(epsilon0(1.0, -1, 1.0), InvalidArgument);
}

TEST_CASE("lambda star") {
  const ProblemParams z = pqlap::test::zero_theta_reference();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(lambda_star(z, pi2, pi2) - pi2) <= 1e-12);
  CHECK(std::abs(lambda_star(z, 1.0, 1.0) - 1.0) <= 1e-12);
  // With the fixture eigenvalue.
  const double lam = pqlap::test::eigen_oracle_value(2.0, 1.0);
  CHECK(std::abs(lambda_star(z, lam, lam) - 9.8696044010893586) <= 1e-9);
  CHECK_THROWS_AS(lambda_star(pqlap::test::positive_theta_reference(), pi2, pi2), InvalidArgument);
}

TEST_CASE("classification report") {
  const ProblemParams p = pqlap::test::positive_theta_reference();
  const std::string s = format_classification(p, validate(p));
  CHECK(s.find("theta: 2.0") != std::string::npos);
  CHECK(s.find("sigma: -1") != std::string::npos);
  const ProblemParams z = pqlap::test::zero_theta_reference();
  CHECK(format_classification(z, validate(z)).find("k_interval: free") != std::string::npos);
}

TEST_CASE("property: regime, sigma and k agree for random admissible exponents") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> neg(-0.95, -0.01), pos(0.01, 4.0), expo(1.1, 4.0);
  for (int t = 0; t < 500; ++t) {
    ProblemParams p;
    p.p = expo(rng);
    p.q = expo(rng);
    p.alpha1 = neg(rng);
    p.beta2 = neg(rng);
    p.beta1 = pos(rng);
    p.alpha2 = pos(rng);
    const Classification c = validate(p);
    CHECK(c.sigma == -(c.theta > 0) + (c.theta < 0));
    CHECK((c.regime == Regime::Subhomogeneous) == (c.theta > 0));
    CHECK((c.regime == Regime::Superhomogeneous) == (c.theta < 0));
    if (c.theta != 0.0) {
      CHECK(c.k_interval.contains(c.k));
      CHECK(c.k_interval.lower < c.k_interval.upper);
      const double e0 = epsilon0(4.0, c.sigma, c.k);
      CHECK(e0 > 0.0);
      CHECK((e0 < 1.0) == (c.sigma < 0));
    }
  }
}
