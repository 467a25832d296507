#include "pqlap/problem_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pqlap/errors.hpp"
#include "pqlap/report_format.hpp"

namespace pqlap {

namespace {

constexpr double kThetaSnap = 1e-12;
constexpr double kC2Tol = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

void check_sign_pattern(const ProblemParams& pp) {
  auto fail = [](const char* name, double value, const char* rule) {
    std::ostringstream msg;
    msg << "not cooperative-singular: " << name << " = " << value << " must be " << rule;
    throw InvalidArgument(msg.str());
  };
  if (!(pp.alpha1 < 0.0)) fail("alpha1", pp.alpha1, "< 0");
  if (!(pp.beta2 < 0.0)) fail("beta2", pp.beta2, "< 0");
  if (!(pp.alpha2 > 0.0)) fail("alpha2", pp.alpha2, "> 0");
  if (!(pp.beta1 > 0.0)) fail("beta1", pp.beta1, "> 0");
}

bool rel_equal(double a, double b) { return std::abs(a - b) <= kC2Tol * std::max({1.0, std::abs(a), std::abs(b)}); }

// Θ with products this close to cancelling is treated as exactly zero.
double snapped_theta(const ProblemParams& pp) {
  const double a = (pp.p - 1.0 - pp.alpha1) * (pp.q - 1.0 - pp.beta2);
  const double b = pp.beta1 * pp.alpha2;
  const double t = a - b;
  return std::abs(t) <= kThetaSnap * std::max({1.0, std::abs(a), std::abs(b)}) ? 0.0 : t;
}

bool c2_holds(const ProblemParams& pp) {
  return rel_equal(pp.beta1, pp.q / pp.p * (pp.p - 1.0 - pp.alpha1)) ||
         rel_equal(pp.alpha2, pp.p / pp.q * (pp.q - 1.0 - pp.beta2));
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Subhomogeneous: return "subhomogeneous";
    case Regime::Homogeneous: return "homogeneous";
    case Regime::Superhomogeneous: return "superhomogeneous";
  }
  return "?";
}

double theta(const ProblemParams& pp) {
  return (pp.p - 1.0 - pp.alpha1) * (pp.q - 1.0 - pp.beta2) - pp.beta1 * pp.alpha2;
}

int sigma(double th) {
  if (th < 0.0) return 1;
  if (th > 0.0) return -1;
  return 0;
}

KInterval k_interval(const ProblemParams& pp, double th) {
  KInterval iv;
  if (th == 0.0) {
    iv.free = true;
    return iv;
  }
  const double a = (pp.p - 1.0 - pp.alpha1) / pp.beta1;
  const double b = pp.alpha2 / (pp.q - 1.0 - pp.beta2);
  iv.lower = th < 0.0 ? a : b;
  iv.upper = th < 0.0 ? b : a;
  if (!(iv.lower < iv.upper)) {
    std::ostringstream msg;
    msg << "empty k interval (" << iv.lower << ", " << iv.upper << ") for theta = " << th;
    throw std::logic_error(msg.str());
  }
  return iv;
}

double choose_k(const ProblemParams&, const Classification& cls) {
  if (cls.k_interval.free) return 1.0;
  return 0.5 * (cls.k_interval.lower + cls.k_interval.upper);
}

Classification validate(const ProblemParams& pp, std::optional<double> k_override) {
  require(pp.p > 1.0 && pp.q > 1.0, "operator exponents p and q must be > 1");
  require(pp.gamma > 1.0, "gamma must be > 1");
  require(pp.lambda > 0.0, "lambda must be > 0");
  for (double v : {pp.p, pp.q, pp.alpha1, pp.beta1, pp.alpha2, pp.beta2, pp.lambda, pp.gamma})
    require(std::isfinite(v), "parameters must be finite");
  check_sign_pattern(pp);

  Classification cls;
  cls.h1 = true;
  cls.theta = snapped_theta(pp);
  cls.sigma = sigma(cls.theta);
  cls.regime = cls.theta > 0.0 ? Regime::Subhomogeneous
               : cls.theta < 0.0 ? Regime::Superhomogeneous
                                 : Regime::Homogeneous;
  const double hp = -1.0 - 1.0 / pp.gamma;
  const double hpp = -1.0 / pp.gamma;
  cls.h_prime = pp.alpha1 > hp && pp.beta2 > hp;
  cls.h_doubleprime = pp.alpha1 > hpp && pp.beta2 > hpp;
  cls.c = pp.alpha1 > -1.0 && pp.beta2 > -1.0;
  cls.c2 = c2_holds(pp);
  cls.k_interval = k_interval(pp, cls.theta);
  cls.k = choose_k(pp, cls);
  if (k_override) {
    require(*k_override > 0.0, "k must be > 0");
    if (!cls.k_interval.contains(*k_override)) {
      std::ostringstream msg;
      msg << "k = " << *k_override << " outside the admissible interval (" << cls.k_interval.lower << ", "
          << cls.k_interval.upper << ")";
      throw InvalidArgument(msg.str());
    }
    cls.k = *k_override;
  }
  return cls;
}

double epsilon0(double C, int sig, double k) {
  require(C > 1.0, "C must be > 1");
  return std::min(std::pow(C, sig), std::pow(C, sig * k));
}

double lambda_star(const ProblemParams& pp, double lam1p, double lam1q) {
  const Classification cls = validate(pp);
  require(cls.theta == 0.0, "lambda_star needs theta = 0 (homogeneous regime)");
  require(cls.c, "lambda_star needs alpha1, beta2 in (-1, 0)");
  require(cls.c2, "lambda_star needs beta1 = q/p (p-1-alpha1) or alpha2 = p/q (q-1-beta2)");
  const double su = pp.alpha1 + pp.alpha2 + 1.0;
  const double sv = pp.beta1 + pp.beta2 + 1.0;
  require(su > 0.0, "lambda_star needs alpha1 + alpha2 + 1 > 0");
  require(sv > 0.0, "lambda_star needs beta1 + beta2 + 1 > 0");
  require(lam1p > 0.0 && lam1q > 0.0, "eigenvalues must be > 0");
  return std::min(pp.p / su * lam1p, pp.q / sv * lam1q);
}

std::string format_classification(const ProblemParams& pp, const Classification& cls) {
  std::ostringstream out;
  auto yn = [](bool b) { return b ? "true" : "false"; };
  out << "summary: theta: " << fmt_num(cls.theta) << ", sigma: " << cls.sigma << ", regime: " << regime_name(cls.regime)
      << '\n'
      << "p: " << fmt_num(pp.p) << '\n'
      << "q: " << fmt_num(pp.q) << '\n'
      << "alpha1: " << fmt_num(pp.alpha1) << '\n'
      << "beta1: " << fmt_num(pp.beta1) << '\n'
      << "alpha2: " << fmt_num(pp.alpha2) << '\n'
      << "beta2: " << fmt_num(pp.beta2) << '\n'
      << "lambda: " << fmt_num(pp.lambda) << '\n'
      << "gamma: " << fmt_num(pp.gamma) << '\n'
      << "theta: " << fmt_num(cls.theta) << '\n'
      << "sigma: " << cls.sigma << '\n'
      << "regime: " << regime_name(cls.regime) << '\n'
      << "h1: " << yn(cls.h1) << '\n'
      << "h_prime: " << yn(cls.h_prime) << '\n'
      << "h_doubleprime: " << yn(cls.h_doubleprime) << '\n'
      << "c: " << yn(cls.c) << '\n'
      << "c2: " << yn(cls.c2) << '\n'
      << "k: " << fmt_num(cls.k) << '\n';
  if (cls.k_interval.free)
    out << "k_interval: free\n";
  else
    out << "k_interval: (" << fmt_num(cls.k_interval.lower) << ", " << fmt_num(cls.k_interval.upper) << ")\n";
  return out.str();
}

}  // namespace pqlap
