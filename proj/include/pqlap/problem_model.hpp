#pragma once

#include <optional>
#include <string>

namespace pqlap {

/// Exponents and parameters of the singular cooperative system
///   -Δ_p u = λ u^{α1} v^{β1},  -Δ_q v = λ u^{α2} v^{β2}.
struct ProblemParams {
  double p = 2.0;
  double q = 2.0;
  double alpha1 = -0.5;
  double beta1 = 0.5;
  double alpha2 = 0.5;
  double beta2 = -0.5;
  double lambda = 1.0;
  double gamma = 2.0;  // power of the eigenfunctions in the subsolution
};

enum class Regime { Subhomogeneous, Homogeneous, Superhomogeneous };

const char* regime_name(Regime r);

/// Open interval for the coupling exponent k; free when Θ = 0.
struct KInterval {
  bool free = false;
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double k) const { return free || (k > lower && k < upper); }
};

struct Classification {
  double theta = 0.0;
  int sigma = 0;
  Regime regime = Regime::Homogeneous;
  bool h1 = false;
  bool h_prime = false;        // α1, β2 > -1 - 1/γ
  bool h_doubleprime = false;  // α1, β2 > -1/γ
  bool c = false;              // α1, β2 in (-1, 0)
  bool c2 = false;             // β1 = q/p (p-1-α1) or α2 = p/q (q-1-β2)
  double k = 1.0;
  KInterval k_interval;
};

/// (p-1-α1)(q-1-β2) - β1 α2.
double theta(const ProblemParams& params);

/// -sgn(Θ).
int sigma(double theta);

/// Checks the hypotheses and classifies. Hard errors: violated sign pattern
/// α1, β2 < 0 < α2, β1, p or q <= 1, γ <= 1, λ <= 0. The remaining flags are
/// advisory. |Θ| below 1e-12 times the size of its two products counts as 0.
/// k_override replaces the interval midpoint; it must lie in the interval.
Classification validate(const ProblemParams& params, std::optional<double> k_override = std::nullopt);

/// Admissible interval for k and its midpoint (k = 1 with a free interval when Θ = 0).
KInterval k_interval(const ProblemParams& params, double theta);
double choose_k(const ProblemParams& params, const Classification& cls);

/// min{C^σ, C^{σk}}.
double epsilon0(double C, int sigma, double k);

/// min{p λ1p / (α1+α2+1), q λ1q / (β1+β2+1)}; requires Θ = 0, (c) and (c2).
double lambda_star(const ProblemParams& params, double lam1p, double lam1q);

/// "key: value" lines.
std::string format_classification(const ProblemParams& params, const Classification& cls);

}  // namespace pqlap
