#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pqlap/plaplace_core.hpp"
#include "pqlap/problem_model.hpp"
#include "pqlap/system_solver.hpp"

namespace pqlap {

enum class EnergyVerdict { NonexistenceEvidence, NoConclusion, Inconsistent };

const char* energy_verdict_name(EnergyVerdict v);

/// Energy balance of a candidate pair in the homogeneous regime:
///   lhs = ‖∇u‖_p^p + ‖∇v‖_q^q,
///   rhs = λ [(α1+α2+1)/p ‖u‖_p^p + (β1+β2+1)/q ‖v‖_q^q].
/// A true solution satisfies lhs <= rhs; with both eigenvalue gaps positive
/// the Rayleigh bound makes that impossible.
struct EnergyCertificate {
  double lambda = 0.0;
  double lhs = 0.0, rhs = 0.0;
  double grad_u = 0.0, grad_v = 0.0;   // ‖∇u‖_p^p, ‖∇v‖_q^q
  double norm_u = 0.0, norm_v = 0.0;   // ‖u‖_p^p, ‖v‖_q^q
  double rayleigh_u = 0.0, rayleigh_v = 0.0;
  double gap_u = 0.0, gap_v = 0.0;     // λ1p - (α1+α2+1)/p λ, λ1q - (β1+β2+1)/q λ
  double final_display = 0.0;          // gap_u ‖u‖ + gap_v ‖v‖
  bool gaps_positive = false;
  bool satisfies_balance = false;      // lhs <= rhs (1 + rel_tol)
  double rel_tol = 1e-6;
  EnergyVerdict verdict = EnergyVerdict::NoConclusion;
};

/// Requires Θ = 0, (c) and (c2).
EnergyCertificate energy_certificate(const ProblemParams& params, double lambda, const Field& u, const Field& v,
                                     double lam1p, double lam1q, double rel_tol = 1e-6);

std::string format_energy(const EnergyCertificate& e);

/// ‖∇w‖_r^r >= (1 - slack) λ1r ‖w‖_r^r.
bool rayleigh_lower_bound(const Field& w, double r, double lam1r, double slack = 0.02);

enum class ProbeOutcome { Collapse, Nonconvergence, ConvergedPositive };

const char* probe_outcome_name(ProbeOutcome o);

struct ProbeResult {
  ProbeOutcome outcome = ProbeOutcome::Nonconvergence;
  double lambda = 0.0;
  double max_u = 0.0, max_v = 0.0;
  double residual_u = 0.0, residual_v = 0.0;
  SolveReport report;
  std::optional<EnergyCertificate> energy;
  // Slope of log max(u) against log ε over the completed stages; 1 means the
  // regularized fields shrink proportionally to ε.
  std::optional<double> eps_scaling_exponent;
  std::string message;
};

/// Continuation without barriers from (φp^γ, φq^γ). COLLAPSE when the final
/// fields stay below 10 tol_fixedpoint, NONCONVERGENCE on any stage failure
/// or a failed final residual, CONVERGED_POSITIVE otherwise (with its energy
/// certificate). The outcome is numerical evidence, not a proof.
ProbeResult nonexistence_probe(const ProblemParams& params, double lambda, const EigenPair& eigp,
                               const EigenPair& eigq, const SolveConfig& config = {});

std::string format_probe(const ProbeResult& r);

struct ThresholdResult {
  double lambda_emp = 0.0;   // midpoint of the final bracket
  double lo = 0.0, hi = 0.0;
  std::vector<std::pair<double, ProbeOutcome>> history;
  bool non_monotone = false; // a failing probe above a positive one
};

/// Bisection on the probe outcome. Requires lo < hi, probe(lo) not positive and
/// probe(hi) positive; zero steps return the initial midpoint without probing.
/// Afterwards `monotonicity_checks` evenly spaced points between the final and
/// the initial upper end are probed; a failure there sets non_monotone.
ThresholdResult empirical_threshold(const std::function<ProbeOutcome(double)>& probe, double lambda_lo,
                                    double lambda_hi, int bisection_steps, int monotonicity_checks = 2);

struct ConvergenceLevel {
  int n = 0;
  double h = 0.0;
  double error = 0.0;   // sup over nodes and element midpoints
};

struct ConvergenceStudy {
  double r = 2.0;
  std::vector<ConvergenceLevel> levels;
  std::vector<double> orders;   // log2 of successive error ratios (for halving h)
};

/// u* = sin(πx) on (0, 1) with the exact load ∫ |u*'|^{r-2} u*' φ_i' (8-point
/// Gauss per element). At least three levels.
ConvergenceStudy manufactured_convergence(double r, const std::vector<int>& levels);

std::string format_convergence(const ConvergenceStudy& s);

}  // namespace pqlap
