#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqlap/barrier_builder.hpp"
#include "pqlap/plaplace_core.hpp"
#include "pqlap/problem_model.hpp"

namespace pqlap {

struct SolveConfig {
  double tol_fixedpoint = 1e-9;
  double tol_newton = 1e-10;
  int max_sweeps = 200;
  std::vector<double> eps_schedule;  // empty: eps0 * 2^-j, j = 0..eps_stages-1
  int eps_stages = 21;
  bool clamp = true;
  double residual_tol = 1e-6;        // final residual of the unregularized system
  double trap_tol = 1e-10;
  // Called after every sweep with the sweep number (1-based) and the new iterates.
  std::function<void(int, const Field&, const Field&)> on_sweep;

  void check() const;
};

/// λ (t + ε)^a w^b with w frozen at the quadrature points: the right-hand side
/// of one equation while the other field is held fixed.
PointSource coupled_source(double lambda, double a, double b, double eps, const Field& frozen);

std::vector<double> default_eps_schedule(double eps0, int stages = 21);

struct RegularizedStats {
  double eps = 0.0;
  int sweeps = 0;
  bool converged = false;
  double diff = 0.0;                 // last successive sup difference
  std::vector<double> diff_history;
  double residual_u = 0.0;           // weak residual sup norms at this ε, recomputed
  double residual_v = 0.0;
  bool trapped = true;               // lower - tol <= field <= upper + tol at every accepted sweep
  double trap_violation = 0.0;       // largest violation seen (0 when trapped)
  double min_u = 0.0;                // min over interior nodes
  double min_v = 0.0;
  double max_u = 0.0;
  double max_v = 0.0;
  std::string message;
};

struct RegularizedResult {
  Field u, v;
  RegularizedStats stats;
};

/// Gauss-Seidel sweeps for
///   -Δ_p u = λ (u+ε)^{α1} v^{β1},  -Δ_q v = λ u^{α2} (v+ε)^{β2}
/// with zero Dirichlet data. With barriers and clamping the scalar solves are
/// confined to [lower, upper]; with clamping off (or without barriers) they are
/// only kept nonnegative, and the trap is checked after every sweep when barriers exist.
RegularizedResult solve_regularized(const ProblemParams& params, double lambda, double eps,
                                    const std::optional<BarrierPair>& barriers, const Field& init_u,
                                    const Field& init_v, const SolveConfig& config = {});

struct SolveReport {
  std::vector<RegularizedStats> stages;
  std::vector<double> cauchy_diffs;   // ‖(u,v)_{j+1} - (u,v)_j‖∞ between consecutive stages
  bool completed = false;             // every stage converged
  bool positive = false;              // final fields positive at interior nodes
  double residual_u = 0.0;            // unregularized weak residuals of the final fields
  double residual_v = 0.0;
  bool passed = false;
  std::string message;
  std::vector<double> eps_schedule;
};

struct ContinuationResult {
  Field u, v;
  SolveReport report;
};

/// Regularized solves along the ε schedule, each warm-started from the previous
/// stage. Barriers must be certified for the first ε; without barriers the
/// initial fields must be given. A stage failure stops the run with a partial report.
ContinuationResult continuation_solve(const ProblemParams& params, double lambda,
                                      const std::optional<BarrierPair>& barriers, const SolveConfig& config = {},
                                      std::optional<std::pair<Field, Field>> init = std::nullopt);

/// Per-node weak residuals of the unregularized system (boundary entries zero).
/// Optional sources are added to the respective right-hand sides.
/// Throws if u or v is not positive at an interior node.
std::pair<Eigen::VectorXd, Eigen::VectorXd> weak_residual_system(
    const ProblemParams& params, double lambda, const Field& u, const Field& v,
    const std::optional<std::pair<PointSource, PointSource>>& extra = std::nullopt);

std::string format_solve_report(const SolveReport& report);

}  // namespace pqlap
