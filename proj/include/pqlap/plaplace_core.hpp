#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pqlap/domain_mesh.hpp"

namespace pqlap {

/// Right-hand side sampled at quadrature points. value(q, t) is f(x_q, t)
/// where t is the trial field's interpolated value at point q.
struct PointSource {
  std::function<double(std::size_t, double)> value;
  std::function<double(std::size_t, double)> derivative;  // df/dt; empty means 0
};

/// t-independent source: the P1 interpolant of a nodal field.
PointSource field_source(const Field& f);

/// (|g|^2 + s^2)^{(r-2)/2}; zero when g = 0 and s = 0 (the flux vanishes there).
double flux_coefficient(double r, double grad_sq, double s);

/// Gradient of a field on element e.
Point element_gradient(const Field& u, std::size_t e);

/// Discrete -Δ_r: entry i is ∫ κ(∇u) ∇u·∇φ_i for every node, boundary rows included.
Eigen::VectorXd operator_action(double r, const Field& u, double s = 0.0);

/// Entry i is Σ_q w_q f(q, u_q) φ_i(x_q).
Eigen::VectorXd source_load(const Mesh& mesh, const PointSource& f, const Eigen::VectorXd& u_at_quadrature);

/// Weak residual ∫|∇u|^{r-2}∇u·∇φ_i - ∫ f φ_i per node; boundary entries are zero.
Eigen::VectorXd weak_residual(double r, const Field& u, const PointSource& source, double s = 0.0);
Eigen::VectorXd weak_residual(double r, const Field& u, const Field& source);

double interior_sup(const Mesh& mesh, const Eigen::VectorXd& v);

/// Quadrature Lr norm raised to the r-th power, Σ_q w_q |u_q|^r.
double lr_norm_pow(const Field& u, double r);
/// Σ_e |e| |∇u_e|^r (exact for P1 fields).
double gradient_norm_pow(const Field& u, double r);
double rayleigh_quotient(const Field& u, double r);

/// Smoothing levels s for the degenerate coefficient, strictly decreasing.
struct GradientRegularization {
  std::vector<double> schedule;

  /// scale * 10^-k for k = 2..10, extended until the last level is <= 1e-10.
  static GradientRegularization geometric(double scale = 1.0);
};

struct ScalarSolveOptions {
  double tol = 1e-10;             // sup norm of the (projected) residual
  double gradient_scale = 1.0;    // sets the smoothing schedule
  int max_newton = 100;           // per smoothing level
  int max_halvings = 30;
  int stagnation_window = 20;
  double stagnation_reduction = 1e-3;
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
  std::optional<Eigen::VectorXd> extra_load;  // added to the source load
};

struct ScalarSolveReport {
  bool converged = false;
  int newton_iterations = 0;
  double residual = 0.0;  // projected sup norm at s = 0
  std::size_t active_bounds = 0;
  std::string message;
};

struct ScalarSolveResult {
  Field u;
  ScalarSolveReport report;
};

/// Solves -Δ_r u = f(x, u) with zero Dirichlet data by damped Newton with
/// smoothing continuation. With bounds the iterate is projected into
/// [lower, upper] after every step and convergence is measured on the
/// projected residual. Nonconvergence is reported, never thrown.
ScalarSolveResult solve_scalar(double r, const PointSource& rhs, const Field& init,
                               const ScalarSolveOptions& options = {});

struct EigenPair {
  double r = 2.0;
  double eigenvalue = 0.0;
  Field phi;
  int iterations = 0;
};

struct EigenOptions {
  int max_iter = 500;
  double tol = 1e-9;
  double newton_tol = 1e-10;
};

/// First Dirichlet eigenpair of -Δ_r by inverse power iteration; phi > 0 in
/// the interior with Σ_q w_q φ_q^r = 1, eigenvalue = Rayleigh quotient.
EigenPair first_eigenpair(double r, const MeshPtr& mesh, const EigenOptions& options = {});

struct AuxiliaryOptions {
  int stages = 8;          // eta = scale * 10^-1 ... scale * 10^-stages
  double tol = 1e-10;      // in units of the source magnitude
};

/// Solves -Δ_r ξ = A ξ^θ, ξ = 0 on the mesh boundary, θ in (-1, 0), through
/// the shifted problems -Δ_r ξ = A (ξ + η)^θ with η decreasing geometrically.
/// η is measured relative to the natural amplitude A^{1/(r-1-θ)}, which makes
/// the sequence of discrete problems exactly homothetic in A.
Field singular_auxiliary_solve(double r, double amplitude, double theta, const MeshPtr& mesh,
                               const AuxiliaryOptions& options = {});

/// Final shift η used by singular_auxiliary_solve.
double auxiliary_final_shift(double r, double amplitude, double theta, const AuxiliaryOptions& options = {});

/// Nodal gradients recovered by measure-weighted averaging of element gradients.
std::vector<Point> recovered_gradients(const Field& u);

/// Nodal values of prefactor · γ^{r-1} φ^{γ(r-1)-r} (λ φ^r - (γ-1)(r-1)|∇φ|^r),
/// which is -Δ_r(c φ^γ) for c^{r-1} = prefactor. Gradients are recovered.
/// Where φ = 0 and the power of φ is negative the value is set to 0.
Field plap_power_identity(const EigenPair& eig, double gamma, double prefactor);

}  // namespace pqlap
