#include "pqlap/plaplace_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "pqlap/errors.hpp"

namespace pqlap {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

void check_exponent(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) throw InvalidArgument("operator exponent must be > 1");
}

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Derivative of the flux κ(g) g with respect to g, contracted with two
// basis gradients: ∇φ_a · DF · ∇φ_b.
double flux_jacobian(double r, const Point& g, double s, const Point& ga, const Point& gb) {
  const double q = g[0] * g[0] + g[1] * g[1] + s * s;
  const double dot_ab = ga[0] * gb[0] + ga[1] * gb[1];
  if (r == 2.0) return dot_ab;
  const double kappa = std::pow(q, 0.5 * (r - 2.0));
  const double gga = g[0] * ga[0] + g[1] * ga[1];
  const double ggb = g[0] * gb[0] + g[1] * gb[1];
  return kappa * dot_ab + (r - 2.0) * std::pow(q, 0.5 * (r - 4.0)) * gga * ggb;
}

struct NewtonState {
  Eigen::VectorXd residual;     // full residual, boundary rows zero
  std::vector<bool> free;       // unknowns not pinned by boundary or active bound
  double sup = 0.0;             // projected sup norm
  double l2 = 0.0;              // projected Euclidean norm
  std::size_t active = 0;
};

class ScalarProblem {
 public:
  ScalarProblem(double r, const PointSource& rhs, const MeshPtr& mesh, const ScalarSolveOptions& opt)
      : r_(r), rhs_(rhs), mesh_(mesh), opt_(opt) {}

  void project(Eigen::VectorXd& u) const {
    for (std::size_t i = 0; i < mesh_->node_count(); ++i) {
      if (mesh_->is_boundary(i)) {
        u[idx(i)] = 0.0;
        continue;
      }
      if (opt_.lower) u[idx(i)] = std::max(u[idx(i)], (*opt_.lower)[idx(i)]);
      if (opt_.upper) u[idx(i)] = std::min(u[idx(i)], (*opt_.upper)[idx(i)]);
    }
  }

  NewtonState evaluate(const Eigen::VectorXd& u, double s) const {
    NewtonState st;
    const Field f(mesh_, u);
    st.residual = operator_action(r_, f, s) - source_load(*mesh_, rhs_, f.at_quadrature());
    if (opt_.extra_load) st.residual -= *opt_.extra_load;
    st.free.assign(mesh_->node_count(), true);
    double l2 = 0.0;
    for (std::size_t i = 0; i < mesh_->node_count(); ++i) {
      const Index k = idx(i);
      if (mesh_->is_boundary(i)) {
        st.residual[k] = 0.0;
        st.free[i] = false;
        continue;
      }
      // An iterate sitting on a bound with the energy gradient pointing
      // outward is optimal in that coordinate.
      const double res = st.residual[k];
      const bool at_lower = opt_.lower && u[k] <= (*opt_.lower)[k] && res > 0.0;
      const bool at_upper = opt_.upper && u[k] >= (*opt_.upper)[k] && res < 0.0;
      if (at_lower || at_upper) {
        st.free[i] = false;
        ++st.active;
        continue;
      }
      st.sup = std::max(st.sup, std::abs(res));
      l2 += res * res;
    }
    st.l2 = std::sqrt(l2);
    return st;
  }

  SpMat jacobian(const Eigen::VectorXd& u, double s, const std::vector<bool>& free) const {
    const Mesh& m = *mesh_;
    const int npe = m.nodes_per_element();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.element_count() * static_cast<std::size_t>(npe * npe) + m.node_count());
    const Field f(mesh_, u);
    for (std::size_t e = 0; e < m.element_count(); ++e) {
      const auto& el = m.element(e);
      const auto& grads = m.shape_gradients(e);
      const Point g = element_gradient(f, e);
      for (int a = 0; a < npe; ++a) {
        if (!free[el[a]]) continue;
        for (int b = 0; b < npe; ++b) {
          if (!free[el[b]]) continue;
          trip.emplace_back(idx(el[a]), idx(el[b]), m.measure(e) * flux_jacobian(r_, g, s, grads[a], grads[b]));
        }
      }
    }
    if (rhs_.derivative) {
      const Eigen::VectorXd uq = f.at_quadrature();
      const auto& quad = m.quadrature();
      for (std::size_t k = 0; k < quad.size(); ++k) {
        const auto& qp = quad[k];
        const auto& el = m.element(qp.element);
        const double dfdt = rhs_.derivative(k, uq[idx(k)]);
        if (dfdt == 0.0) continue;
        for (int a = 0; a < npe; ++a) {
          if (!free[el[a]]) continue;
          for (int b = 0; b < npe; ++b) {
            if (!free[el[b]]) continue;
            trip.emplace_back(idx(el[a]), idx(el[b]), -qp.weight * dfdt * qp.shape[a] * qp.shape[b]);
          }
        }
      }
    }
    for (std::size_t i = 0; i < m.node_count(); ++i)
      if (!free[i]) trip.emplace_back(idx(i), idx(i), 1.0);
    SpMat jac(idx(m.node_count()), idx(m.node_count()));
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
  }

  // One Newton run at a fixed smoothing level. The residual is measured at
  // s_residual and the Jacobian built at s_jacobian.
  bool newton(Eigen::VectorXd& u, double s_residual, double s_jacobian, int max_iter, int& total_iter,
              std::string& message) const {
    NewtonState st = evaluate(u, s_residual);
    std::vector<double> history{st.sup};
    for (int it = 0; it < max_iter; ++it) {
      if (st.sup <= opt_.tol) return true;
      const SpMat jac = jacobian(u, s_jacobian, st.free);
      Eigen::VectorXd rhs = -st.residual;
      for (std::size_t i = 0; i < st.free.size(); ++i)
        if (!st.free[i]) rhs[idx(i)] = 0.0;
      Eigen::VectorXd du;
      Eigen::SimplicialLDLT<SpMat> ldlt(jac);
      if (ldlt.info() == Eigen::Success) du = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !du.allFinite()) {
        Eigen::SparseLU<SpMat> lu;
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
          message = "singular Newton matrix";
          return false;
        }
        du = lu.solve(rhs);
      }
      double step = 1.0;
      bool accepted = false;
      for (int h = 0; h <= opt_.max_halvings; ++h, step *= 0.5) {
        Eigen::VectorXd trial = u + step * du;
        project(trial);
        NewtonState ts = evaluate(trial, s_residual);
        if (ts.l2 < st.l2 || ts.sup <= opt_.tol) {
          u = std::move(trial);
          st = std::move(ts);
          accepted = true;
          break;
        }
      }
      ++total_iter;
      if (!accepted) {
        message = "line search failed to reduce the residual";
        return st.sup <= opt_.tol;
      }
      history.push_back(st.sup);
      const auto n = history.size();
      const auto w = static_cast<std::size_t>(opt_.stagnation_window);
      if (n > w && history[n - 1] > (1.0 - opt_.stagnation_reduction) * history[n - 1 - w]) {
        std::ostringstream msg;
        msg << "Newton stagnation: residual " << history[n - 1] << " after " << w << " iterations from "
            << history[n - 1 - w];
        message = msg.str();
        return false;
      }
    }
    if (st.sup <= opt_.tol) return true;
    std::ostringstream msg;
    msg << "Newton iteration limit reached with residual " << st.sup;
    message = msg.str();
    return false;
  }

 private:
  double r_;
  const PointSource& rhs_;
  MeshPtr mesh_;
  const ScalarSolveOptions& opt_;
};

}  // namespace

PointSource field_source(const Field& f) {
  auto values = std::make_shared<Eigen::VectorXd>(f.at_quadrature());
  return PointSource{[values](std::size_t q, double) { return (*values)[idx(q)]; }, {}};
}

double flux_coefficient(double r, double grad_sq, double s) {
  if (r == 2.0) return 1.0;
  const double q = grad_sq + s * s;
  if (q == 0.0) return 0.0;
  return std::pow(q, 0.5 * (r - 2.0));
}

Point element_gradient(const Field& u, std::size_t e) {
  const Mesh& m = u.mesh();
  const auto& el = m.element(e);
  const auto& g = m.shape_gradients(e);
  Point out{0.0, 0.0};
  for (int a = 0; a < m.nodes_per_element(); ++a) {
    out[0] += u[el[a]] * g[a][0];
    out[1] += u[el[a]] * g[a][1];
  }
  return out;
}

Eigen::VectorXd operator_action(double r, const Field& u, double s) {
  check_exponent(r);
  const Mesh& m = u.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(idx(m.node_count()));
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const Point g = element_gradient(u, e);
    const double kappa = flux_coefficient(r, g[0] * g[0] + g[1] * g[1], s);
    if (kappa == 0.0) continue;
    const auto& el = m.element(e);
    const auto& grads = m.shape_gradients(e);
    for (int a = 0; a < m.nodes_per_element(); ++a)
      out[idx(el[a])] += m.measure(e) * kappa * (g[0] * grads[a][0] + g[1] * grads[a][1]);
  }
  return out;
}

Eigen::VectorXd source_load(const Mesh& mesh, const PointSource& f, const Eigen::VectorXd& uq) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(idx(mesh.node_count()));
  const auto& quad = mesh.quadrature();
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const auto& qp = quad[k];
    const double val = f.value(k, uq[idx(k)]);
    if (!std::isfinite(val)) throw InvalidArgument("non-finite source value at a quadrature point");
    const auto& el = mesh.element(qp.element);
    for (int a = 0; a < mesh.nodes_per_element(); ++a) out[idx(el[a])] += qp.weight * val * qp.shape[a];
  }
  return out;
}

Eigen::VectorXd weak_residual(double r, const Field& u, const PointSource& source, double s) {
  check_exponent(r);
  Eigen::VectorXd res = operator_action(r, u, s) - source_load(u.mesh(), source, u.at_quadrature());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.mesh().is_boundary(i)) res[idx(i)] = 0.0;
  return res;
}

Eigen::VectorXd weak_residual(double r, const Field& u, const Field& source) {
  if (source.mesh_ptr() != u.mesh_ptr()) throw InvalidArgument("source and field on different meshes");
  return weak_residual(r, u, field_source(source));
}

double interior_sup(const Mesh& mesh, const Eigen::VectorXd& v) {
  double out = 0.0;
  for (std::size_t i = 0; i < mesh.node_count(); ++i)
    if (!mesh.is_boundary(i)) out = std::max(out, std::abs(v[idx(i)]));
  return out;
}

double lr_norm_pow(const Field& u, double r) {
  const Eigen::VectorXd uq = u.at_quadrature();
  const auto& quad = u.mesh().quadrature();
  double sum = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) sum += quad[k].weight * std::pow(std::abs(uq[idx(k)]), r);
  return sum;
}

double gradient_norm_pow(const Field& u, double r) {
  const Mesh& m = u.mesh();
  double sum = 0.0;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const Point g = element_gradient(u, e);
    sum += m.measure(e) * std::pow(g[0] * g[0] + g[1] * g[1], 0.5 * r);
  }
  return sum;
}

double rayleigh_quotient(const Field& u, double r) {
  const double den = lr_norm_pow(u, r);
  if (!(den > 0.0)) throw InvalidArgument("Rayleigh quotient of the zero field");
  return gradient_norm_pow(u, r) / den;
}

GradientRegularization GradientRegularization::geometric(double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("regularization scale must be positive");
  GradientRegularization reg;
  const double floor = 1e-10 * std::min(1.0, scale);
  for (int k = 2;; ++k) {
    const double s = scale * std::pow(10.0, -k);
    reg.schedule.push_back(s);
    if (k >= 10 && s <= floor) break;
  }
  return reg;
}

ScalarSolveResult solve_scalar(double r, const PointSource& rhs, const Field& init, const ScalarSolveOptions& options) {
  check_exponent(r);
  const MeshPtr& mesh = init.mesh_ptr();
  const std::size_t n = mesh->node_count();
  for (const auto* b : {&options.lower, &options.upper})
    if (*b && static_cast<std::size_t>((*b)->size()) != n) throw InvalidArgument("bound length mismatch");

  ScalarProblem problem(r, rhs, mesh, options);
  Eigen::VectorXd u = init.values();
  problem.project(u);

  ScalarSolveReport report;
  std::string message;
  bool ok = false;
  if (r == 2.0) {
    ok = problem.newton(u, 0.0, 0.0, options.max_newton, report.newton_iterations, message);
  } else {
    const auto reg = GradientRegularization::geometric(options.gradient_scale);
    for (double s : reg.schedule) {
      // Intermediate levels only provide warm starts; the verdict is taken at s = 0.
      std::string stage_msg;
      ok = problem.newton(u, s, s, options.max_newton, report.newton_iterations, stage_msg);
      if (!ok) message = stage_msg;
    }
    const double s_last = reg.schedule.back();
    std::string polish_msg;
    ok = problem.newton(u, 0.0, s_last, 2 * options.stagnation_window, report.newton_iterations, polish_msg);
    if (!ok) message = polish_msg;
  }
  const NewtonState fin = problem.evaluate(u, 0.0);
  report.residual = fin.sup;
  report.active_bounds = fin.active;
  report.converged = fin.sup <= options.tol;
  if (report.converged) {
    report.message = "converged";
  } else {
    std::ostringstream msg;
    msg << "nonconvergence: residual " << fin.sup << " > " << options.tol
        << (message.empty() ? std::string() : " (" + message + ")");
    report.message = msg.str();
  }
  return ScalarSolveResult{Field(mesh, std::move(u)), std::move(report)};
}

EigenPair first_eigenpair(double r, const MeshPtr& mesh, const EigenOptions& options) {
  check_exponent(r);
  Field u = distance_to_boundary(mesh);
  u.values() /= std::pow(lr_norm_pow(u, r), 1.0 / r);

  ScalarSolveOptions sopt;
  sopt.tol = options.newton_tol;
  for (int it = 1; it <= options.max_iter; ++it) {
    // u is normalized, so the source is |u|^{r-2} u / ||u||_r^{r-1} = |u|^{r-2} u.
    const Eigen::VectorXd uq = u.at_quadrature();
    Eigen::VectorXd w(uq.size());
    for (Index k = 0; k < uq.size(); ++k) w[k] = std::pow(std::abs(uq[k]), r - 2.0) * uq[k];
    const PointSource src{[w](std::size_t q, double) { return w[idx(q)]; }, {}};

    const double lam = rayleigh_quotient(u, r);
    Field guess(mesh, u.values() * std::pow(lam, -1.0 / (r - 1.0)));
    ScalarSolveResult sol = solve_scalar(r, src, guess, sopt);
    if (!sol.report.converged)
      throw ConvergenceError("inverse power step " + std::to_string(it) + ": " + sol.report.message);

    Field next = std::move(sol.u);
    next.values() /= std::pow(lr_norm_pow(next, r), 1.0 / r);
    const double diff = (next.values() - u.values()).cwiseAbs().maxCoeff();
    u = std::move(next);
    if (diff <= options.tol) {
      for (std::size_t i = 0; i < u.size(); ++i)
        if (!mesh->is_boundary(i) && !(u[i] > 0.0))
          throw ConvergenceError("eigenfunction is not positive at interior node " + std::to_string(i));
      return EigenPair{r, rayleigh_quotient(u, r), std::move(u), it};
    }
  }
  throw ConvergenceError("inverse power iteration did not converge in " + std::to_string(options.max_iter) +
                         " iterations");
}

double auxiliary_final_shift(double r, double amplitude, double theta, const AuxiliaryOptions& options) {
  const double scale = std::pow(amplitude, 1.0 / (r - 1.0 - theta));
  return scale * std::pow(10.0, -options.stages);
}

Field singular_auxiliary_solve(double r, double amplitude, double theta, const MeshPtr& mesh,
                               const AuxiliaryOptions& options) {
  check_exponent(r);
  if (!(theta > -1.0 && theta < 0.0)) throw InvalidArgument("auxiliary exponent theta must lie in (-1, 0)");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw InvalidArgument("auxiliary amplitude must be > 0");
  if (options.stages < 1) throw InvalidArgument("auxiliary solve needs at least one shift stage");

  const double scale = std::pow(amplitude, 1.0 / (r - 1.0 - theta));
  const double source_unit = amplitude * std::pow(scale, theta);

  ScalarSolveOptions sopt;
  sopt.tol = options.tol * source_unit;
  sopt.gradient_scale = scale;
  sopt.lower = Eigen::VectorXd::Zero(idx(mesh->node_count()));

  Field xi(mesh);
  double eta = scale;
  for (int stage = 1; stage <= options.stages; ++stage) {
    eta *= 0.1;
    const PointSource src{
        [=](std::size_t, double t) { return amplitude * std::pow(t + eta, theta); },
        [=](std::size_t, double t) { return amplitude * theta * std::pow(t + eta, theta - 1.0); }};
    ScalarSolveResult sol = solve_scalar(r, src, xi, sopt);
    if (!sol.report.converged) {
      std::ostringstream msg;
      msg << "auxiliary solve stage " << stage << " (eta = " << eta << "): " << sol.report.message;
      throw ConvergenceError(msg.str());
    }
    xi = std::move(sol.u);
  }
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (!mesh->is_boundary(i) && !(xi[i] > 0.0))
      throw ConvergenceError("auxiliary solution not positive at interior node " + std::to_string(i));
  return xi;
}

std::vector<Point> recovered_gradients(const Field& u) {
  const Mesh& m = u.mesh();
  std::vector<Point> grad(m.node_count(), Point{0.0, 0.0});
  std::vector<double> weight(m.node_count(), 0.0);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const Point g = element_gradient(u, e);
    const auto& el = m.element(e);
    for (int a = 0; a < m.nodes_per_element(); ++a) {
      grad[el[a]][0] += m.measure(e) * g[0];
      grad[el[a]][1] += m.measure(e) * g[1];
      weight[el[a]] += m.measure(e);
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i][0] /= weight[i];
    grad[i][1] /= weight[i];
  }
  return grad;
}

Field plap_power_identity(const EigenPair& eig, double gamma, double prefactor) {
  if (!(gamma > 1.0)) throw InvalidArgument("power gamma must be > 1");
  const double r = eig.r;
  const double lam = eig.eigenvalue;
  const double power = gamma * (r - 1.0) - r;
  const auto grads = recovered_gradients(eig.phi);
  const double lead = prefactor * std::pow(gamma, r - 1.0);
  Eigen::VectorXd out(idx(eig.phi.size()));
  for (std::size_t i = 0; i < eig.phi.size(); ++i) {
    const double phi = std::max(eig.phi[i], 0.0);
    const double gnorm = std::hypot(grads[i][0], grads[i][1]);
    if (phi == 0.0 && power < 0.0) {
      out[idx(i)] = 0.0;
      continue;
    }
    out[idx(i)] = lead * std::pow(phi, power) *
                  (lam * std::pow(phi, r) - (gamma - 1.0) * (r - 1.0) * std::pow(gnorm, r));
  }
  return Field(eig.phi.mesh_ptr(), std::move(out));
}

}  // namespace pqlap
