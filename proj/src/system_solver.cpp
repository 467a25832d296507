#include "pqlap/system_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pqlap/errors.hpp"
#include "pqlap/report_format.hpp"

namespace pqlap {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

double sup_diff(const Field& a, const Field& b) { return (a.values() - b.values()).cwiseAbs().maxCoeff(); }

double interior_min(const Field& f) {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.mesh().is_boundary(i)) out = std::min(out, f[i]);
  return out;
}

// Largest amount by which f leaves [lo, hi].
double trap_excess(const Field& f, const Field& lo, const Field& hi) {
  return std::max((lo.values() - f.values()).maxCoeff(), (f.values() - hi.values()).maxCoeff());
}

void stats_of_fields(RegularizedStats& st, const Field& u, const Field& v) {
  st.min_u = interior_min(u);
  st.min_v = interior_min(v);
  st.max_u = u.values().maxCoeff();
  st.max_v = v.values().maxCoeff();
}

}  // namespace

PointSource coupled_source(double lambda, double a, double b, double eps, const Field& frozen) {
  auto w = std::make_shared<Eigen::VectorXd>(frozen.at_quadrature());
  for (Index k = 0; k < w->size(); ++k) (*w)[k] = lambda * std::pow(std::max((*w)[k], 0.0), b);
  return PointSource{[w, a, eps](std::size_t q, double t) { return (*w)[idx(q)] * std::pow(t + eps, a); },
                     [w, a, eps](std::size_t q, double t) { return (*w)[idx(q)] * a * std::pow(t + eps, a - 1.0); }};
}

void SolveConfig::check() const {
  if (!(tol_fixedpoint > 0.0) || !(tol_newton > 0.0) || !(residual_tol > 0.0) || !(trap_tol >= 0.0))
    throw InvalidArgument("solver tolerances must be positive");
  if (max_sweeps < 1) throw InvalidArgument("max_sweeps must be >= 1");
  if (eps_schedule.empty() && eps_stages < 1) throw InvalidArgument("eps_stages must be >= 1");
  for (std::size_t j = 0; j < eps_schedule.size(); ++j) {
    if (!(eps_schedule[j] > 0.0)) throw InvalidArgument("eps schedule entries must be positive");
    if (j > 0 && !(eps_schedule[j] < eps_schedule[j - 1]))
      throw InvalidArgument("eps schedule must be strictly decreasing");
  }
}

std::vector<double> default_eps_schedule(double eps0, int stages) {
  if (!(eps0 > 0.0)) throw InvalidArgument("eps0 must be positive");
  std::vector<double> out;
  for (int j = 0; j < stages; ++j) out.push_back(std::ldexp(eps0, -j));
  return out;
}

RegularizedResult solve_regularized(const ProblemParams& pp, double lambda, double eps,
                                    const std::optional<BarrierPair>& barriers, const Field& init_u,
                                    const Field& init_v, const SolveConfig& cfg) {
  cfg.check();
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (init_u.mesh_ptr() != init_v.mesh_ptr()) throw InvalidArgument("initial fields on different meshes");
  if (barriers && barriers->lower_u.mesh_ptr() != init_u.mesh_ptr())
    throw InvalidArgument("barriers and initial fields on different meshes");

  const MeshPtr& mesh = init_u.mesh_ptr();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(idx(mesh->node_count()));
  ScalarSolveOptions ou, ov;
  ou.tol = ov.tol = cfg.tol_newton;
  const bool clamp = barriers && cfg.clamp;
  ou.lower = clamp ? barriers->lower_u.values() : zero;
  ov.lower = clamp ? barriers->lower_v.values() : zero;
  if (clamp) {
    ou.upper = barriers->upper_u.values();
    ov.upper = barriers->upper_v.values();
  }

  RegularizedResult res{init_u, init_v, {}};
  RegularizedStats& st = res.stats;
  st.eps = eps;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    ScalarSolveResult su = solve_scalar(pp.p, coupled_source(lambda, pp.alpha1, pp.beta1, eps, res.v), res.u, ou);
    if (!su.report.converged) {
      st.sweeps = sweep;
      st.message = "u-equation at sweep " + std::to_string(sweep) + ": " + su.report.message;
      stats_of_fields(st, res.u, res.v);
      return res;
    }
    ScalarSolveResult sv = solve_scalar(pp.q, coupled_source(lambda, pp.beta2, pp.alpha2, eps, su.u), res.v, ov);
    if (!sv.report.converged) {
      st.sweeps = sweep;
      st.message = "v-equation at sweep " + std::to_string(sweep) + ": " + sv.report.message;
      stats_of_fields(st, res.u, res.v);
      return res;
    }
    st.diff = std::max(sup_diff(su.u, res.u), sup_diff(sv.u, res.v));
    st.diff_history.push_back(st.diff);
    res.u = std::move(su.u);
    res.v = std::move(sv.u);
    st.sweeps = sweep;
    if (cfg.on_sweep) cfg.on_sweep(sweep, res.u, res.v);

    if (barriers) {
      const double excess = std::max(trap_excess(res.u, barriers->lower_u, barriers->upper_u),
                                     trap_excess(res.v, barriers->lower_v, barriers->upper_v));
      st.trap_violation = std::max(st.trap_violation, std::max(excess, 0.0));
      if (excess > cfg.trap_tol) {
        st.trapped = false;
        std::ostringstream msg;
        msg << "trap violated at sweep " << sweep << " by " << excess;
        st.message = msg.str();
        stats_of_fields(st, res.u, res.v);
        return res;
      }
    }
    if (st.diff <= cfg.tol_fixedpoint) {
      st.converged = true;
      break;
    }
  }

  stats_of_fields(st, res.u, res.v);
  const Eigen::VectorXd ru =
      weak_residual(pp.p, res.u, coupled_source(lambda, pp.alpha1, pp.beta1, eps, res.v));
  const Eigen::VectorXd rv =
      weak_residual(pp.q, res.v, coupled_source(lambda, pp.beta2, pp.alpha2, eps, res.u));
  st.residual_u = interior_sup(*mesh, ru);
  st.residual_v = interior_sup(*mesh, rv);
  if (st.converged) {
    st.message = "converged";
  } else {
    std::ostringstream msg;
    msg << "no fixed point after " << cfg.max_sweeps << " sweeps; last differences:";
    const std::size_t from = st.diff_history.size() > 5 ? st.diff_history.size() - 5 : 0;
    for (std::size_t j = from; j < st.diff_history.size(); ++j) msg << ' ' << st.diff_history[j];
    st.message = msg.str();
  }
  return res;
}

ContinuationResult continuation_solve(const ProblemParams& pp, double lambda,
                                      const std::optional<BarrierPair>& barriers, const SolveConfig& cfg,
                                      std::optional<std::pair<Field, Field>> init) {
  cfg.check();
  if (!barriers && !init) throw InvalidArgument("continuation needs barriers or initial fields");
  SolveReport rep;
  rep.eps_schedule = cfg.eps_schedule;
  if (rep.eps_schedule.empty())
    rep.eps_schedule = default_eps_schedule(barriers ? barriers->eps0() : 1.0, cfg.eps_stages);
  if (barriers && rep.eps_schedule.front() > barriers->eps0() * (1.0 + 1e-14))
    throw InvalidArgument("first eps exceeds the certified eps0 = " + fmt_num(barriers->eps0()));

  Field u = init ? init->first : barriers->lower_u;
  Field v = init ? init->second : barriers->lower_v;
  for (std::size_t j = 0; j < rep.eps_schedule.size(); ++j) {
    RegularizedResult r = solve_regularized(pp, lambda, rep.eps_schedule[j], barriers, u, v, cfg);
    const bool ok = r.stats.converged && r.stats.trapped;
    if (j > 0) rep.cauchy_diffs.push_back(std::max(sup_diff(r.u, u), sup_diff(r.v, v)));
    rep.stages.push_back(r.stats);
    u = std::move(r.u);
    v = std::move(r.v);
    if (!ok) {
      rep.message = "stage " + std::to_string(j) + " (eps = " + fmt_num(rep.eps_schedule[j]) +
                    ") failed: " + rep.stages.back().message;
      return ContinuationResult{std::move(u), std::move(v), std::move(rep)};
    }
  }
  rep.completed = true;
  rep.positive = interior_min(u) > 0.0 && interior_min(v) > 0.0;
  if (!rep.positive) {
    rep.message = "final fields are not positive at every interior node";
    return ContinuationResult{std::move(u), std::move(v), std::move(rep)};
  }
  const auto [ru, rv] = weak_residual_system(pp, lambda, u, v);
  rep.residual_u = interior_sup(u.mesh(), ru);
  rep.residual_v = interior_sup(v.mesh(), rv);
  rep.passed = rep.residual_u <= cfg.residual_tol && rep.residual_v <= cfg.residual_tol;
  std::ostringstream msg;
  msg << (rep.passed ? "passed" : "failed") << ": final residuals " << rep.residual_u << ", " << rep.residual_v
      << (rep.passed ? " <= " : " vs tolerance ") << cfg.residual_tol;
  rep.message = msg.str();
  return ContinuationResult{std::move(u), std::move(v), std::move(rep)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> weak_residual_system(
    const ProblemParams& pp, double lambda, const Field& u, const Field& v,
    const std::optional<std::pair<PointSource, PointSource>>& extra) {
  if (u.mesh_ptr() != v.mesh_ptr()) throw InvalidArgument("fields on different meshes");
  const Mesh& mesh = u.mesh();
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (mesh.is_boundary(i)) continue;
    if (!(u[i] > 0.0) || !(v[i] > 0.0))
      throw InvalidArgument("system residual needs positive fields; interior node " + std::to_string(i) +
                            " has u = " + fmt_num(u[i]) + ", v = " + fmt_num(v[i]));
  }
  PointSource su = coupled_source(lambda, pp.alpha1, pp.beta1, 0.0, v);
  PointSource sv = coupled_source(lambda, pp.beta2, pp.alpha2, 0.0, u);
  if (extra) {
    su = PointSource{[a = su.value, b = extra->first.value](std::size_t q, double t) { return a(q, t) + b(q, t); }, {}};
    sv = PointSource{[a = sv.value, b = extra->second.value](std::size_t q, double t) { return a(q, t) + b(q, t); }, {}};
  }
  return {weak_residual(pp.p, u, su), weak_residual(pp.q, v, sv)};
}

std::string format_solve_report(const SolveReport& rep) {
  std::ostringstream out;
  out << "verdict: " << (rep.passed ? "pass" : "fail") << '\n'
      << "message: " << rep.message << '\n'
      << "eps_schedule: geometric null sequence, " << rep.eps_schedule.size() << " stages from "
      << fmt_num(rep.eps_schedule.empty() ? 0.0 : rep.eps_schedule.front()) << " to "
      << fmt_num(rep.eps_schedule.empty() ? 0.0 : rep.eps_schedule.back()) << '\n'
      << "stages_completed: " << rep.stages.size() << '\n'
      << "positive: " << (rep.positive ? "true" : "false") << '\n'
      << "residual_u: " << fmt_num(rep.residual_u) << '\n'
      << "residual_v: " << fmt_num(rep.residual_v) << '\n';
  for (std::size_t j = 0; j < rep.stages.size(); ++j) {
    const auto& s = rep.stages[j];
    out << "stage." << j << ": eps=" << fmt_num(s.eps) << " sweeps=" << s.sweeps << " diff=" << fmt_num(s.diff)
        << " residual_u=" << fmt_num(s.residual_u) << " residual_v=" << fmt_num(s.residual_v)
        << " trapped=" << (s.trapped ? "true" : "false") << " min_u=" << fmt_num(s.min_u)
        << " min_v=" << fmt_num(s.min_v) << " max_u=" << fmt_num(s.max_u) << " max_v=" << fmt_num(s.max_v) << '\n';
  }
  for (std::size_t j = 0; j < rep.cauchy_diffs.size(); ++j)
    out << "cauchy." << j + 1 << ": " << fmt_num(rep.cauchy_diffs[j]) << '\n';
  return out.str();
}

}  // namespace pqlap
