#include "pqlap/verification_suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pqlap/errors.hpp"
#include "pqlap/report_format.hpp"

namespace pqlap {

namespace {

using Index = Eigen::Index;

void require_homogeneous(const ProblemParams& pp) {
  const Classification cls = validate(pp);
  if (cls.theta != 0.0) throw InvalidArgument("energy argument needs theta = 0");
  if (!cls.c) throw InvalidArgument("energy argument needs alpha1, beta2 in (-1, 0)");
  if (!cls.c2) throw InvalidArgument("energy argument needs beta1 = q/p (p-1-alpha1) or alpha2 = p/q (q-1-beta2)");
}

// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
constexpr std::array<double, 8> kGaussX{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

}  // namespace

const char* energy_verdict_name(EnergyVerdict v) {
  switch (v) {
    case EnergyVerdict::NonexistenceEvidence: return "NONEXISTENCE_EVIDENCE";
    case EnergyVerdict::NoConclusion: return "NO_CONCLUSION";
    case EnergyVerdict::Inconsistent: return "INCONSISTENT";
  }
  return "?";
}

EnergyCertificate energy_certificate(const ProblemParams& pp, double lambda, const Field& u, const Field& v,
                                     double lam1p, double lam1q, double rel_tol) {
  require_homogeneous(pp);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (u.mesh_ptr() != v.mesh_ptr()) throw InvalidArgument("fields on different meshes");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!u.mesh().is_boundary(i) && (!(u[i] > 0.0) || !(v[i] > 0.0)))
      throw InvalidArgument("energy certificate needs positive fields at interior nodes");

  EnergyCertificate e;
  e.lambda = lambda;
  e.rel_tol = rel_tol;
  e.grad_u = gradient_norm_pow(u, pp.p);
  e.grad_v = gradient_norm_pow(v, pp.q);
  e.norm_u = lr_norm_pow(u, pp.p);
  e.norm_v = lr_norm_pow(v, pp.q);
  e.rayleigh_u = e.grad_u / e.norm_u;
  e.rayleigh_v = e.grad_v / e.norm_v;
  const double au = (pp.alpha1 + pp.alpha2 + 1.0) / pp.p;
  const double av = (pp.beta1 + pp.beta2 + 1.0) / pp.q;
  e.lhs = e.grad_u + e.grad_v;
  e.rhs = lambda * (au * e.norm_u + av * e.norm_v);
  e.gap_u = lam1p - au * lambda;
  e.gap_v = lam1q - av * lambda;
  e.final_display = e.gap_u * e.norm_u + e.gap_v * e.norm_v;
  e.gaps_positive = e.gap_u > 0.0 && e.gap_v > 0.0;
  e.satisfies_balance = e.lhs <= e.rhs * (1.0 + rel_tol);
  if (!e.gaps_positive)
    e.verdict = EnergyVerdict::NoConclusion;
  else
    e.verdict = e.satisfies_balance ? EnergyVerdict::Inconsistent : EnergyVerdict::NonexistenceEvidence;
  return e;
}

std::string format_energy(const EnergyCertificate& e) {
  std::ostringstream out;
  out << "energy.verdict: " << energy_verdict_name(e.verdict) << '\n'
      << "energy.lambda: " << fmt_num(e.lambda) << '\n'
      << "energy.lhs: " << fmt_num(e.lhs) << '\n'
      << "energy.rhs: " << fmt_num(e.rhs) << '\n'
      << "energy.balance_holds: " << (e.satisfies_balance ? "true" : "false") << '\n'
      << "energy.rayleigh_u: " << fmt_num(e.rayleigh_u) << '\n'
      << "energy.rayleigh_v: " << fmt_num(e.rayleigh_v) << '\n'
      << "energy.gap_u: " << fmt_num(e.gap_u) << '\n'
      << "energy.gap_v: " << fmt_num(e.gap_v) << '\n'
      << "energy.final_display: " << fmt_num(e.final_display) << '\n';
  return out.str();
}

bool rayleigh_lower_bound(const Field& w, double r, double lam1r, double slack) {
  return gradient_norm_pow(w, r) >= (1.0 - slack) * lam1r * lr_norm_pow(w, r);
}

const char* probe_outcome_name(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::Collapse: return "COLLAPSE";
    case ProbeOutcome::Nonconvergence: return "NONCONVERGENCE";
    case ProbeOutcome::ConvergedPositive: return "CONVERGED_POSITIVE";
  }
  return "?";
}

ProbeResult nonexistence_probe(const ProblemParams& pp, double lambda, const EigenPair& eigp, const EigenPair& eigq,
                               const SolveConfig& config) {
  require_homogeneous(pp);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  ProbeResult res;
  res.lambda = lambda;

  Field u0 = eigp.phi, v0 = eigq.phi;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    u0[i] = std::pow(std::max(u0[i], 0.0), pp.gamma);
    v0[i] = std::pow(std::max(v0[i], 0.0), pp.gamma);
  }
  ProblemParams run = pp;
  run.lambda = lambda;
  ContinuationResult c = continuation_solve(run, lambda, std::nullopt, config, std::make_pair(u0, v0));
  res.report = c.report;
  res.max_u = c.u.values().maxCoeff();
  res.max_v = c.v.values().maxCoeff();
  res.residual_u = c.report.residual_u;
  res.residual_v = c.report.residual_v;

  const double collapse = 10.0 * config.tol_fixedpoint;
  // Fit log max u = a + s log ε over converged stages that have not collapsed.
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& st : c.report.stages) {
      if (!st.converged || !(st.max_u >= collapse)) continue;
      const double x = std::log(st.eps), y = std::log(st.max_u);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m >= 2 && sxx * m - sx * sx > 0.0) res.eps_scaling_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }

  if (c.report.completed && std::max(res.max_u, res.max_v) < collapse) {
    res.outcome = ProbeOutcome::Collapse;
    res.message = "fields fell below " + fmt_num(collapse);
  } else if (!c.report.passed) {
    res.outcome = ProbeOutcome::Nonconvergence;
    res.message = c.report.message;
  } else {
    res.outcome = ProbeOutcome::ConvergedPositive;
    res.energy = energy_certificate(run, lambda, c.u, c.v, eigp.eigenvalue, eigq.eigenvalue);
    res.message = c.report.message;
  }
  return res;
}

std::string format_probe(const ProbeResult& r) {
  std::ostringstream out;
  out << "probe.lambda: " << fmt_num(r.lambda) << '\n'
      << "probe.outcome: " << probe_outcome_name(r.outcome) << '\n'
      << "probe.note: numerical evidence only, not a proof of nonexistence\n"
      << "probe.max_u: " << fmt_num(r.max_u) << '\n'
      << "probe.max_v: " << fmt_num(r.max_v) << '\n'
      << "probe.residual_u: " << fmt_num(r.residual_u) << '\n'
      << "probe.residual_v: " << fmt_num(r.residual_v) << '\n'
      << "probe.stages: " << r.report.stages.size() << '\n';
  if (r.eps_scaling_exponent) out << "probe.eps_scaling_exponent: " << fmt_num(*r.eps_scaling_exponent) << '\n';
  out << "probe.message: " << r.message << '\n';
  if (r.energy) out << format_energy(*r.energy);
  return out.str();
}

ThresholdResult empirical_threshold(const std::function<ProbeOutcome(double)>& probe, double lo, double hi,
                                    int steps, int monotonicity_checks) {
  if (!(lo > 0.0) || !(lo < hi)) throw InvalidArgument("threshold bracket needs 0 < lambda_lo < lambda_hi");
  if (steps < 0) throw InvalidArgument("bisection steps must be >= 0");
  if (monotonicity_checks < 0) throw InvalidArgument("monotonicity checks must be >= 0");
  ThresholdResult res;
  res.lo = lo;
  res.hi = hi;
  if (steps == 0) {
    res.lambda_emp = 0.5 * (lo + hi);
    return res;
  }
  const ProbeOutcome at_lo = probe(lo);
  res.history.emplace_back(lo, at_lo);
  if (at_lo == ProbeOutcome::ConvergedPositive)
    throw InvalidArgument("threshold bracket: probe at lambda_lo = " + fmt_num(lo) + " is CONVERGED_POSITIVE");
  const ProbeOutcome at_hi = probe(hi);
  res.history.emplace_back(hi, at_hi);
  if (at_hi != ProbeOutcome::ConvergedPositive)
    throw InvalidArgument("threshold bracket: probe at lambda_hi = " + fmt_num(hi) + " is " +
                          probe_outcome_name(at_hi) + ", not CONVERGED_POSITIVE");
  for (int s = 0; s < steps; ++s) {
    const double mid = 0.5 * (res.lo + res.hi);
    const ProbeOutcome o = probe(mid);
    res.history.emplace_back(mid, o);
    (o == ProbeOutcome::ConvergedPositive ? res.hi : res.lo) = mid;
  }
  res.lambda_emp = 0.5 * (res.lo + res.hi);
  // Bisection alone never sees a failure above a success; probe the part of
  // the initial bracket it skipped.
  for (int j = 1; j <= monotonicity_checks; ++j) {
    const double lam = res.hi + (hi - res.hi) * j / (monotonicity_checks + 1.0);
    res.history.emplace_back(lam, probe(lam));
  }
  for (const auto& [la, oa] : res.history)
    for (const auto& [lb, ob] : res.history)
      if (la < lb && oa == ProbeOutcome::ConvergedPositive && ob != ProbeOutcome::ConvergedPositive)
        res.non_monotone = true;
  return res;
}

ConvergenceStudy manufactured_convergence(double r, const std::vector<int>& levels) {
  if (levels.size() < 3) throw InvalidArgument("convergence study needs at least three levels");
  const double pi = std::numbers::pi;
  auto exact = [pi](double x) { return std::sin(pi * x); };
  auto flux = [pi, r](double x) {
    const double g = pi * std::cos(pi * x);
    return g == 0.0 ? 0.0 : std::pow(std::abs(g), r - 2.0) * g;
  };

  ConvergenceStudy study;
  study.r = r;
  DomainSpec dom;
  dom.dimension = 1;
  dom.lower = {0.0, 0.0};
  dom.upper = {1.0, 1.0};
  for (int n : levels) {
    const MeshPtr mesh = build_mesh(dom, n);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Index>(mesh->node_count()));
    for (std::size_t e = 0; e < mesh->element_count(); ++e) {
      const auto& el = mesh->element(e);
      const double a = mesh->node(el[0])[0], b = mesh->node(el[1])[0];
      double integral = 0.0;
      for (int k = 0; k < 8; ++k) integral += kGaussW[k] * flux(0.5 * (a + b) + 0.5 * (b - a) * kGaussX[k]);
      integral *= 0.5 * (b - a);
      const auto& g = mesh->shape_gradients(e);
      for (int i = 0; i < 2; ++i) load[static_cast<Index>(el[i])] += integral * g[i][0];
    }
    ScalarSolveOptions opt;
    opt.extra_load = load;
    const PointSource none{[](std::size_t, double) { return 0.0; }, {}};
    ScalarSolveResult sol = solve_scalar(r, none, interpolate(mesh, [&](const Point& x) { return exact(x[0]); }), opt);
    if (!sol.report.converged)
      throw ConvergenceError("manufactured solve at n = " + std::to_string(n) + ": " + sol.report.message);
    double err = 0.0;
    for (std::size_t i = 0; i < mesh->node_count(); ++i)
      err = std::max(err, std::abs(sol.u[i] - exact(mesh->node(i)[0])));
    for (std::size_t e = 0; e < mesh->element_count(); ++e) {
      const auto& el = mesh->element(e);
      const double xm = 0.5 * (mesh->node(el[0])[0] + mesh->node(el[1])[0]);
      err = std::max(err, std::abs(0.5 * (sol.u[el[0]] + sol.u[el[1]]) - exact(xm)));
    }
    study.levels.push_back({n, mesh->spacing(), err});
  }
  for (std::size_t j = 1; j < study.levels.size(); ++j)
    study.orders.push_back(std::log(study.levels[j - 1].error / study.levels[j].error) /
                           std::log(study.levels[j - 1].h / study.levels[j].h));
  return study;
}

std::string format_convergence(const ConvergenceStudy& s) {
  std::ostringstream out;
  out << "# r=" << fmt_num(s.r) << "\n# n,h,error,order\n";
  for (std::size_t j = 0; j < s.levels.size(); ++j) {
    out << s.levels[j].n << ',' << fmt_num(s.levels[j].h) << ',' << fmt_num(s.levels[j].error) << ','
        << (j == 0 ? std::string() : fmt_num(s.orders[j - 1])) << '\n';
  }
  return out.str();
}

}  // namespace pqlap
