#include "pqlap/barrier_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pqlap/errors.hpp"
#include "pqlap/report_format.hpp"

namespace pqlap {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Σ_q w_q λ (a_q + eps)^{ea} b_q^{eb} φ_i(x_q)
Eigen::VectorXd product_load(const Field& a, const Field& b, double lambda, double ea, double eb, double eps) {
  const Eigen::VectorXd aq = a.at_quadrature();
  const Eigen::VectorXd bq = b.at_quadrature();
  const PointSource src{[&](std::size_t q, double) {
                          return lambda * std::pow(aq[idx(q)] + eps, ea) * std::pow(bq[idx(q)], eb);
                        },
                        {}};
  return source_load(a.mesh(), src, aq);
}

InequalityMargin nodal_margin(const std::string& name, const Mesh& mesh, const Eigen::VectorXd& margin,
                              const std::optional<RegionMask>& strip, bool interior_only, bool in_verdict = true) {
  InequalityMargin m;
  m.name = name;
  m.in_verdict = in_verdict;
  m.strip_worst = m.bulk_worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (interior_only && mesh.is_boundary(i)) continue;
    const bool in_strip = strip && strip->inside[i];
    double& worst = in_strip ? m.strip_worst : m.bulk_worst;
    std::size_t& node = in_strip ? m.strip_node : m.bulk_node;
    (in_strip ? m.strip_empty : m.bulk_empty) = false;
    if (margin[idx(i)] < worst) {
      worst = margin[idx(i)];
      node = i;
    }
  }
  if (m.strip_empty) m.strip_worst = 0.0;
  if (m.bulk_empty) m.bulk_worst = 0.0;
  return m;
}

void check_same_mesh(const Field& a, const Field& b) {
  if (a.mesh_ptr() != b.mesh_ptr()) throw InvalidArgument("barrier fields live on different meshes");
}

double min_over(const Field& f, bool interior_only) {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!(interior_only && f.mesh().is_boundary(i))) out = std::min(out, f[i]);
  return out;
}

}  // namespace

AuxExponents aux_exponents(const ProblemParams& pp, const Classification& cls, std::optional<double> theta1,
                           std::optional<double> theta2, std::optional<double> delta) {
  AuxExponents aux;
  const double lo1 = std::max(-1.0, pp.alpha1);
  const double lo2 = std::max(-1.0, pp.beta2);
  aux.theta1 = theta1.value_or(0.5 * lo1);
  aux.theta2 = theta2.value_or(0.5 * lo2);
  if (!(aux.theta1 > lo1 && aux.theta1 < 0.0))
    throw InvalidArgument("theta1 must lie in (max{-1, alpha1}, 0)");
  if (!(aux.theta2 > lo2 && aux.theta2 < 0.0))
    throw InvalidArgument("theta2 must lie in (max{-1, beta2}, 0)");
  const double bound = std::min((pp.p - 1.0) / aux.theta1, cls.k * (pp.q - 1.0) / aux.theta2);
  aux.delta = delta.value_or(2.0 * bound);
  if (!(aux.delta < bound)) {
    std::ostringstream msg;
    msg << "aux_delta = " << aux.delta << " must be < " << bound;
    throw InvalidArgument(msg.str());
  }
  return aux;
}

ComparisonConstants fit_comparison_constants(const EigenPair& eigp, const EigenPair& eigq, const EigenPair& eigp_tilde,
                                             const EigenPair& eigq_tilde, const Field& xi1, const Field& xi2,
                                             const RegionMask& strip, const AuxExponents& aux, double C) {
  check_same_mesh(eigp.phi, eigq.phi);
  check_same_mesh(eigp_tilde.phi, eigq_tilde.phi);
  check_same_mesh(eigp_tilde.phi, xi1);
  check_same_mesh(xi1, xi2);
  if (strip.mesh != eigp.phi.mesh_ptr()) throw InvalidArgument("strip mask is not on the domain mesh");

  const Mesh& m = eigp.phi.mesh();
  const Field dist = distance_to_boundary(eigp.phi.mesh_ptr());
  ComparisonConstants k;
  k.aux = aux;
  k.C = C;
  k.l1 = k.mu = k.l = std::numeric_limits<double>::infinity();
  k.l2 = 0.0;
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    if (m.is_boundary(i)) continue;
    const double a = eigp.phi[i], b = eigq.phi[i];
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("eigenfunction not positive at interior node " + std::to_string(i));
    k.l1 = std::min(k.l1, b / a);
    k.l2 = std::max(k.l2, b / a);
    k.l = std::min(k.l, std::min(a, b) / dist[i]);
    if (!strip.inside[i]) k.mu = std::min(k.mu, std::min(a, b));
  }
  k.M = std::max(field_extrema(eigp.phi).max, field_extrema(eigq.phi).max);

  const MeshPtr& mesh = eigp.phi.mesh_ptr();
  k.rho = std::min(field_extrema(transfer(eigp_tilde.phi, mesh)).min, field_extrema(transfer(eigq_tilde.phi, mesh)).min);

  const Mesh& mt = xi1.mesh();
  const double cd = std::pow(C, aux.delta);
  k.c1 = k.c1p = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mt.node_count(); ++i) {
    if (mt.is_boundary(i)) continue;
    const double r1 = xi1[i] / (cd * eigp_tilde.phi[i]);
    const double r2 = xi2[i] / (cd * eigq_tilde.phi[i]);
    k.c1 = std::min(k.c1, r1);
    k.c2 = std::max(k.c2, r1);
    k.c1p = std::min(k.c1p, r2);
    k.c2p = std::max(k.c2p, r2);
  }
  return k;
}

std::string format_constants(const ComparisonConstants& k) {
  std::ostringstream out;
  out << "C: " << fmt_num(k.C) << '\n'
      << "theta1: " << fmt_num(k.aux.theta1) << '\n'
      << "theta2: " << fmt_num(k.aux.theta2) << '\n'
      << "aux_delta: " << fmt_num(k.aux.delta) << '\n'
      << "l1: " << fmt_num(k.l1) << '\n'
      << "l2: " << fmt_num(k.l2) << '\n'
      << "l: " << fmt_num(k.l) << '\n'
      << "M: " << fmt_num(k.M) << '\n'
      << "mu: " << fmt_num(k.mu) << '\n'
      << "rho: " << fmt_num(k.rho) << '\n'
      << "c1: " << fmt_num(k.c1) << '\n'
      << "c2: " << fmt_num(k.c2) << '\n'
      << "c1p: " << fmt_num(k.c1p) << '\n'
      << "c2p: " << fmt_num(k.c2p) << '\n';
  return out.str();
}

double BarrierPair::eps0() const { return epsilon0(C, sigma, k); }

std::pair<Field, Field> build_subsolution(const ProblemParams& pp, const Classification& cls, const EigenPair& eigp,
                                          const EigenPair& eigq, double C) {
  if (!(C > 1.0)) throw InvalidArgument("C must be > 1");
  check_same_mesh(eigp.phi, eigq.phi);
  const double au = std::pow(C, cls.sigma);
  const double av = std::pow(C, cls.sigma * cls.k);
  Eigen::VectorXd u(eigp.phi.values().size()), v(eigq.phi.values().size());
  for (Index i = 0; i < u.size(); ++i) {
    u[i] = au * std::pow(std::max(eigp.phi.values()[i], 0.0), pp.gamma);
    v[i] = av * std::pow(std::max(eigq.phi.values()[i], 0.0), pp.gamma);
  }
  return {Field(eigp.phi.mesh_ptr(), std::move(u)), Field(eigq.phi.mesh_ptr(), std::move(v))};
}

std::pair<Field, Field> build_supersolution(const AuxExponents& aux, double C, const Field& xi1, const Field& xi2,
                                            const MeshPtr& mesh) {
  const double scale = std::pow(C, -aux.delta);
  Field u = transfer(xi1, mesh);
  Field v = transfer(xi2, mesh);
  u.values() *= scale;
  v.values() *= scale;
  for (const Field* f : {&u, &v}) {
    const Extrema ex = field_extrema(*f);
    if (!(ex.min > 0.0)) {
      std::ostringstream msg;
      msg << "supersolution not positive at node " << ex.argmin << " (value " << ex.min
          << "); the enlarged domain must contain the closed domain";
      throw InvalidArgument(msg.str());
    }
  }
  return {std::move(u), std::move(v)};
}

double InequalityMargin::worst() const {
  if (strip_empty) return bulk_worst;
  if (bulk_empty) return strip_worst;
  return std::min(strip_worst, bulk_worst);
}

std::size_t InequalityMargin::worst_node() const {
  if (strip_empty) return bulk_node;
  if (bulk_empty) return strip_node;
  return strip_worst < bulk_worst ? strip_node : bulk_node;
}

const InequalityMargin* BarrierCertificate::worst() const {
  const InequalityMargin* out = nullptr;
  for (const auto& m : margins)
    if (m.in_verdict && (!out || m.worst() < out->worst())) out = &m;
  return out;
}

BarrierCertificate certify_barriers(const ProblemParams& pp, double lambda, const BarrierPair& b, double eps,
                                    const std::optional<RegionMask>& strip) {
  const double e0 = b.eps0();
  if (!(eps >= 0.0 && eps <= e0 * (1.0 + 1e-14)))
    throw InvalidArgument("certificate needs 0 <= eps <= eps0 = " + fmt_num(e0));
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  check_same_mesh(b.lower_u, b.lower_v);
  check_same_mesh(b.lower_u, b.upper_u);
  check_same_mesh(b.lower_u, b.upper_v);
  const Mesh& mesh = b.lower_u.mesh();
  if (strip && strip->mesh != b.lower_u.mesh_ptr()) throw InvalidArgument("strip mask is not on the barrier mesh");

  BarrierCertificate cert;
  cert.eps_sub = eps;
  cert.eps0 = e0;
  cert.C = b.C;
  cert.lambda = lambda;

  // Subsolution: -Δ_p u̲ <= λ (u̲+ε)^{α1} v̲^{β1}, -Δ_q v̲ <= λ u̲^{α2} (v̲+ε)^{β2}.
  const Eigen::VectorXd sub_u = product_load(b.lower_u, b.lower_v, lambda, pp.alpha1, pp.beta1, eps) -
                                operator_action(pp.p, b.lower_u);
  const Eigen::VectorXd sub_v = product_load(b.lower_v, b.lower_u, lambda, pp.beta2, pp.alpha2, eps) -
                                operator_action(pp.q, b.lower_v);
  // Supersolution with ε = 0, the worst case for negative exponents.
  const Eigen::VectorXd sup_u = operator_action(pp.p, b.upper_u) -
                                product_load(b.upper_u, b.upper_v, lambda, pp.alpha1, pp.beta1, 0.0);
  const Eigen::VectorXd sup_v = operator_action(pp.q, b.upper_v) -
                                product_load(b.upper_v, b.upper_u, lambda, pp.beta2, pp.alpha2, 0.0);
  cert.margins.push_back(nodal_margin("sub_u", mesh, sub_u, strip, true));
  cert.margins.push_back(nodal_margin("sub_v", mesh, sub_v, strip, true));
  cert.margins.push_back(nodal_margin("super_u", mesh, sup_u, strip, true));
  cert.margins.push_back(nodal_margin("super_v", mesh, sup_v, strip, true));
  cert.margins.push_back(
      nodal_margin("order_u", mesh, b.upper_u.values() - b.lower_u.values(), strip, false));
  cert.margins.push_back(
      nodal_margin("order_v", mesh, b.upper_v.values() - b.lower_v.values(), strip, false));

  cert.pass = true;
  for (const auto& m : cert.margins)
    if (m.in_verdict && m.worst() < -kMarginTol) cert.pass = false;
  // Positivity of the lower fields is structural; a zero interior value makes
  // the singular right-hand sides meaningless.
  if (!(min_over(b.lower_u, true) > 0.0) || !(min_over(b.lower_v, true) > 0.0)) cert.pass = false;
  return cert;
}

std::vector<InequalityMargin> strip_diagnostics(const EigenPair& eigp, const EigenPair& eigq, const RegionMask& strip) {
  std::vector<InequalityMargin> out;
  for (const EigenPair* e : {&eigp, &eigq}) {
    const auto grads = recovered_gradients(e->phi);
    Eigen::VectorXd margin(idx(e->phi.size()));
    for (std::size_t i = 0; i < e->phi.size(); ++i) {
      const double g = std::hypot(grads[i][0], grads[i][1]);
      margin[idx(i)] = std::pow(g, e->r) - e->eigenvalue * std::pow(std::max(e->phi[i], 0.0), e->r);
    }
    // Only the strip half is meaningful.
    InequalityMargin m = nodal_margin(e == &eigp ? "strip_gradient_p" : "strip_gradient_q", e->phi.mesh(), margin,
                                      strip, true, false);
    m.bulk_empty = true;
    m.bulk_worst = 0.0;
    out.push_back(m);
  }
  return out;
}

std::string format_certificate(const BarrierCertificate& cert, const Mesh& mesh) {
  std::ostringstream out;
  auto where = [&](std::size_t i) {
    std::ostringstream s;
    s << "node " << i << " x=" << fmt_num(mesh.node(i)[0]);
    if (mesh.dimension() == 2) s << " y=" << fmt_num(mesh.node(i)[1]);
    return s.str();
  };
  out << "verdict: " << (cert.pass ? "pass" : "fail") << '\n'
      << "C: " << fmt_num(cert.C) << '\n'
      << "lambda: " << fmt_num(cert.lambda) << '\n'
      << "eps_sub: " << fmt_num(cert.eps_sub) << '\n'
      << "eps_range: [0, " << fmt_num(cert.eps0) << "]\n"
      << "tolerance: " << fmt_num(-kMarginTol) << '\n';
  for (const auto& m : cert.margins) {
    out << "margin." << m.name << ":";
    if (!m.strip_empty) out << " strip=" << fmt_num(m.strip_worst) << " at " << where(m.strip_node) << ";";
    if (!m.bulk_empty) out << " bulk=" << fmt_num(m.bulk_worst) << " at " << where(m.bulk_node) << ";";
    out << (m.in_verdict ? "" : " diagnostic") << '\n';
  }
  if (const auto* w = cert.worst()) out << "worst: " << w->name << " " << fmt_num(w->worst()) << '\n';
  return out.str();
}

BarrierSetup prepare_barriers(const DomainSpec& domain, int n, const ProblemParams& pp, const Classification& cls,
                              const BarrierOptions& opt) {
  domain.check();
  if (!(domain.padding > 0.0)) throw InvalidArgument("barriers need an enlarged domain (padding > 0)");
  BarrierSetup s;
  s.domain = domain;
  s.n = n;
  s.aux = aux_exponents(pp, cls, opt.theta1, opt.theta2, opt.aux_delta);
  s.mesh = build_mesh(domain, n);
  s.tilde_mesh = aligned_enlarged_mesh(domain, n);
  s.eigp = first_eigenpair(pp.p, s.mesh, opt.eigen);
  s.eigq = pp.q == pp.p ? s.eigp : first_eigenpair(pp.q, s.mesh, opt.eigen);
  s.eigp_tilde = first_eigenpair(pp.p, s.tilde_mesh, opt.eigen);
  s.eigq_tilde = pp.q == pp.p ? s.eigp_tilde : first_eigenpair(pp.q, s.tilde_mesh, opt.eigen);
  s.xi1_unit = singular_auxiliary_solve(pp.p, 1.0, s.aux.theta1, s.tilde_mesh, opt.auxiliary);
  s.xi2_unit = pp.q == pp.p && s.aux.theta2 == s.aux.theta1
                   ? s.xi1_unit
                   : singular_auxiliary_solve(pp.q, 1.0, s.aux.theta2, s.tilde_mesh, opt.auxiliary);
  s.strip_width = opt.strip_width.value_or(4.0 * s.mesh->spacing());
  // Nodes with dist < w; boundary_strip insists on w < inradius/2, which
  // diagnostics do not need, so the mask is built directly.
  if (s.strip_width > 0.0) {
    const Field d = distance_to_boundary(s.mesh);
    s.strip = mask_where(s.mesh, [&](std::size_t i) { return d[i] < s.strip_width; });
    s.strip->strip_width = s.strip_width;
  }
  return s;
}

std::pair<Field, Field> auxiliary_fields(const BarrierSetup& s, const ProblemParams& pp, double C) {
  // -Δ_r(cξ) = c^{r-1-θ} (cξ)^θ for the unit-amplitude ξ, so amplitude A needs c = A^{1/(r-1-θ)}.
  const double a1 = s.aux.delta * (pp.p - 1.0) * std::log(C);
  const double a2 = s.aux.delta * (pp.q - 1.0) * std::log(C);
  Field xi1 = s.xi1_unit;
  Field xi2 = s.xi2_unit;
  xi1.values() *= std::exp(a1 / (pp.p - 1.0 - s.aux.theta1));
  xi2.values() *= std::exp(a2 / (pp.q - 1.0 - s.aux.theta2));
  return {std::move(xi1), std::move(xi2)};
}

BarrierPair make_barriers(const BarrierSetup& s, const ProblemParams& pp, const Classification& cls, double C) {
  auto [lu, lv] = build_subsolution(pp, cls, s.eigp, s.eigq, C);
  const auto [xi1, xi2] = auxiliary_fields(s, pp, C);
  auto [uu, uv] = build_supersolution(s.aux, C, xi1, xi2, s.mesh);
  return BarrierPair{std::move(lu), std::move(lv), std::move(uu), std::move(uv), C, cls.k, cls.sigma, pp.gamma};
}

SelectionResult select_C(const BarrierSetup& s, const ProblemParams& pp, const Classification& cls, double lambda,
                         const BarrierOptions& opt) {
  if (cls.theta == 0.0) throw InvalidArgument("select_C needs theta != 0; use select_lambda_min");
  SelectionResult res;
  res.lambda = lambda;
  if (s.strip) res.diagnostics = strip_diagnostics(s.eigp, s.eigq, *s.strip);
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= opt.c_max_exponent; ++j) {
    const double C = std::ldexp(1.0, j);
    BarrierPair b = make_barriers(s, pp, cls, C);
    BarrierCertificate cert = certify_barriers(pp, lambda, b, b.eps0(), s.strip);
    const double w = cert.worst() ? cert.worst()->worst() : 0.0;
    res.trials.emplace_back(C, w);
    if (cert.pass) {
      res.found = true;
      res.C = C;
      res.barriers = std::move(b);
      res.certificate = std::move(cert);
      res.message = "certified at C = 2^" + std::to_string(j);
      return res;
    }
    if (w > best) {
      best = w;
      res.C = C;
      res.certificate = std::move(cert);
    }
  }
  std::ostringstream msg;
  msg << "no C in {2, ..., 2^" << opt.c_max_exponent << "} passes; best C = " << fmt_num(res.C);
  if (const auto* w = res.certificate.worst())
    msg << " with worst margin " << w->name << " = " << fmt_num(w->worst()) << " at node " << w->worst_node();
  res.message = msg.str();
  return res;
}

SelectionResult select_lambda_min(const BarrierSetup& s, const ProblemParams& pp, const Classification& cls,
                                  const BarrierOptions& opt) {
  if (cls.theta != 0.0) throw InvalidArgument("select_lambda_min is for theta = 0");
  SelectionResult res;
  res.C = opt.fixed_C;
  if (s.strip) res.diagnostics = strip_diagnostics(s.eigp, s.eigq, *s.strip);
  BarrierPair b = make_barriers(s, pp, cls, opt.fixed_C);
  const double eps = b.eps0();

  // Every margin is affine in λ: sub = λ L - A, super = A - λ L with L > 0.
  {
    const Mesh& m = *s.mesh;
    const Eigen::VectorXd lu = product_load(b.lower_u, b.lower_v, 1.0, pp.alpha1, pp.beta1, eps);
    const Eigen::VectorXd lv = product_load(b.lower_v, b.lower_u, 1.0, pp.beta2, pp.alpha2, eps);
    const Eigen::VectorXd au = operator_action(pp.p, b.lower_u);
    const Eigen::VectorXd av = operator_action(pp.q, b.lower_v);
    const Eigen::VectorXd su = product_load(b.upper_u, b.upper_v, 1.0, pp.alpha1, pp.beta1, 0.0);
    const Eigen::VectorXd sv = product_load(b.upper_v, b.upper_u, 1.0, pp.beta2, pp.alpha2, 0.0);
    const Eigen::VectorXd bu = operator_action(pp.p, b.upper_u);
    const Eigen::VectorXd bv = operator_action(pp.q, b.upper_v);
    res.lambda_sub_min = 0.0;
    res.lambda_super_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.node_count(); ++i) {
      if (m.is_boundary(i)) continue;
      const Index k = idx(i);
      res.lambda_sub_min = std::max({res.lambda_sub_min, au[k] / lu[k], av[k] / lv[k]});
      res.lambda_super_max = std::min({res.lambda_super_max, bu[k] / su[k], bv[k] / sv[k]});
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  double lam = opt.lambda_grid_start * s.eigp.eigenvalue;
  for (int j = 0; j <= opt.lambda_grid_steps; ++j, lam *= opt.lambda_grid_ratio) {
    BarrierCertificate cert = certify_barriers(pp, lam, b, eps, s.strip);
    const double w = cert.worst() ? cert.worst()->worst() : 0.0;
    res.trials.emplace_back(lam, w);
    if (cert.pass) {
      res.found = true;
      res.lambda = lam;
      res.barriers = std::move(b);
      res.certificate = std::move(cert);
      res.message = "certified at lambda = " + fmt_num(lam);
      return res;
    }
    if (w > best) {
      best = w;
      res.lambda = lam;
      res.certificate = std::move(cert);
    }
  }
  std::ostringstream msg;
  msg << "no lambda on the grid passes at C = " << fmt_num(opt.fixed_C) << "; subsolution needs lambda >= "
      << fmt_num(res.lambda_sub_min) << ", supersolution needs lambda <= " << fmt_num(res.lambda_super_max);
  res.message = msg.str();
  return res;
}

}  // namespace pqlap
