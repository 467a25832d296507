#include "pqlap/cli_reporting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pqlap/barrier_builder.hpp"
#include "pqlap/errors.hpp"
#include "pqlap/report_format.hpp"
#include "pqlap/verification_suite.hpp"

namespace pqlap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError("invalid number for key '" + key + "': '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid integer for key '" + key + "': '" + v + "'");
  return out;
}

std::optional<double> to_auto_double(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return to_double(key, v);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("invalid boolean for key '" + key + "': '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F conv) {
  std::vector<T> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(conv(trim(item)));
  return out;
}

std::string opt_str(const std::optional<double>& v) { return v ? fmt_num(*v) : "auto"; }

struct KeyHandler {
  ConfigKey doc;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyHandler>& handlers() {
  static const std::vector<KeyHandler> table = [] {
    std::vector<KeyHandler> t;
    auto num = [&t](std::string key, std::string desc, double RunConfig::*field) {
      t.push_back({{key, "", desc},
                   [key, field](RunConfig& c, const std::string& v) { c.*field = to_double(key, v); },
                   [field](const RunConfig& c) { return fmt_num(c.*field); }});
    };
    auto prob = [&t](std::string key, std::string desc, double ProblemParams::*field) {
      t.push_back({{key, "", desc},
                   [key, field](RunConfig& c, const std::string& v) { c.problem.*field = to_double(key, v); },
                   [field](const RunConfig& c) { return fmt_num(c.problem.*field); }});
    };
    auto integer = [&t](std::string key, std::string desc, int RunConfig::*field) {
      t.push_back({{key, "", desc},
                   [key, field](RunConfig& c, const std::string& v) { c.*field = to_int(key, v); },
                   [field](const RunConfig& c) { return std::to_string(c.*field); }});
    };
    auto opt = [&t](std::string key, std::string desc, std::optional<double> RunConfig::*field) {
      t.push_back({{key, "", desc},
                   [key, field](RunConfig& c, const std::string& v) { c.*field = to_auto_double(key, v); },
                   [field](const RunConfig& c) { return opt_str(c.*field); }});
    };

    t.push_back({{"domain.dim", "", "1 (interval) or 2 (rectangle)"},
                 [](RunConfig& c, const std::string& v) { c.domain.dimension = to_int("domain.dim", v); },
                 [](const RunConfig& c) { return std::to_string(c.domain.dimension); }});
    t.push_back({{"domain.lower", "", "left end (x)"},
                 [](RunConfig& c, const std::string& v) { c.domain.lower[0] = to_double("domain.lower", v); },
                 [](const RunConfig& c) { return fmt_num(c.domain.lower[0]); }});
    t.push_back({{"domain.upper", "", "right end (x)"},
                 [](RunConfig& c, const std::string& v) { c.domain.upper[0] = to_double("domain.upper", v); },
                 [](const RunConfig& c) { return fmt_num(c.domain.upper[0]); }});
    t.push_back({{"domain.lower_y", "", "bottom (y, 2D only)"},
                 [](RunConfig& c, const std::string& v) { c.domain.lower[1] = to_double("domain.lower_y", v); },
                 [](const RunConfig& c) { return fmt_num(c.domain.lower[1]); }});
    t.push_back({{"domain.upper_y", "", "top (y, 2D only)"},
                 [](RunConfig& c, const std::string& v) { c.domain.upper[1] = to_double("domain.upper_y", v); },
                 [](const RunConfig& c) { return fmt_num(c.domain.upper[1]); }});
    opt("domain.padding", "enlargement per side for the auxiliary domain; auto = shortest axis / 4",
        &RunConfig::padding);
    integer("mesh.n", "subdivisions per axis", &RunConfig::n);
    opt("mesh.strip_width", "boundary strip width for diagnostics; auto = 4 h", &RunConfig::strip_width);
    prob("problem.p", "exponent of the first operator", &ProblemParams::p);
    prob("problem.q", "exponent of the second operator", &ProblemParams::q);
    prob("problem.alpha1", "power of u in the first equation (< 0)", &ProblemParams::alpha1);
    prob("problem.beta1", "power of v in the first equation (> 0)", &ProblemParams::beta1);
    prob("problem.alpha2", "power of u in the second equation (> 0)", &ProblemParams::alpha2);
    prob("problem.beta2", "power of v in the second equation (< 0)", &ProblemParams::beta2);
    prob("problem.lambda", "parameter lambda (> 0)", &ProblemParams::lambda);
    prob("problem.gamma", "eigenfunction power in the subsolution (> 1)", &ProblemParams::gamma);
    num("solver.tol_fixedpoint", "sup difference between sweeps", &RunConfig::tol_fixedpoint);
    num("solver.tol_newton", "scalar Newton residual", &RunConfig::tol_newton);
    integer("solver.max_sweeps", "sweeps per eps stage", &RunConfig::max_sweeps);
    integer("solver.eps_stages", "stages eps0 * 2^-j, j = 0..eps_stages-1", &RunConfig::eps_stages);
    t.push_back({{"solver.clamp", "", "confine iterates to the barriers"},
                 [](RunConfig& c, const std::string& v) { c.clamp = to_bool("solver.clamp", v); },
                 [](const RunConfig& c) { return std::string(c.clamp ? "true" : "false"); }});
    num("solver.residual_tol", "final residual of the unregularized system", &RunConfig::residual_tol);
    opt("barrier.theta1", "auxiliary exponent for u; auto = max{-1, alpha1}/2", &RunConfig::theta1);
    opt("barrier.theta2", "auxiliary exponent for v; auto = max{-1, beta2}/2", &RunConfig::theta2);
    opt("barrier.aux_delta", "auxiliary scaling exponent; auto = twice its upper bound", &RunConfig::aux_delta);
    opt("barrier.k", "coupling exponent; auto = interval midpoint", &RunConfig::k);
    opt("barrier.C", "amplitude constant; auto = search 2^j (fixed 2 when theta = 0)", &RunConfig::C);
    integer("barrier.c_max_exponent", "largest j in the C search", &RunConfig::c_max_exponent);
    num("sweep.lambda_min", "lowest lambda, in units of lambda_1,p (or lambda* in verify)",
        &RunConfig::sweep_lambda_min);
    num("sweep.lambda_max", "highest lambda, same units", &RunConfig::sweep_lambda_max);
    integer("sweep.count", "number of geometrically spaced lambdas", &RunConfig::sweep_count);
    integer("sweep.threshold_steps", "bisection steps of the empirical threshold", &RunConfig::threshold_steps);
    t.push_back({{"verify.levels", "", "mesh sizes of the convergence study"},
                 [](RunConfig& c, const std::string& v) {
                   c.verify_levels = to_list<int>(v, [](const std::string& s) { return to_int("verify.levels", s); });
                 },
                 [](const RunConfig& c) {
                   std::string s;
                   for (int n : c.verify_levels) s += (s.empty() ? "" : ",") + std::to_string(n);
                   return s;
                 }});
    t.push_back({{"verify.exponents", "", "operator exponents of the convergence study"},
                 [](RunConfig& c, const std::string& v) {
                   c.verify_exponents =
                       to_list<double>(v, [](const std::string& s) { return to_double("verify.exponents", s); });
                 },
                 [](const RunConfig& c) {
                   std::string s;
                   for (double r : c.verify_exponents) s += (s.empty() ? "" : ",") + fmt_num(r);
                   return s;
                 }});
    t.push_back({{"output.dir", "", "directory for emitted files"},
                 [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                 [](const RunConfig& c) { return c.output_dir; }});
    t.push_back({{"run.seed", "", "seed for randomized checks"},
                 [](RunConfig& c, const std::string& v) {
                   std::uint64_t s = 0;
                   auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                   if (ec != std::errc() || ptr != v.data() + v.size())
                     throw ConfigError("invalid integer for key 'run.seed': '" + v + "'");
                   c.seed = s;
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});

    const RunConfig defaults;
    for (auto& h : t) h.doc.default_value = h.get(defaults);
    return t;
  }();
  return table;
}

const KeyHandler& handler_for(const std::string& key) {
  for (const auto& h : handlers())
    if (h.doc.key == key) return h;
  throw ConfigError("unknown config key '" + key + "'");
}

// Output helpers.

struct Emitter {
  std::filesystem::path dir;
  std::string header;

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << header;
    return f;
  }
};

void write_columns(std::ostream& out, const std::vector<std::pair<std::string, const Field*>>& cols) {
  const Mesh& m = cols.front().second->mesh();
  out << (m.dimension() == 1 ? "# index,x" : "# index,x,y");
  for (const auto& c : cols) out << ',' << c.first;
  out << '\n';
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    out << i << ',' << fmt_num(m.node(i)[0]);
    if (m.dimension() == 2) out << ',' << fmt_num(m.node(i)[1]);
    for (const auto& c : cols) out << ',' << fmt_num((*c.second)[i]);
    out << '\n';
  }
}

BarrierOptions barrier_options(const RunConfig& cfg) {
  BarrierOptions o;
  o.theta1 = cfg.theta1;
  o.theta2 = cfg.theta2;
  o.aux_delta = cfg.aux_delta;
  o.strip_width = cfg.strip_width;
  o.c_max_exponent = cfg.c_max_exponent;
  if (cfg.C) o.fixed_C = *cfg.C;
  return o;
}

// C search at λ when |Θ| > 0 and no C is configured; λ search when Θ = 0 and
// search_lambda is set; otherwise a single certificate at the given λ.
SelectionResult select_barriers(const BarrierSetup& setup, const RunConfig& cfg, const Classification& cls,
                                double lambda, bool search_lambda) {
  const ProblemParams& pp = cfg.problem;
  if (cls.theta == 0.0 && search_lambda) return select_lambda_min(setup, pp, cls, barrier_options(cfg));
  if (cls.theta != 0.0 && !cfg.C) return select_C(setup, pp, cls, lambda, barrier_options(cfg));
  SelectionResult res;
  res.C = cfg.C.value_or(barrier_options(cfg).fixed_C);
  res.lambda = lambda;
  BarrierPair b = make_barriers(setup, pp, cls, res.C);
  res.certificate = certify_barriers(pp, lambda, b, b.eps0(), setup.strip);
  if (setup.strip) res.diagnostics = strip_diagnostics(setup.eigp, setup.eigq, *setup.strip);
  res.found = res.certificate.pass;
  res.message = res.found ? "certified at the configured C" : "configured C fails the certificate";
  if (res.found) res.barriers = std::move(b);
  return res;
}

std::string selection_text(const SelectionResult& sel, const BarrierSetup& setup, const ProblemParams& pp) {
  std::ostringstream out;
  out << "selection: " << (sel.found ? "found" : "not found") << '\n' << "selection.message: " << sel.message << '\n';
  for (const auto& [x, w] : sel.trials) out << "trial: " << fmt_num(x) << " worst_margin=" << fmt_num(w) << '\n';
  if (sel.lambda_super_max > 0.0)
    out << "lambda_sub_min: " << fmt_num(sel.lambda_sub_min) << '\n'
        << "lambda_super_max: " << fmt_num(sel.lambda_super_max) << '\n';
  out << format_certificate(sel.certificate, *setup.mesh);
  for (const auto& m : sel.diagnostics)
    out << "diagnostic." << m.name << ": strip=" << fmt_num(m.strip_worst) << " at node " << m.strip_node << '\n';
  const double C = sel.C > 1.0 ? sel.C : 2.0;
  const auto [xi1, xi2] = auxiliary_fields(setup, pp, C);
  if (setup.strip)
    out << format_constants(fit_comparison_constants(setup.eigp, setup.eigq, setup.eigp_tilde, setup.eigq_tilde, xi1,
                                                     xi2, *setup.strip, setup.aux, C));
  return out.str();
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  for (int j = 0; j < count; ++j) out.push_back(lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1)));
  return out;
}

int cmd_classify(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
  const Classification cls = validate(cfg.problem, cfg.k);
  const std::string text = format_classification(cfg.problem, cls);
  em.open("classification.txt") << text;
  out << text;
  return kExitOk;
}

int cmd_eigen(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
  const DomainSpec dom = cfg.resolved_domain();
  const MeshPtr mesh = build_mesh(dom, cfg.n);
  const MeshPtr tilde = aligned_enlarged_mesh(dom, cfg.n);
  std::ostringstream text;
  const std::pair<const char*, double> exps[] = {{"p", cfg.problem.p}, {"q", cfg.problem.q}};
  for (const auto& [name, r] : exps) {
    for (const auto& [suffix, m] : {std::pair<std::string, MeshPtr>{"", mesh}, {"_tilde", tilde}}) {
      const EigenPair e = first_eigenpair(r, m);
      const std::string tag = std::string(name) + suffix;
      auto f = em.open("eigen_" + tag + ".csv");
      write_columns(f, {{"phi", &e.phi}});
      text << "eigenvalue_" << tag << ": " << fmt_num(e.eigenvalue) << '\n'
           << "iterations_" << tag << ": " << e.iterations << '\n'
           << "norm_" << tag << ": " << fmt_num(lr_norm_pow(e.phi, r)) << '\n';
    }
  }
  em.open("eigen.txt") << text.str();
  out << text.str();
  return kExitOk;
}

int cmd_barriers(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
  const Classification cls = validate(cfg.problem, cfg.k);
  const BarrierSetup setup = prepare_barriers(cfg.resolved_domain(), cfg.n, cfg.problem, cls, barrier_options(cfg));
  const SelectionResult sel = select_barriers(setup, cfg, cls, cfg.problem.lambda, true);
  const std::string text = selection_text(sel, setup, cfg.problem);
  em.open("certificate.txt") << text;
  const BarrierPair b = sel.barriers ? *sel.barriers : make_barriers(setup, cfg.problem, cls, sel.C > 1.0 ? sel.C : 2.0);
  auto f = em.open("barriers.csv");
  write_columns(f, {{"lower_u", &b.lower_u}, {"lower_v", &b.lower_v}, {"upper_u", &b.upper_u}, {"upper_v", &b.upper_v}});
  out << text;
  return sel.found ? kExitOk : kExitCertificate;
}

int cmd_solve(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
  const Classification cls = validate(cfg.problem, cfg.k);
  const BarrierSetup setup = prepare_barriers(cfg.resolved_domain(), cfg.n, cfg.problem, cls, barrier_options(cfg));
  const SelectionResult sel = select_barriers(setup, cfg, cls, cfg.problem.lambda, false);
  em.open("certificate.txt") << selection_text(sel, setup, cfg.problem);
  if (!sel.found) {
    out << "certificate failure: " << sel.message << '\n';
    return kExitCertificate;
  }
  const ContinuationResult c = continuation_solve(cfg.problem, cfg.problem.lambda, sel.barriers, cfg.solve_config());
  const std::string text = format_solve_report(c.report);
  em.open("solve_report.txt") << text;
  auto f = em.open("solution.csv");
  write_columns(f, {{"u", &c.u}, {"v", &c.v}});
  out << text;
  return c.report.passed ? kExitOk : kExitNonconvergence;
}

int cmd_sweep(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
  const Classification cls = validate(cfg.problem, cfg.k);
  const DomainSpec dom = cfg.resolved_domain();
  std::optional<BarrierSetup> setup;
  EigenPair eigp, eigq;
  if (cls.theta == 0.0) {
    const MeshPtr mesh = build_mesh(dom, cfg.n);
    eigp = first_eigenpair(cfg.problem.p, mesh);
    eigq = cfg.problem.q == cfg.problem.p ? eigp : first_eigenpair(cfg.problem.q, mesh);
  } else {
    setup = prepare_barriers(dom, cfg.n, cfg.problem, cls, barrier_options(cfg));
    eigp = setup->eigp;
  }
  auto f = em.open("sweep.csv");
  f << "# lambda,outcome,max_u,max_v,residual_u,residual_v\n";
  for (double lam : geometric_grid(cfg.sweep_lambda_min * eigp.eigenvalue, cfg.sweep_lambda_max * eigp.eigenvalue,
                                   cfg.sweep_count)) {
    std::string outcome;
    double mu = 0, mv = 0, ru = 0, rv = 0;
    ProblemParams pp = cfg.problem;
    pp.lambda = lam;
    if (cls.theta == 0.0) {
      const ProbeResult r = nonexistence_probe(pp, lam, eigp, eigq, cfg.solve_config());
      outcome = probe_outcome_name(r.outcome);
      mu = r.max_u, mv = r.max_v, ru = r.residual_u, rv = r.residual_v;
    } else {
      const SelectionResult sel = select_barriers(*setup, cfg, cls, lam, false);
      if (!sel.found) {
        outcome = "CERTIFICATE_FAILURE";
      } else {
        const ContinuationResult c = continuation_solve(pp, lam, sel.barriers, cfg.solve_config());
        outcome = c.report.passed ? "CONVERGED_POSITIVE" : "NONCONVERGENCE";
        mu = c.u.values().maxCoeff(), mv = c.v.values().maxCoeff();
        ru = c.report.residual_u, rv = c.report.residual_v;
      }
    }
    std::ostringstream row;
    row << fmt_num(lam) << ',' << outcome << ',' << fmt_num(mu) << ',' << fmt_num(mv) << ',' << fmt_num(ru) << ','
        << fmt_num(rv) << '\n';
    f << row.str();
    out << row.str();
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const Emitter& em, std::ostream& out) {
  const Classification cls = validate(cfg.problem, cfg.k);
  std::ostringstream text;
  bool ok = true;
  {
    auto f = em.open("convergence.csv");
    for (double r : cfg.verify_exponents) {
      const ConvergenceStudy s = manufactured_convergence(r, cfg.verify_levels);
      f << format_convergence(s);
      const double need = r == 2.0 ? 1.8 : 0.9;
      const double worst = *std::min_element(s.orders.begin(), s.orders.end());
      text << "convergence.r=" << fmt_num(r) << ": min_order=" << fmt_num(worst) << " required=" << fmt_num(need)
           << (worst >= need ? " pass" : " fail") << '\n';
      ok = ok && worst >= need;
    }
  }
  if (cls.theta == 0.0 && cls.c && cls.c2) {
    const DomainSpec dom = cfg.resolved_domain();
    const MeshPtr mesh = build_mesh(dom, cfg.n);
    const EigenPair eigp = first_eigenpair(cfg.problem.p, mesh);
    const EigenPair eigq = cfg.problem.q == cfg.problem.p ? eigp : first_eigenpair(cfg.problem.q, mesh);
    const double ls = lambda_star(cfg.problem, eigp.eigenvalue, eigq.eigenvalue);
    text << "lambda_star: " << fmt_num(ls) << '\n';
    Field tu = eigp.phi, tv = eigq.phi;
    for (std::size_t i = 0; i < tu.size(); ++i) {
      tu[i] = std::pow(std::max(tu[i], 0.0), cfg.problem.gamma);
      tv[i] = std::pow(std::max(tv[i], 0.0), cfg.problem.gamma);
    }
    const EnergyCertificate e =
        energy_certificate(cfg.problem, cfg.problem.lambda, tu, tv, eigp.eigenvalue, eigq.eigenvalue);
    text << "trial_pair: eigenfunction powers\n" << format_energy(e);
    ok = ok && e.verdict != EnergyVerdict::Inconsistent;
    const SolveConfig sc = cfg.solve_config();
    const ProbeResult pr = nonexistence_probe(cfg.problem, cfg.problem.lambda, eigp, eigq, sc);
    text << format_probe(pr);
    try {
      auto probe = [&](double lam) { return nonexistence_probe(cfg.problem, lam, eigp, eigq, sc).outcome; };
      const ThresholdResult th =
          empirical_threshold(probe, cfg.sweep_lambda_min * ls, cfg.sweep_lambda_max * ls, cfg.threshold_steps);
      text << "threshold.lambda_emp: " << fmt_num(th.lambda_emp) << '\n'
           << "threshold.bracket: [" << fmt_num(th.lo) << ", " << fmt_num(th.hi) << "]\n"
           << "threshold.non_monotone: " << (th.non_monotone ? "true" : "false") << '\n';
    } catch (const InvalidArgument& ex) {
      text << "threshold: not available (" << ex.what() << ")\n";
    }
  } else {
    text << "energy: not applicable (needs theta = 0 with (c) and (c2))\n";
  }
  em.open("verify.txt") << text.str();
  out << text.str();
  return ok ? kExitOk : kExitCertificate;
}

}  // namespace

DomainSpec RunConfig::resolved_domain() const {
  DomainSpec d = domain;
  if (d.dimension == 1) {
    d.lower[1] = 0.0;
    d.upper[1] = 1.0;
  }
  d.padding = 0.0;
  d.check();
  d.padding = padding.value_or(default_padding(d));
  d.check();
  return d;
}

SolveConfig RunConfig::solve_config() const {
  SolveConfig s;
  s.tol_fixedpoint = tol_fixedpoint;
  s.tol_newton = tol_newton;
  s.max_sweeps = max_sweeps;
  s.eps_stages = eps_stages;
  s.clamp = clamp;
  s.residual_tol = residual_tol;
  s.check();
  return s;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& h : handlers()) out.push_back(h.doc);
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  handler_for(key).set(cfg, value);
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
    apply_setting(cfg, key, value);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string canonical_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& h : handlers())
    if (h.doc.key != "output.dir") out += h.doc.key + " = " + h.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(canonical_config(cfg))); }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"classify", "eigen", "barriers", "solve", "sweep", "verify"};
  return names;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using Cmd = int (*)(const RunConfig&, const Emitter&, std::ostream&);
  static const std::map<std::string, Cmd> commands{{"classify", cmd_classify}, {"eigen", cmd_eigen},
                                                   {"barriers", cmd_barriers}, {"solve", cmd_solve},
                                                   {"sweep", cmd_sweep},       {"verify", cmd_verify}};
  const auto it = commands.find(name);
  if (it == commands.end()) {
    err << "unknown command '" << name << "'\n";
    return kExitUsage;
  }
  try {
    Emitter em{cfg.output_dir, file_header(config_hash(cfg))};
    std::filesystem::create_directories(em.dir);
    return it->second(cfg, em, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitData;
  } catch (const ConvergenceError& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return kExitNonconvergence;
  }
}

}  // namespace pqlap
