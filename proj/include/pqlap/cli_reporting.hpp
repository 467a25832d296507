#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqlap/domain_mesh.hpp"
#include "pqlap/problem_model.hpp"
#include "pqlap/system_solver.hpp"

namespace pqlap {

/// Malformed configuration: unknown key, bad value, duplicate key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  DomainSpec domain{1, {0.0, 0.0}, {1.0, 1.0}, 0.0};
  std::optional<double> padding;        // auto: a quarter of the shortest axis
  int n = 256;
  std::optional<double> strip_width;    // auto: 4 h
  ProblemParams problem;
  double tol_fixedpoint = 1e-9;
  double tol_newton = 1e-10;
  int max_sweeps = 200;
  int eps_stages = 21;
  bool clamp = true;
  double residual_tol = 1e-6;
  std::optional<double> theta1, theta2, aux_delta, k, C;
  int c_max_exponent = 30;
  double sweep_lambda_min = 0.5;        // in units of λ1,p on the domain
  double sweep_lambda_max = 20.0;
  int sweep_count = 8;
  int threshold_steps = 10;
  std::vector<int> verify_levels{64, 128, 256};
  std::vector<double> verify_exponents{2.0, 1.5, 3.0};
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  DomainSpec resolved_domain() const;
  SolveConfig solve_config() const;
};

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string description;
};

/// Every accepted key with its default, in file order.
const std::vector<ConfigKey>& config_keys();

/// Flat "section.key = value" lines; '#' starts a comment. Unknown or
/// repeated keys and unparsable values raise ConfigError naming the key.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);
/// Applies one "key=value" override.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical "key = value" listing of the resolved configuration.
std::string canonical_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

enum ExitCode : int {
  kExitOk = 0,
  kExitNonconvergence = 2,
  kExitCertificate = 3,
  kExitUsage = 64,
  kExitData = 65,
};

const std::vector<std::string>& command_names();

/// Runs classify | eigen | barriers | solve | sweep | verify, writing files into
/// cfg.output_dir and a summary to `out`. Returns the exit code.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace pqlap
