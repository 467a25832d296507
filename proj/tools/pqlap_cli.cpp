// Command-line front end: pqlap <command> --config FILE [--set key=value]...

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqlap/cli_reporting.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Singular cooperative (p,q)-Laplacian systems: classification, barriers, solves, checks"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> settings;
  bool list_keys = false;
  app.add_option("command", command, "classify | eigen | barriers | solve | sweep | verify");
  app.add_option("-c,--config", config_path, "flat key = value configuration file");
  app.add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("-s,--set", settings, "override, key=value (repeatable)");
  app.add_flag("--keys", list_keys, "list configuration keys with defaults");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pqlap::kExitUsage;
  }

  if (list_keys) {
    for (const auto& k : pqlap::config_keys())
      std::cout << k.key << " = " << k.default_value << "    # " << k.description << '\n';
    return 0;
  }
  if (command.empty()) {
    std::cerr << "missing command\n" << app.help();
    return pqlap::kExitUsage;
  }

  pqlap::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = pqlap::parse_config_file(config_path);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw pqlap::ConfigError("override '" + s + "' is not key=value");
      pqlap::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
  } catch (const pqlap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return pqlap::kExitData;
  }
  return pqlap::run_command(command, cfg, std::cout, std::cerr);
}
