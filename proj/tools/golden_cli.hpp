#pragma once

// Command-line front end: run / list / explain.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "golden/scenario.hpp"

namespace golden::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

inline std::filesystem::path bundled_dir() { return GOLDEN_BUNDLED_CONFIG_DIR; }

/// A path on disk wins; otherwise a bundled config name (with or without .cfg).
inline std::filesystem::path resolve_config(const std::string& arg) {
  const std::filesystem::path p(arg);
  if (std::filesystem::is_regular_file(p)) return p;
  auto bundled = bundled_dir() / p;
  if (bundled.extension() != ".cfg") bundled += ".cfg";
  if (std::filesystem::is_regular_file(bundled)) return bundled;
  throw ConfigError("/", "no config file or bundled scenario named '" + arg + "'");
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Golden-structure submanifold and space-form checks", "golden"};
  app.require_subcommand(1);

  std::string config, report_path, suite;
  std::uint64_t seed = 0;
  double tol_angle = 0;
  Backend backend = Backend::Exact;
  const std::map<std::string, Backend> backends{{"exact", Backend::Exact}, {"float", Backend::Float}};

  auto* run_cmd = app.add_subcommand("run", "Run the suites of a scenario config");
  run_cmd->add_option("config", config, "Config path or bundled scenario name")->required();
  auto* report_opt = run_cmd->add_option("--report", report_path, "Write the YAML report here instead of stdout");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
  auto* tol_opt = run_cmd->add_option("--tol-angle", tol_angle, "Override the slant angle tolerance")
                      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--backend", backend, "exact or float")
      ->transform(CLI::CheckedTransformer(backends, CLI::ignore_case));

  auto* list_cmd = app.add_subcommand("list", "List bundled scenarios");
  auto* explain_cmd = app.add_subcommand("explain", "Show the identities a suite checks");
  explain_cmd->add_option("suite", suite, "Suite name")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (list_cmd->parsed()) {
    for (const auto& name : bundled_configs(bundled_dir())) out << name << "\n";
    return kExitPass;
  }

  if (explain_cmd->parsed()) {
    const auto lines = suite_description(suite);
    if (lines.empty()) {
      err << "error: unknown suite '" << suite << "' (known:";
      for (const char* s : kSuiteOrder) err << " " << s;
      err << ")\n";
      return kExitUsage;
    }
    out << suite << ":\n";
    for (const auto& l : lines) out << "  " << l << "\n";
    return kExitPass;
  }

  RunOptions opt;
  opt.backend = backend;
  if (*seed_opt) opt.seed = seed;
  if (*tol_opt) opt.tol_angle = tol_angle;

  Scenario sc;
  try {
    sc = load_scenario(resolve_config(config));
  } catch (const ConfigError& e) {
    err << "config error at " << e.path() << ": " << e.what() << "\n";
    return kExitUsage;
  }

  const auto result = run_scenario(sc, opt);
  const auto text = emit_report(result.report);
  if (*report_opt) {
    std::ofstream f(report_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write report to " << report_path << "\n";
      return kExitUsage;
    }
    f << text;
    for (const auto& name : sc.suites)
      out << name << ": " << (result.report["suites"][name]["pass"].as<bool>() ? "PASS" : "FAIL") << "\n";
    out << sc.name << ": " << (result.pass ? "PASS" : "FAIL") << "\n";
  } else {
    out << text;
  }
  return result.exit_code();
}

}  // namespace golden::cli
