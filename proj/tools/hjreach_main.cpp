// Command-line front end: solve one instance, reproduce the convergence
// table, or run the randomized verification suites.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjreach/config.hpp"
#include "hjreach/runner.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitSchema = 4;
constexpr int kExitInvalidValue = 5;
constexpr int kExitRuntime = 6;

int exit_code_for(const hjreach::ConfigError& err) {
  switch (err.kind) {
    case hjreach::ConfigErrorKind::kMissingFile:
      return kExitMissingFile;
    case hjreach::ConfigErrorKind::kSchema:
      return kExitSchema;
    case hjreach::ConfigErrorKind::kInvalidValue:
      return kExitInvalidValue;
  }
  return kExitRuntime;
}

std::vector<double> split_doubles(const std::string& text, char sep) {
  std::vector<double> out;
  std::string::size_type pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(sep, pos);
    const std::string piece = text.substr(pos, next == std::string::npos ? next : next - pos);
    if (!piece.empty()) out.push_back(std::stod(piece));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<hjreach::Vec<2>> parse_instances(const std::string& text) {
  std::vector<hjreach::Vec<2>> out;
  std::string::size_type pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(';', pos);
    const std::string piece = text.substr(pos, next == std::string::npos ? next : next - pos);
    if (!piece.empty()) {
      const auto nums = split_doubles(piece, ',');
      if (nums.size() != 2) throw std::invalid_argument("instance needs two coordinates: " + piece);
      out.push_back({nums[0], nums[1]});
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<double> tol;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> cadence;
};

hjreach::RunConfig load_config(const CommonFlags& flags) {
  hjreach::RunConfig cfg = flags.config_path.empty()
                               ? hjreach::RunConfig{}
                               : hjreach::parse_config_file(flags.config_path);
  if (flags.tol) cfg.reach_tol = *flags.tol;
  if (flags.workers) cfg.workers = *flags.workers;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.cadence) cfg.cadence = *flags.cadence;
  hjreach::validate(cfg);
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "run configuration file");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out_dir, "output directory");
  flags.tol.reset();
  cmd->add_option_function<double>("--tol", [&flags](double v) { flags.tol = v; },
                                   "reachability threshold on the value sign");
  cmd->add_option_function<int>("--workers", [&flags](int v) { flags.workers = v; },
                                "worker threads (0 = hardware)");
  cmd->add_option_function<std::uint64_t>("--seed", [&flags](std::uint64_t v) { flags.seed = v; },
                                          "seed for randomized components");
  cmd->add_option_function<int>("--output-cadence",
                                [&flags](int v) { flags.cadence = v; },
                                "steps between mask/map dumps");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reachable sets and autonomy of lag-constrained switched systems"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  std::optional<double> solve_dx;
  auto* solve_cmd = app.add_subcommand("solve", "run one instance and write the result bundle");
  add_common(solve_cmd, solve_flags, true);
  solve_cmd->add_option_function<double>("--dx", [&solve_dx](double v) { solve_dx = v; },
                                         "override the grid spacing");

  CommonFlags table_flags;
  std::string table_dx = "0.05,0.04,0.03,0.02";
  std::string table_instances = "0.5,0.5;0.3,0.8";
  auto* table_cmd = app.add_subcommand("table", "convergence table over grid refinements");
  add_common(table_cmd, table_flags, true);
  table_cmd->add_option("--dx", table_dx, "comma-separated grid spacings");
  table_cmd->add_option("--instances", table_instances,
                        "semicolon-separated x0,y0 pairs (default: the two built-in instances)");

  CommonFlags verify_flags;
  bool quick = false;
  auto* verify_cmd = app.add_subcommand("verify", "randomized property suites");
  add_common(verify_cmd, verify_flags, false);
  verify_cmd->add_flag("--quick", quick, "reduced sample counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) {
      hjreach::RunConfig cfg = load_config(solve_flags);
      if (solve_dx) {
        cfg.dx = *solve_dx;
        hjreach::validate(cfg);
      }
      const auto outcome = hjreach::run_solve_command(cfg, solve_flags.out_dir);
      if (outcome.autonomy.reached) {
        std::cout << "autonomy " << hjreach::format_double(outcome.autonomy.value) << " in ["
                  << hjreach::format_double(outcome.autonomy.bracket_lo) << ", "
                  << hjreach::format_double(outcome.autonomy.bracket_hi) << "]\n";
      } else {
        std::cout << "autonomy not reached within horizon\n";
      }
      std::cout << "wrote " << outcome.files.size() << " files to " << solve_flags.out_dir
                << " in " << hjreach::format_double(outcome.wall_seconds) << " s\n";
    } else if (table_cmd->parsed()) {
      const hjreach::RunConfig cfg = load_config(table_flags);
      const auto rows = hjreach::run_table_command(cfg, split_doubles(table_dx, ','),
                                                   parse_instances(table_instances),
                                                   table_flags.out_dir);
      std::cout << hjreach::format_table_text(rows);
    } else if (verify_cmd->parsed()) {
      const hjreach::RunConfig cfg = load_config(verify_flags);
      const int failures = hjreach::run_verify_command(cfg, quick, cfg.seed);
      if (failures > 0) {
        std::cerr << failures << " property check(s) failed\n";
        return 1;
      }
      std::cout << "all property checks passed\n";
    }
  } catch (const hjreach::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
