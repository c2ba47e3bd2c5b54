#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "asymflow/config.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/experiment.hpp"

namespace {

int log_level_from_env() {
  const char* env = std::getenv("ASYMFLOW_LOG");
  if (env == nullptr) return 0;
  try {
    return std::stoi(env);
  } catch (...) {
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymflow: gradient flows on asymmetric metric spaces"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 0;
  long long seed = -1;
  std::string out_dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    cmd->add_option("--jobs", jobs, "max concurrent sweep members");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--out", out_dir, "override the output directory");
  };

  CLI::App* run = app.add_subcommand("run", "run the MMS sweep and the ODE oracle");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  CLI::App* sweep = app.add_subcommand("sweep", "emit the error-vs-oracle table");
  add_common(run);
  add_common(verify);
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  const int log_level = log_level_from_env();
  try {
    asymflow::ExperimentConfig config = asymflow::parse_config_file(config_path);
    if (jobs > 0) config.jobs = jobs;
    if (seed >= 0) {
      config.seed = static_cast<std::uint64_t>(seed);
      config.solver.seed = config.seed;
    }
    if (!out_dir.empty()) config.out_dir = out_dir;

    if (run->parsed()) return asymflow::cmd_run(config, log_level);
    if (verify->parsed()) return asymflow::cmd_verify(config, log_level);
    if (sweep->parsed()) return asymflow::cmd_sweep(config, log_level);
    return asymflow::kExitRuntime;
  } catch (const asymflow::usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return asymflow::kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return asymflow::kExitRuntime;
  }
}
