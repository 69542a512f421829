// ssmcmc: run or validate sampling experiments described by INI configs.
//
//   ssmcmc run <config> [--seed N] [--chains K] [--output-dir DIR]
//   ssmcmc validate <config>
//
// Relative dataset paths resolve against $SSMCMC_DATA_ROOT.
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssmcmc/errors.hpp"
#include "ssmcmc/experiment.hpp"
#include "ssmcmc/run_config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::filesystem::path data_root() {
  const char* env = std::getenv("SSMCMC_DATA_ROOT");
  return env ? std::filesystem::path(env) : std::filesystem::path();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic subgradient MCMC experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<std::string> output_dir;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "INI config file")->required();
  run->add_option("--seed", seed, "Override [run] seed");
  run->add_option("--chains", chains, "Number of independent chains, run concurrently");
  run->add_option("--output-dir", output_dir, "Override [run] output_dir");

  auto* validate = app.add_subcommand("validate", "Check a config file and print every violation");
  validate->add_option("config", config_path, "INI config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    ssmcmc::RunConfig config = ssmcmc::load_config(config_path);
    if (seed) config.seed = *seed;
    if (chains) config.chains = *chains;
    if (output_dir) config.output_dir = *output_dir;

    if (*validate) {
      const auto errors = ssmcmc::validate_config(config);
      for (const auto& e : errors) std::cerr << "error: " << e << '\n';
      if (!errors.empty()) return kConfigError;
      std::cout << "ok " << ssmcmc::config_hash(config) << '\n';
      return kOk;
    }

    const auto summary = ssmcmc::run_experiment(config, data_root());
    std::cout << summary.directory.string() << '\n';
    for (const auto& c : summary.chains) {
      std::cout << "chain " << c.chain << ": " << c.samples << " samples";
      if (c.final_accuracy) std::cout << ", accuracy " << *c.final_accuracy;
      std::cout << ", " << c.wall_ms << " ms\n";
    }
    return kOk;
  } catch (const ssmcmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
