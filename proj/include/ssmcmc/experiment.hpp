#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/run_config.hpp"

namespace ssmcmc {

struct LoadedData {
  Dataset train;
  Dataset test;
};

/// Materializes the configured data source. Relative libsvm paths resolve
/// against `data_root`.
LoadedData load_data(const RunConfig& config, const std::filesystem::path& data_root = {});

struct ChainSummary {
  int chain = 0;
  std::size_t samples = 0;              // post-burn-in samples written
  std::optional<double> final_accuracy;
  double acceptance_rate = 0.0;         // MH samplers only
  double wall_ms = 0.0;
  double assignment_ms = 0.0;           // hmc_gibbs phases
  double eta_ms = 0.0;
  double gaussian_ms = 0.0;
};

struct RunSummary {
  std::string config_hash;
  std::filesystem::path directory;
  std::vector<ChainSummary> chains;
};

/// Validates, loads data, runs every chain (concurrently when chains > 1) and
/// writes into <output_dir>/run-<config hash>/:
///   config.ini, trace_chain<k>.csv, accuracy_chain<k>.csv, features_chain<k>.csv
///   (sparse_logistic), summary.json.
/// Throws ConfigError before any compute if the config is invalid.
RunSummary run_experiment(const RunConfig& config, const std::filesystem::path& data_root = {});

}  // namespace ssmcmc
