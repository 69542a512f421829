#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssmcmc/samplers.hpp"

namespace ssmcmc {

/// Everything a run needs. Sections of the INI file map onto the groups below;
/// every key has a default and the resolved file lists them all.
struct RunConfig {
  // [run]
  std::string model = "linear_svm";  // linear_svm | mixture_svm | sparse_logistic
  std::string sampler = "ssgld";     // hmc | ssgld | ssgnht | srwm | da_gibbs | ds_hmc | hmc_gibbs
  std::uint64_t iterations = 1000;
  std::uint64_t burn_in = 200;
  std::uint64_t thin = 1;
  std::uint64_t checkpoint_every = 100;  // iterations between accuracy-curve rows
  std::uint64_t seed = 0;
  int chains = 1;
  std::string output_dir = "runs";

  // [data]
  std::string source = "synthetic_svm2d";  // libsvm | synthetic_svm2d | synthetic_sparse
  std::string train_path;                  // relative paths resolve against the data root
  std::string test_path;                   // empty: split the training file
  double test_fraction = 0.2;
  std::size_t max_rows = 0;                // 0: read every row
  bool add_bias = false;
  std::size_t n = 1000;
  std::size_t dim = 50;                    // synthetic_sparse only
  std::size_t support = 5;                 // synthetic_sparse only
  double prior_precision = 3.0;            // synthetic_svm2d only
  std::uint64_t data_seed = 0;

  // [model]
  double c = 1.0;
  double laplace_scale = 1.0;
  std::size_t components = 2;
  double mu_prior_var = 100.0;

  // [sampler]
  std::string schedule = "constant";       // constant | polynomial | adaptive
  double stepsize = 1e-3;                  // epsilon, polynomial a, or adaptive epsilon_0
  double gamma = 0.0;
  double delta = 1e-8;
  int leapfrog_steps = 1;
  double diffusion = 1.0;
  std::size_t batch_size = 0;              // 0: full batch
  bool mh_correction = false;
  double proposal_sd = 0.1;
  std::string inner = "ssgld";             // ssgld | ssgnht, the move used by ds_hmc and hmc_gibbs
  bool freeze_gaussian = false;            // ds_hmc: sample the etas only
  double gaussian_stepsize = 1e-3;         // hmc_gibbs (mu, L) moves
  int votes = 1;                           // Gibbs-classifier votes per test point

  SamplerConfig sampler_config() const;
};

/// Parses an INI file. Unknown sections or keys and unparsable values throw ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

/// INI text with every key, defaults included, in a fixed order.
std::string resolved_config(const RunConfig& config);

/// Hex FNV-1a digest of the resolved config.
std::string config_hash(const RunConfig& config);

/// Every violated constraint; empty when valid. `train_rows`, when known,
/// enables the batch-size check.
std::vector<std::string> validate_config(const RunConfig& config, std::size_t train_rows = 0);

}  // namespace ssmcmc
