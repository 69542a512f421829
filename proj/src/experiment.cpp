#include "ssmcmc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <thread>

#include <json.hpp>

#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/errors.hpp"
#include "ssmcmc/mixture_model.hpp"
#include "ssmcmc/samplers.hpp"
#include "ssmcmc/sparse_model.hpp"
#include "ssmcmc/svm_model.hpp"

namespace ssmcmc {

namespace {

namespace fs = std::filesystem;

fs::path resolve(const std::string& path, const fs::path& root) {
  const fs::path p(path);
  return p.is_relative() && !root.empty() ? root / p : p;
}

void throw_if_invalid(const std::vector<std::string>& errors) {
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

InnerSampler inner_sampler(const RunConfig& c) { return c.inner == "ssgnht" ? InnerSampler::kSsgnht : InnerSampler::kSsgld; }

std::string chain_file(const char* stem, int chain) { return std::string(stem) + "_chain" + std::to_string(chain) + ".csv"; }

ChainSummary run_chain(const RunConfig& cfg, const LoadedData& data, int chain, const fs::path& dir,
                       const std::string& hash) {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  Rng rng(cfg.seed, static_cast<std::uint64_t>(chain));
  const Dataset& train = data.train;
  const std::size_t d = train.dim();
  const SamplerConfig sc = cfg.sampler_config();
  const MinibatchSource source(train, sc.batch_size);

  std::unique_ptr<EnergyModel> model;
  std::unique_ptr<MixtureEnergy> mixture;
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  std::optional<HmcWithinGibbs> gibbs;
  const MixturePrior prior{cfg.mu_prior_var};
  if (cfg.model == "mixture_svm") {
    const MixtureParams init = MixtureParams::init(train, cfg.components, rng);
    const bool frozen = cfg.sampler == "ds_hmc" && cfg.freeze_gaussian;
    mixture = std::make_unique<MixtureEnergy>(init, cfg.c, prior, frozen ? MixtureBlocks::kEtaOnly : MixtureBlocks::kAll);
    theta0 = mixture->pack(init);
    if (cfg.sampler == "hmc_gibbs") {
      SamplerConfig gauss = sc;
      gauss.schedule = StepsizeSchedule::constant(cfg.gaussian_stepsize);
      gibbs.emplace(train, init, cfg.c, prior, sc, gauss, inner_sampler(cfg), rng);
    }
  } else if (cfg.model == "sparse_logistic") {
    model = std::make_unique<SparseLogisticModel>(d, cfg.laplace_scale);
  } else {
    model = std::make_unique<LinearSvmModel>(d, cfg.c);
  }
  const EnergyModel& energy = mixture ? static_cast<const EnergyModel&>(*mixture) : *model;

  ChainState state = ChainState::start(theta0, sc, rng);
  AugmentedState augmented;
  if (cfg.sampler == "da_gibbs") augmented = AugmentedState::start(d, train.size());

  Trace trace;
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    if (cfg.sampler == "hmc") {
      hmc_draw(energy, state, sc, source, rng);
    } else if (cfg.sampler == "ssgld") {
      ssgld_step(energy, state, sc, source, rng);
    } else if (cfg.sampler == "ssgnht") {
      ssgnht_draw(energy, state, sc, source, rng);
    } else if (cfg.sampler == "srwm") {
      srwm_step(energy, state, sc, source, rng);
    } else if (cfg.sampler == "ds_hmc") {
      doubly_stochastic_hmc_round(*mixture, state, sc, source, rng, inner_sampler(cfg));
    } else if (cfg.sampler == "da_gibbs") {
      da_gibbs_step(augmented, train, cfg.c, rng);
      state.theta = augmented.eta;
    } else if (cfg.sampler == "hmc_gibbs") {
      gibbs->round(rng);
      state.theta = mixture->pack(gibbs->params());
    }
    if (t % cfg.thin == 0) trace.push(t, elapsed(), state.theta);
  }
  std::size_t burn = 0;
  while (burn < trace.size() && trace.iteration(burn) <= cfg.burn_in) ++burn;
  trace.set_burn_in(burn);

  ChainSummary summary;
  summary.chain = chain;
  summary.samples = trace.size() - trace.burn_in();
  summary.acceptance_rate = state.acceptance_rate();
  write_trace_csv(trace, dir / chain_file("trace", chain), hash);

  if (!data.test.empty() && !trace.empty()) {
    Predictor predictor;
    if (mixture) {
      auto vote_rng = std::make_shared<Rng>(cfg.seed, 1000 + static_cast<std::uint64_t>(chain));
      predictor = [&, vote_rng](const Eigen::VectorXd& theta, const Dataset& test, std::size_t i) {
        const MixtureParams p = mixture->unpack(theta);
        return gibbs_classifier_predict(std::span<const MixtureParams>(&p, 1), test.row(i), *vote_rng, cfg.votes);
      };
    } else {
      predictor = [](const Eigen::VectorXd& theta, const Dataset& test, std::size_t i) { return predict(theta, test, i); };
    }
    const std::size_t stride = std::max<std::uint64_t>(1, cfg.checkpoint_every / cfg.thin);
    const auto curve = accuracy_curve(trace, data.test, predictor, stride);
    write_accuracy_csv(curve, dir / chain_file("accuracy", chain), hash);
    if (!curve.empty()) summary.final_accuracy = curve.back().accuracy;
  }
  if (cfg.model == "sparse_logistic" && !trace.empty()) {
    const auto ranking = feature_rank(trace.post_burn_in(), std::min<std::size_t>(10, d));
    write_feature_ranking_csv(ranking, dir / chain_file("features", chain), hash);
  }
  summary.wall_ms = elapsed();
  if (gibbs) {
    summary.assignment_ms = gibbs->times().assignment_ms;
    summary.eta_ms = gibbs->times().eta_ms;
    summary.gaussian_ms = gibbs->times().gaussian_ms;
  }
  return summary;
}

// Holds out test_fraction of out.train; a zero fraction keeps everything for training.
void split_into(LoadedData& out, const RunConfig& config) {
  if (config.test_fraction <= 0.0) return;
  auto split = train_test_split(out.train, config.test_fraction, config.data_seed);
  out.train = std::move(split.train);
  out.test = std::move(split.test);
}

}  // namespace

LoadedData load_data(const RunConfig& config, const fs::path& data_root) {
  LoadedData out;
  if (config.source == "libsvm") {
    out.train = read_libsvm(resolve(config.train_path, data_root), std::nullopt, config.max_rows);
    if (config.test_path.empty()) {
      split_into(out, config);
    } else {
      const fs::path test_path = resolve(config.test_path, data_root);
      out.test = read_libsvm(test_path);
      if (out.test.dim() < out.train.dim()) {
        out.test = read_libsvm(test_path, out.train.dim());
      } else if (out.test.dim() > out.train.dim()) {
        out.train = read_libsvm(resolve(config.train_path, data_root), out.test.dim(), config.max_rows);
      }
    }
  } else {
    const SyntheticData synth =
        config.source == "synthetic_sparse"
            ? gen_synthetic_sparse(config.n, config.dim, config.support, config.data_seed)
            : gen_synthetic_svm2d(config.n, config.prior_precision, config.c, config.data_seed);
    out.train = synth.data;
    split_into(out, config);
  }
  if (config.add_bias) {
    out.train = out.train.with_bias_column();
    if (!out.test.empty()) out.test = out.test.with_bias_column();
  }
  return out;
}

RunSummary run_experiment(const RunConfig& config, const fs::path& data_root) {
  throw_if_invalid(validate_config(config));
  const LoadedData data = load_data(config, data_root);
  throw_if_invalid(validate_config(config, data.train.size()));
  if (data.train.empty()) throw ConfigError("training set is empty");
  if (config.sampler == "da_gibbs" && data.train.dim() > kMaxAugmentedDim) {
    throw ConfigError("da_gibbs supports at most " + std::to_string(kMaxAugmentedDim) + " features");
  }

  RunSummary run;
  run.config_hash = config_hash(config);
  run.directory = fs::path(config.output_dir) / ("run-" + run.config_hash);
  fs::create_directories(run.directory);
  {
    std::ofstream out(run.directory / "config.ini");
    out << "# config_hash=" << run.config_hash << '\n' << resolved_config(config);
  }

  run.chains.resize(static_cast<std::size_t>(config.chains));
  std::vector<std::exception_ptr> failures(run.chains.size());
  auto work = [&](int k) {
    try {
      run.chains[static_cast<std::size_t>(k)] = run_chain(config, data, k, run.directory, run.config_hash);
    } catch (...) {
      failures[static_cast<std::size_t>(k)] = std::current_exception();
    }
  };
  if (config.chains == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int k = 0; k < config.chains; ++k) threads.emplace_back(work, k);
    for (auto& t : threads) t.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  nlohmann::json chains = nlohmann::json::array();
  for (const auto& c : run.chains) {
    chains.push_back({{"chain", c.chain},
                      {"samples", c.samples},
                      {"final_accuracy", c.final_accuracy ? nlohmann::json(*c.final_accuracy) : nlohmann::json()},
                      {"acceptance_rate", c.acceptance_rate},
                      {"wall_ms", c.wall_ms},
                      {"phase_ms",
                       {{"assignment", c.assignment_ms}, {"eta_sampling", c.eta_ms}, {"gaussian_sampling", c.gaussian_ms}}}});
  }
  const nlohmann::json summary = {{"config_hash", run.config_hash},
                                  {"model", config.model},
                                  {"sampler", config.sampler},
                                  {"train_rows", data.train.size()},
                                  {"test_rows", data.test.size()},
                                  {"dim", data.train.dim()},
                                  {"chains", chains}};
  std::ofstream(run.directory / "summary.json") << summary.dump(2) << '\n';
  return run;
}

}  // namespace ssmcmc
