#include "ssmcmc/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

std::string format(const std::string& v) { return v; }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
template <typename Int>
std::string format(Int v) {
  return std::to_string(v);
}

void parse(const std::string& text, std::string& out) { out = text; }
void parse(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
  } else if (text == "false" || text == "0" || text == "no") {
    out = false;
  } else {
    throw ConfigError("expected a boolean, got '" + text + "'");
  }
}
void parse(const std::string& text, double& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("expected a number, got '" + text + "'");
  }
}
template <typename Int>
void parse(const std::string& text, Int& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("expected a non-negative integer, got '" + text + "'");
  }
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field field(std::string section, std::string key, T RunConfig::*member) {
  return {std::move(section), std::move(key), [member](RunConfig& c, const std::string& t) { parse(t, c.*member); },
          [member](const RunConfig& c) { return format(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      field("run", "model", &RunConfig::model),
      field("run", "sampler", &RunConfig::sampler),
      field("run", "iterations", &RunConfig::iterations),
      field("run", "burn_in", &RunConfig::burn_in),
      field("run", "thin", &RunConfig::thin),
      field("run", "checkpoint_every", &RunConfig::checkpoint_every),
      field("run", "seed", &RunConfig::seed),
      field("run", "chains", &RunConfig::chains),
      field("run", "output_dir", &RunConfig::output_dir),
      field("data", "source", &RunConfig::source),
      field("data", "train_path", &RunConfig::train_path),
      field("data", "test_path", &RunConfig::test_path),
      field("data", "test_fraction", &RunConfig::test_fraction),
      field("data", "max_rows", &RunConfig::max_rows),
      field("data", "add_bias", &RunConfig::add_bias),
      field("data", "n", &RunConfig::n),
      field("data", "dim", &RunConfig::dim),
      field("data", "support", &RunConfig::support),
      field("data", "prior_precision", &RunConfig::prior_precision),
      field("data", "data_seed", &RunConfig::data_seed),
      field("model", "c", &RunConfig::c),
      field("model", "laplace_scale", &RunConfig::laplace_scale),
      field("model", "components", &RunConfig::components),
      field("model", "mu_prior_var", &RunConfig::mu_prior_var),
      field("sampler", "schedule", &RunConfig::schedule),
      field("sampler", "stepsize", &RunConfig::stepsize),
      field("sampler", "gamma", &RunConfig::gamma),
      field("sampler", "delta", &RunConfig::delta),
      field("sampler", "leapfrog_steps", &RunConfig::leapfrog_steps),
      field("sampler", "diffusion", &RunConfig::diffusion),
      field("sampler", "batch_size", &RunConfig::batch_size),
      field("sampler", "mh_correction", &RunConfig::mh_correction),
      field("sampler", "proposal_sd", &RunConfig::proposal_sd),
      field("sampler", "inner", &RunConfig::inner),
      field("sampler", "freeze_gaussian", &RunConfig::freeze_gaussian),
      field("sampler", "gaussian_stepsize", &RunConfig::gaussian_stepsize),
      field("sampler", "votes", &RunConfig::votes),
  };
  return table;
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig sc;
  if (schedule == "polynomial") {
    sc.schedule = StepsizeSchedule::polynomial(stepsize, gamma);
  } else if (schedule == "adaptive") {
    sc.schedule = StepsizeSchedule::adaptive(stepsize, delta);
  } else {
    sc.schedule = StepsizeSchedule::constant(stepsize);
  }
  sc.leapfrog_steps = leapfrog_steps;
  sc.diffusion = diffusion;
  sc.batch_size = batch_size;
  sc.mh_correction = mh_correction;
  sc.proposal_sd = proposal_sd;
  return sc;
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index[f.section + "." + f.key] = &f;
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const auto it = index.find(section + "." + key);
      if (it == index.end()) throw ConfigError("unknown config key [" + section + "] " + key);
      try {
        it->second->set(config, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError("[" + section + "] " + key + ": " + e.what());
      }
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string resolved_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(config) << '\n';
  }
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  const std::string text = resolved_config(config);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

std::vector<std::string> validate_config(const RunConfig& config, std::size_t train_rows) {
  std::vector<std::string> errors;
  auto fail = [&errors](std::string msg) { errors.push_back(std::move(msg)); };

  const bool model_ok = one_of(config.model, {"linear_svm", "mixture_svm", "sparse_logistic"});
  const bool sampler_ok = one_of(config.sampler, {"hmc", "ssgld", "ssgnht", "srwm", "da_gibbs", "ds_hmc", "hmc_gibbs"});
  if (!model_ok) fail("unknown model '" + config.model + "'");
  if (!sampler_ok) fail("unknown sampler '" + config.sampler + "'");
  if (model_ok && sampler_ok) {
    if (config.sampler == "da_gibbs" && config.model != "linear_svm") {
      fail("sampler da_gibbs requires model linear_svm, got " + config.model);
    }
    if ((config.sampler == "ds_hmc" || config.sampler == "hmc_gibbs") && config.model != "mixture_svm") {
      fail("sampler " + config.sampler + " requires model mixture_svm, got " + config.model);
    }
  }
  if (config.iterations < 1) fail("iterations must be >= 1");
  if (config.burn_in >= config.iterations) fail("burn_in must be smaller than iterations");
  if (config.thin < 1) fail("thin must be >= 1");
  if (config.checkpoint_every < 1) fail("checkpoint_every must be >= 1");
  if (config.chains < 1) fail("chains must be >= 1");

  if (!one_of(config.source, {"libsvm", "synthetic_svm2d", "synthetic_sparse"})) {
    fail("unknown data source '" + config.source + "'");
  }
  if (config.source == "libsvm" && config.train_path.empty()) fail("libsvm source needs train_path");
  if (config.source != "libsvm" && config.n < 1) fail("synthetic n must be >= 1");
  if (config.source == "synthetic_sparse" && config.support > config.dim) fail("support exceeds dim");
  if (!(config.test_fraction >= 0.0 && config.test_fraction < 1.0)) fail("test_fraction outside [0,1)");
  if (!(config.prior_precision > 0.0)) fail("prior_precision must be positive");

  if (!(config.c >= 0.0)) fail("c must be >= 0");
  if (!(config.laplace_scale > 0.0)) fail("laplace_scale must be positive");
  if (config.components < 1) fail("components must be >= 1");
  if (!(config.mu_prior_var > 0.0)) fail("mu_prior_var must be positive");

  if (!one_of(config.schedule, {"constant", "polynomial", "adaptive"})) {
    fail("unknown schedule '" + config.schedule + "'");
  }
  for (auto& v : config.sampler_config().violations()) fail(std::move(v));
  if (!one_of(config.inner, {"ssgld", "ssgnht"})) fail("unknown inner sampler '" + config.inner + "'");
  if (!(config.gaussian_stepsize > 0.0)) fail("gaussian_stepsize must be positive");
  if (config.votes < 1) fail("votes must be >= 1");
  if (config.sampler == "hmc" && config.schedule == "adaptive") {
    fail("hmc uses one scalar stepsize per trajectory; adaptive schedules are not supported");
  }
  if (config.mh_correction && config.sampler != "hmc") fail("mh_correction applies to sampler hmc only");

  std::size_t rows = train_rows;
  if (rows == 0 && config.source != "libsvm") {
    rows = config.n - static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(config.n)));
  }
  if (rows > 0) {
    if (config.batch_size > rows) {
      fail("batch size " + std::to_string(config.batch_size) + " exceeds training set size " + std::to_string(rows));
    }
    if (config.mh_correction && config.batch_size != 0 && config.batch_size < rows) {
      fail("mh_correction requires a full batch");
    }
  }
  return errors;
}

}  // namespace ssmcmc
