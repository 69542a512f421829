#include "ssmcmc/samplers.hpp"

#include <cmath>
#include <sstream>

#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

constexpr double kDivergenceBound = 1e10;

double inverse_mass(const Eigen::VectorXd& mass, Eigen::Index j) {
  return mass.size() == 0 ? 1.0 : 1.0 / mass[j];
}

void ensure_buffers(ChainState& s) {
  const auto d = s.theta.size();
  if (s.scratch_grad.size() != d) s.scratch_grad.resize(d);
  if (s.scratch_eps.size() != d) s.scratch_eps.resize(d);
  if (s.scratch_noise.size() != d) s.scratch_noise.resize(d);
  if (s.momentum.size() != d) s.momentum = Eigen::VectorXd::Zero(d);
  if (s.adapt_accum.size() != d) s.adapt_accum = Eigen::VectorXd::Zero(d);
}

void stepsize_into(const StepsizeSchedule& schedule, ChainState& state, const Eigen::VectorXd& g,
                   Eigen::VectorXd& eps) {
  switch (schedule.kind) {
    case StepsizeSchedule::Kind::kConstant:
      eps.setConstant(schedule.base);
      return;
    case StepsizeSchedule::Kind::kPolynomial:
      if (schedule.gamma < 0.0 || schedule.gamma > 1.0) throw ConfigError("gamma outside [0,1]");
      eps.setConstant(schedule.base * std::pow(static_cast<double>(state.step), -schedule.gamma));
      return;
    case StepsizeSchedule::Kind::kAdaptive:
      if (state.adapt_accum.size() != g.size()) state.adapt_accum = Eigen::VectorXd::Zero(g.size());
      state.adapt_accum.array() += g.array().square();
      eps.array() = schedule.base / (state.adapt_accum.array().sqrt() + schedule.delta);
      return;
  }
}

// Scalar stepsize for integrators that do not support per-dimension steps.
double scalar_stepsize(const StepsizeSchedule& schedule, const ChainState& state) {
  switch (schedule.kind) {
    case StepsizeSchedule::Kind::kConstant:
      return schedule.base;
    case StepsizeSchedule::Kind::kPolynomial:
      return schedule.base * std::pow(static_cast<double>(state.step), -schedule.gamma);
    case StepsizeSchedule::Kind::kAdaptive:
      break;
  }
  throw ConfigError("adaptive stepsizes are not supported by HMC");
}

}  // namespace

std::vector<std::string> StepsizeSchedule::violations() const {
  std::vector<std::string> out;
  if (!(base > 0.0) || !std::isfinite(base)) out.emplace_back("stepsize must be positive");
  if (kind == Kind::kPolynomial && !(gamma >= 0.0 && gamma <= 1.0)) out.emplace_back("gamma outside [0,1]");
  if (kind == Kind::kAdaptive && !(delta > 0.0)) out.emplace_back("adaptive delta must be positive");
  return out;
}

void StepsizeSchedule::validate() const {
  const auto v = violations();
  if (!v.empty()) throw ConfigError(v.front());
}

std::vector<std::string> SamplerConfig::violations() const {
  auto out = schedule.violations();
  if (leapfrog_steps < 1) out.emplace_back("leapfrog steps m must be >= 1");
  if (!(diffusion > 0.0)) out.emplace_back("diffusion A must be positive");
  if (mass.size() > 0 && (mass.array() <= 0.0).any()) out.emplace_back("mass matrix must be positive definite");
  if (!(proposal_sd > 0.0)) out.emplace_back("proposal standard deviation must be positive");
  return out;
}

void SamplerConfig::validate() const {
  const auto v = violations();
  if (!v.empty()) throw ConfigError(v.front());
}

ChainState ChainState::start(Eigen::VectorXd theta0, const SamplerConfig& config, Rng& rng) {
  ChainState s;
  const auto d = theta0.size();
  if (config.mass.size() != 0 && config.mass.size() != d) {
    throw ContractError("mass dimension does not match parameter dimension");
  }
  s.theta = std::move(theta0);
  s.momentum.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double m = config.mass.size() == 0 ? 1.0 : config.mass[j];
    s.momentum[j] = std::sqrt(m) * rng.normal();
  }
  s.thermostat = config.diffusion;
  s.adapt_accum = Eigen::VectorXd::Zero(d);
  return s;
}

Eigen::VectorXd next_stepsize(const StepsizeSchedule& schedule, ChainState& state,
                              const Eigen::VectorXd& g) {
  if (state.step < 1) throw ContractError("step counter must be >= 1");
  Eigen::VectorXd eps(g.size());
  stepsize_into(schedule, state, g, eps);
  return eps;
}

void check_divergence(const ChainState& state) {
  for (Eigen::Index j = 0; j < state.theta.size(); ++j) {
    const double v = state.theta[j];
    if (!std::isfinite(v) || std::abs(v) > kDivergenceBound) {
      std::ostringstream msg;
      msg << "theta[" << j << "] = " << v;
      throw DivergenceError(state.step, msg.str());
    }
  }
  if (!state.momentum.allFinite()) throw DivergenceError(state.step, "non-finite momentum");
  if (!std::isfinite(state.thermostat)) throw DivergenceError(state.step, "non-finite thermostat");
}

double kinetic_energy(const Eigen::VectorXd& momentum, const Eigen::VectorXd& mass) {
  if (mass.size() == 0) return 0.5 * momentum.squaredNorm();
  return 0.5 * (momentum.array().square() / mass.array()).sum();
}

void leapfrog_step(const EnergyModel& model, ChainState& state, double eps, const Dataset& data,
                   const Minibatch& batch, const Eigen::VectorXd& mass) {
  if (!(eps > 0.0)) throw ContractError("leapfrog stepsize must be positive");
  ensure_buffers(state);
  Eigen::VectorXd& g = state.scratch_grad;
  stochastic_subgradient_into(model, state.theta, batch, data, g);
  state.momentum -= (eps / 2) * g;
  for (Eigen::Index j = 0; j < state.theta.size(); ++j) {
    state.theta[j] += eps * inverse_mass(mass, j) * state.momentum[j];
  }
  model.project(state.theta);
  check_divergence(state);
  stochastic_subgradient_into(model, state.theta, batch, data, g);
  state.momentum -= (eps / 2) * g;
  check_divergence(state);
}

bool hmc_draw(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
              const MinibatchSource& source, Rng& rng) {
  if (config.mh_correction && !source.full_batch()) {
    throw ConfigError("Metropolis-Hastings correction requires full-batch energies");
  }
  if (config.leapfrog_steps < 1) throw ConfigError("leapfrog steps m must be >= 1");
  const double eps = scalar_stepsize(config.schedule, state);
  const Dataset& data = source.data();
  ensure_buffers(state);

  for (Eigen::Index j = 0; j < state.momentum.size(); ++j) {
    const double m = config.mass.size() == 0 ? 1.0 : config.mass[j];
    state.momentum[j] = std::sqrt(m) * rng.normal();
  }
  const Eigen::VectorXd theta_old = state.theta;
  double h_old = 0.0;
  if (config.mh_correction) h_old = full_energy(model, state.theta, data) + kinetic_energy(state.momentum, config.mass);

  Minibatch& batch = state.scratch_batch;
  for (int l = 0; l < config.leapfrog_steps; ++l) {
    source.draw(rng, batch);
    leapfrog_step(model, state, eps, data, batch, config.mass);
  }

  bool accept = true;
  if (config.mh_correction) {
    const double h_new = full_energy(model, state.theta, data) + kinetic_energy(state.momentum, config.mass);
    const double u = rng.uniform();
    accept = std::log(u) < h_old - h_new;
    if (!accept) state.theta = theta_old;
  }
  ++state.proposed;
  if (accept) {
    ++state.accepted;
    model.project(state.theta);
    check_divergence(state);
  }
  ++state.step;
  return accept;
}

void ssgld_step(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
                const MinibatchSource& source, Rng& rng) {
  ensure_buffers(state);
  Minibatch& batch = state.scratch_batch;
  source.draw(rng, batch);
  Eigen::VectorXd& g = state.scratch_grad;
  stochastic_subgradient_into(model, state.theta, batch, source.data(), g);
  Eigen::VectorXd& eps = state.scratch_eps;
  stepsize_into(config.schedule, state, g, eps);
  Eigen::VectorXd& noise = state.scratch_noise;
  rng.fill_normal(noise);
  state.theta.array() += -0.5 * eps.array().square() * g.array() + eps.array() * noise.array();
  model.project(state.theta);
  check_divergence(state);
  ++state.step;
}

double thermostat_update(double xi, const Eigen::VectorXd& momentum, double eps) {
  const double n = static_cast<double>(momentum.size());
  return xi + eps * (momentum.squaredNorm() / n - 1.0);
}

void ssgnht_step(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
                 const MinibatchSource& source, Rng& rng) {
  ensure_buffers(state);
  Minibatch& batch = state.scratch_batch;
  source.draw(rng, batch);
  Eigen::VectorXd& g = state.scratch_grad;
  stochastic_subgradient_into(model, state.theta, batch, source.data(), g);
  Eigen::VectorXd& eps = state.scratch_eps;
  stepsize_into(config.schedule, state, g, eps);
  Eigen::VectorXd& noise = state.scratch_noise;
  rng.fill_normal(noise);
  const double xi = state.thermostat;
  state.momentum.array() += -eps.array() * xi * state.momentum.array() - eps.array() * g.array() +
                            (2.0 * config.diffusion * eps.array()).sqrt() * noise.array();
  state.theta.array() += eps.array() * state.momentum.array();
  model.project(state.theta);
  // Per-dimension stepsizes enter the thermostat through their mean.
  state.thermostat = thermostat_update(xi, state.momentum, eps.mean());
  check_divergence(state);
  ++state.step;
}

void ssgnht_draw(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
                 const MinibatchSource& source, Rng& rng) {
  for (int l = 0; l < config.leapfrog_steps; ++l) ssgnht_step(model, state, config, source, rng);
}

bool srwm_step(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
               const MinibatchSource& source, Rng& rng) {
  if (!(config.proposal_sd > 0.0)) throw ConfigError("proposal standard deviation must be positive");
  ensure_buffers(state);
  Minibatch& batch = state.scratch_batch;
  source.draw(rng, batch);
  const Dataset& data = source.data();
  Eigen::VectorXd& proposal = state.scratch_grad;
  rng.fill_normal(proposal);
  proposal = state.theta + config.proposal_sd * proposal;
  double delta = model.prior_logdensity(proposal) - model.prior_logdensity(state.theta);
  double lik = 0.0;
  for (auto i : batch.indices) lik += model.datum_loglik(proposal, data, i) - model.datum_loglik(state.theta, data, i);
  delta += batch.scale * lik;
  const double u = rng.uniform();
  const bool accept = std::log(u) < delta;
  if (accept) {
    state.theta = proposal;
    model.project(state.theta);
  }
  ++state.proposed;
  if (accept) ++state.accepted;
  check_divergence(state);
  ++state.step;
  return accept;
}

}  // namespace ssmcmc
