#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/potential.hpp"
#include "ssmcmc/rng.hpp"

namespace ssmcmc {

/// Stepsize rule evaluated once per sampler step.
struct StepsizeSchedule {
  enum class Kind { kConstant, kPolynomial, kAdaptive };

  Kind kind = Kind::kConstant;
  double base = 1e-3;    // constant epsilon, polynomial a, or adaptive epsilon_0
  double gamma = 0.0;    // polynomial decay exponent, must lie in [0, 1]
  double delta = 1e-8;   // adaptive regularizer

  static StepsizeSchedule constant(double eps) { return {Kind::kConstant, eps, 0.0, 1e-8}; }
  static StepsizeSchedule polynomial(double a, double gamma) { return {Kind::kPolynomial, a, gamma, 1e-8}; }
  static StepsizeSchedule adaptive(double eps0, double delta = 1e-8) { return {Kind::kAdaptive, eps0, 0.0, delta}; }

  /// Every violated constraint, empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;  // throws ConfigError
};

struct SamplerConfig {
  StepsizeSchedule schedule;
  int leapfrog_steps = 1;        // m: leapfrog steps per HMC draw, Euler steps per SSGNHT draw
  double diffusion = 1.0;        // A (SSGNHT)
  Eigen::VectorXd mass;          // diagonal of M; empty means identity
  std::size_t batch_size = 0;    // 0 means full batch
  bool mh_correction = false;
  double proposal_sd = 0.1;      // random-walk Metropolis proposal standard deviation

  std::vector<std::string> violations() const;
  void validate() const;
};

/// Position, momentum, thermostat and step counter of one chain.
struct ChainState {
  Eigen::VectorXd theta;
  Eigen::VectorXd momentum;
  double thermostat = 0.0;
  std::uint64_t step = 1;         // t, starts at 1
  Eigen::VectorXd adapt_accum;    // running sum of squared subgradients
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;

  // Reused buffers; not part of the Markov state.
  Eigen::VectorXd scratch_grad;
  Eigen::VectorXd scratch_eps;
  Eigen::VectorXd scratch_noise;
  Minibatch scratch_batch;

  /// theta0 as given, p ~ N(0, M), xi = A.
  static ChainState start(Eigen::VectorXd theta0, const SamplerConfig& config, Rng& rng);

  double acceptance_rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

/// Per-dimension stepsizes for the current step. Adaptive schedules first add
/// g*g to the accumulator.
Eigen::VectorXd next_stepsize(const StepsizeSchedule& schedule, ChainState& state,
                              const Eigen::VectorXd& g);

/// One leapfrog step with subgradients from `batch`:
///   p_half = p - eps/2 G(theta);  theta' = theta + eps M^-1 p_half;  p' = p_half - eps/2 G(theta').
/// Does not advance the step counter.
void leapfrog_step(const EnergyModel& model, ChainState& state, double eps, const Dataset& data,
                   const Minibatch& batch, const Eigen::VectorXd& mass = {});

/// Kinetic energy p' M^-1 p / 2.
double kinetic_energy(const Eigen::VectorXd& momentum, const Eigen::VectorXd& mass = {});

/// Subgradient HMC draw: refresh p ~ N(0, M), m leapfrog steps, optional
/// Metropolis-Hastings correction (full batch only). Returns true on accept.
bool hmc_draw(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
              const MinibatchSource& source, Rng& rng);

/// theta' = theta - eps^2/2 G~U(theta) + eps N(0, I), elementwise in eps.
void ssgld_step(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
                const MinibatchSource& source, Rng& rng);

/// One Euler step of the stochastic subgradient Nose-Hoover thermostat:
///   p' = p - eps xi p - eps G~U(theta) + sqrt(2 A eps) N(0, I)
///   theta' = theta + eps p'
///   xi' = xi + eps (p'p'/n - 1)
void ssgnht_step(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
                 const MinibatchSource& source, Rng& rng);

/// `config.leapfrog_steps` SSGNHT steps; one recorded sample.
void ssgnht_draw(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
                 const MinibatchSource& source, Rng& rng);

/// Thermostat update xi + eps (p'p/n - 1).
double thermostat_update(double xi, const Eigen::VectorXd& momentum, double eps);

/// Random-walk Metropolis with a minibatch energy difference (prior exact,
/// likelihood scaled by N / batch size). Returns true on accept.
bool srwm_step(const EnergyModel& model, ChainState& state, const SamplerConfig& config,
               const MinibatchSource& source, Rng& rng);

/// Throws DivergenceError when theta or p is non-finite or |theta_j| > 1e10.
void check_divergence(const ChainState& state);

}  // namespace ssmcmc
