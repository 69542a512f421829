#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/potential.hpp"
#include "ssmcmc/rng.hpp"
#include "ssmcmc/samplers.hpp"

namespace ssmcmc {

/// Parametric mixture of K linear SVMs with Gaussian input components.
/// Component k has classifier weights eta_k, mean mu_k and an upper
/// triangular factor L_k with Sigma_k = L_k' L_k. Mixing weights are fixed.
struct MixtureParams {
  std::vector<Eigen::VectorXd> eta;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> factor;
  Eigen::VectorXd weights;

  std::size_t components() const { return eta.size(); }
  std::size_t dim() const { return eta.empty() ? 0 : static_cast<std::size_t>(eta.front().size()); }
  Eigen::MatrixXd covariance(std::size_t k) const { return factor[k].transpose() * factor[k]; }

  /// Throws ContractError on inconsistent shapes, a non-triangular or
  /// singular factor, or weights off the simplex.
  void validate() const;

  /// eta_k = 0, L_k = I, uniform weights, mu_k seeded by farthest-point
  /// selection among max(10, K) random data points.
  static MixtureParams init(const Dataset& data, std::size_t components, Rng& rng);
};

/// Priors: eta_k ~ N(0, I); mu_k ~ N(0, mu_variance I); flat on L_k.
struct MixturePrior {
  double mu_variance = 100.0;
};

/// Floor applied to |diag(L_k)| after every move.
inline constexpr double kFactorDiagonalFloor = 1e-6;

/// Which parameter blocks are sampled.
enum class MixtureBlocks { kAll, kEtaOnly };

/// log N(x | mu_k, L_k' L_k)
double component_log_density(const MixtureParams& params, std::size_t k, const Eigen::VectorXd& x);

/// p(z = k | x, y) proportional to pi_k N(x | mu_k, Sigma_k) exp(-c max(0, 1 - y eta_k'x)),
/// normalized in log space. `datum` only labels errors.
Eigen::VectorXd responsibilities(const Eigen::VectorXd& x, int y, const MixtureParams& params, double c,
                                 std::size_t datum = 0);

/// Label-free responsibilities pi_k N(x | mu_k, Sigma_k), used at prediction time.
Eigen::VectorXd responsibilities_unlabelled(const Eigen::VectorXd& x, const MixtureParams& params);

// The ds_grad_* functions return the minibatch estimate of the gradient of
// log q (prior included) with responsibilities evaluated at `params`.

/// -eta_k + scale * sum r_ik G log phi(y_i | eta_k, x_i)
Eigen::VectorXd ds_grad_eta(const MixtureParams& params, std::size_t k, const Minibatch& batch,
                            const Dataset& data, double c);

/// -mu_k / v0 + scale * sum r_ik Sigma_k^-1 (x_i - mu_k)
Eigen::VectorXd ds_grad_mu(const MixtureParams& params, std::size_t k, const Minibatch& batch,
                           const Dataset& data, double c, const MixturePrior& prior = {});

/// d/d L_k log q over the upper-triangular entries of L_k (lower part zero):
///   scale * sum r_ik [ -L_k^-T + L_k^-T v v' Sigma_k^-1 ]_upper,   v = x_i - mu_k.
Eigen::MatrixXd ds_grad_L(const MixtureParams& params, std::size_t k, const Minibatch& batch,
                          const Dataset& data, double c);

/// Marginal log q(eta, mu, L) = log prior + sum_i log sum_k pi_k N(x_i|mu_k,Sigma_k) phi(y_i|eta_k,x_i),
/// up to the flat-prior constant of L.
double mixture_log_q(const MixtureParams& params, const Dataset& data, double c, const MixturePrior& prior);

/// The mixture posterior as an energy model over a packed parameter vector
/// [eta_1..eta_K | mu_1..mu_K | upper(L_1)..upper(L_K)]. With kEtaOnly the
/// Gaussian blocks are frozen at the reference values and only the etas are packed.
class MixtureEnergy final : public EnergyModel {
 public:
  MixtureEnergy(MixtureParams reference, double c, MixturePrior prior = {},
                MixtureBlocks blocks = MixtureBlocks::kAll);

  std::size_t dim() const override { return packed_size_; }
  std::size_t components() const { return reference_.components(); }
  double c() const { return c_; }
  MixtureBlocks blocks() const { return blocks_; }

  Eigen::VectorXd pack(const MixtureParams& params) const;
  MixtureParams unpack(const Eigen::VectorXd& theta) const;

  double prior_logdensity(const Eigen::VectorXd& theta) const override;
  void add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  double datum_loglik(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i) const override;
  void add_datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  void add_batch_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                         std::span<const std::size_t> rows, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  void project(Eigen::VectorXd& theta) const override;

 private:
  std::size_t eta_offset(std::size_t k) const { return k * dim_; }
  std::size_t mu_offset(std::size_t k) const { return (components() + k) * dim_; }
  std::size_t factor_offset(std::size_t k) const { return 2 * components() * dim_ + k * tri_; }

  MixtureParams reference_;
  double c_;
  MixturePrior prior_;
  MixtureBlocks blocks_;
  std::size_t dim_;
  std::size_t tri_;
  std::size_t packed_size_;
};

enum class InnerSampler { kSsgld, kSsgnht };

/// One round of the doubly stochastic sampler: a single minibatch,
/// responsibilities on that minibatch only, and one joint SSGLD step (or one
/// m-step SSGNHT draw) on the packed parameters.
void doubly_stochastic_hmc_round(const MixtureEnergy& energy, ChainState& state, const SamplerConfig& config,
                                 const MinibatchSource& source, Rng& rng, InnerSampler sampler);

/// z_i ~ Categorical(responsibilities(x_i, y_i)); 0-based component indices.
std::vector<std::size_t> gibbs_assignments(const MixtureParams& params, const Dataset& data, double c, Rng& rng);

/// Gibbs classifier: each vote draws a posterior sample, z from the label-free
/// responsibilities, and outputs sign(eta_z'x). Majority wins, ties go to +1.
int gibbs_classifier_predict(std::span<const MixtureParams> samples, const Eigen::VectorXd& x, Rng& rng,
                             int votes);

/// Stochastic subgradient HMC within Gibbs: resample all assignments, then
/// move each eta_k on its assigned data and each (mu_k, L_k) by a stochastic
/// gradient step on the assigned-data Gaussian log-density.
class HmcWithinGibbs {
 public:
  struct PhaseTimes {
    double assignment_ms = 0.0;
    double eta_ms = 0.0;
    double gaussian_ms = 0.0;
  };

  HmcWithinGibbs(const Dataset& data, MixtureParams init, double c, MixturePrior prior,
                 SamplerConfig eta_config, SamplerConfig gaussian_config, InnerSampler sampler, Rng& rng);

  void round(Rng& rng);

  const MixtureParams& params() const { return params_; }
  const std::vector<std::size_t>& assignments() const { return assignments_; }
  const PhaseTimes& times() const { return times_; }

 private:
  const Dataset* data_;
  MixtureParams params_;
  double c_;
  MixturePrior prior_;
  SamplerConfig eta_config_;
  SamplerConfig gaussian_config_;
  InnerSampler sampler_;
  std::vector<ChainState> eta_states_;
  std::vector<ChainState> gaussian_states_;
  std::vector<std::size_t> assignments_;
  PhaseTimes times_;
};

/// Log-density of one Gaussian component as an energy model over
/// [mu | upper(L)], used for the (mu_k, L_k) moves inside HMC-within-Gibbs.
class GaussianComponentModel final : public EnergyModel {
 public:
  GaussianComponentModel(std::size_t dim, MixturePrior prior);

  std::size_t dim() const override { return dim_ + dim_ * (dim_ + 1) / 2; }
  Eigen::VectorXd pack(const Eigen::VectorXd& mu, const Eigen::MatrixXd& factor) const;
  void unpack(const Eigen::VectorXd& theta, Eigen::VectorXd& mu, Eigen::MatrixXd& factor) const;

  double prior_logdensity(const Eigen::VectorXd& theta) const override;
  void add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  double datum_loglik(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i) const override;
  void add_datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  void add_batch_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                         std::span<const std::size_t> rows, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  void project(Eigen::VectorXd& theta) const override;

 private:
  std::size_t dim_;
  MixturePrior prior_;
};

}  // namespace ssmcmc
