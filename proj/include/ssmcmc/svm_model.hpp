#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/potential.hpp"
#include "ssmcmc/rng.hpp"

namespace ssmcmc {

/// Bayesian linear SVM: prior N(0, I), per-datum pseudo-likelihood
/// exp(-c max(0, 1 - y eta'x)). No bias term; append a constant feature at
/// the data layer if one is needed.
class LinearSvmModel final : public EnergyModel {
 public:
  LinearSvmModel(std::size_t dim, double c = 1.0);

  std::size_t dim() const override { return dim_; }
  double c() const { return c_; }

  double prior_logdensity(const Eigen::VectorXd& eta) const override;
  void add_prior_subgrad(const Eigen::VectorXd& eta, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  double datum_loglik(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i) const override;
  void add_datum_subgrad(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  void add_batch_subgrad(const Eigen::VectorXd& eta, const Dataset& data,
                         std::span<const std::size_t> rows, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  std::size_t dim_;
  double c_;
};

/// Subgradient of the per-datum log-likelihood -c max(0, 1 - y eta'x):
/// c y x on the active side (1 - y eta'x >= 0, the kink counts as active), else 0.
Eigen::VectorXd svm_datum_subgrad(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y, double c);

/// Subgradient of the hinge penalty c max(0, 1 - y eta'x), i.e. the negated
/// log-likelihood subgradient: -c y x on the active side.
Eigen::VectorXd hinge_loss_subgrad(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y, double c);

/// sign(eta'x) with ties going to +1.
int predict(const Eigen::VectorXd& eta, const Eigen::VectorXd& x);
int predict(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i);

double accuracy(const Eigen::VectorXd& eta, const Dataset& test);

/// State of the data-augmentation Gibbs sampler: weights plus one positive
/// latent scale per datum.
struct AugmentedState {
  Eigen::VectorXd eta;
  Eigen::VectorXd lambda;

  static AugmentedState start(std::size_t dim, std::size_t n);
};

/// Largest dimension the dense Gaussian conditional will factorize.
inline constexpr std::size_t kMaxAugmentedDim = 2000;

/// One sweep of the data-augmentation Gibbs sampler: every lambda_i from its
/// generalized-inverse-Gaussian conditional, then eta from its Gaussian
/// conditional.
void da_gibbs_step(AugmentedState& state, const Dataset& data, double c, Rng& rng);

/// Draw from the inverse-Gaussian distribution IG(mean, shape).
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

/// Batch linear SVM solution minimizing ||eta||^2/2 + c sum hinge (the
/// posterior mode), by dual coordinate descent.
Eigen::VectorXd fit_linear_svm_reference(const Dataset& data, double c, int max_epochs = 200,
                                         double tolerance = 1e-6, std::uint64_t seed = 0);

}  // namespace ssmcmc
