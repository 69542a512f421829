#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "ssmcmc/dataset.hpp"

namespace ssmcmc {

/// Energy-model contract. A model supplies the log-prior and per-datum
/// log-likelihood together with (sub)gradients of both; the potential is
///   U(theta) = -log P0(theta) - sum_i log P(x_i | theta).
/// All members are pure: they never mutate theta or the dataset.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::size_t dim() const = 0;

  virtual double prior_logdensity(const Eigen::VectorXd& theta) const = 0;
  /// out += scale * G log P0(theta)
  virtual void add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                                 Eigen::Ref<Eigen::VectorXd> out) const = 0;

  virtual double datum_loglik(const Eigen::VectorXd& theta, const Dataset& data,
                              std::size_t i) const = 0;
  /// out += scale * G log P(x_i | theta)
  virtual void add_datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i,
                                 double scale, Eigen::Ref<Eigen::VectorXd> out) const = 0;

  /// out += scale * sum_{i in rows} G log P(x_i | theta). Models override this
  /// when per-batch setup (unpacking, factorizations) can be shared.
  virtual void add_batch_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                                 std::span<const std::size_t> rows, double scale,
                                 Eigen::Ref<Eigen::VectorXd> out) const;

  /// Maps theta back into the model's parameter domain after a sampler move.
  virtual void project(Eigen::VectorXd& /*theta*/) const {}

  Eigen::VectorXd prior_subgrad(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                                std::size_t i) const;
};

/// -G log P0(theta) - scale * sum_{i in batch} G log P(x_i | theta), written into `out`.
void stochastic_subgradient_into(const EnergyModel& model, const Eigen::VectorXd& theta,
                                 const Minibatch& batch, const Dataset& data,
                                 Eigen::Ref<Eigen::VectorXd> out);

Eigen::VectorXd stochastic_subgradient(const EnergyModel& model, const Eigen::VectorXd& theta,
                                       const Minibatch& batch, const Dataset& data);

/// Exact subgradient of U over the whole dataset.
Eigen::VectorXd full_subgradient(const EnergyModel& model, const Eigen::VectorXd& theta,
                                 const Dataset& data);

double full_energy(const EnergyModel& model, const Eigen::VectorXd& theta, const Dataset& data);

/// Minibatch estimate of U restricted to `batch` (prior exact, likelihood scaled).
double minibatch_energy(const EnergyModel& model, const Eigen::VectorXd& theta,
                        const Minibatch& batch, const Dataset& data);

/// Gaussian target with diagonal covariance and no likelihood terms; the
/// reference model for sampler verification.
class GaussianTarget final : public EnergyModel {
 public:
  GaussianTarget(Eigen::VectorXd mean, Eigen::VectorXd variance);
  static GaussianTarget standard(std::size_t dim);

  std::size_t dim() const override { return static_cast<std::size_t>(mean_.size()); }
  double prior_logdensity(const Eigen::VectorXd& theta) const override;
  void add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  double datum_loglik(const Eigen::VectorXd&, const Dataset&, std::size_t) const override { return 0.0; }
  void add_datum_subgrad(const Eigen::VectorXd&, const Dataset&, std::size_t, double,
                         Eigen::Ref<Eigen::VectorXd>) const override {}

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& variance() const { return variance_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd variance_;
  double log_norm_;
};

}  // namespace ssmcmc
