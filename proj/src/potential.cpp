#include "ssmcmc/potential.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

void check_theta(const EnergyModel& model, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.dim()) {
    throw ContractError("parameter dimension " + std::to_string(theta.size()) +
                        " does not match model dimension " + std::to_string(model.dim()));
  }
}

void check_batch(const Minibatch& batch, const Dataset& data) {
  if (batch.indices.empty() && batch.scale != 0.0 && !data.empty()) {
    throw ContractError("empty minibatch");
  }
  for (auto i : batch.indices) {
    if (i >= data.size()) throw ContractError("minibatch index " + std::to_string(i) + " out of range");
  }
}

}  // namespace

void EnergyModel::add_batch_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                                    std::span<const std::size_t> rows, double scale,
                                    Eigen::Ref<Eigen::VectorXd> out) const {
  for (auto i : rows) add_datum_subgrad(theta, data, i, scale, out);
}

Eigen::VectorXd EnergyModel::prior_subgrad(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  add_prior_subgrad(theta, 1.0, g);
  return g;
}

Eigen::VectorXd EnergyModel::datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                                           std::size_t i) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  add_datum_subgrad(theta, data, i, 1.0, g);
  return g;
}

void stochastic_subgradient_into(const EnergyModel& model, const Eigen::VectorXd& theta,
                                 const Minibatch& batch, const Dataset& data,
                                 Eigen::Ref<Eigen::VectorXd> out) {
  check_theta(model, theta);
  check_batch(batch, data);
  out.setZero();
  model.add_prior_subgrad(theta, -1.0, out);
  if (!batch.indices.empty()) model.add_batch_subgrad(theta, data, batch.indices, -batch.scale, out);
}

Eigen::VectorXd stochastic_subgradient(const EnergyModel& model, const Eigen::VectorXd& theta,
                                       const Minibatch& batch, const Dataset& data) {
  Eigen::VectorXd g(theta.size());
  stochastic_subgradient_into(model, theta, batch, data, g);
  return g;
}

Eigen::VectorXd full_subgradient(const EnergyModel& model, const Eigen::VectorXd& theta,
                                 const Dataset& data) {
  return stochastic_subgradient(model, theta, Minibatch::full(data.size()), data);
}

double full_energy(const EnergyModel& model, const Eigen::VectorXd& theta, const Dataset& data) {
  return minibatch_energy(model, theta, Minibatch::full(data.size()), data);
}

double minibatch_energy(const EnergyModel& model, const Eigen::VectorXd& theta,
                        const Minibatch& batch, const Dataset& data) {
  check_theta(model, theta);
  check_batch(batch, data);
  if (!theta.allFinite()) throw ContractError("non-finite parameter vector");
  double loglik = 0.0;
  for (auto i : batch.indices) loglik += model.datum_loglik(theta, data, i);
  return -model.prior_logdensity(theta) - batch.scale * loglik;
}

GaussianTarget::GaussianTarget(Eigen::VectorXd mean, Eigen::VectorXd variance)
    : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.size() != variance_.size()) throw ContractError("mean and variance differ in length");
  if ((variance_.array() <= 0.0).any()) throw ContractError("variances must be positive");
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) -
              0.5 * variance_.array().log().sum();
}

GaussianTarget GaussianTarget::standard(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

double GaussianTarget::prior_logdensity(const Eigen::VectorXd& theta) const {
  return log_norm_ - 0.5 * ((theta - mean_).array().square() / variance_.array()).sum();
}

void GaussianTarget::add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                                       Eigen::Ref<Eigen::VectorXd> out) const {
  out.array() -= scale * (theta - mean_).array() / variance_.array();
}

}  // namespace ssmcmc
