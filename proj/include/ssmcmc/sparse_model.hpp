#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/potential.hpp"

namespace ssmcmc {

/// Bayesian logistic regression with a Laplace prior of scale lambda:
///   log P0(eta) = -|eta|_1 / lambda - d log(2 lambda),
///   log P(y | x, eta) = log sigmoid(y eta'x).
class SparseLogisticModel final : public EnergyModel {
 public:
  SparseLogisticModel(std::size_t dim, double laplace_scale = 1.0);

  std::size_t dim() const override { return dim_; }
  double laplace_scale() const { return scale_; }

  double prior_logdensity(const Eigen::VectorXd& eta) const override;
  void add_prior_subgrad(const Eigen::VectorXd& eta, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  double datum_loglik(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i) const override;
  void add_datum_subgrad(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i, double scale,
                         Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  std::size_t dim_;
  double scale_;
};

/// log sigmoid(z), stable for large |z|.
double log_sigmoid(double z);
double sigmoid(double z);

/// sigmoid(-y eta'x) y x, the derivative of log sigmoid(y eta'x).
Eigen::VectorXd logistic_datum_grad(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y);

/// -sign(eta) / lambda elementwise with sign(0) = 0.
Eigen::VectorXd laplace_prior_subgrad(const Eigen::VectorXd& eta, double laplace_scale);

struct FeatureRanking {
  std::vector<std::size_t> indices;         // 1-based, by descending |mean weight|
  std::vector<double> mean_weight;          // aligned with `indices`
  Eigen::VectorXd selection_frequency;      // per feature (0-based position): share of samples ranking it in their own top k
};

/// Top-k features by |posterior mean weight|. Ties keep the lower index first.
FeatureRanking feature_rank(std::span<const Eigen::VectorXd> samples, std::size_t k);

/// Columns: rank, feature_index, mean_weight, nonzero_frequency. A non-empty
/// `config_hash` is written as a leading comment line.
void write_feature_ranking_csv(const FeatureRanking& ranking, const std::filesystem::path& path,
                               const std::string& config_hash = {});

}  // namespace ssmcmc
