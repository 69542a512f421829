#include "ssmcmc/sparse_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<std::size_t> top_k(const Eigen::VectorXd& magnitude, std::size_t k) {
  std::vector<std::size_t> order(static_cast<std::size_t>(magnitude.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitude[static_cast<Eigen::Index>(a)] > magnitude[static_cast<Eigen::Index>(b)];
  });
  order.resize(k);
  return order;
}

}  // namespace

double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SparseLogisticModel::SparseLogisticModel(std::size_t dim, double laplace_scale) : dim_(dim), scale_(laplace_scale) {
  if (!(laplace_scale > 0.0)) throw ConfigError("Laplace scale must be positive");
}

double SparseLogisticModel::prior_logdensity(const Eigen::VectorXd& eta) const {
  return -eta.lpNorm<1>() / scale_ - static_cast<double>(dim_) * std::log(2.0 * scale_);
}

void SparseLogisticModel::add_prior_subgrad(const Eigen::VectorXd& eta, double scale,
                                            Eigen::Ref<Eigen::VectorXd> out) const {
  for (Eigen::Index j = 0; j < eta.size(); ++j) out[j] -= scale * sign(eta[j]) / scale_;
}

double SparseLogisticModel::datum_loglik(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i) const {
  return log_sigmoid(data.label(i) * data.dot(i, eta));
}

void SparseLogisticModel::add_datum_subgrad(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i,
                                            double scale, Eigen::Ref<Eigen::VectorXd> out) const {
  const int y = data.label(i);
  data.add_row(i, scale * sigmoid(-y * data.dot(i, eta)) * y, out);
}

Eigen::VectorXd logistic_datum_grad(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y) {
  if (y != 1 && y != -1) throw ContractError("label must be +1 or -1");
  if (eta.size() != x.size()) throw ContractError("weight and feature dimensions differ");
  return sigmoid(-y * eta.dot(x)) * y * x;
}

Eigen::VectorXd laplace_prior_subgrad(const Eigen::VectorXd& eta, double laplace_scale) {
  if (!(laplace_scale > 0.0)) throw ConfigError("Laplace scale must be positive");
  return eta.unaryExpr([&](double v) { return -sign(v) / laplace_scale; });
}

FeatureRanking feature_rank(std::span<const Eigen::VectorXd> samples, std::size_t k) {
  if (samples.empty()) throw ContractError("feature ranking needs a nonempty trace");
  const auto d = samples.front().size();
  if (k > static_cast<std::size_t>(d)) throw ContractError("k exceeds the feature dimension");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples) {
    if (s.size() != d) throw ContractError("trace samples differ in dimension");
    mean += s;
    for (auto j : top_k(s.cwiseAbs(), k)) freq[static_cast<Eigen::Index>(j)] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  mean /= n;
  FeatureRanking out;
  out.selection_frequency = freq / n;
  for (auto j : top_k(mean.cwiseAbs(), k)) {
    out.indices.push_back(j + 1);
    out.mean_weight.push_back(mean[static_cast<Eigen::Index>(j)]);
  }
  return out;
}

void write_feature_ranking_csv(const FeatureRanking& ranking, const std::filesystem::path& path,
                               const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "rank,feature_index,mean_weight,nonzero_frequency\n";
  for (std::size_t r = 0; r < ranking.indices.size(); ++r) {
    const std::size_t j = ranking.indices[r];
    out << r + 1 << ',' << j << ',' << ranking.mean_weight[r] << ','
        << ranking.selection_frequency[static_cast<Eigen::Index>(j - 1)] << '\n';
  }
}

}  // namespace ssmcmc
