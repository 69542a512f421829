#include "ssmcmc/svm_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

void check_label(int y) {
  if (y != 1 && y != -1) throw ContractError("label must be +1 or -1, got " + std::to_string(y));
}

}  // namespace

LinearSvmModel::LinearSvmModel(std::size_t dim, double c) : dim_(dim), c_(c) {
  if (!(c >= 0.0)) throw ConfigError("regularization constant c must be >= 0");
}

double LinearSvmModel::prior_logdensity(const Eigen::VectorXd& eta) const {
  return -0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi) - 0.5 * eta.squaredNorm();
}

void LinearSvmModel::add_prior_subgrad(const Eigen::VectorXd& eta, double scale,
                                       Eigen::Ref<Eigen::VectorXd> out) const {
  out -= scale * eta;
}

double LinearSvmModel::datum_loglik(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i) const {
  const double margin = 1.0 - data.label(i) * data.dot(i, eta);
  return -c_ * std::max(0.0, margin);
}

void LinearSvmModel::add_datum_subgrad(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i,
                                       double scale, Eigen::Ref<Eigen::VectorXd> out) const {
  const int y = data.label(i);
  if (1.0 - y * data.dot(i, eta) >= 0.0) data.add_row(i, scale * c_ * y, out);
}

void LinearSvmModel::add_batch_subgrad(const Eigen::VectorXd& eta, const Dataset& data,
                                       std::span<const std::size_t> rows, double scale,
                                       Eigen::Ref<Eigen::VectorXd> out) const {
  for (auto i : rows) {
    const int y = data.label(i);
    if (1.0 - y * data.dot(i, eta) >= 0.0) data.add_row(i, scale * c_ * y, out);
  }
}

Eigen::VectorXd svm_datum_subgrad(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y, double c) {
  check_label(y);
  if (eta.size() != x.size()) throw ContractError("weight and feature dimensions differ");
  if (1.0 - y * eta.dot(x) >= 0.0) return c * y * x;
  return Eigen::VectorXd::Zero(x.size());
}

Eigen::VectorXd hinge_loss_subgrad(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y, double c) {
  return -svm_datum_subgrad(eta, x, y, c);
}

int predict(const Eigen::VectorXd& eta, const Eigen::VectorXd& x) {
  if (eta.size() != x.size()) throw ContractError("weight and feature dimensions differ");
  return eta.dot(x) >= 0.0 ? 1 : -1;
}

int predict(const Eigen::VectorXd& eta, const Dataset& data, std::size_t i) {
  return data.dot(i, eta) >= 0.0 ? 1 : -1;
}

double accuracy(const Eigen::VectorXd& eta, const Dataset& test) {
  if (test.empty()) throw ContractError("empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) correct += predict(eta, test, i) == test.label(i);
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

AugmentedState AugmentedState::start(std::size_t dim, std::size_t n) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))};
}

// Michael, Schucany & Haas transformation method.
double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
  const double nu = rng.normal();
  const double y = nu * nu;
  const double x = mean + mean * mean * y / (2.0 * shape) -
                   mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
  const double u = rng.uniform();
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

// The hinge pseudo-likelihood is a scale mixture of normals:
//   exp(-2 max(a, 0)) = int (2 pi l)^-1/2 exp(-(a + l)^2 / (2 l)) dl,
// here with a_i = (c/2)(1 - y_i eta'x_i). Conditionals:
//   1/l_i | eta ~ IG(1/|a_i|, 1)   (l_i ~ chi^2_1 when a_i = 0)
//   eta | l ~ N(S b, S),  S^-1 = I + (c^2/4) sum x x'/l_i,
//                         b = sum (c/2)(1 + c/(2 l_i)) y_i x_i.
void da_gibbs_step(AugmentedState& state, const Dataset& data, double c, Rng& rng) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  if (d > kMaxAugmentedDim) {
    throw ConfigError("data-augmentation Gibbs refuses dimension " + std::to_string(d) + " > " +
                      std::to_string(kMaxAugmentedDim));
  }
  if (static_cast<std::size_t>(state.eta.size()) != d || static_cast<std::size_t>(state.lambda.size()) != n) {
    throw ContractError("augmented state does not match dataset shape");
  }
  const auto dd = static_cast<Eigen::Index>(d);

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double a = 0.5 * c * std::abs(1.0 - data.label(i) * data.dot(i, state.eta));
    double lambda;
    if (a < 1e-300) {
      const double z = rng.normal();
      lambda = z * z;
    } else {
      lambda = 1.0 / sample_inverse_gaussian(1.0 / a, 1.0, rng);
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw NumericalError(i, "latent scale draw is not a positive finite number");
    }
    state.lambda[ii] = lambda;
  }

  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(dd, dd);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dd);
  Eigen::VectorXd x(dd);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = state.lambda[static_cast<Eigen::Index>(i)];
    const auto entries = data.row_entries(i);
    const double w = 0.25 * c * c / lambda;
    for (const auto& [p, vp] : entries) {
      for (const auto& [q, vq] : entries) {
        precision(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) += w * vp * vq;
      }
    }
    data.add_row(i, 0.5 * c * (1.0 + 0.5 * c / lambda) * data.label(i), b);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().diagonal().allFinite()) {
    // Find the datum with the smallest latent scale; it dominates the precision.
    Eigen::Index worst = 0;
    state.lambda.minCoeff(&worst);
    throw NumericalError(static_cast<std::size_t>(worst), "degenerate conditional covariance for eta");
  }
  const Eigen::VectorXd mean = llt.solve(b);
  Eigen::VectorXd z(dd);
  rng.fill_normal(z);
  // precision = L L'; eta = mean + L'^-1 z has covariance precision^-1.
  state.eta = mean + llt.matrixU().solve(z);
}

// Dual coordinate descent for the L1-loss SVM with box constraint C = c.
Eigen::VectorXd fit_linear_svm_reference(const Dataset& data, double c, int max_epochs, double tolerance,
                                         std::uint64_t seed) {
  const std::size_t n = data.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.dim()));
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qii(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& [col, v] : data.row_entries(i)) s += v * v;
    qii[i] = s;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double max_pg = -std::numeric_limits<double>::infinity();
    double min_pg = std::numeric_limits<double>::infinity();
    for (auto i : order) {
      if (qii[i] == 0.0) continue;
      const int y = data.label(i);
      const double grad = y * data.dot(i, w) - 1.0;
      double pg = grad;
      if (alpha[i] == 0.0) pg = std::min(grad, 0.0);
      else if (alpha[i] == c) pg = std::max(grad, 0.0);
      max_pg = std::max(max_pg, pg);
      min_pg = std::min(min_pg, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::clamp(old - grad / qii[i], 0.0, c);
        data.add_row(i, (alpha[i] - old) * y, w);
      }
    }
    if (max_pg - min_pg < tolerance) break;
  }
  return w;
}

}  // namespace ssmcmc
