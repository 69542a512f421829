#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ssmcmc/errors.hpp"
#include "ssmcmc/potential.hpp"
#include "ssmcmc/samplers.hpp"
#include "ssmcmc/svm_model.hpp"
#include "test_support.hpp"

using namespace ssmcmc;
using namespace ssmcmc::oracles;

namespace {

double hinge_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, int y, double c) {
  return -c * std::max(0.0, 1.0 - y * eta.dot(x));
}

double primal_objective(const Eigen::VectorXd& w, const Dataset& data, double c) {
  double s = 0.5 * w.squaredNorm();
  for (std::size_t i = 0; i < data.size(); ++i) s += c * std::max(0.0, 1.0 - data.label(i) * data.dot(i, w));
  return s;
}

}  // namespace

TEST(SvmSubgradient, HingePenaltyExampleAtOrigin) {
  const Eigen::VectorXd g = hinge_loss_subgrad(Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 1.0), 1, 1.0);
  EXPECT_EQ(g, Eigen::VectorXd(Eigen::Vector2d(-1.0, -1.0)));
}

TEST(SvmSubgradient, LogLikelihoodSubgradientIsNegatedPenalty) {
  const Eigen::VectorXd g = svm_datum_subgrad(Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 1.0), 1, 1.0);
  EXPECT_EQ(g, Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)));
}

TEST(SvmSubgradient, SatisfiedMarginGivesZero) {
  const Eigen::VectorXd x = Eigen::Vector2d(1.0, 1.0);
  const Eigen::VectorXd eta = Eigen::Vector2d(1.0, 1.0);  // y eta'x = 2
  EXPECT_EQ(svm_datum_subgrad(eta, x, 1, 3.0), Eigen::VectorXd(Eigen::Vector2d::Zero()));
}

TEST(SvmSubgradient, KinkTakesActiveSide) {
  const Eigen::VectorXd x = Eigen::Vector2d(2.0, 0.0);
  const Eigen::VectorXd eta = Eigen::Vector2d(0.5, 7.0);  // y eta'x = 1 exactly
  EXPECT_EQ(svm_datum_subgrad(eta, x, 1, 1.5), Eigen::VectorXd(Eigen::Vector2d(3.0, 0.0)));
}

TEST(SvmSubgradient, MatchesFiniteDifference) {
  const Eigen::VectorXd eta = Eigen::Vector2d(0.3, 0.2), x = Eigen::Vector2d(1.0, 2.0);
  const auto fd = fd_gradient([&](const Eigen::VectorXd& e) { return hinge_loglik(e, x, -1, 2.0); }, eta);
  EXPECT_LT(rel_err(svm_datum_subgrad(eta, x, -1, 2.0), fd), 1e-5);
}

TEST(SvmSubgradient, RejectsLabelsOutsidePlusMinusOne) {
  EXPECT_THROW(svm_datum_subgrad(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1), 0, 1.0), ContractError);
  EXPECT_THROW(svm_datum_subgrad(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1), 2, 1.0), ContractError);
  EXPECT_THROW(LinearSvmModel(2, -1.0), ConfigError);
}

TEST(SvmModel, LogLikelihoodIsNonPositive) {
  const Dataset data = random_dataset(30, 3, 71);
  const LinearSvmModel model(3, 2.0);
  Rng rng(72);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd eta = random_vector(3, rng, 2.0);
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_LE(model.datum_loglik(eta, data, i), 0.0);
  }
}

TEST(Predict, SignExamplesAndTieBreak) {
  EXPECT_EQ(predict(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(2.0, 5.0)), 1);
  EXPECT_EQ(predict(Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(2.0, 5.0)), -1);
  EXPECT_EQ(predict(Eigen::Vector2d(1.0, -1.0), Eigen::Vector2d(3.0, 3.0)), 1);
  EXPECT_THROW(predict(Eigen::Vector2d(1.0, 0.0), Eigen::Vector3d(1, 1, 1)), ContractError);
}

TEST(Predict, ScaleInvariant) {
  Rng rng(73);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::VectorXd eta = random_vector(4, rng), x = random_vector(4, rng);
    const double alpha = std::exp(3.0 * rng.normal());
    EXPECT_EQ(predict(alpha * eta, x), predict(eta, x));
  }
}

TEST(Predict, AccuracyCountsMatches) {
  const Dataset data = dense({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {2.0, 2.0}}, {1, -1, -1, 1});
  EXPECT_DOUBLE_EQ(accuracy(Eigen::Vector2d(1.0, 0.0), data), 0.75);
  EXPECT_THROW(accuracy(Eigen::Vector2d(1.0, 0.0), dense({}, {}, 2)), ContractError);
}

TEST(SvmModel, EnergyIsMidpointConvex) {
  const Dataset data = random_dataset(25, 3, 74);
  const LinearSvmModel model(3, 1.7);
  Rng rng(75);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::VectorXd a = random_vector(3, rng, 3.0), b = random_vector(3, rng, 3.0);
    const double mid = full_energy(model, 0.5 * (a + b), data);
    EXPECT_LE(mid, 0.5 * (full_energy(model, a, data) + full_energy(model, b, data)) + 1e-12);
  }
}

TEST(InverseGaussian, SampleMoments) {
  Rng rng(76);
  std::vector<double> xs;
  for (int t = 0; t < 200000; ++t) xs.push_back(sample_inverse_gaussian(2.0, 3.0, rng));
  EXPECT_NEAR(mean_of(xs), 2.0, 0.02);
  EXPECT_NEAR(variance_of(xs), 8.0 / 3.0, 0.1);
}

TEST(DaGibbs, NoDataSamplesThePrior) {
  const Dataset empty = dense({}, {}, 2);
  Rng rng(77);
  AugmentedState s = AugmentedState::start(2, 0);
  std::vector<double> a, b;
  for (int t = 0; t < 10000; ++t) {
    da_gibbs_step(s, empty, 1.0, rng);
    a.push_back(s.eta[0]);
    b.push_back(s.eta[1]);
  }
  EXPECT_LT(std::abs(mean_of(a)), 0.05);
  EXPECT_LT(std::abs(mean_of(b)), 0.05);
  EXPECT_NEAR(variance_of(a), 1.0, 0.05);
  EXPECT_NEAR(variance_of(b), 1.0, 0.05);
}

TEST(DaGibbs, SingleDatumPosteriorMatchesQuadrature) {
  for (double c : {0.5, 1.0, 3.0}) {
    const Dataset data = dense({{1.5}}, {1});
    // exp(-U) on a grid split at the kink eta = 2/3.
    const auto density = [c](double e) { return std::exp(-0.5 * e * e - c * std::max(0.0, 1.0 - 1.5 * e)); };
    const double kink = 1.0 / 1.5;
    const double z = simpson(density, -12.0, kink, 40000) + simpson(density, kink, 12.0, 40000);
    const double m1 = (simpson([&](double e) { return e * density(e); }, -12.0, kink, 40000) +
                       simpson([&](double e) { return e * density(e); }, kink, 12.0, 40000)) / z;
    Rng rng(78);
    AugmentedState s = AugmentedState::start(1, 1);
    std::vector<double> draws;
    for (int t = 0; t < 60000; ++t) {
      da_gibbs_step(s, data, c, rng);
      if (t >= 1000) draws.push_back(s.eta[0]);
    }
    EXPECT_NEAR(mean_of(draws), m1, 0.02) << "c=" << c;
  }
}

TEST(DaGibbs, LatentScalesStayPositive) {
  const Dataset data = random_dataset(40, 3, 79, 3.0);
  Rng rng(80);
  AugmentedState s = AugmentedState::start(3, data.size());
  for (int t = 0; t < 3000; ++t) {
    da_gibbs_step(s, data, 2.0, rng);
    ASSERT_TRUE((s.lambda.array() > 0.0).all()) << "sweep " << t;
    ASSERT_TRUE(s.eta.allFinite());
  }
}

TEST(DaGibbs, AgreesWithMetropolisCorrectedHmc) {
  const auto synth = gen_synthetic_svm2d(100, 3.0, 1.0, 81);
  const Dataset& data = synth.data;

  Rng rng_g(82);
  AugmentedState s = AugmentedState::start(2, data.size());
  Eigen::Vector2d gibbs_sum = Eigen::Vector2d::Zero();
  const int sweeps = 40000, burn = 2000;
  for (int t = 0; t < sweeps + burn; ++t) {
    da_gibbs_step(s, data, 1.0, rng_g);
    if (t >= burn) gibbs_sum += s.eta;
  }

  const LinearSvmModel model(2, 1.0);
  SamplerConfig config;
  config.schedule = StepsizeSchedule::constant(0.1);
  config.leapfrog_steps = 10;
  config.mh_correction = true;
  const MinibatchSource source(data, 0);
  Rng rng_h(83);
  ChainState state = ChainState::start(Eigen::VectorXd::Zero(2), config, rng_h);
  Eigen::Vector2d hmc_sum = Eigen::Vector2d::Zero();
  for (int t = 0; t < sweeps + burn; ++t) {
    hmc_draw(model, state, config, source, rng_h);
    if (t >= burn) hmc_sum += state.theta;
  }
  const Eigen::Vector2d diff = gibbs_sum / sweeps - hmc_sum / sweeps;
  EXPECT_LT(diff.lpNorm<Eigen::Infinity>(), 0.05) << "gibbs " << (gibbs_sum / sweeps).transpose()
                                                  << " hmc " << (hmc_sum / sweeps).transpose();
}

TEST(DaGibbs, RefusesLargeDimension) {
  Dataset::DenseRows x = Dataset::DenseRows::Ones(1, static_cast<Eigen::Index>(kMaxAugmentedDim + 1));
  const Dataset data = Dataset::from_dense(std::move(x), {1});
  AugmentedState s = AugmentedState::start(data.dim(), 1);
  Rng rng(84);
  EXPECT_THROW(da_gibbs_step(s, data, 1.0, rng), ConfigError);
}

TEST(DaGibbs, RejectsMismatchedState) {
  const Dataset data = random_dataset(5, 2, 85);
  AugmentedState s = AugmentedState::start(3, 5);
  Rng rng(86);
  EXPECT_THROW(da_gibbs_step(s, data, 1.0, rng), ContractError);
}

TEST(ReferenceSvm, DualCoordinateDescentReachesPrimalMinimum) {
  const Dataset data = random_dataset(60, 3, 87);
  const double c = 0.7;
  const Eigen::VectorXd w = fit_linear_svm_reference(data, c, 2000, 1e-10);
  const double best = primal_objective(w, data, c);
  Rng rng(88);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::VectorXd probe = w + random_vector(3, rng, 1e-3);
    EXPECT_LE(best, primal_objective(probe, data, c) + 1e-9);
  }
}
