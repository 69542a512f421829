#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/dataset.hpp"

namespace ssmcmc {

/// Fraction of a trace discarded as burn-in unless overridden.
inline constexpr double kDefaultBurnInFraction = 0.2;

/// Ordered parameter samples stamped with iteration and wall-clock time.
/// Stamps are nondecreasing; the burn-in marker is always < size().
class Trace {
 public:
  void push(std::uint64_t iteration, double wall_ms, Eigen::VectorXd sample);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Eigen::VectorXd& sample(std::size_t j) const { return samples_[j]; }
  std::uint64_t iteration(std::size_t j) const { return iterations_[j]; }
  double wall_ms(std::size_t j) const { return wall_ms_[j]; }
  std::span<const Eigen::VectorXd> samples() const { return samples_; }

  /// Explicit marker if set, else floor(0.2 * size()); clamped below size().
  std::size_t burn_in() const;
  void set_burn_in(std::size_t count) { burn_in_ = count; }
  std::span<const Eigen::VectorXd> post_burn_in() const;

 private:
  std::vector<Eigen::VectorXd> samples_;
  std::vector<std::uint64_t> iterations_;
  std::vector<double> wall_ms_;
  std::optional<std::size_t> burn_in_;
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;      // unbiased
  Eigen::VectorXd eigenvalues;     // descending
  Eigen::MatrixXd directions;      // column j pairs with eigenvalues[j]
};

Moments trace_moments(std::span<const Eigen::VectorXd> samples);
/// Moments of the post-burn-in part.
Moments trace_moments(const Trace& trace);

/// Angle in degrees between two directions, ignoring sign.
double direction_angle_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Standard error of a mean by non-overlapping batch means.
double batch_means_se(std::span<const double> values, std::size_t batches = 20);

struct AccuracyPoint {
  std::uint64_t iteration;
  double wall_ms;
  double accuracy;
};

/// Predicts the label of test row i from a parameter vector.
using Predictor = std::function<int(const Eigen::VectorXd& theta, const Dataset& test, std::size_t i)>;

/// One point per `stride`-th trace entry; each uses the mean of the samples
/// seen so far after dropping the first 20% of them.
std::vector<AccuracyPoint> accuracy_curve(const Trace& trace, const Dataset& test, const Predictor& predictor,
                                          std::size_t stride = 1);

/// Columns: iteration, wall_ms, accuracy.
void write_accuracy_csv(std::span<const AccuracyPoint> rows, const std::filesystem::path& path,
                        const std::string& config_hash = {});

/// Post-burn-in samples; columns iteration, theta_1..theta_d. Wall time is
/// left out so reruns are byte-identical.
void write_trace_csv(const Trace& trace, const std::filesystem::path& path, const std::string& config_hash = {});

}  // namespace ssmcmc
