#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ssmcmc {

/// Per-chain random stream. Copying a stream forks it: both copies produce
/// the same sequence from that point on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream `stream` derived from a base seed (used for parallel chains).
  Rng(std::uint64_t seed, std::uint64_t stream);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ssmcmc
