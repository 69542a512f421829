#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "ssmcmc/rng.hpp"

namespace ssmcmc {

enum class Storage { kDense, kSparse };

/// Immutable labelled feature matrix. Rows are stored densely or sparsely
/// depending on shape; callers only see row-level operations.
class Dataset {
 public:
  using DenseRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  Dataset() = default;

  /// Takes ownership of the features; labels must be +1/-1.
  static Dataset from_dense(DenseRows features, std::vector<int> labels);
  static Dataset from_sparse(SparseRows features, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return labels_.empty(); }
  Storage storage() const { return storage_; }

  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

  double dot(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& w) const;
  /// out += scale * x_i
  void add_row(std::size_t i, double scale, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd row(std::size_t i) const;
  /// Nonzero entries of row i as (column, value) pairs.
  std::vector<std::pair<std::size_t, double>> row_entries(std::size_t i) const;

  Dataset subset(std::span<const std::size_t> rows) const;
  /// Appends a constant-1 feature (absorbs a bias term into the weights).
  Dataset with_bias_column() const;

  /// FNV-1a hash over labels and feature values; used to certify immutability.
  std::uint64_t content_hash() const;

 private:
  static Storage choose_storage(std::size_t rows, std::size_t dim, std::size_t nnz);

  Storage storage_ = Storage::kDense;
  std::size_t dim_ = 0;
  DenseRows dense_;
  SparseRows sparse_;
  std::vector<int> labels_;
};

/// Reads libsvm text ("<label> idx:val ..."), 1-based indices, gzip or plain.
/// Labels 0/-1 map to -1 and 1/+1 to +1. A nonzero `max_rows` stops after
/// that many examples.
Dataset read_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> expected_dim = std::nullopt, std::size_t max_rows = 0);
void write_libsvm(const Dataset& data, const std::filesystem::path& path);

struct SyntheticData {
  Dataset data;
  Eigen::VectorXd truth;
};

/// P(y = +1) = phi(+1) / (phi(+1) + phi(-1)) with phi(y) = exp(-c max(0, 1 - y score)).
double hinge_label_probability(double score, double c);

/// 2-D hinge-likelihood data: x ~ U(0,1)^2, eta ~ N(0, I/prior_precision),
/// y ~ Bernoulli(alpha) with alpha the normalized ratio of the two hinge
/// likelihoods.
SyntheticData gen_synthetic_svm2d(std::size_t n, double prior_precision = 3.0, double c = 1.0,
                                  std::uint64_t seed = 0);

/// Sparse logistic data: `support_size` weights at +-1, x ~ N(0, I),
/// y ~ Bernoulli(sigmoid(eta'x)).
SyntheticData gen_synthetic_sparse(std::size_t n, std::size_t d, std::size_t support_size,
                                   std::uint64_t seed);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Seeded shuffle, then the first round(test_fraction * N) rows become the test set.
TrainTestSplit train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Row indices of one minibatch plus the unbiased scaling factor N / batch size.
/// The empty batch with scale 0 is a prior-only batch (no likelihood terms).
struct Minibatch {
  std::vector<std::size_t> indices;
  double scale = 1.0;

  static Minibatch full(std::size_t n);
  static Minibatch prior_only() { return {{}, 0.0}; }
};

/// Uniform draw of `batch_size` distinct rows.
Minibatch draw_minibatch(const Dataset& data, std::size_t batch_size, Rng& rng);

/// Draws minibatches from a dataset, optionally restricted to a row
/// population (scale is then population size / batch size).
class MinibatchSource {
 public:
  /// batch_size == 0 or >= N means full batch.
  MinibatchSource(const Dataset& data, std::size_t batch_size);
  MinibatchSource(const Dataset& data, std::vector<std::size_t> population,
                  std::size_t batch_size);

  const Dataset& data() const { return *data_; }
  std::size_t population_size() const;
  std::size_t batch_size() const { return batch_size_; }
  bool full_batch() const { return batch_size_ >= population_size(); }

  /// Full-batch sources return the whole population without touching `rng`.
  void draw(Rng& rng, Minibatch& out) const;
  Minibatch draw(Rng& rng) const;

 private:
  const Dataset* data_;
  std::optional<std::vector<std::size_t>> population_;
  std::size_t batch_size_;
};

/// FNV-1a over raw bytes, exposed for config and artifact hashing.
std::uint64_t fnv1a(const void* bytes, std::size_t length,
                    std::uint64_t seed = 1469598103934665603ULL);

}  // namespace ssmcmc
