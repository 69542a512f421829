#include "ssmcmc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_set>

#include <zlib.h>

#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

void check_labels(const std::vector<int>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1 && labels[i] != -1) {
      throw ContractError("label of row " + std::to_string(i) + " is not +1/-1");
    }
  }
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

std::uint64_t fnv1a(const void* bytes, std::size_t length, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < length; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

// Sparse when wide or mostly zeros.
Storage Dataset::choose_storage(std::size_t rows, std::size_t dim, std::size_t nnz) {
  if (dim > 100) return Storage::kSparse;
  if (rows == 0 || dim == 0) return Storage::kDense;
  const double density = static_cast<double>(nnz) / (static_cast<double>(rows) * static_cast<double>(dim));
  return density < 0.2 ? Storage::kSparse : Storage::kDense;
}

Dataset Dataset::from_dense(DenseRows features, std::vector<int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ContractError("feature rows and labels differ in length");
  }
  check_labels(labels);
  Dataset out;
  out.dim_ = static_cast<std::size_t>(features.cols());
  out.labels_ = std::move(labels);
  const auto nnz = static_cast<std::size_t>((features.array() != 0.0).count());
  out.storage_ = choose_storage(out.labels_.size(), out.dim_, nnz);
  if (out.storage_ == Storage::kDense) {
    out.dense_ = std::move(features);
  } else {
    out.sparse_ = features.sparseView();
    out.sparse_.makeCompressed();
  }
  return out;
}

Dataset Dataset::from_sparse(SparseRows features, std::vector<int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ContractError("feature rows and labels differ in length");
  }
  check_labels(labels);
  Dataset out;
  out.dim_ = static_cast<std::size_t>(features.cols());
  out.labels_ = std::move(labels);
  features.makeCompressed();
  out.storage_ = choose_storage(out.labels_.size(), out.dim_, static_cast<std::size_t>(features.nonZeros()));
  if (out.storage_ == Storage::kDense) {
    out.dense_ = DenseRows(features);
  } else {
    out.sparse_ = std::move(features);
  }
  return out;
}

double Dataset::dot(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& w) const {
  if (storage_ == Storage::kDense) {
    const double* x = dense_.data() + i * dim_;
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += x[j] * w[static_cast<Eigen::Index>(j)];
    return s;
  }
  double s = 0.0;
  for (SparseRows::InnerIterator it(sparse_, static_cast<Eigen::Index>(i)); it; ++it) {
    s += it.value() * w[it.col()];
  }
  return s;
}

void Dataset::add_row(std::size_t i, double scale, Eigen::Ref<Eigen::VectorXd> out) const {
  if (storage_ == Storage::kDense) {
    const double* x = dense_.data() + i * dim_;
    for (std::size_t j = 0; j < dim_; ++j) out[static_cast<Eigen::Index>(j)] += scale * x[j];
    return;
  }
  for (SparseRows::InnerIterator it(sparse_, static_cast<Eigen::Index>(i)); it; ++it) {
    out[it.col()] += scale * it.value();
  }
}

Eigen::VectorXd Dataset::row(std::size_t i) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  add_row(i, 1.0, x);
  return x;
}

std::vector<std::pair<std::size_t, double>> Dataset::row_entries(std::size_t i) const {
  std::vector<std::pair<std::size_t, double>> out;
  if (storage_ == Storage::kDense) {
    for (std::size_t j = 0; j < dim_; ++j) {
      const double v = dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) out.emplace_back(j, v);
    }
  } else {
    for (SparseRows::InnerIterator it(sparse_, static_cast<Eigen::Index>(i)); it; ++it) {
      out.emplace_back(static_cast<std::size_t>(it.col()), it.value());
    }
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<int> labels;
  labels.reserve(rows.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw ContractError("subset row index out of range");
    labels.push_back(labels_[rows[r]]);
    for (const auto& [col, v] : row_entries(rows[r])) {
      triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col), v);
    }
  }
  SparseRows m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim_));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return from_sparse(std::move(m), std::move(labels));
}

Dataset Dataset::with_bias_column() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& [col, v] : row_entries(i)) {
      triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col), v);
    }
    triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dim_), 1.0);
  }
  SparseRows m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_ + 1));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return from_sparse(std::move(m), labels_);
}

std::uint64_t Dataset::content_hash() const {
  std::uint64_t h = fnv1a(&dim_, sizeof dim_);
  h = fnv1a(labels_.data(), labels_.size() * sizeof(int), h);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& [col, v] : row_entries(i)) {
      h = fnv1a(&col, sizeof col, h);
      h = fnv1a(&v, sizeof v, h);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// libsvm text format

namespace {

class GzLineReader {
 public:
  explicit GzLineReader(const std::filesystem::path& path) : file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) throw DataError(0, "cannot open " + path.string());
    gzbuffer(file_, 1 << 16);
  }
  ~GzLineReader() { gzclose(file_); }
  GzLineReader(const GzLineReader&) = delete;
  GzLineReader& operator=(const GzLineReader&) = delete;

  bool next(std::string& line) {
    line.clear();
    char buf[4096];
    while (gzgets(file_, buf, sizeof buf) != nullptr) {
      line.append(buf);
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
    }
    return !line.empty();
  }

 private:
  gzFile file_;
};

double parse_double(std::string_view token, std::size_t line_no) {
  std::string tmp(token);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end == tmp.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw DataError(line_no, "bad number '" + tmp + "'");
  }
  return v;
}

}  // namespace

Dataset read_libsvm(const std::filesystem::path& path, std::optional<std::size_t> expected_dim,
                    std::size_t max_rows) {
  GzLineReader reader(path);
  std::vector<int> labels;
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while ((max_rows == 0 || labels.size() < max_rows) && reader.next(line)) {
    ++line_no;
    std::string_view rest(line);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    auto next_token = [&rest]() -> std::string_view {
      const auto start = rest.find_first_not_of(" \t");
      if (start == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(start);
      const auto stop = rest.find_first_of(" \t");
      const auto token = rest.substr(0, stop);
      rest.remove_prefix(stop == std::string_view::npos ? rest.size() : stop);
      return token;
    };
    const auto label_token = next_token();
    if (label_token.empty()) continue;
    const double raw = parse_double(label_token, line_no);
    int label = 0;
    if (raw == 1.0) {
      label = 1;
    } else if (raw == 0.0 || raw == -1.0) {
      label = -1;
    } else {
      throw DataError(line_no, "unknown label '" + std::string(label_token) + "'");
    }
    const auto row = static_cast<Eigen::Index>(labels.size());
    labels.push_back(label);
    for (auto token = next_token(); !token.empty(); token = next_token()) {
      const auto colon = token.find(':');
      if (colon == std::string_view::npos || colon == 0) {
        throw DataError(line_no, "malformed feature '" + std::string(token) + "'");
      }
      const std::string idx_text(token.substr(0, colon));
      char* end = nullptr;
      const long long idx = std::strtoll(idx_text.c_str(), &end, 10);
      if (*end != '\0' || idx < 1) throw DataError(line_no, "bad feature index '" + idx_text + "'");
      const double value = parse_double(token.substr(colon + 1), line_no);
      const auto col = static_cast<std::size_t>(idx - 1);
      if (expected_dim && col >= *expected_dim) {
        throw DataError(line_no, "feature index " + idx_text + " exceeds dimension " +
                                     std::to_string(*expected_dim));
      }
      max_index = std::max(max_index, col + 1);
      triplets.emplace_back(row, static_cast<Eigen::Index>(col), value);
    }
  }
  const std::size_t dim = expected_dim.value_or(max_index);
  Dataset::SparseRows m(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(dim));
  // Duplicate indices in a line are summed by setFromTriplets; libsvm files never repeat them.
  m.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset::from_sparse(std::move(m), std::move(labels));
}

void write_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw DataError(0, "cannot write " + path.string());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::fputs(data.label(i) > 0 ? "+1" : "-1", f);
    for (const auto& [col, v] : data.row_entries(i)) std::fprintf(f, " %zu:%.17g", col + 1, v);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

// ---------------------------------------------------------------------------
// synthetic generators

double hinge_label_probability(double score, double c) {
  const double like_pos = std::exp(-c * std::max(0.0, 1.0 - score));
  const double like_neg = std::exp(-c * std::max(0.0, 1.0 + score));
  return like_pos / (like_pos + like_neg);
}

SyntheticData gen_synthetic_svm2d(std::size_t n, double prior_precision, double c, std::uint64_t seed) {
  if (n < 1) throw ContractError("synthetic dataset needs n >= 1");
  if (!(prior_precision > 0)) throw ContractError("prior precision must be positive");
  Rng rng(seed);
  Eigen::VectorXd eta(2);
  const double sd = 1.0 / std::sqrt(prior_precision);
  eta << sd * rng.normal(), sd * rng.normal();
  Dataset::DenseRows x(static_cast<Eigen::Index>(n), 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = rng.uniform();
    x(r, 1) = rng.uniform();
    const double alpha = hinge_label_probability(eta[0] * x(r, 0) + eta[1] * x(r, 1), c);
    labels[i] = rng.uniform() < alpha ? 1 : -1;
  }
  return {Dataset::from_dense(std::move(x), std::move(labels)), eta};
}

SyntheticData gen_synthetic_sparse(std::size_t n, std::size_t d, std::size_t support_size,
                                   std::uint64_t seed) {
  if (support_size > d) throw ContractError("support size exceeds dimension");
  Rng rng(seed);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < support_size; ++s) {
    eta[static_cast<Eigen::Index>(order[s])] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  Dataset::DenseRows x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(r, j) = rng.normal();
    const double p = sigmoid(x.row(r).dot(eta.transpose()));
    labels[i] = rng.uniform() < p ? 1 : -1;
  }
  return {Dataset::from_dense(std::move(x), std::move(labels)), eta};
}

TrainTestSplit train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractError("test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(data.size())));
  std::span<const std::size_t> all(order);
  return {data.subset(all.subspan(n_test)), data.subset(all.first(n_test))};
}

// ---------------------------------------------------------------------------
// minibatches

Minibatch Minibatch::full(std::size_t n) {
  Minibatch b;
  b.indices.resize(n);
  std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
  b.scale = 1.0;
  return b;
}

namespace {

// Floyd's algorithm: `k` distinct positions out of [0, n).
void sample_positions(std::size_t n, std::size_t k, Rng& rng, std::vector<std::size_t>& out) {
  out.clear();
  out.reserve(k);
  if (k <= 32) {
    for (std::size_t j = n - k; j < n; ++j) {
      const std::size_t t = rng.index(j + 1);
      const bool seen = std::find(out.begin(), out.end(), t) != out.end();
      out.push_back(seen ? j : t);
    }
    return;
  }
  if (k * 16 >= n) {
    std::vector<bool> taken(n, false);
    for (std::size_t j = n - k; j < n; ++j) {
      const std::size_t t = rng.index(j + 1);
      const std::size_t pick = taken[t] ? j : t;
      taken[pick] = true;
      out.push_back(pick);
    }
    return;
  }
  std::unordered_set<std::size_t> taken;
  taken.reserve(2 * k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = rng.index(j + 1);
    const std::size_t pick = taken.contains(t) ? j : t;
    taken.insert(pick);
    out.push_back(pick);
  }
}

}  // namespace

Minibatch draw_minibatch(const Dataset& data, std::size_t batch_size, Rng& rng) {
  if (batch_size < 1 || batch_size > data.size()) {
    throw ContractError("minibatch size " + std::to_string(batch_size) + " outside [1, " +
                        std::to_string(data.size()) + "]");
  }
  Minibatch b;
  sample_positions(data.size(), batch_size, rng, b.indices);
  b.scale = static_cast<double>(data.size()) / static_cast<double>(batch_size);
  return b;
}

MinibatchSource::MinibatchSource(const Dataset& data, std::size_t batch_size)
    : data_(&data), batch_size_(batch_size == 0 ? data.size() : batch_size) {}

MinibatchSource::MinibatchSource(const Dataset& data, std::vector<std::size_t> population,
                                 std::size_t batch_size)
    : data_(&data), population_(std::move(population)), batch_size_(batch_size) {
  for (auto i : *population_) {
    if (i >= data.size()) throw ContractError("population index out of range");
  }
  if (batch_size_ == 0) batch_size_ = population_->size();
}

std::size_t MinibatchSource::population_size() const {
  return population_ ? population_->size() : data_->size();
}

void MinibatchSource::draw(Rng& rng, Minibatch& out) const {
  const std::size_t n = population_size();
  if (n == 0) {
    out = population_ ? Minibatch::prior_only() : Minibatch::full(0);
    return;
  }
  if (full_batch()) {
    if (population_) {
      out.indices = *population_;
    } else {
      out.indices.resize(n);
      std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
    }
    out.scale = 1.0;
    return;
  }
  sample_positions(n, batch_size_, rng, out.indices);
  if (population_) {
    for (auto& i : out.indices) i = (*population_)[i];
  }
  out.scale = static_cast<double>(n) / static_cast<double>(batch_size_);
}

Minibatch MinibatchSource::draw(Rng& rng) const {
  Minibatch b;
  draw(rng, b);
  return b;
}

}  // namespace ssmcmc
