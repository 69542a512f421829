#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <zlib.h>

#include "ssmcmc/dataset.hpp"
#include "ssmcmc/errors.hpp"
#include "test_support.hpp"

using namespace ssmcmc;
using namespace ssmcmc::oracles;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& name) : path_(std::filesystem::temp_directory_path() / ("ssmcmc_" + name)) {}
  ~TempFile() { std::filesystem::remove(path_); }
  const std::filesystem::path& path() const { return path_; }
  void write(const std::string& text) const { std::ofstream(path_) << text; }
  void write_gz(const std::string& text) const {
    gzFile f = gzopen(path_.c_str(), "wb");
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
  }

 private:
  std::filesystem::path path_;
};

std::size_t parse_error_line(const std::string& text) {
  TempFile f("bad.svm");
  f.write(text);
  try {
    read_libsvm(f.path());
  } catch (const DataError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(ReadLibsvm, ParsesSparseLine) {
  TempFile f("one.svm");
  f.write("1 1:0.5 3:-2\n");
  const Dataset d = read_libsvm(f.path());
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.dim(), 3u);
  EXPECT_EQ(d.label(0), 1);
  EXPECT_EQ(d.row(0), Eigen::VectorXd(Eigen::Vector3d(0.5, 0.0, -2.0)));
}

TEST(ReadLibsvm, LabelOnlyLineIsZeroRow) {
  TempFile f("empty_row.svm");
  f.write("1 2:1\n-1\n");
  const Dataset d = read_libsvm(f.path());
  EXPECT_EQ(d.label(1), -1);
  EXPECT_EQ(d.row(1), Eigen::VectorXd(Eigen::Vector2d::Zero()));
}

TEST(ReadLibsvm, LabelMappingAndExpectedDim) {
  TempFile f("labels.svm");
  f.write("0 1:1\n+1 2:1\n-1 1:2\n1 3:1 2:5\n");
  const Dataset d = read_libsvm(f.path(), 6);
  EXPECT_EQ(d.labels(), (std::vector<int>{-1, 1, -1, 1}));
  EXPECT_EQ(d.dim(), 6u);
  EXPECT_EQ(d.row(3)[1], 5.0);
  EXPECT_EQ(d.row(3)[2], 1.0);
}

TEST(ReadLibsvm, MaxRowsStopsEarly) {
  TempFile f("max_rows.svm");
  f.write("1 1:1\n-1 1:2\n1 1:3\n");
  EXPECT_EQ(read_libsvm(f.path(), std::nullopt, 2).size(), 2u);
}

TEST(ReadLibsvm, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("1 1:1\n1 x:2\n"), 2u);
  EXPECT_EQ(parse_error_line("1 1:1\n-1 2:1\n3 1:1\n"), 3u);
  EXPECT_EQ(parse_error_line("1 0:1\n"), 1u);
  EXPECT_EQ(parse_error_line("1 1:abc\n"), 1u);
  TempFile f("dim.svm");
  f.write("1 5:1\n");
  EXPECT_THROW(read_libsvm(f.path(), 3), DataError);
  EXPECT_THROW(read_libsvm("/nonexistent/ssmcmc.svm"), DataError);
}

TEST(ReadLibsvm, ReadsGzipTransparently) {
  TempFile f("gz.svm.gz");
  f.write_gz("1 1:0.5 3:-2\n-1 2:4\n");
  const Dataset d = read_libsvm(f.path());
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.row(1), Eigen::VectorXd(Eigen::Vector3d(0.0, 4.0, 0.0)));
}

TEST(WriteLibsvm, RoundTripIsExact) {
  Rng rng(801);
  Dataset::DenseRows x(20, 4);
  std::vector<int> y(20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = rng.uniform() < 0.3 ? 0.0 : rng.normal() * 1e-3 * std::exp(10 * rng.normal());
    y[static_cast<std::size_t>(i)] = i % 3 ? 1 : -1;
  }
  const Dataset original = Dataset::from_dense(x, y);
  TempFile f("round.svm");
  write_libsvm(original, f.path());
  const Dataset back = read_libsvm(f.path(), 4);
  EXPECT_EQ(back.content_hash(), original.content_hash());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(back.row(i), original.row(i));
}

TEST(Dataset, StorageFollowsShape) {
  EXPECT_EQ(dense({{1.0, 2.0}, {3.0, 4.0}}, {1, -1}).storage(), Storage::kDense);
  Dataset::DenseRows sparse_rows = Dataset::DenseRows::Zero(10, 10);
  sparse_rows(0, 0) = 1.0;
  EXPECT_EQ(Dataset::from_dense(sparse_rows, std::vector<int>(10, 1)).storage(), Storage::kSparse);
  EXPECT_EQ(Dataset::from_dense(Dataset::DenseRows::Ones(2, 101), {1, 1}).storage(), Storage::kSparse);
}

TEST(Dataset, SparseAndDenseAgree) {
  Rng rng(802);
  Dataset::DenseRows x = Dataset::DenseRows::Zero(30, 150);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (int k = 0; k < 5; ++k) x(i, static_cast<Eigen::Index>(rng.index(150))) = rng.normal();
  std::vector<int> y(30, 1);
  const Dataset s = Dataset::from_dense(x, y);
  ASSERT_EQ(s.storage(), Storage::kSparse);
  const Eigen::VectorXd w = random_vector(150, rng);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_NEAR(s.dot(i, w), x.row(static_cast<Eigen::Index>(i)).dot(w), 1e-12);
    EXPECT_EQ(s.row(i), Eigen::VectorXd(x.row(static_cast<Eigen::Index>(i)).transpose()));
  }
}

TEST(Dataset, RejectsBadLabels) {
  EXPECT_THROW(dense({{1.0}}, {0}), ContractError);
  EXPECT_THROW(dense({{1.0}}, {1, 1}), ContractError);
}

TEST(Dataset, BiasColumnAppendsOne) {
  const Dataset d = dense({{1.0, 2.0}, {0.0, -1.0}}, {1, -1}).with_bias_column();
  EXPECT_EQ(d.dim(), 3u);
  EXPECT_EQ(d.row(1), Eigen::VectorXd(Eigen::Vector3d(0.0, -1.0, 1.0)));
}

TEST(Dataset, SubsetKeepsRowsAndLabels) {
  const Dataset d = random_dataset(10, 3, 803);
  const std::vector<std::size_t> rows{7, 2};
  const Dataset s = d.subset(rows);
  EXPECT_EQ(s.row(0), d.row(7));
  EXPECT_EQ(s.label(1), d.label(2));
}

TEST(SyntheticSvm, DefaultShapeAndRange) {
  const auto s = gen_synthetic_svm2d(1000);
  EXPECT_EQ(s.data.size(), 1000u);
  EXPECT_EQ(s.data.dim(), 2u);
  for (std::size_t i = 0; i < 1000; ++i) {
    const Eigen::VectorXd x = s.data.row(i);
    EXPECT_TRUE((x.array() >= 0.0).all() && (x.array() <= 1.0).all());
  }
}

TEST(SyntheticSvm, SymmetricLikelihoodsGiveHalf) {
  EXPECT_EQ(hinge_label_probability(0.0, 1.0), 0.5);
  EXPECT_EQ(hinge_label_probability(0.0, 7.0), 0.5);
  // score 2: phi(+1) = 1, phi(-1) = exp(-3c)
  EXPECT_NEAR(hinge_label_probability(2.0, 1.0), 1.0 / (1.0 + std::exp(-3.0)), 1e-15);
  EXPECT_NEAR(hinge_label_probability(-0.5, 2.0), std::exp(-3.0) / (std::exp(-3.0) + std::exp(-1.0)), 1e-15);
}

TEST(SyntheticSvm, SeedDeterminesDataset) {
  EXPECT_EQ(gen_synthetic_svm2d(200, 3.0, 1.0, 5).data.content_hash(), gen_synthetic_svm2d(200, 3.0, 1.0, 5).data.content_hash());
  EXPECT_NE(gen_synthetic_svm2d(200, 3.0, 1.0, 5).data.content_hash(), gen_synthetic_svm2d(200, 3.0, 1.0, 6).data.content_hash());
}

TEST(SyntheticSvm, LabelFrequencyMatchesAlpha) {
  const auto s = gen_synthetic_svm2d(20000, 3.0, 1.0, 804);
  double expected = 0.0, observed = 0.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    expected += hinge_label_probability(s.data.dot(i, s.truth), 1.0);
    observed += s.data.label(i) == 1;
  }
  EXPECT_NEAR(observed / 20000.0, expected / 20000.0, 0.015);
}

TEST(SyntheticSparse, NullModelIsFairCoin) {
  const auto s = gen_synthetic_sparse(10000, 5, 0, 805);
  EXPECT_EQ(s.truth, Eigen::VectorXd(Eigen::VectorXd::Zero(5)));
  const double pos = static_cast<double>(std::count(s.data.labels().begin(), s.data.labels().end(), 1)) / 10000.0;
  EXPECT_GE(pos, 0.46);
  EXPECT_LE(pos, 0.54);
}

TEST(SyntheticSparse, SupportSizeAndValues) {
  const auto dense_truth = gen_synthetic_sparse(10, 6, 6, 806);
  EXPECT_TRUE((dense_truth.truth.array().abs() == 1.0).all());
  const auto s = gen_synthetic_sparse(10, 20, 4, 807);
  EXPECT_EQ((s.truth.array() != 0.0).count(), 4);
  EXPECT_EQ(gen_synthetic_sparse(50, 8, 3, 9).data.content_hash(), gen_synthetic_sparse(50, 8, 3, 9).data.content_hash());
  EXPECT_THROW(gen_synthetic_sparse(10, 3, 4, 1), ContractError);
}

TEST(DrawMinibatch, FullSizeIsEverything) {
  const Dataset d = random_dataset(7, 2, 808);
  Rng rng(809);
  Minibatch b = draw_minibatch(d, 7, rng);
  std::sort(b.indices.begin(), b.indices.end());
  EXPECT_EQ(b.indices, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(b.scale, 1.0);
}

TEST(DrawMinibatch, SingleIndexIsUniform) {
  const Dataset d = random_dataset(4, 1, 810);
  Rng rng(811);
  std::vector<double> counts(4, 0.0);
  for (int t = 0; t < 100000; ++t) {
    const Minibatch b = draw_minibatch(d, 1, rng);
    EXPECT_EQ(b.scale, 4.0);
    counts[b.indices[0]] += 1.0;
  }
  for (double c : counts) {
    EXPECT_GE(c / 100000.0, 0.23);
    EXPECT_LE(c / 100000.0, 0.27);
  }
}

TEST(DrawMinibatch, NoDuplicatesAndPairUniformity) {
  const Dataset d = random_dataset(6, 1, 812);
  Rng rng(813);
  std::map<std::pair<std::size_t, std::size_t>, int> pairs;
  for (int t = 0; t < 60000; ++t) {
    Minibatch b = draw_minibatch(d, 3, rng);
    ASSERT_EQ(std::set<std::size_t>(b.indices.begin(), b.indices.end()).size(), 3u);
    std::sort(b.indices.begin(), b.indices.end());
    ++pairs[{b.indices[0], b.indices[1]}];
  }
  // Each of the 20 triples has probability 1/20; the pair (0,1) leads 4 of them.
  const double lead = pairs[std::make_pair(std::size_t{0}, std::size_t{1})] / 60000.0;
  EXPECT_NEAR(lead, 0.2, 0.01);
}

TEST(DrawMinibatch, RejectsOversizedBatch) {
  const Dataset d = random_dataset(3, 1, 814);
  Rng rng(815);
  EXPECT_THROW(draw_minibatch(d, 4, rng), ContractError);
  EXPECT_THROW(draw_minibatch(d, 0, rng), ContractError);
}

TEST(MinibatchSource, PopulationRestrictsAndScales) {
  const Dataset d = random_dataset(10, 1, 816);
  const MinibatchSource source(d, {2, 5, 9, 7}, 2);
  Rng rng(817);
  for (int t = 0; t < 200; ++t) {
    const Minibatch b = source.draw(rng);
    EXPECT_EQ(b.scale, 2.0);
    for (auto i : b.indices) EXPECT_TRUE(i == 2 || i == 5 || i == 9 || i == 7);
  }
  const MinibatchSource empty(d, std::vector<std::size_t>{}, 3);
  const Minibatch none = empty.draw(rng);
  EXPECT_TRUE(none.indices.empty());
  EXPECT_EQ(none.scale, 0.0);
}

TEST(MinibatchSource, FullBatchDoesNotConsumeRandomness) {
  const Dataset d = random_dataset(5, 1, 818);
  const MinibatchSource source(d, 0);
  Rng a(819), b(819);
  EXPECT_EQ(source.draw(a).indices.size(), 5u);
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(TrainTestSplit, SizesAndDisjointness) {
  const Dataset d = random_dataset(100, 2, 820);
  const auto split = train_test_split(d, 0.2, 821);
  EXPECT_EQ(split.test.size(), 20u);
  EXPECT_EQ(split.train.size(), 80u);
  const auto again = train_test_split(d, 0.2, 821);
  EXPECT_EQ(split.test.content_hash(), again.test.content_hash());
  EXPECT_THROW(train_test_split(d, 0.0, 1), ContractError);
  EXPECT_THROW(train_test_split(d, 1.0, 1), ContractError);
}
