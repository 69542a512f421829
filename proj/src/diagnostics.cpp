#include "ssmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ssmcmc/errors.hpp"

namespace ssmcmc {

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  return out;
}

}  // namespace

void Trace::push(std::uint64_t iteration, double wall_ms, Eigen::VectorXd sample) {
  if (!samples_.empty()) {
    if (iteration < iterations_.back() || wall_ms < wall_ms_.back()) {
      throw ContractError("trace stamps must be nondecreasing");
    }
    if (sample.size() != samples_.front().size()) throw ContractError("trace samples differ in dimension");
  }
  samples_.push_back(std::move(sample));
  iterations_.push_back(iteration);
  wall_ms_.push_back(wall_ms);
}

std::size_t Trace::burn_in() const {
  if (samples_.empty()) return 0;
  const std::size_t b = burn_in_.value_or(
      static_cast<std::size_t>(std::floor(kDefaultBurnInFraction * static_cast<double>(samples_.size()))));
  return std::min(b, samples_.size() - 1);
}

std::span<const Eigen::VectorXd> Trace::post_burn_in() const {
  return std::span<const Eigen::VectorXd>(samples_).subspan(burn_in());
}

Moments trace_moments(std::span<const Eigen::VectorXd> samples) {
  if (samples.size() < 2) throw ContractError("moments need at least two samples");
  const auto d = samples.front().size();
  Moments m;
  m.mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples) {
    if (s.size() != d) throw ContractError("trace samples differ in dimension");
    m.mean += s;
  }
  m.mean /= static_cast<double>(samples.size());
  m.covariance = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : samples) {
    const Eigen::VectorXd c = s - m.mean;
    m.covariance.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  m.covariance = m.covariance.selfadjointView<Eigen::Lower>();
  m.covariance /= static_cast<double>(samples.size() - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.covariance);
  m.eigenvalues = eig.eigenvalues().reverse();
  m.directions = eig.eigenvectors().rowwise().reverse();
  return m;
}

Moments trace_moments(const Trace& trace) { return trace_moments(trace.post_burn_in()); }

double direction_angle_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double cosine = std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm()));
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

double batch_means_se(std::span<const double> values, std::size_t batches) {
  if (batches < 2 || values.size() < batches) throw ContractError("too few values for batch means");
  const std::size_t len = values.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += values[b * len + j];
    means[b] = s / static_cast<double>(len);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

std::vector<AccuracyPoint> accuracy_curve(const Trace& trace, const Dataset& test, const Predictor& predictor,
                                          std::size_t stride) {
  if (test.empty()) throw ContractError("empty test set");
  if (stride == 0) throw ContractError("stride must be positive");
  std::vector<AccuracyPoint> rows;
  if (trace.empty()) return rows;
  // prefix[j] = sum of the first j samples
  std::vector<Eigen::VectorXd> prefix{Eigen::VectorXd::Zero(trace.sample(0).size())};
  for (std::size_t j = 0; j < trace.size(); ++j) prefix.push_back(prefix.back() + trace.sample(j));
  for (std::size_t j = 0; j < trace.size(); ++j) {
    if ((j + 1) % stride != 0 && j + 1 != trace.size()) continue;
    const std::size_t seen = j + 1;
    const auto drop = static_cast<std::size_t>(std::floor(kDefaultBurnInFraction * static_cast<double>(seen)));
    const Eigen::VectorXd mean = (prefix[seen] - prefix[drop]) / static_cast<double>(seen - drop);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += predictor(mean, test, i) == test.label(i);
    rows.push_back({trace.iteration(j), trace.wall_ms(j), static_cast<double>(correct) / static_cast<double>(test.size())});
  }
  return rows;
}

void write_accuracy_csv(std::span<const AccuracyPoint> rows, const std::filesystem::path& path,
                        const std::string& config_hash) {
  auto out = open_csv(path, config_hash);
  out << "iteration,wall_ms,accuracy\n";
  for (const auto& r : rows) out << r.iteration << ',' << r.wall_ms << ',' << r.accuracy << '\n';
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path, const std::string& config_hash) {
  auto out = open_csv(path, config_hash);
  out << "iteration";
  const auto d = trace.empty() ? 0 : trace.sample(0).size();
  for (Eigen::Index j = 0; j < d; ++j) out << ",theta_" << j + 1;
  out << '\n';
  for (std::size_t s = trace.burn_in(); s < trace.size(); ++s) {
    out << trace.iteration(s);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << trace.sample(s)[j];
    out << '\n';
  }
}

}  // namespace ssmcmc
