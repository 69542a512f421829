#include "ssmcmc/mixture_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ssmcmc/errors.hpp"
#include "ssmcmc/svm_model.hpp"

namespace ssmcmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

std::size_t tri_size(std::size_t d) { return d * (d + 1) / 2; }

// Position of (a, b), a <= b, in the row-major packing of an upper triangle.
std::size_t tri_index(std::size_t a, std::size_t b, std::size_t d) { return a * d - a * (a - 1) / 2 + (b - a); }

void pack_upper(const Eigen::MatrixXd& factor, Eigen::Ref<Eigen::VectorXd> out) {
  const auto d = static_cast<std::size_t>(factor.rows());
  std::size_t pos = 0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) out[static_cast<Eigen::Index>(pos++)] = factor(a, b);
}

void unpack_upper(const Eigen::Ref<const Eigen::VectorXd>& packed, Eigen::MatrixXd& factor, std::size_t d) {
  factor.setZero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::size_t pos = 0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) factor(a, b) = packed[static_cast<Eigen::Index>(pos++)];
}

void floor_diagonal(Eigen::Ref<Eigen::VectorXd> packed, std::size_t d) {
  for (std::size_t a = 0; a < d; ++a) {
    double& v = packed[static_cast<Eigen::Index>(tri_index(a, a, d))];
    if (std::abs(v) < kFactorDiagonalFloor) v = std::signbit(v) ? -kFactorDiagonalFloor : kFactorDiagonalFloor;
  }
}

double log_abs_det(const Eigen::MatrixXd& factor) {
  return factor.diagonal().array().abs().log().sum();
}

// Gaussian pieces for one datum: v = x - mu, w = L^-T v, s = L^-1 w = Sigma^-1 v.
struct GaussianTerms {
  Eigen::VectorXd w;
  Eigen::VectorXd s;
};

double gaussian_terms(const Eigen::MatrixXd& factor, double log_norm, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& mu, GaussianTerms& out) {
  out.w = factor.triangularView<Eigen::Upper>().transpose().solve(x - mu);
  out.s = factor.triangularView<Eigen::Upper>().solve(out.w);
  return log_norm - 0.5 * out.w.squaredNorm();
}

// out_mu += weight * s;  out_tri += weight * upper(-diag(1/L_aa) + w s').
void add_gaussian_grad(const Eigen::MatrixXd& factor, const GaussianTerms& t, double weight,
                       Eigen::Ref<Eigen::VectorXd> out_mu, Eigen::Ref<Eigen::VectorXd> out_tri) {
  const auto d = static_cast<std::size_t>(factor.rows());
  out_mu += weight * t.s;
  std::size_t pos = 0;
  for (std::size_t a = 0; a < d; ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    for (std::size_t b = a; b < d; ++b) {
      double g = t.w[ia] * t.s[static_cast<Eigen::Index>(b)];
      if (a == b) g -= 1.0 / factor(ia, ia);
      out_tri[static_cast<Eigen::Index>(pos++)] += weight * g;
    }
  }
}

// Per-component constants shared across data points.
struct ComponentCache {
  std::vector<double> log_norm;  // log pi_k - d/2 log 2 pi - log|det L_k|
  explicit ComponentCache(const MixtureParams& p) {
    const double d = static_cast<double>(p.dim());
    for (std::size_t k = 0; k < p.components(); ++k) {
      log_norm.push_back(std::log(p.weights[static_cast<Eigen::Index>(k)]) - 0.5 * d * kLog2Pi -
                         log_abs_det(p.factor[k]));
    }
  }
};

// Log-space normalization; r_k = exp(l_k - max) / sum. K = 1 yields exactly 1.
void normalize_log(Eigen::VectorXd& l, std::size_t datum) {
  const double m = l.maxCoeff();
  if (!std::isfinite(m)) throw NumericalError(datum, "responsibilities are not finite");
  // Scalar exp: Eigen's packet exp clamps its argument and never returns exactly 0.
  for (auto& v : l) v = std::exp(v - m);
  l /= l.sum();
}

double log_sum_exp(const Eigen::VectorXd& l) {
  const double m = l.maxCoeff();
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : l) sum += std::exp(v - m);
  return m + std::log(sum);
}

struct DatumEval {
  Eigen::VectorXd log_terms;
  std::vector<GaussianTerms> gauss;
  std::vector<char> active;
};

// Fills log pi_k + log N_k (+ log phi_k when labelled) for datum i.
void evaluate_datum(const MixtureParams& p, const ComponentCache& cache, const Dataset& data, std::size_t i,
                    double c, bool labelled, const Eigen::VectorXd& x, DatumEval& ev) {
  const std::size_t K = p.components();
  ev.log_terms.resize(static_cast<Eigen::Index>(K));
  ev.gauss.resize(K);
  ev.active.resize(K);
  const int y = data.empty() ? 1 : data.label(i);
  for (std::size_t k = 0; k < K; ++k) {
    double l = gaussian_terms(p.factor[k], cache.log_norm[k], x, p.mu[k], ev.gauss[k]);
    if (labelled) {
      const double margin = 1.0 - y * data.dot(i, p.eta[k]);
      ev.active[k] = margin >= 0.0;
      l -= c * std::max(0.0, margin);
    }
    ev.log_terms[static_cast<Eigen::Index>(k)] = l;
  }
}

void check_component(const MixtureParams& p, std::size_t k) {
  p.validate();
  if (k >= p.components()) throw ContractError("component index out of range");
}

void check_data(const MixtureParams& p, const Dataset& data) {
  if (data.dim() != p.dim()) throw ContractError("dataset dimension does not match mixture parameters");
}

std::vector<std::size_t> members(const std::vector<std::size_t>& z, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] == k) out.push_back(i);
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

void MixtureParams::validate() const {
  const std::size_t K = components();
  if (K == 0) throw ContractError("mixture needs at least one component");
  if (mu.size() != K || factor.size() != K || static_cast<std::size_t>(weights.size()) != K) {
    throw ContractError("mixture blocks disagree on the number of components");
  }
  const auto d = static_cast<Eigen::Index>(dim());
  for (std::size_t k = 0; k < K; ++k) {
    if (eta[k].size() != d || mu[k].size() != d || factor[k].rows() != d || factor[k].cols() != d) {
      throw ContractError("component " + std::to_string(k) + " has inconsistent dimensions");
    }
    if (!factor[k].triangularView<Eigen::StrictlyLower>().toDenseMatrix().isZero(0.0)) {
      throw ContractError("factor of component " + std::to_string(k) + " is not upper triangular");
    }
    if ((factor[k].diagonal().array() == 0.0).any()) {
      throw ContractError("factor of component " + std::to_string(k) + " is singular");
    }
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw ContractError("mixing weights must lie on the simplex");
  }
}

MixtureParams MixtureParams::init(const Dataset& data, std::size_t components, Rng& rng) {
  if (components == 0) throw ContractError("mixture needs at least one component");
  if (data.empty()) throw ContractError("cannot initialize a mixture from an empty dataset");
  const auto d = static_cast<Eigen::Index>(data.dim());
  MixtureParams p;
  p.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(components), 1.0 / static_cast<double>(components));
  const std::size_t m = std::min(data.size(), std::max<std::size_t>(10, components));
  const auto candidates = draw_minibatch(data, m, rng).indices;
  std::vector<Eigen::VectorXd> rows;
  for (auto i : candidates) rows.push_back(data.row(i));
  std::vector<double> nearest(rows.size(), std::numeric_limits<double>::infinity());
  std::size_t pick = 0;
  for (std::size_t k = 0; k < components; ++k) {
    p.mu.push_back(rows[pick]);
    for (std::size_t j = 0; j < rows.size(); ++j) nearest[j] = std::min(nearest[j], (rows[j] - rows[pick]).squaredNorm());
    pick = static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    p.eta.push_back(Eigen::VectorXd::Zero(d));
    p.factor.push_back(Eigen::MatrixXd::Identity(d, d));
  }
  return p;
}

double component_log_density(const MixtureParams& params, std::size_t k, const Eigen::VectorXd& x) {
  check_component(params, k);
  if (x.size() != static_cast<Eigen::Index>(params.dim())) throw ContractError("feature dimension mismatch");
  GaussianTerms t;
  const double log_norm = -0.5 * static_cast<double>(params.dim()) * kLog2Pi - log_abs_det(params.factor[k]);
  return gaussian_terms(params.factor[k], log_norm, x, params.mu[k], t);
}

Eigen::VectorXd responsibilities(const Eigen::VectorXd& x, int y, const MixtureParams& params, double c,
                                 std::size_t datum) {
  if (y != 1 && y != -1) throw ContractError("label must be +1 or -1");
  params.validate();
  if (x.size() != static_cast<Eigen::Index>(params.dim())) throw ContractError("feature dimension mismatch");
  const ComponentCache cache(params);
  Eigen::VectorXd l(static_cast<Eigen::Index>(params.components()));
  GaussianTerms t;
  for (std::size_t k = 0; k < params.components(); ++k) {
    const double margin = 1.0 - y * params.eta[k].dot(x);
    l[static_cast<Eigen::Index>(k)] =
        gaussian_terms(params.factor[k], cache.log_norm[k], x, params.mu[k], t) - c * std::max(0.0, margin);
  }
  normalize_log(l, datum);
  return l;
}

Eigen::VectorXd responsibilities_unlabelled(const Eigen::VectorXd& x, const MixtureParams& params) {
  params.validate();
  if (x.size() != static_cast<Eigen::Index>(params.dim())) throw ContractError("feature dimension mismatch");
  const ComponentCache cache(params);
  Eigen::VectorXd l(static_cast<Eigen::Index>(params.components()));
  GaussianTerms t;
  for (std::size_t k = 0; k < params.components(); ++k) {
    l[static_cast<Eigen::Index>(k)] = gaussian_terms(params.factor[k], cache.log_norm[k], x, params.mu[k], t);
  }
  normalize_log(l, 0);
  return l;
}

Eigen::VectorXd ds_grad_eta(const MixtureParams& params, std::size_t k, const Minibatch& batch,
                            const Dataset& data, double c) {
  check_component(params, k);
  check_data(params, data);
  const ComponentCache cache(params);
  Eigen::VectorXd g = -params.eta[k];
  DatumEval ev;
  for (auto i : batch.indices) {
    evaluate_datum(params, cache, data, i, c, true, data.row(i), ev);
    normalize_log(ev.log_terms, i);
    if (ev.active[k]) data.add_row(i, batch.scale * ev.log_terms[static_cast<Eigen::Index>(k)] * c * data.label(i), g);
  }
  return g;
}

Eigen::VectorXd ds_grad_mu(const MixtureParams& params, std::size_t k, const Minibatch& batch,
                           const Dataset& data, double c, const MixturePrior& prior) {
  check_component(params, k);
  check_data(params, data);
  const ComponentCache cache(params);
  Eigen::VectorXd g = -params.mu[k] / prior.mu_variance;
  DatumEval ev;
  for (auto i : batch.indices) {
    evaluate_datum(params, cache, data, i, c, true, data.row(i), ev);
    normalize_log(ev.log_terms, i);
    g += batch.scale * ev.log_terms[static_cast<Eigen::Index>(k)] * ev.gauss[k].s;
  }
  return g;
}

Eigen::MatrixXd ds_grad_L(const MixtureParams& params, std::size_t k, const Minibatch& batch,
                          const Dataset& data, double c) {
  check_component(params, k);
  check_data(params, data);
  const std::size_t d = params.dim();
  const ComponentCache cache(params);
  Eigen::VectorXd mu_sink = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::VectorXd tri = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tri_size(d)));
  DatumEval ev;
  for (auto i : batch.indices) {
    evaluate_datum(params, cache, data, i, c, true, data.row(i), ev);
    normalize_log(ev.log_terms, i);
    add_gaussian_grad(params.factor[k], ev.gauss[k], batch.scale * ev.log_terms[static_cast<Eigen::Index>(k)],
                      mu_sink, tri);
  }
  Eigen::MatrixXd g;
  unpack_upper(tri, g, d);
  return g;
}

double mixture_log_q(const MixtureParams& params, const Dataset& data, double c, const MixturePrior& prior) {
  params.validate();
  check_data(params, data);
  const double d = static_cast<double>(params.dim());
  double lp = 0.0;
  for (std::size_t k = 0; k < params.components(); ++k) {
    lp += -0.5 * d * kLog2Pi - 0.5 * params.eta[k].squaredNorm();
    lp += -0.5 * d * (kLog2Pi + std::log(prior.mu_variance)) - 0.5 * params.mu[k].squaredNorm() / prior.mu_variance;
  }
  const ComponentCache cache(params);
  DatumEval ev;
  for (std::size_t i = 0; i < data.size(); ++i) {
    evaluate_datum(params, cache, data, i, c, true, data.row(i), ev);
    lp += log_sum_exp(ev.log_terms);
  }
  return lp;
}

MixtureEnergy::MixtureEnergy(MixtureParams reference, double c, MixturePrior prior, MixtureBlocks blocks)
    : reference_(std::move(reference)), c_(c), prior_(prior), blocks_(blocks) {
  reference_.validate();
  if (!(c >= 0.0)) throw ConfigError("regularization constant c must be >= 0");
  if (!(prior.mu_variance > 0.0)) throw ConfigError("mean prior variance must be positive");
  dim_ = reference_.dim();
  tri_ = tri_size(dim_);
  const std::size_t K = components();
  packed_size_ = blocks_ == MixtureBlocks::kAll ? K * (2 * dim_ + tri_) : K * dim_;
}

Eigen::VectorXd MixtureEnergy::pack(const MixtureParams& params) const {
  if (params.components() != components() || params.dim() != dim_) throw ContractError("mixture shape mismatch");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(packed_size_));
  const auto d = static_cast<Eigen::Index>(dim_);
  for (std::size_t k = 0; k < components(); ++k) {
    theta.segment(static_cast<Eigen::Index>(eta_offset(k)), d) = params.eta[k];
    if (blocks_ == MixtureBlocks::kEtaOnly) continue;
    theta.segment(static_cast<Eigen::Index>(mu_offset(k)), d) = params.mu[k];
    pack_upper(params.factor[k], theta.segment(static_cast<Eigen::Index>(factor_offset(k)), static_cast<Eigen::Index>(tri_)));
  }
  return theta;
}

MixtureParams MixtureEnergy::unpack(const Eigen::VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != packed_size_) throw ContractError("packed parameter length mismatch");
  MixtureParams p = reference_;
  const auto d = static_cast<Eigen::Index>(dim_);
  for (std::size_t k = 0; k < components(); ++k) {
    p.eta[k] = theta.segment(static_cast<Eigen::Index>(eta_offset(k)), d);
    if (blocks_ == MixtureBlocks::kEtaOnly) continue;
    p.mu[k] = theta.segment(static_cast<Eigen::Index>(mu_offset(k)), d);
    unpack_upper(theta.segment(static_cast<Eigen::Index>(factor_offset(k)), static_cast<Eigen::Index>(tri_)), p.factor[k], dim_);
  }
  return p;
}

double MixtureEnergy::prior_logdensity(const Eigen::VectorXd& theta) const {
  const MixtureParams p = unpack(theta);
  const double d = static_cast<double>(dim_);
  double lp = 0.0;
  for (std::size_t k = 0; k < components(); ++k) {
    lp += -0.5 * d * kLog2Pi - 0.5 * p.eta[k].squaredNorm();
    if (blocks_ == MixtureBlocks::kAll) {
      lp += -0.5 * d * (kLog2Pi + std::log(prior_.mu_variance)) - 0.5 * p.mu[k].squaredNorm() / prior_.mu_variance;
    }
  }
  return lp;
}

void MixtureEnergy::add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                                      Eigen::Ref<Eigen::VectorXd> out) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  for (std::size_t k = 0; k < components(); ++k) {
    const auto e = static_cast<Eigen::Index>(eta_offset(k));
    out.segment(e, d) -= scale * theta.segment(e, d);
    if (blocks_ == MixtureBlocks::kAll) {
      const auto m = static_cast<Eigen::Index>(mu_offset(k));
      out.segment(m, d) -= (scale / prior_.mu_variance) * theta.segment(m, d);
    }
  }
}

double MixtureEnergy::datum_loglik(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i) const {
  const MixtureParams p = unpack(theta);
  check_data(p, data);
  const ComponentCache cache(p);
  DatumEval ev;
  evaluate_datum(p, cache, data, i, c_, true, data.row(i), ev);
  return log_sum_exp(ev.log_terms);
}

void MixtureEnergy::add_datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i,
                                      double scale, Eigen::Ref<Eigen::VectorXd> out) const {
  const std::size_t rows[] = {i};
  add_batch_subgrad(theta, data, rows, scale, out);
}

void MixtureEnergy::add_batch_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                                      std::span<const std::size_t> rows, double scale,
                                      Eigen::Ref<Eigen::VectorXd> out) const {
  const MixtureParams p = unpack(theta);
  check_data(p, data);
  const ComponentCache cache(p);
  const auto d = static_cast<Eigen::Index>(dim_);
  const auto t = static_cast<Eigen::Index>(tri_);
  DatumEval ev;
  for (auto i : rows) {
    evaluate_datum(p, cache, data, i, c_, true, data.row(i), ev);
    normalize_log(ev.log_terms, i);
    const int y = data.label(i);
    for (std::size_t k = 0; k < components(); ++k) {
      const double r = ev.log_terms[static_cast<Eigen::Index>(k)];
      if (ev.active[k]) data.add_row(i, scale * r * c_ * y, out.segment(static_cast<Eigen::Index>(eta_offset(k)), d));
      if (blocks_ == MixtureBlocks::kAll) {
        add_gaussian_grad(p.factor[k], ev.gauss[k], scale * r, out.segment(static_cast<Eigen::Index>(mu_offset(k)), d),
                          out.segment(static_cast<Eigen::Index>(factor_offset(k)), t));
      }
    }
  }
}

void MixtureEnergy::project(Eigen::VectorXd& theta) const {
  if (blocks_ == MixtureBlocks::kEtaOnly) return;
  for (std::size_t k = 0; k < components(); ++k) {
    floor_diagonal(theta.segment(static_cast<Eigen::Index>(factor_offset(k)), static_cast<Eigen::Index>(tri_)), dim_);
  }
}

void doubly_stochastic_hmc_round(const MixtureEnergy& energy, ChainState& state, const SamplerConfig& config,
                                 const MinibatchSource& source, Rng& rng, InnerSampler sampler) {
  if (sampler == InnerSampler::kSsgld) {
    ssgld_step(energy, state, config, source, rng);
  } else {
    ssgnht_draw(energy, state, config, source, rng);
  }
}

std::vector<std::size_t> gibbs_assignments(const MixtureParams& params, const Dataset& data, double c, Rng& rng) {
  params.validate();
  check_data(params, data);
  std::vector<std::size_t> z(data.size(), 0);
  const std::size_t K = params.components();
  if (K == 1) return z;
  const ComponentCache cache(params);
  DatumEval ev;
  for (std::size_t i = 0; i < data.size(); ++i) {
    evaluate_datum(params, cache, data, i, c, true, data.row(i), ev);
    normalize_log(ev.log_terms, i);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t k = 0;
    for (; k + 1 < K; ++k) {
      acc += ev.log_terms[static_cast<Eigen::Index>(k)];
      if (u < acc) break;
    }
    z[i] = k;
  }
  return z;
}

int gibbs_classifier_predict(std::span<const MixtureParams> samples, const Eigen::VectorXd& x, Rng& rng,
                             int votes) {
  if (samples.empty()) throw ContractError("no posterior samples to vote with");
  if (votes <= 0) throw ContractError("number of votes must be positive");
  long tally = 0;
  for (int v = 0; v < votes; ++v) {
    const MixtureParams& s = samples[rng.index(samples.size())];
    std::size_t k = 0;
    if (s.components() > 1) {
      const Eigen::VectorXd r = responsibilities_unlabelled(x, s);
      const double u = rng.uniform();
      double acc = 0.0;
      for (; k + 1 < s.components(); ++k) {
        acc += r[static_cast<Eigen::Index>(k)];
        if (u < acc) break;
      }
    }
    tally += predict(s.eta[k], x);
  }
  return tally >= 0 ? 1 : -1;
}

HmcWithinGibbs::HmcWithinGibbs(const Dataset& data, MixtureParams init, double c, MixturePrior prior,
                               SamplerConfig eta_config, SamplerConfig gaussian_config, InnerSampler sampler,
                               Rng& rng)
    : data_(&data),
      params_(std::move(init)),
      c_(c),
      prior_(prior),
      eta_config_(std::move(eta_config)),
      gaussian_config_(std::move(gaussian_config)),
      sampler_(sampler) {
  params_.validate();
  check_data(params_, data);
  if (!(c >= 0.0)) throw ConfigError("regularization constant c must be >= 0");
  eta_config_.validate();
  gaussian_config_.validate();
  const GaussianComponentModel gauss(params_.dim(), prior_);
  for (std::size_t k = 0; k < params_.components(); ++k) {
    eta_states_.push_back(ChainState::start(params_.eta[k], eta_config_, rng));
    gaussian_states_.push_back(ChainState::start(gauss.pack(params_.mu[k], params_.factor[k]), gaussian_config_, rng));
  }
}

void HmcWithinGibbs::round(Rng& rng) {
  auto t0 = std::chrono::steady_clock::now();
  assignments_ = gibbs_assignments(params_, *data_, c_, rng);
  times_.assignment_ms += elapsed_ms(t0);

  const LinearSvmModel svm(params_.dim(), c_);
  const GaussianComponentModel gauss(params_.dim(), prior_);
  const auto d = static_cast<Eigen::Index>(params_.dim());
  for (std::size_t k = 0; k < params_.components(); ++k) {
    std::vector<std::size_t> pop = members(assignments_, k);
    const bool empty = pop.empty();

    t0 = std::chrono::steady_clock::now();
    const MinibatchSource eta_source(*data_, pop, eta_config_.batch_size);
    if (sampler_ == InnerSampler::kSsgld) {
      ssgld_step(svm, eta_states_[k], eta_config_, eta_source, rng);
    } else {
      ssgnht_draw(svm, eta_states_[k], eta_config_, eta_source, rng);
    }
    params_.eta[k] = eta_states_[k].theta;
    times_.eta_ms += elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    if (empty) {
      // No data: mean from its prior, factor reset to the identity.
      Eigen::VectorXd mu(d);
      rng.fill_normal(mu);
      params_.mu[k] = std::sqrt(prior_.mu_variance) * mu;
      params_.factor[k] = Eigen::MatrixXd::Identity(d, d);
      gaussian_states_[k].theta = gauss.pack(params_.mu[k], params_.factor[k]);
    } else {
      const MinibatchSource g_source(*data_, std::move(pop), gaussian_config_.batch_size);
      ssgld_step(gauss, gaussian_states_[k], gaussian_config_, g_source, rng);
      gauss.unpack(gaussian_states_[k].theta, params_.mu[k], params_.factor[k]);
    }
    times_.gaussian_ms += elapsed_ms(t0);
  }
}

GaussianComponentModel::GaussianComponentModel(std::size_t dim, MixturePrior prior) : dim_(dim), prior_(prior) {
  if (!(prior.mu_variance > 0.0)) throw ConfigError("mean prior variance must be positive");
}

Eigen::VectorXd GaussianComponentModel::pack(const Eigen::VectorXd& mu, const Eigen::MatrixXd& factor) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  if (mu.size() != d || factor.rows() != d || factor.cols() != d) throw ContractError("component shape mismatch");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(dim()));
  theta.head(d) = mu;
  pack_upper(factor, theta.tail(static_cast<Eigen::Index>(tri_size(dim_))));
  return theta;
}

void GaussianComponentModel::unpack(const Eigen::VectorXd& theta, Eigen::VectorXd& mu,
                                    Eigen::MatrixXd& factor) const {
  if (static_cast<std::size_t>(theta.size()) != dim()) throw ContractError("packed parameter length mismatch");
  mu = theta.head(static_cast<Eigen::Index>(dim_));
  unpack_upper(theta.tail(static_cast<Eigen::Index>(tri_size(dim_))), factor, dim_);
}

double GaussianComponentModel::prior_logdensity(const Eigen::VectorXd& theta) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  return -0.5 * static_cast<double>(dim_) * (kLog2Pi + std::log(prior_.mu_variance)) -
         0.5 * theta.head(d).squaredNorm() / prior_.mu_variance;
}

void GaussianComponentModel::add_prior_subgrad(const Eigen::VectorXd& theta, double scale,
                                               Eigen::Ref<Eigen::VectorXd> out) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  out.head(d) -= (scale / prior_.mu_variance) * theta.head(d);
}

double GaussianComponentModel::datum_loglik(const Eigen::VectorXd& theta, const Dataset& data,
                                            std::size_t i) const {
  Eigen::VectorXd mu;
  Eigen::MatrixXd factor;
  unpack(theta, mu, factor);
  GaussianTerms t;
  const double log_norm = -0.5 * static_cast<double>(dim_) * kLog2Pi - log_abs_det(factor);
  return gaussian_terms(factor, log_norm, data.row(i), mu, t);
}

void GaussianComponentModel::add_datum_subgrad(const Eigen::VectorXd& theta, const Dataset& data, std::size_t i,
                                               double scale, Eigen::Ref<Eigen::VectorXd> out) const {
  const std::size_t rows[] = {i};
  add_batch_subgrad(theta, data, rows, scale, out);
}

void GaussianComponentModel::add_batch_subgrad(const Eigen::VectorXd& theta, const Dataset& data,
                                               std::span<const std::size_t> rows, double scale,
                                               Eigen::Ref<Eigen::VectorXd> out) const {
  Eigen::VectorXd mu;
  Eigen::MatrixXd factor;
  unpack(theta, mu, factor);
  const auto d = static_cast<Eigen::Index>(dim_);
  const auto t = static_cast<Eigen::Index>(tri_size(dim_));
  GaussianTerms terms;
  for (auto i : rows) {
    gaussian_terms(factor, 0.0, data.row(i), mu, terms);
    add_gaussian_grad(factor, terms, scale, out.head(d), out.tail(t));
  }
}

void GaussianComponentModel::project(Eigen::VectorXd& theta) const {
  floor_diagonal(theta.tail(static_cast<Eigen::Index>(tri_size(dim_))), dim_);
}

}  // namespace ssmcmc
