#include "ssmcmc/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/errors.hpp"
#include "ssmcmc/samplers.hpp"

namespace ssmcmc {

Potential1D Potential1D::abs_plus_quadratic() {
  return {[](double q) { return std::abs(q) + 0.5 * q * q; },
          [](double q) { return (q > 0.0 ? 1.0 : (q < 0.0 ? -1.0 : 0.0)) + q; },
          {0.0}};
}

Potential1D Potential1D::quadratic() {
  return {[](double q) { return 0.5 * q * q; }, [](double q) { return q; }, {}};
}

SmoothedPotential1D::SmoothedPotential1D(Potential1D base, double q0, double eps)
    : base_(std::move(base)), q0_(q0), eps_(eps) {
  if (!(eps > 0.0)) throw ContractError("smoothing width must be positive");
  for (double k : base_.kinks) {
    if (k != q0 && std::abs(k - q0) <= eps) throw ContractError("more than one kink inside the smoothing window");
  }
  lo_value_ = base_.value(q0 - eps);
  lo_slope_ = base_.derivative(q0 - eps);
  hi_value_ = base_.value(q0 + eps);
  hi_slope_ = base_.derivative(q0 + eps);
}

double SmoothedPotential1D::value(double q) const {
  if (std::abs(q - q0_) > eps_) return base_.value(q);
  const double h = 2.0 * eps_;
  const double t = (q - (q0_ - eps_)) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * lo_value_ + (t3 - 2 * t2 + t) * h * lo_slope_ + (-2 * t3 + 3 * t2) * hi_value_ +
         (t3 - t2) * h * hi_slope_;
}

double SmoothedPotential1D::derivative(double q) const {
  if (std::abs(q - q0_) > eps_) return base_.derivative(q);
  const double h = 2.0 * eps_;
  const double t = (q - (q0_ - eps_)) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * lo_value_ + (-6 * t2 + 6 * t) * hi_value_) / h + (3 * t2 - 4 * t + 1) * lo_slope_ +
         (3 * t2 - 2 * t) * hi_slope_;
}

Potential1D SmoothedPotential1D::as_potential() const {
  Potential1D out;
  out.value = [self = *this](double q) { return self.value(q); };
  out.derivative = [self = *this](double q) { return self.derivative(q); };
  for (double k : base_.kinks)
    if (k != q0_) out.kinks.push_back(k);
  return out;
}

SmoothedPotential1D smooth_poly_1d(const Potential1D& base, double q0, double eps) {
  return SmoothedPotential1D(base, q0, eps);
}

QuadratureMoments quadrature_moments(const Potential1D& potential, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> cuts{lo};
  for (double k : potential.kinks)
    if (k > lo && k < hi) cuts.push_back(k);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s], b = cuts[s + 1];
    z += gauss_kronrod<double, 61>::integrate([&](double q) { return std::exp(-potential.value(q)); }, a, b, 15, 1e-13);
    m1 += gauss_kronrod<double, 61>::integrate([&](double q) { return q * std::exp(-potential.value(q)); }, a, b, 15, 1e-13);
    m2 += gauss_kronrod<double, 61>::integrate([&](double q) { return q * q * std::exp(-potential.value(q)); }, a, b, 15, 1e-13);
  }
  return {m1 / z, m2 / z};
}

namespace {

struct ChainRun {
  std::vector<double> draws;
  double acceptance;
};

ChainRun run_hmc_1d(const Potential1D& u, const SmoothingStudyConfig& config) {
  const Potential1DModel model(u);
  const Dataset empty;
  SamplerConfig sc;
  sc.schedule = StepsizeSchedule::constant(config.stepsize);
  sc.leapfrog_steps = config.leapfrog_steps;
  sc.mh_correction = true;
  const MinibatchSource source(empty, 0);
  Rng rng(config.seed);
  ChainState state = ChainState::start(Eigen::VectorXd::Zero(1), sc, rng);
  ChainRun run;
  run.draws.reserve(config.draws);
  for (std::size_t t = 0; t < config.burn_in + config.draws; ++t) {
    // Jittered path length: a fixed one near half an orbit period maps q to -q
    // and freezes q^2 on near-harmonic potentials.
    sc.leapfrog_steps = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(config.leapfrog_steps)));
    hmc_draw(model, state, sc, source, rng);
    if (t >= config.burn_in) run.draws.push_back(state.theta[0]);
  }
  run.acceptance = state.acceptance_rate();
  return run;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> squares(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j] * v[j];
  return out;
}

}  // namespace

SmoothingStudyReport smoothing_convergence_study(const Potential1D& potential, double q0,
                                                 std::span<const double> eps_list,
                                                 const SmoothingStudyConfig& config) {
  if (eps_list.empty()) throw ContractError("empty smoothing width list");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw ContractError("smoothing widths must be strictly decreasing");
  }
  SmoothingStudyReport report;
  report.exact = quadrature_moments(potential);
  report.quadrature_mean = report.exact.mean;
  const ChainRun base = run_hmc_1d(potential, config);
  const std::vector<double> base_sq = squares(base.draws);
  report.subgradient_mean = mean_of(base.draws);
  report.subgradient_se = batch_means_se(base.draws, config.batches);
  report.subgradient_second = mean_of(base_sq);
  report.subgradient_acceptance = base.acceptance;
  for (double eps : eps_list) {
    const Potential1D smoothed = smooth_poly_1d(potential, q0, eps).as_potential();
    const ChainRun run = run_hmc_1d(smoothed, config);
    const std::vector<double> sq = squares(run.draws);
    std::vector<double> diff(run.draws.size()), diff_sq(run.draws.size());
    for (std::size_t j = 0; j < diff.size(); ++j) {
      diff[j] = run.draws[j] - base.draws[j];
      diff_sq[j] = sq[j] - base_sq[j];
    }
    const double m = mean_of(run.draws);
    const double m2 = mean_of(sq);
    report.entries.push_back({eps, m, batch_means_se(run.draws, config.batches), std::abs(m - report.subgradient_mean),
                              batch_means_se(diff, config.batches), m2, std::abs(m2 - report.subgradient_second),
                              batch_means_se(diff_sq, config.batches), quadrature_moments(smoothed)});
  }
  report.nonincreasing = true;
  report.nonincreasing_within_mc = true;
  report.second_nonincreasing_within_mc = true;
  for (std::size_t i = 1; i < report.entries.size(); ++i) {
    const auto& prev = report.entries[i - 1];
    const auto& cur = report.entries[i];
    if (cur.discrepancy > prev.discrepancy) {
      report.nonincreasing = false;
      if (cur.discrepancy - prev.discrepancy > 3.0 * std::hypot(prev.discrepancy_se, cur.discrepancy_se)) {
        report.nonincreasing_within_mc = false;
      }
    }
    if (cur.second_discrepancy - prev.second_discrepancy >
        3.0 * std::hypot(prev.second_discrepancy_se, cur.second_discrepancy_se)) {
      report.second_nonincreasing_within_mc = false;
    }
  }
  return report;
}

}  // namespace ssmcmc
