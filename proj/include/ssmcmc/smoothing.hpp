#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/potential.hpp"

namespace ssmcmc {

/// One-dimensional potential, differentiable except at the listed kinks.
/// `derivative` may return any subgradient at a kink.
struct Potential1D {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::vector<double> kinks;

  static Potential1D abs_plus_quadratic();  // |q| + q^2/2, kink at 0
  static Potential1D quadratic();           // q^2/2, no kinks
};

/// U replaced on [q0 - eps, q0 + eps] by the cubic Hermite interpolant that
/// matches U and U' at both window ends. C^1 on the whole line.
class SmoothedPotential1D {
 public:
  SmoothedPotential1D(Potential1D base, double q0, double eps);

  double value(double q) const;
  double derivative(double q) const;
  double eps() const { return eps_; }
  double kink() const { return q0_; }
  /// As a Potential1D; the smoothed kink is removed from the kink list.
  Potential1D as_potential() const;

 private:
  Potential1D base_;
  double q0_;
  double eps_;
  double lo_value_, lo_slope_, hi_value_, hi_slope_;
};

/// Throws ContractError unless eps > 0 and q0 is the only kink in the window.
SmoothedPotential1D smooth_poly_1d(const Potential1D& base, double q0, double eps);

/// exp(-U) as an energy model over q with no data terms.
class Potential1DModel final : public EnergyModel {
 public:
  explicit Potential1DModel(Potential1D potential) : u_(std::move(potential)) {}

  std::size_t dim() const override { return 1; }
  double prior_logdensity(const Eigen::VectorXd& q) const override { return -u_.value(q[0]); }
  void add_prior_subgrad(const Eigen::VectorXd& q, double scale, Eigen::Ref<Eigen::VectorXd> out) const override {
    out[0] -= scale * u_.derivative(q[0]);
  }
  double datum_loglik(const Eigen::VectorXd&, const Dataset&, std::size_t) const override { return 0.0; }
  void add_datum_subgrad(const Eigen::VectorXd&, const Dataset&, std::size_t, double,
                         Eigen::Ref<Eigen::VectorXd>) const override {}

 private:
  Potential1D u_;
};

/// E[q] and E[q^2] under exp(-U) on [lo, hi] by adaptive Gauss-Kronrod, split at the kinks.
struct QuadratureMoments {
  double mean;
  double second;
};
QuadratureMoments quadrature_moments(const Potential1D& potential, double lo = -40.0, double hi = 40.0);

struct SmoothingStudyConfig {
  std::size_t draws = 20000;
  std::size_t burn_in = 1000;
  double stepsize = 0.25;
  int leapfrog_steps = 20;  // per draw: uniform on 1..leapfrog_steps
  std::size_t batches = 20;
  std::uint64_t seed = 1;
};

struct SmoothingStudyEntry {
  double eps;
  double mean;
  double se;
  double discrepancy;            // |mean_eps - mean_subgradient|
  double discrepancy_se;         // batch-means SE of the paired per-draw difference
  double second;                 // sample E[q^2] under U_eps
  double second_discrepancy;     // |second_eps - second_subgradient|
  double second_discrepancy_se;  // batch-means SE of the paired q^2 difference
  QuadratureMoments exact;       // quadrature moments of exp(-U_eps)
};

struct SmoothingStudyReport {
  QuadratureMoments exact;       // quadrature moments of exp(-U)
  double quadrature_mean;
  double subgradient_mean;
  double subgradient_se;
  double subgradient_second;
  double subgradient_acceptance;
  std::vector<SmoothingStudyEntry> entries;
  bool nonincreasing;                   // mean discrepancies nonincreasing as eps shrinks
  bool nonincreasing_within_mc;         // each increase, if any, within 3 paired standard errors
  bool second_nonincreasing_within_mc;  // same rule for the second-moment discrepancies
};

/// MH-corrected HMC on every U_eps and MH-corrected subgradient HMC on U, all
/// chains driven by the same seed so that their differences isolate the
/// smoothing. `eps_list` must be strictly decreasing.
SmoothingStudyReport smoothing_convergence_study(const Potential1D& potential, double q0,
                                                 std::span<const double> eps_list,
                                                 const SmoothingStudyConfig& config = {});

}  // namespace ssmcmc
