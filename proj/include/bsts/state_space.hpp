#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsts/time_series.hpp"

namespace bsts {

using Rng = std::mt19937_64;

/// Raised when the numerics break down (zero predictive variance, divergent
/// state paths, singular conditional precision).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Scalar-observation linear Gaussian state-space model
///
///   y_t       = Z_t a_t + e_t,        e_t ~ N(0, H)
///   a_{t+1}   = T a_t + R n_t,        n_t ~ N(0, diag(Q))
///
/// `obs_map` holds either a single row (constant Z) or one row per time
/// point. H and Q are constant over time.
struct SystemMatrices {
  Eigen::MatrixXd obs_map;
  Eigen::MatrixXd transition;
  Eigen::MatrixXd error_control;
  double obs_variance = 1.0;
  Eigen::VectorXd state_variances;

  Eigen::Index state_dim() const { return transition.rows(); }
  Eigen::Index innovation_dim() const { return error_control.cols(); }
  bool time_varying() const { return obs_map.rows() > 1; }

  auto obs_row(Eigen::Index t) const { return obs_map.row(obs_map.rows() == 1 ? 0 : t); }

  /// R diag(Q) R'
  Eigen::MatrixXd state_noise() const;

  /// Throws std::invalid_argument on inconsistent dimensions, negative
  /// variances, or a time-varying Z whose length differs from `n` (when n > 0).
  void validate(Eigen::Index n = 0) const;
};

struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  /// Mean zero, covariance variance * I.
  static GaussianState diffuse(Eigen::Index dim, double variance = 1e7);
};

struct FilterResult {
  std::vector<GaussianState> predicted;
  std::vector<GaussianState> filtered;
  Eigen::VectorXd osa_mean;
  Eigen::VectorXd osa_variance;
  /// Innovations y_t - osa_mean_t; NaN where y_t is missing.
  Eigen::VectorXd innovation;
  double log_likelihood = 0.0;

  std::size_t size() const { return filtered.size(); }
};

/// Covariance-form Kalman filter. `init` is the prior for the state at the
/// first time point. Missing observations (NaN) skip the update step and add
/// nothing to the log-likelihood.
FilterResult kalman_filter(const SystemMatrices& model, const GaussianState& init,
                           const Eigen::VectorXd& y);
FilterResult kalman_filter(const SystemMatrices& model, const GaussianState& init,
                           const TimeSeries& y);

/// Fixed-interval smoother (backward r_t / N_t recursion, no inversion of
/// predicted covariances). Returns E[a_t | y_{1:n}] and Var[a_t | y_{1:n}].
std::vector<GaussianState> kalman_smooth(const SystemMatrices& model, const FilterResult& filter);

/// One draw of the full state path (m x n, one column per time point) from
/// p(a_{1:n} | y_{1:n}) by forward filtering, backward sampling.
Eigen::MatrixXd simulate_states(const SystemMatrices& model, const GaussianState& init,
                                const Eigen::VectorXd& y, Rng& rng);

struct SimulatedData {
  Eigen::VectorXd y;
  Eigen::MatrixXd states;  // m x n
};

/// Generates a state path from the transition equation and observations
/// from the measurement equation. The first state is drawn from `init`.
SimulatedData simulate_data(const SystemMatrices& model, const GaussianState& init, Eigen::Index n,
                            Rng& rng);

/// Draws from N(mean, cov) for a symmetric PSD `cov` (pivoted LDLT, negative
/// pivots clamped to zero).
Eigen::VectorXd draw_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

}  // namespace bsts
