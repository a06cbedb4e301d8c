#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsts/components.hpp"
#include "bsts/priors.hpp"
#include "bsts/state_space.hpp"

namespace bsts {

/// Variance priors for every innovation plus the observation noise, and the
/// spike-and-slab prior over the static coefficient block.
struct ModelPriors {
  InverseGammaPrior observation;
  std::vector<InverseGammaPrior> innovations;
  SpikeSlabPrior regression;

  void validate(const AssembledModel& model) const;
};

/// Fills every variance prior the components left unset with a prior guess
/// sigma = `fraction` * sd(y) carrying `nu` pseudo-observations, i.e.
/// s = nu * fraction^2 * var(y). A constant series falls back to a unit scale.
ModelPriors default_priors(const AssembledModel& model, const Eigen::VectorXd& y, double nu = 0.01,
                           double fraction = 0.01);

/// Retained MCMC output. Row d of every matrix belongs to retained draw d.
struct PosteriorDraws {
  McmcConfig config;
  AssembledModel model;
  ModelPriors priors;
  std::vector<int> iteration;
  std::vector<Eigen::MatrixXd> states;  // each m x n
  Eigen::MatrixXd beta;                 // draws x k
  Eigen::MatrixXi inclusion;            // draws x k, 0/1
  Eigen::MatrixXd state_variances;      // draws x r
  Eigen::VectorXd obs_variance;         // draws

  std::size_t size() const { return iteration.size(); }
};

/// Draws sigma^2 from its conjugate full conditional:
/// 1/sigma^2 ~ Gamma((nu + n)/2, rate (s + SSE)/2).
double draw_variance(std::span<const double> residuals, const InverseGammaPrior& prior, Rng& rng);

/// Sufficient statistics of a regression on fixed rows.
struct RegressionStats {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;

  static RegressionStats from(const Eigen::MatrixXd& X, const Eigen::VectorXd& target);
};

struct CoefficientDraw {
  Eigen::VectorXd beta;
  Eigen::VectorXi inclusion;
};

/// Log marginal likelihood of an inclusion pattern, up to a constant shared
/// by all patterns (sigma^2 known, beta integrated out).
double log_marginal_inclusion(const RegressionStats& stats, double sigma2, const SpikeSlabPrior& prior,
                              const Eigen::VectorXi& inclusion);

/// One sweep of spike-and-slab selection: each gamma_j in turn from its full
/// conditional given the others (beta integrated out), then beta over the
/// included set from its Gaussian conditional. Excluded coefficients are
/// exactly zero. `current` seeds the sweep; by default every column with
/// pi_j >= 0.5 starts included.
CoefficientDraw draw_coefficients(const RegressionStats& stats, double sigma2, const SpikeSlabPrior& prior,
                                  Rng& rng, const Eigen::VectorXi* current = nullptr);
CoefficientDraw draw_coefficients(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, double sigma2,
                                  const SpikeSlabPrior& prior, Rng& rng, const Eigen::VectorXi* current = nullptr);

/// Gibbs sampler cycling states (FFBS), innovation variances, static
/// coefficients and the observation variance. Deterministic given
/// config.seed. Missing y (NaN) is handled by the filter.
PosteriorDraws run_gibbs(const AssembledModel& model, const Eigen::VectorXd& y, const ModelPriors& priors,
                         const McmcConfig& config);

struct CalibrationOptions {
  int chains = 30;
  bool update_means = false;
  int threads = 1;
};

struct ChainDiagnostics {
  std::uint64_t seed = 0;
  Eigen::VectorXd inclusion_frequency;
  Eigen::VectorXd coefficient_mean;
};

struct CalibrationResult {
  SpikeSlabPrior prior;
  std::vector<ChainDiagnostics> chains;
};

/// Seed of chain `chain` derived from a base seed.
std::uint64_t chain_seed(std::uint64_t base, int chain);

/// Empirical-Bayes calibration: runs `chains` independent samplers and sets
/// each inclusion probability to the across-chain mean inclusion frequency
/// (and the prior means to the across-chain mean coefficient when
/// `update_means`).
CalibrationResult multi_seed_calibrate(const AssembledModel& model, const Eigen::VectorXd& y,
                                       const ModelPriors& priors, const McmcConfig& config,
                                       const CalibrationOptions& options);

/// Runs `count` tasks on up to `threads` worker threads. Task i only writes
/// its own slot, so results do not depend on the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

}  // namespace bsts
