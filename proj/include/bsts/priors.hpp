#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace bsts {

/// Conjugate prior on a variance: 1/sigma^2 ~ Gamma(nu/2, rate = s/2).
/// `nu` acts as a prior sample size and `s` as a prior sum of squares.
struct InverseGammaPrior {
  double nu = 0.01;
  double s = 0.01;

  void validate() const;
  /// Prior guess of sigma^2 (s / nu).
  double guess() const { return s / nu; }
};

/// Spike-and-slab prior with an exact point mass at zero:
///   gamma_j ~ Bernoulli(pi_j),  beta_j | gamma_j = 1 ~ N(b_j, v_j),  beta_j | gamma_j = 0 = 0.
struct SpikeSlabPrior {
  Eigen::VectorXd inclusion_prob;
  Eigen::VectorXd prior_mean;
  Eigen::VectorXd slab_variance;

  static SpikeSlabPrior uniform(Eigen::Index k, double inclusion_prob = 0.5, double prior_mean = 0.0,
                                double slab_variance = 1.0);

  Eigen::Index size() const { return inclusion_prob.size(); }
  void validate() const;
  /// Concatenates two priors column-wise.
  SpikeSlabPrior append(const SpikeSlabPrior& other) const;
};

struct McmcConfig {
  int iterations = 1000;
  /// Defaults to iterations / 3 when unset.
  std::optional<int> burn_in;
  int thin = 1;
  std::uint64_t seed = 1;

  int resolved_burn_in() const { return burn_in.value_or(iterations / 3); }
  int retained() const;
  void validate() const;
};

}  // namespace bsts
