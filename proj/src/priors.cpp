#include "bsts/priors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bsts {

void InverseGammaPrior::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("inverse gamma prior needs nu > 0");
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("inverse gamma prior needs s > 0");
}

SpikeSlabPrior SpikeSlabPrior::uniform(Eigen::Index k, double inclusion_prob, double prior_mean, double slab_variance) {
  SpikeSlabPrior p{Eigen::VectorXd::Constant(k, inclusion_prob), Eigen::VectorXd::Constant(k, prior_mean),
                   Eigen::VectorXd::Constant(k, slab_variance)};
  p.validate();
  return p;
}

void SpikeSlabPrior::validate() const {
  const Eigen::Index k = inclusion_prob.size();
  if (prior_mean.size() != k || slab_variance.size() != k)
    throw std::invalid_argument("spike-and-slab prior vectors differ in length");
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(inclusion_prob[j] >= 0.0 && inclusion_prob[j] <= 1.0))
      throw std::invalid_argument("inclusion probability " + std::to_string(j + 1) + " outside [0, 1]");
    if (!(slab_variance[j] > 0.0) || !std::isfinite(slab_variance[j]))
      throw std::invalid_argument("slab variance " + std::to_string(j + 1) + " must be positive");
    if (!std::isfinite(prior_mean[j]))
      throw std::invalid_argument("prior mean " + std::to_string(j + 1) + " is not finite");
  }
}

SpikeSlabPrior SpikeSlabPrior::append(const SpikeSlabPrior& other) const {
  auto cat = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size() + b.size());
    out << a, b;
    return out;
  };
  return {cat(inclusion_prob, other.inclusion_prob), cat(prior_mean, other.prior_mean),
          cat(slab_variance, other.slab_variance)};
}

int McmcConfig::retained() const {
  const int kept = iterations - resolved_burn_in();
  return kept <= 0 ? 0 : (kept + thin - 1) / thin;
}

void McmcConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  const int b = resolved_burn_in();
  if (b < 0 || b >= iterations) throw std::invalid_argument("burn-in must be nonnegative and below iterations");
}

}  // namespace bsts
