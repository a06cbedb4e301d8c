#include "bsts/gibbs.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

namespace bsts {

void ModelPriors::validate(const AssembledModel& model) const {
  observation.validate();
  if (static_cast<Eigen::Index>(innovations.size()) != model.matrices.innovation_dim())
    throw std::invalid_argument("expected " + std::to_string(model.matrices.innovation_dim()) +
                                " innovation variance priors, got " + std::to_string(innovations.size()));
  for (const auto& p : innovations) p.validate();
  regression.validate();
  if (regression.size() != model.static_count())
    throw std::invalid_argument("spike-and-slab prior length differs from the static design");
}

ModelPriors default_priors(const AssembledModel& model, const Eigen::VectorXd& y, double nu, double fraction) {
  double scale = observed_variance(y);
  if (!(scale > 0.0)) scale = 1.0;
  // prior guess sigma = fraction * sd(y), worth nu observations
  const InverseGammaPrior fallback{nu, nu * fraction * fraction * scale};
  ModelPriors p;
  p.observation = fallback;
  for (const auto& given : model.innovation_priors) p.innovations.push_back(given.value_or(fallback));
  p.regression = model.static_prior;
  return p;
}

double draw_variance(std::span<const double> residuals, const InverseGammaPrior& prior, Rng& rng) {
  prior.validate();
  double sse = 0.0;
  for (double e : residuals) {
    if (!std::isfinite(e)) throw std::invalid_argument("non-finite residual in variance draw");
    sse += e * e;
  }
  const double shape = 0.5 * (prior.nu + static_cast<double>(residuals.size()));
  const double rate = 0.5 * (prior.s + sse);
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  return 1.0 / gamma(rng);
}

RegressionStats RegressionStats::from(const Eigen::MatrixXd& X, const Eigen::VectorXd& target) {
  if (X.rows() != target.size()) throw std::invalid_argument("design rows differ from target length");
  return {X.transpose() * X, X.transpose() * target};
}

namespace {

struct Conditional {
  std::vector<Eigen::Index> index;
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd mean;
  double log_marginal = 0.0;
};

// Gaussian conditional of the included coefficients and the log marginal
// likelihood of the pattern:
//   Omega = X'X / sigma2 + V^{-1},  c = X'y / sigma2 + V^{-1} b
//   log p(y | gamma) = -1/2 log|V| - 1/2 log|Omega| + 1/2 c' Omega^{-1} c - 1/2 b' V^{-1} b + const
Conditional conditional(const RegressionStats& stats, double sigma2, const SpikeSlabPrior& prior,
                        const Eigen::VectorXi& inclusion) {
  Conditional out;
  for (Eigen::Index j = 0; j < inclusion.size(); ++j)
    if (inclusion[j]) out.index.push_back(j);
  const auto q = static_cast<Eigen::Index>(out.index.size());
  if (q == 0) return out;
  Eigen::MatrixXd omega(q, q);
  Eigen::VectorXd c(q);
  double log_det_v = 0.0, quad_b = 0.0;
  for (Eigen::Index a = 0; a < q; ++a) {
    const Eigen::Index ja = out.index[a];
    for (Eigen::Index b = 0; b < q; ++b) omega(a, b) = stats.xtx(ja, out.index[b]) / sigma2;
    const double v = prior.slab_variance[ja];
    omega(a, a) += 1.0 / v;
    c[a] = stats.xty[ja] / sigma2 + prior.prior_mean[ja] / v;
    log_det_v += std::log(v);
    quad_b += prior.prior_mean[ja] * prior.prior_mean[ja] / v;
  }
  out.chol.compute(omega);
  if (out.chol.info() != Eigen::Success)
    throw NumericalError("singular conditional precision for the included coefficients");
  out.mean = out.chol.solve(c);
  const double log_det_omega = 2.0 * out.chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
  out.log_marginal = -0.5 * log_det_v - 0.5 * log_det_omega + 0.5 * c.dot(out.mean) - 0.5 * quad_b;
  if (!std::isfinite(out.log_marginal) || !out.mean.allFinite())
    throw NumericalError("singular conditional precision for the included coefficients");
  return out;
}

}  // namespace

double log_marginal_inclusion(const RegressionStats& stats, double sigma2, const SpikeSlabPrior& prior,
                              const Eigen::VectorXi& inclusion) {
  return conditional(stats, sigma2, prior, inclusion).log_marginal;
}

CoefficientDraw draw_coefficients(const RegressionStats& stats, double sigma2, const SpikeSlabPrior& prior, Rng& rng,
                                  const Eigen::VectorXi* current) {
  const Eigen::Index k = prior.size();
  if (stats.xtx.rows() != k || stats.xtx.cols() != k || stats.xty.size() != k)
    throw std::invalid_argument("design column count differs from the prior length");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("residual variance must be positive");

  Eigen::VectorXi gamma(k);
  if (current) {
    if (current->size() != k) throw std::invalid_argument("current inclusion vector has the wrong length");
    gamma = *current;
  } else {
    for (Eigen::Index j = 0; j < k; ++j) gamma[j] = prior.inclusion_prob[j] >= 0.5 ? 1 : 0;
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double pi = prior.inclusion_prob[j];
    if (pi <= 0.0) {
      gamma[j] = 0;
      continue;
    }
    if (pi >= 1.0) {
      gamma[j] = 1;
      continue;
    }
    gamma[j] = 1;
    const double with = conditional(stats, sigma2, prior, gamma).log_marginal;
    gamma[j] = 0;
    const double without = conditional(stats, sigma2, prior, gamma).log_marginal;
    const double log_odds = std::log(pi) - std::log1p(-pi) + with - without;
    const double p_include = 1.0 / (1.0 + std::exp(-log_odds));
    gamma[j] = unif(rng) < p_include ? 1 : 0;
  }

  CoefficientDraw out{Eigen::VectorXd::Zero(k), gamma};
  const Conditional cond = conditional(stats, sigma2, prior, gamma);
  const auto q = static_cast<Eigen::Index>(cond.index.size());
  if (q > 0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(q);
    for (Eigen::Index a = 0; a < q; ++a) z[a] = normal(rng);
    // Omega = L L'  =>  L'^{-1} z ~ N(0, Omega^{-1})
    const Eigen::VectorXd dev = cond.chol.matrixU().solve(z);
    for (Eigen::Index a = 0; a < q; ++a) out.beta[cond.index[a]] = cond.mean[a] + dev[a];
  }
  return out;
}

CoefficientDraw draw_coefficients(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, double sigma2,
                                  const SpikeSlabPrior& prior, Rng& rng, const Eigen::VectorXi* current) {
  if (design.cols() != prior.size()) throw std::invalid_argument("design column count differs from the prior length");
  if (!design.allFinite() || !target.allFinite()) throw std::invalid_argument("design or target has non-finite values");
  return draw_coefficients(RegressionStats::from(design, target), sigma2, prior, rng, current);
}

PosteriorDraws run_gibbs(const AssembledModel& model, const Eigen::VectorXd& y, const ModelPriors& priors,
                         const McmcConfig& config) {
  config.validate();
  priors.validate(model);
  const Eigen::Index n = y.size();
  if (n != model.length)
    throw std::invalid_argument("series length " + std::to_string(n) + " differs from the assembled length " +
                                std::to_string(model.length));
  for (Eigen::Index t = 0; t < n; ++t)
    if (std::isinf(y[t])) throw std::invalid_argument("non-finite observation at t=" + std::to_string(t + 1));

  const Eigen::Index r = model.matrices.innovation_dim();
  const Eigen::Index k = model.static_count();

  std::vector<Eigen::Index> observed;
  for (Eigen::Index t = 0; t < n; ++t)
    if (!is_missing(y[t])) observed.push_back(t);
  if (observed.empty()) throw std::invalid_argument("series has no observed values");
  const auto n_obs = static_cast<Eigen::Index>(observed.size());

  Eigen::MatrixXd X_obs(n_obs, k);
  for (Eigen::Index i = 0; i < n_obs; ++i) X_obs.row(i) = model.static_design.row(observed[i]);
  RegressionStats stats{X_obs.transpose() * X_obs, Eigen::VectorXd::Zero(k)};

  Rng rng(config.seed);
  SystemMatrices sm = model.matrices;
  sm.obs_variance = priors.observation.guess();
  for (Eigen::Index j = 0; j < r; ++j) sm.state_variances[j] = priors.innovations[j].guess();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXi gamma(k);
  for (Eigen::Index j = 0; j < k; ++j) gamma[j] = priors.regression.inclusion_prob[j] >= 1.0 ? 1 : 0;

  const int burn = config.resolved_burn_in();
  const int kept = config.retained();
  PosteriorDraws out;
  out.config = config;
  out.model = model;
  out.priors = priors;
  out.iteration.reserve(kept);
  out.states.reserve(kept);
  out.beta.resize(kept, k);
  out.inclusion.resize(kept, k);
  out.state_variances.resize(kept, r);
  out.obs_variance.resize(kept);

  const Eigen::MatrixXd Rt = model.matrices.error_control.transpose();
  const Eigen::MatrixXd& T = model.matrices.transition;
  Eigen::VectorXd adjusted(n), partial(n_obs), resid(n_obs), fitted_state(n);
  std::vector<double> innov(n > 1 ? n - 1 : 0);

  for (int it = 0; it < config.iterations; ++it) {
    try {
      // (1) state path given parameters, with the static contribution removed
      const Eigen::VectorXd xb = model.static_design * beta;
      adjusted = y - xb;
      const Eigen::MatrixXd alpha = simulate_states(sm, model.initial_state, adjusted, rng);
      for (Eigen::Index t = 0; t < n; ++t) fitted_state[t] = sm.obs_row(t).dot(alpha.col(t));

      // (2) innovation variances
      if (r > 0) {
        Eigen::MatrixXd eta(r, n > 1 ? n - 1 : 0);
        if (n > 1) eta = Rt * (alpha.rightCols(n - 1) - T * alpha.leftCols(n - 1));
        for (Eigen::Index j = 0; j < r; ++j) {
          for (Eigen::Index t = 0; t + 1 < n; ++t) innov[t] = eta(j, t);
          sm.state_variances[j] = draw_variance(innov, priors.innovations[j], rng);
        }
      }

      // (3) static coefficients on residuals net of the state contribution
      if (k > 0) {
        for (Eigen::Index i = 0; i < n_obs; ++i) partial[i] = y[observed[i]] - fitted_state[observed[i]];
        stats.xty.noalias() = X_obs.transpose() * partial;
        CoefficientDraw cd = draw_coefficients(stats, sm.obs_variance, priors.regression, rng, &gamma);
        beta = std::move(cd.beta);
        gamma = std::move(cd.inclusion);
      }

      // (4) observation variance
      for (Eigen::Index i = 0; i < n_obs; ++i) {
        const Eigen::Index t = observed[i];
        resid[i] = y[t] - fitted_state[t] - (k > 0 ? model.static_design.row(t).dot(beta) : 0.0);
      }
      sm.obs_variance = draw_variance(std::span<const double>(resid.data(), resid.size()), priors.observation, rng);

      if (!std::isfinite(sm.obs_variance) || !sm.state_variances.allFinite() || !beta.allFinite())
        throw NumericalError("non-finite parameter draw");
      if (!(sm.obs_variance > 0.0)) throw NumericalError("observation variance collapsed to zero");

      if (it >= burn && (it - burn) % config.thin == 0) {
        const auto d = static_cast<Eigen::Index>(out.iteration.size());
        out.iteration.push_back(it);
        out.states.push_back(alpha);
        out.beta.row(d) = beta.transpose();
        out.inclusion.row(d) = gamma.transpose();
        out.state_variances.row(d) = sm.state_variances.transpose();
        out.obs_variance[d] = sm.obs_variance;
      }
    } catch (const NumericalError& e) {
      throw NumericalError("sampler diverged at iteration " + std::to_string(it) + ": " + e.what());
    }
  }
  return out;
}

std::uint64_t chain_seed(std::uint64_t base, int chain) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(chain + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

CalibrationResult multi_seed_calibrate(const AssembledModel& model, const Eigen::VectorXd& y,
                                       const ModelPriors& priors, const McmcConfig& config,
                                       const CalibrationOptions& options) {
  if (options.chains < 1) throw std::invalid_argument("calibration needs at least one chain");
  const Eigen::Index k = model.static_count();

  CalibrationResult out;
  out.chains.resize(options.chains);
  std::vector<std::string> errors(options.chains);
  parallel_for(options.chains, options.threads, [&](int c) {
    McmcConfig cfg = config;
    cfg.seed = chain_seed(config.seed, c);
    ChainDiagnostics& diag = out.chains[c];
    diag.seed = cfg.seed;
    try {
      const PosteriorDraws draws = run_gibbs(model, y, priors, cfg);
      const double count = static_cast<double>(draws.size());
      diag.inclusion_frequency = draws.inclusion.cast<double>().colwise().sum().transpose() / count;
      diag.coefficient_mean = draws.beta.colwise().sum().transpose() / count;
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  });

  std::ostringstream failures;
  for (int c = 0; c < options.chains; ++c)
    if (!errors[c].empty()) failures << "\n  chain " << c << " (seed " << out.chains[c].seed << "): " << errors[c];
  if (!failures.str().empty()) throw std::runtime_error("calibration chains failed:" + failures.str());

  out.prior = priors.regression;
  if (k > 0) {
    Eigen::VectorXd incl = Eigen::VectorXd::Zero(k), mean = Eigen::VectorXd::Zero(k);
    for (const auto& c : out.chains) {
      incl += c.inclusion_frequency;
      mean += c.coefficient_mean;
    }
    out.prior.inclusion_prob = incl / options.chains;
    if (options.update_means) out.prior.prior_mean = mean / options.chains;
  }
  return out;
}

}  // namespace bsts
