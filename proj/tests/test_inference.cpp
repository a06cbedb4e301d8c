#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "bsts/evaluation.hpp"
#include "bsts/gibbs.hpp"
#include "bsts/summary.hpp"
#include "oracles.hpp"

using namespace bsts;

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

}  // namespace

TEST_CASE("variance draw with no residuals reproduces the prior") {
  const InverseGammaPrior prior{4.0, 2.0};
  Rng rng(11);
  const int N = 100000;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) sum += 1.0 / draw_variance({}, prior, rng);
  CHECK(sum / N == doctest::Approx(prior.nu / prior.s).epsilon(0.02));
}

TEST_CASE("variance draw moments") {
  const InverseGammaPrior prior{2.0, 2.0};
  // 100 residuals with SSE = 50 -> precision ~ Gamma(51, rate 26)
  std::vector<double> e(100, std::sqrt(0.5));
  Rng rng(12);
  const int N = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double p = 1.0 / draw_variance(e, prior, rng);
    s1 += p;
    s2 += p * p;
  }
  const double mean = s1 / N, var = s2 / N - mean * mean;
  const double se = std::sqrt(51.0 / (26.0 * 26.0) / N);
  CHECK(std::abs(mean - 51.0 / 26.0) < 4.0 * se);
  CHECK(var == doctest::Approx(51.0 / (26.0 * 26.0)).epsilon(0.03));

  Rng a(5), b(5);
  CHECK(draw_variance(e, prior, a) == draw_variance(e, prior, b));
  std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS(draw_variance(bad, prior, a));
  CHECK_THROWS(draw_variance(e, InverseGammaPrior{0.0, 1.0}, a));
}

TEST_CASE("spike and slab limits") {
  std::mt19937_64 gen(21);
  const Eigen::MatrixXd X = gaussian_matrix(200, 3, gen);
  const Eigen::Vector3d beta(1.0, -2.0, 0.5);
  Eigen::VectorXd y = X * beta + 0.3 * gaussian_matrix(200, 1, gen);
  Rng rng(1);

  auto never = SpikeSlabPrior::uniform(3, 0.0);
  for (int i = 0; i < 50; ++i) {
    const auto d = draw_coefficients(X, y, 0.09, never, rng);
    CHECK(d.beta.isZero(0.0));
    CHECK(d.inclusion.sum() == 0);
  }

  // pi = 1 with an enormous slab: draws concentrate around OLS
  auto always = SpikeSlabPrior::uniform(3, 1.0, 0.0, 1e8);
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd ols = xtx.ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd se = (0.09 * xtx.inverse()).diagonal().cwiseSqrt();
  const int N = 4000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < N; ++i) {
    const auto d = draw_coefficients(X, y, 0.09, always, rng);
    CHECK(d.inclusion.sum() == 3);
    mean += d.beta / N;
  }
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean[j] - ols[j]) < 4.0 * se[j] / std::sqrt(double(N)));
}

TEST_CASE("inclusion frequencies match exact enumeration") {
  std::mt19937_64 gen(31);
  SUBCASE("two orthogonal columns") {
    const Eigen::Index n = 20;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 2);
    for (Eigen::Index t = 0; t < n; ++t) X(t, t % 2) = 1.0;
    Eigen::VectorXd y = X * Eigen::Vector2d(0.4, 0.0) + gaussian_matrix(n, 1, gen);
    const auto prior = SpikeSlabPrior::uniform(2, 0.5, 0.0, 1.0);
    const auto exact = oracle::enumerate_models(X, y, 1.0, prior.inclusion_prob, prior.prior_mean,
                                                prior.slab_variance);
    Rng rng(2);
    std::vector<double> freq(4, 0.0);
    Eigen::VectorXi current = Eigen::VectorXi::Zero(2);
    const int N = 50000;
    const auto stats = RegressionStats::from(X, y);
    for (int i = 0; i < N; ++i) {
      const auto d = draw_coefficients(stats, 1.0, prior, rng, &current);
      current = d.inclusion;
      freq[current[0] + 2 * current[1]] += 1.0 / N;
    }
    for (int g = 0; g < 4; ++g) CHECK(std::abs(freq[g] - exact[g]) < 0.02);
  }
  SUBCASE("three correlated columns, nonzero prior means") {
    const Eigen::Index n = 15;
    Eigen::MatrixXd X = gaussian_matrix(n, 3, gen);
    X.col(2) = 0.8 * X.col(0) + 0.6 * X.col(2);
    Eigen::VectorXd y = X * Eigen::Vector3d(0.7, 0.0, 0.3) + 0.8 * gaussian_matrix(n, 1, gen);
    SpikeSlabPrior prior;
    prior.inclusion_prob = Eigen::Vector3d(0.3, 0.5, 0.7);
    prior.prior_mean = Eigen::Vector3d(0.5, -0.2, 0.0);
    prior.slab_variance = Eigen::Vector3d(2.0, 0.5, 1.0);
    const auto exact = oracle::enumerate_models(X, y, 0.64, prior.inclusion_prob, prior.prior_mean,
                                                prior.slab_variance);
    Rng rng(3);
    std::vector<double> freq(8, 0.0);
    Eigen::VectorXi current = Eigen::VectorXi::Zero(3);
    const int N = 50000;
    const auto stats = RegressionStats::from(X, y);
    for (int i = 0; i < N; ++i) {
      current = draw_coefficients(stats, 0.64, prior, rng, &current).inclusion;
      freq[current[0] + 2 * current[1] + 4 * current[2]] += 1.0 / N;
    }
    double tv = 0.0;
    for (int g = 0; g < 8; ++g) tv += 0.5 * std::abs(freq[g] - exact[g]);
    CHECK(tv < 0.02);
  }
}

TEST_CASE("log marginal differences agree with the n-dimensional marginal") {
  std::mt19937_64 gen(41);
  const Eigen::MatrixXd X = gaussian_matrix(12, 3, gen);
  const Eigen::VectorXd y = gaussian_matrix(12, 1, gen);
  SpikeSlabPrior prior = SpikeSlabPrior::uniform(3, 0.5, 0.3, 1.7);
  const auto stats = RegressionStats::from(X, y);
  const auto exact = oracle::enumerate_models(X, y, 0.8, prior.inclusion_prob, prior.prior_mean,
                                              prior.slab_variance);
  // equal prior odds, so posterior ratios equal marginal likelihood ratios
  auto pattern = [](int g) { return Eigen::Vector3i(g & 1, (g >> 1) & 1, (g >> 2) & 1).eval(); };
  const double base = log_marginal_inclusion(stats, 0.8, prior, pattern(0));
  for (int g = 1; g < 8; ++g)
    CHECK(log_marginal_inclusion(stats, 0.8, prior, pattern(g)) - base ==
          doctest::Approx(std::log(exact[g] / exact[0])).epsilon(1e-9));
}

TEST_CASE("sampler recovers a local level model") {
  const Eigen::Index n = 500;
  SystemMatrices sm;
  sm.obs_map = Eigen::MatrixXd::Ones(1, 1);
  sm.transition = Eigen::MatrixXd::Ones(1, 1);
  sm.error_control = Eigen::MatrixXd::Ones(1, 1);
  sm.state_variances = Eigen::VectorXd::Constant(1, 1.0);
  sm.obs_variance = 1.0;
  Rng sim_rng(2024);
  GaussianState init{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
  const auto data = simulate_data(sm, init, n, sim_rng);

  const auto model = assemble({LocalLevel{}}, n);
  const auto priors = default_priors(model, data.y);
  McmcConfig config;
  config.iterations = 5000;
  config.burn_in = 1000;
  config.seed = 9;
  const auto draws = run_gibbs(model, data.y, priors, config);
  REQUIRE(draws.size() == static_cast<std::size_t>(config.retained()));
  const double obs = draws.obs_variance.mean(), level = draws.state_variances.col(0).mean();
  std::vector<double> ov(draws.obs_variance.data(), draws.obs_variance.data() + draws.size());
  std::vector<double> lv(draws.size());
  for (std::size_t d = 0; d < draws.size(); ++d) lv[d] = draws.state_variances(d, 0);
  const auto obs_ci = hdi(ov), lvl_ci = hdi(lv);
  MESSAGE("obs " << obs << " [" << obs_ci.low << "," << obs_ci.high << "] level " << level << " ["
                 << lvl_ci.low << "," << lvl_ci.high << "]");
  CHECK(std::abs(obs - 1.0) < 0.25);
  CHECK(std::abs(level - 1.0) < 0.25);
  CHECK(obs_ci.low < 1.0);
  CHECK(obs_ci.high > 1.0);
  CHECK(lvl_ci.low < 1.0);
  CHECK(lvl_ci.high > 1.0);

  const auto again = run_gibbs(model, data.y, priors, config);
  CHECK(again.obs_variance == draws.obs_variance);
  CHECK(again.states.back() == draws.states.back());
}

TEST_CASE("constant series collapses onto the constant") {
  const Eigen::Index n = 60;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 3.25);
  const auto model = assemble({LocalLevel{}}, n);
  McmcConfig config;
  config.iterations = 300;
  const auto draws = run_gibbs(model, y, default_priors(model, y), config);
  const Eigen::VectorXd pred = one_step_ahead(draws, y);
  // the first prediction is the prior mean; every later one sees the constant
  CHECK((pred.tail(n - 1).array() - 3.25).abs().maxCoeff() < 1e-6);
  MESSAGE("obs variance mean " << draws.obs_variance.mean());
  CHECK(draws.obs_variance.mean() < 0.01);
}

TEST_CASE("retained draw count") {
  McmcConfig config;
  config.iterations = 3000;
  config.burn_in = 981;
  CHECK(config.retained() == 2019);
  config.thin = 2;
  CHECK(config.retained() == 1010);
  config.burn_in = 3000;
  CHECK_THROWS(config.validate());
  config.burn_in = -1;
  CHECK_THROWS(config.validate());

  const Eigen::Index n = 40;
  std::mt19937_64 gen(3);
  const Eigen::VectorXd y = gaussian_matrix(n, 1, gen);
  const auto model = assemble({LocalLevel{}}, n);
  McmcConfig small;
  small.iterations = 30;
  small.burn_in = 7;
  small.thin = 3;
  const auto draws = run_gibbs(model, y, default_priors(model, y), small);
  CHECK(draws.size() == static_cast<std::size_t>(small.retained()));
  CHECK(draws.iteration.front() == 7);
  CHECK(draws.beta.rows() == static_cast<Eigen::Index>(draws.size()));
}

namespace {

struct RegressionProblem {
  Eigen::VectorXd y;
  AssembledModel model;
  ModelPriors priors;
};

RegressionProblem regression_problem(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const Eigen::MatrixXd X = gaussian_matrix(n, k, gen);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  beta[0] = 1.5;
  beta[1] = -1.0;
  Eigen::VectorXd level(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  double l = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) level[t] = (l += 0.1 * normal(gen));
  RegressionProblem p;
  p.y = level + X * beta + 0.5 * gaussian_matrix(n, 1, gen);
  p.model = assemble({LocalLevel{}, StaticRegression{X, {}, std::nullopt}}, n);
  p.priors = default_priors(p.model, p.y);
  return p;
}

}  // namespace

TEST_CASE("excluded coefficients are exactly zero") {
  const auto p = regression_problem(80, 6, 5);
  McmcConfig config;
  config.iterations = 300;
  const auto draws = run_gibbs(p.model, p.y, p.priors, config);
  for (Eigen::Index d = 0; d < draws.beta.rows(); ++d)
    for (Eigen::Index j = 0; j < draws.beta.cols(); ++j)
      if (draws.inclusion(d, j) == 0) CHECK(draws.beta(d, j) == 0.0);
  CHECK(draws.inclusion.col(0).sum() == draws.inclusion.rows());
}

TEST_CASE("calibration") {
  const auto p = regression_problem(60, 4, 6);
  McmcConfig config;
  config.iterations = 200;
  config.seed = 77;

  CalibrationOptions one;
  one.chains = 1;
  const auto single = multi_seed_calibrate(p.model, p.y, p.priors, config, one);
  McmcConfig seeded = config;
  seeded.seed = chain_seed(config.seed, 0);
  const auto direct = run_gibbs(p.model, p.y, p.priors, seeded);
  Eigen::VectorXd freq = direct.inclusion.cast<double>().colwise().mean().transpose();
  CHECK(single.prior.inclusion_prob == freq);
  CHECK(single.prior.prior_mean == p.priors.regression.prior_mean);

  CalibrationOptions three;
  three.chains = 3;
  three.update_means = true;
  const auto a = multi_seed_calibrate(p.model, p.y, p.priors, config, three);
  three.threads = 3;
  const auto b = multi_seed_calibrate(p.model, p.y, p.priors, config, three);
  CHECK(a.prior.inclusion_prob == b.prior.inclusion_prob);
  CHECK(a.prior.prior_mean == b.prior.prior_mean);
  REQUIRE(a.chains.size() == 3);
  CHECK(a.chains[0].seed != a.chains[1].seed);
  CHECK(a.prior.slab_variance == p.priors.regression.slab_variance);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(4);
  for (const auto& c : a.chains) avg += c.inclusion_frequency / 3.0;
  CHECK((avg - a.prior.inclusion_prob).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("chain seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  for (int c = 0; c < 100; ++c) seen.insert(chain_seed(1, c));
  CHECK(seen.size() == 100);
  CHECK(chain_seed(1, 4) == chain_seed(1, 4));
  CHECK(chain_seed(1, 4) != chain_seed(2, 4));
}

TEST_CASE("parallel_for covers every index once") {
  for (int threads : {1, 2, 7}) {
    std::vector<int> hits(50, 0);
    parallel_for(50, threads, [&](int i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}
