#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the recursive implementations it is compared against.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bsts/state_space.hpp"

namespace oracle {

struct JointGaussianResult {
  std::vector<Eigen::VectorXd> predicted_mean, filtered_mean, smoothed_mean;
  std::vector<Eigen::MatrixXd> predicted_cov, filtered_cov, smoothed_cov;
  double log_likelihood = 0.0;
};

/// Builds the joint Gaussian of (a_1..a_n, y_1..y_n) by direct propagation
/// and conditions with explicit matrix inverses.
inline JointGaussianResult joint_gaussian(const bsts::SystemMatrices& sm, const bsts::GaussianState& init,
                                          const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size(), m = sm.transition.rows();
  const Eigen::MatrixXd& T = sm.transition;
  const Eigen::MatrixXd RQR = sm.error_control * sm.state_variances.asDiagonal() * sm.error_control.transpose();

  // marginal means/variances of each state
  std::vector<Eigen::VectorXd> mu(n);
  std::vector<Eigen::MatrixXd> V(n);
  mu[0] = init.mean;
  V[0] = init.covariance;
  for (Eigen::Index t = 1; t < n; ++t) {
    mu[t] = T * mu[t - 1];
    V[t] = T * V[t - 1] * T.transpose() + RQR;
  }
  std::vector<Eigen::MatrixXd> Tpow(n);
  Tpow[0] = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index k = 1; k < n; ++k) Tpow[k] = T * Tpow[k - 1];

  // Cov(a_s, a_t)
  auto cross = [&](Eigen::Index s, Eigen::Index t) -> Eigen::MatrixXd {
    if (s <= t) return V[s] * Tpow[t - s].transpose();
    return Tpow[s - t] * V[t];
  };
  auto zrow = [&](Eigen::Index t) -> Eigen::RowVectorXd { return sm.obs_map.row(sm.obs_map.rows() == 1 ? 0 : t); };

  // condition a_t on the observed subset of y_{1:upto}
  auto condition = [&](Eigen::Index t, Eigen::Index upto, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    std::vector<Eigen::Index> obs;
    for (Eigen::Index s = 0; s < upto; ++s)
      if (!std::isnan(y[s])) obs.push_back(s);
    mean = mu[t];
    cov = V[t];
    const auto q = static_cast<Eigen::Index>(obs.size());
    if (q == 0) return;
    Eigen::MatrixXd Syy(q, q), Say(m, q);
    Eigen::VectorXd resid(q);
    for (Eigen::Index i = 0; i < q; ++i) {
      const Eigen::Index si = obs[i];
      resid[i] = y[si] - zrow(si).dot(mu[si]);
      Say.col(i) = cross(t, si) * zrow(si).transpose();
      for (Eigen::Index j = 0; j < q; ++j) {
        const Eigen::Index sj = obs[j];
        Syy(i, j) = (zrow(si) * cross(si, sj) * zrow(sj).transpose())(0, 0) + (si == sj ? sm.obs_variance : 0.0);
      }
    }
    const Eigen::MatrixXd inv = Syy.inverse();
    mean = mu[t] + Say * inv * resid;
    cov = V[t] - Say * inv * Say.transpose();
  };

  JointGaussianResult out;
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    condition(t, t, mean, cov);
    out.predicted_mean.push_back(mean);
    out.predicted_cov.push_back(cov);
    condition(t, t + 1, mean, cov);
    out.filtered_mean.push_back(mean);
    out.filtered_cov.push_back(cov);
    condition(t, n, mean, cov);
    out.smoothed_mean.push_back(mean);
    out.smoothed_cov.push_back(cov);
  }

  std::vector<Eigen::Index> obs;
  for (Eigen::Index s = 0; s < n; ++s)
    if (!std::isnan(y[s])) obs.push_back(s);
  const auto q = static_cast<Eigen::Index>(obs.size());
  if (q > 0) {
    Eigen::MatrixXd Syy(q, q);
    Eigen::VectorXd resid(q);
    for (Eigen::Index i = 0; i < q; ++i) {
      resid[i] = y[obs[i]] - zrow(obs[i]).dot(mu[obs[i]]);
      for (Eigen::Index j = 0; j < q; ++j)
        Syy(i, j) = (zrow(obs[i]) * cross(obs[i], obs[j]) * zrow(obs[j]).transpose())(0, 0) +
                    (i == j ? sm.obs_variance : 0.0);
    }
    const double logdet = std::log(Syy.determinant());
    out.log_likelihood =
        -0.5 * (static_cast<double>(q) * std::log(2.0 * M_PI) + logdet + resid.dot(Syy.inverse() * resid));
  }
  return out;
}

/// Random model with state dimension <= 4: T entries in [-0.9, 0.9], random
/// R (m x r), Q and H bounded away from zero, PSD init.
struct RandomModel {
  bsts::SystemMatrices sm;
  bsts::GaussianState init;
  Eigen::VectorXd y;
};

inline RandomModel random_model(std::mt19937_64& rng, int max_dim = 4, int max_len = 6) {
  std::uniform_int_distribution<int> dim(1, max_dim), len(1, max_len);
  std::uniform_real_distribution<double> u(-0.9, 0.9), pos(0.2, 1.5);
  std::bernoulli_distribution missing(0.2), time_varying(0.5);
  const int m = dim(rng), n = len(rng);
  std::uniform_int_distribution<int> rdim(1, m);
  const int r = rdim(rng);
  RandomModel out;
  out.sm.transition.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out.sm.transition(i, j) = u(rng);
  out.sm.error_control.resize(m, r);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < r; ++j) out.sm.error_control(i, j) = u(rng);
  out.sm.state_variances.resize(r);
  for (int j = 0; j < r; ++j) out.sm.state_variances[j] = pos(rng);
  out.sm.obs_variance = pos(rng);
  const int zrows = time_varying(rng) ? n : 1;
  out.sm.obs_map.resize(zrows, m);
  for (int i = 0; i < zrows; ++i)
    for (int j = 0; j < m; ++j) out.sm.obs_map(i, j) = u(rng) * 2.0;
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = u(rng);
  out.init.covariance = A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(m, m);
  out.init.mean.resize(m);
  for (int i = 0; i < m; ++i) out.init.mean[i] = 2.0 * u(rng);
  out.y.resize(n);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int t = 0; t < n; ++t) out.y[t] = missing(rng) ? std::numeric_limits<double>::quiet_NaN() : normal(rng);
  return out;
}

/// Minimum cumulative |a_i - b_j| over every monotone warping path from (0,0)
/// to (n-1,m-1), enumerated recursively.
inline double dtw_exhaustive(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.size(), m = b.size();
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Eigen::Index, Eigen::Index, double)> walk = [&](Eigen::Index i, Eigen::Index j, double acc) {
    acc += std::abs(a[i] - b[j]);
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

/// Exact posterior probability of every inclusion pattern (bit j of the index
/// is gamma_j) for y = X beta + e with known sigma2, point-mass spike and
/// independent N(b_j, v_j) slabs. Marginal likelihoods come from the
/// n-dimensional Gaussian y ~ N(X_g b_g, sigma2 I + X_g V_g X_g').
inline std::vector<double> enumerate_models(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double sigma2,
                                            const Eigen::VectorXd& pi, const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& v) {
  const Eigen::Index n = X.rows(), k = X.cols();
  const int count = 1 << k;
  std::vector<double> logpost(count);
  for (int g = 0; g < count; ++g) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd cov = sigma2 * Eigen::MatrixXd::Identity(n, n);
    double logprior = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (g & (1 << j)) {
        mean += X.col(j) * b[j];
        cov += v[j] * X.col(j) * X.col(j).transpose();
        logprior += std::log(pi[j]);
      } else {
        logprior += std::log1p(-pi[j]);
      }
    }
    const Eigen::VectorXd r = y - mean;
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    logpost[g] = logprior - 0.5 * logdet - 0.5 * r.dot(llt.solve(r));
  }
  const double mx = *std::max_element(logpost.begin(), logpost.end());
  double z = 0.0;
  for (double& l : logpost) z += (l = std::exp(l - mx));
  for (double& l : logpost) l /= z;
  return logpost;
}

/// Minimum-width window over all n-k+1 placements in sorted data.
inline std::pair<double, double> hdi_scan(std::vector<double> s, std::size_t k) {
  std::sort(s.begin(), s.end());
  std::pair<double, double> best{s[0], s[k - 1]};
  for (std::size_t i = 0; i + k <= s.size(); ++i)
    if (s[i + k - 1] - s[i] < best.second - best.first) best = {s[i], s[i + k - 1]};
  return best;
}

}  // namespace oracle
