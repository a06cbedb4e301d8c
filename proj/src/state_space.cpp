#include "bsts/state_space.hpp"

#include <algorithm>
#include <cmath>

namespace bsts {

namespace {

void symmetrize(Eigen::MatrixXd& P) { P = 0.5 * (P + P.transpose()).eval(); }

void clamp_psd(Eigen::MatrixXd& P) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  P = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  symmetrize(P);
}

void check_psd(const Eigen::MatrixXd& P, const char* what) {
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) + " covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().size() > 0 && eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::invalid_argument(std::string(what) + " covariance is not positive semidefinite");
}

void check_observations(const Eigen::VectorXd& y) {
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    if (std::isinf(y[t]))
      throw std::invalid_argument("non-finite observation at t=" + std::to_string(t + 1));
  }
}

// Solves for J' = Pp^{-1} B where Pp is a PSD predicted covariance. Falls back
// to a pseudo-inverse when Pp is (numerically) singular.
Eigen::MatrixXd solve_psd(const Eigen::MatrixXd& Pp, const Eigen::MatrixXd& B) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Pp);
  if (ldlt.info() == Eigen::Success) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax > 0.0 && d.minCoeff() > 1e-12 * dmax) return ldlt.solve(B);
  }
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(Pp).solve(B);
}

}  // namespace

Eigen::MatrixXd SystemMatrices::state_noise() const {
  return error_control * state_variances.asDiagonal() * error_control.transpose();
}

void SystemMatrices::validate(Eigen::Index n) const {
  const Eigen::Index m = transition.rows();
  if (m == 0 || transition.cols() != m) throw std::invalid_argument("transition matrix must be square and nonempty");
  if (obs_map.cols() != m || obs_map.rows() < 1)
    throw std::invalid_argument("observation map has " + std::to_string(obs_map.cols()) +
                                " columns, state dimension is " + std::to_string(m));
  if (error_control.rows() != m) throw std::invalid_argument("error control matrix row count differs from state dimension");
  if (state_variances.size() != error_control.cols())
    throw std::invalid_argument("state variance count differs from error control columns");
  if ((state_variances.array() < 0.0).any() || !state_variances.allFinite())
    throw std::invalid_argument("state variances must be finite and nonnegative");
  if (!(obs_variance >= 0.0) || !std::isfinite(obs_variance))
    throw std::invalid_argument("observation variance must be finite and nonnegative");
  if (!obs_map.allFinite() || !transition.allFinite() || !error_control.allFinite())
    throw std::invalid_argument("system matrices contain non-finite entries");
  if (n > 0 && obs_map.rows() > 1 && obs_map.rows() != n)
    throw std::invalid_argument("time-varying observation map has " + std::to_string(obs_map.rows()) +
                                " rows for a series of length " + std::to_string(n));
}

GaussianState GaussianState::diffuse(Eigen::Index dim, double variance) {
  return {Eigen::VectorXd::Zero(dim), variance * Eigen::MatrixXd::Identity(dim, dim)};
}

FilterResult kalman_filter(const SystemMatrices& model, const GaussianState& init, const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("empty observation vector");
  model.validate(n);
  const Eigen::Index m = model.state_dim();
  if (init.mean.size() != m || init.covariance.rows() != m || init.covariance.cols() != m)
    throw std::invalid_argument("initial state dimension differs from the model");
  if (!init.mean.allFinite() || !init.covariance.allFinite())
    throw std::invalid_argument("initial state has non-finite entries");
  check_psd(init.covariance, "initial state");
  check_observations(y);

  const Eigen::MatrixXd& T = model.transition;
  const Eigen::MatrixXd RQR = model.state_noise();
  constexpr double log_2pi = 1.8378770664093453;

  FilterResult out;
  out.predicted.reserve(n);
  out.filtered.reserve(n);
  out.osa_mean.resize(n);
  out.osa_variance.resize(n);
  out.innovation.resize(n);

  Eigen::VectorXd a = init.mean;
  Eigen::MatrixXd P = init.covariance;
  for (Eigen::Index t = 0; t < n; ++t) {
    out.predicted.push_back({a, P});
    const auto z = model.obs_row(t);
    const Eigen::VectorXd Pz = P * z.transpose();
    // z P z' >= 0 in exact arithmetic; rounding after a diffuse start can push it below
    const double F = std::max(z.dot(Pz), 0.0) + model.obs_variance;
    const double pred = z.dot(a);
    out.osa_mean[t] = pred;
    out.osa_variance[t] = F;
    if (is_missing(y[t])) {
      out.innovation[t] = kMissing;
    } else {
      if (!(F > 0.0) || !std::isfinite(F))
        throw NumericalError("degenerate one-step-ahead variance at t=" + std::to_string(t + 1));
      const double v = y[t] - pred;
      out.innovation[t] = v;
      a.noalias() += Pz * (v / F);
      P.noalias() -= Pz * (Pz.transpose() / F);
      symmetrize(P);
      // cancellation against a diffuse prior can leave P slightly indefinite
      if ((P.diagonal().array() < 0.0).any()) clamp_psd(P);
      out.log_likelihood += -0.5 * (log_2pi + std::log(F) + v * v / F);
    }
    out.filtered.push_back({a, P});
    a = T * a;
    P = T * P * T.transpose() + RQR;
    symmetrize(P);
  }
  return out;
}

FilterResult kalman_filter(const SystemMatrices& model, const GaussianState& init, const TimeSeries& y) {
  return kalman_filter(model, init, y.as_vector());
}

std::vector<GaussianState> kalman_smooth(const SystemMatrices& model, const FilterResult& filter) {
  const auto n = static_cast<Eigen::Index>(filter.size());
  if (n == 0 || static_cast<Eigen::Index>(filter.predicted.size()) != n || filter.innovation.size() != n ||
      filter.osa_variance.size() != n)
    throw std::invalid_argument("filter result has mismatched lengths");
  model.validate(n);
  const Eigen::Index m = model.state_dim();
  if (filter.predicted.front().mean.size() != m)
    throw std::invalid_argument("filter result state dimension differs from the model");

  const Eigen::MatrixXd& T = model.transition;
  std::vector<GaussianState> smoothed(n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const GaussianState& pred = filter.predicted[t];
    if (is_missing(filter.innovation[t])) {
      r = T.transpose() * r;
      N = T.transpose() * N * T;
    } else {
      const Eigen::RowVectorXd z = model.obs_row(t);
      const double F = filter.osa_variance[t];
      const Eigen::VectorXd K = pred.covariance * z.transpose() / F;
      const Eigen::MatrixXd L = T - (T * K) * z;
      r = z.transpose() * (filter.innovation[t] / F) + L.transpose() * r;
      N = z.transpose() * z / F + L.transpose() * N * L;
    }
    symmetrize(N);
    smoothed[t].mean = pred.mean + pred.covariance * r;
    smoothed[t].covariance = pred.covariance - pred.covariance * N * pred.covariance;
    symmetrize(smoothed[t].covariance);
  }
  return smoothed;
}

Eigen::MatrixXd simulate_states(const SystemMatrices& model, const GaussianState& init, const Eigen::VectorXd& y,
                                Rng& rng) {
  const FilterResult f = kalman_filter(model, init, y);
  const auto n = static_cast<Eigen::Index>(f.size());
  const Eigen::Index m = model.state_dim();
  const Eigen::MatrixXd& T = model.transition;

  Eigen::MatrixXd path(m, n);
  path.col(n - 1) = draw_gaussian(f.filtered[n - 1].mean, f.filtered[n - 1].covariance, rng);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const GaussianState& filt = f.filtered[t];
    const GaussianState& next = f.predicted[t + 1];
    const Eigen::MatrixXd TP = T * filt.covariance;
    const Eigen::MatrixXd Jt = solve_psd(next.covariance, TP);  // J' where J = P T' Pp^{-1}
    const Eigen::VectorXd mean = filt.mean + Jt.transpose() * (path.col(t + 1) - next.mean);
    Eigen::MatrixXd cov = filt.covariance - Jt.transpose() * TP;
    symmetrize(cov);
    path.col(t) = draw_gaussian(mean, cov, rng);
  }
  if (!path.allFinite()) throw NumericalError("non-finite state path drawn");
  return path;
}

SimulatedData simulate_data(const SystemMatrices& model, const GaussianState& init, Eigen::Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("simulation length must be at least 1");
  model.validate(n);
  const Eigen::Index m = model.state_dim();
  if (init.mean.size() != m || init.covariance.rows() != m || init.covariance.cols() != m)
    throw std::invalid_argument("initial state dimension differs from the model");

  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd q_sd = model.state_variances.cwiseSqrt();
  const double h_sd = std::sqrt(model.obs_variance);

  SimulatedData out{Eigen::VectorXd(n), Eigen::MatrixXd(m, n)};
  Eigen::VectorXd a = draw_gaussian(init.mean, init.covariance, rng);
  Eigen::VectorXd eta(model.innovation_dim());
  for (Eigen::Index t = 0; t < n; ++t) {
    out.states.col(t) = a;
    out.y[t] = model.obs_row(t).dot(a) + h_sd * normal(rng);
    for (Eigen::Index j = 0; j < eta.size(); ++j) eta[j] = q_sd[j] * normal(rng);
    a = model.transition * a + model.error_control * eta;
  }
  return out;
}

Eigen::VectorXd draw_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  const Eigen::Index m = mean.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = normal(rng);
  if (m == 0) return mean;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd x = ldlt.matrixL() * d.cwiseProduct(z);
  x = ldlt.transpositionsP().transpose() * x;
  return mean + x;
}

}  // namespace bsts
