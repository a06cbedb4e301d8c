#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsts/components.hpp"
#include "bsts/gibbs.hpp"

namespace bsts {

/// Symmetric MAPE in percent: (100/n) sum |f - y| / ((|y| + |f|) / 2).
double smape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);
double mae(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);
double mse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

struct AccuracyRow {
  std::string label;
  std::string description;
  double smape = 0.0;
  double mae = 0.0;
  double mse = 0.0;
  bool ok = true;
  std::string error;
};

struct AccuracyReport {
  std::vector<AccuracyRow> rows;

  static const std::vector<std::string>& header();
  void write_csv(std::ostream& os) const;
  void write_text(std::ostream& os) const;
};

enum class OsaMethod {
  /// Kalman filter at the posterior-mean variances and coefficients.
  PosteriorMean,
  /// Average of the filter predictions over every retained draw.
  DrawAverage,
};

/// One-step-ahead predictive means E[y_t | y_{1:t-1}] for every t.
Eigen::VectorXd one_step_ahead(const PosteriorDraws& draws, const Eigen::VectorXd& y,
                               OsaMethod method = OsaMethod::PosteriorMean);

struct NamedSpec {
  std::string label;
  std::vector<ComponentSpec> components;
  std::string description;
};

struct CompareOptions {
  OsaMethod method = OsaMethod::PosteriorMean;
  int threads = 1;
  /// Leading time points left out of scoring while the diffuse prior dominates.
  /// Negative: the largest state dimension among the specs.
  Eigen::Index skip = -1;
  AssembleOptions assemble;
};

/// Scores actual vs predicted over observed points from `skip` on.
AccuracyRow score(const std::string& label, const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted,
                  Eigen::Index skip);

/// Fits every spec with run_gibbs (default priors) and scores its in-sample
/// one-step-ahead predictions. Failed fits stay in the report, flagged.
AccuracyReport compare_models(const Eigen::VectorXd& y, const std::vector<NamedSpec>& specs,
                              const McmcConfig& config, const CompareOptions& options = {});

/// LL, LLTI, LLTV, LLT, LLTTI, LLTTV
const std::vector<std::string>& canonical_labels();
std::string canonical_description(const std::string& label);

/// Builds one canonical specification. Time-varying variants place the
/// `dynamic_columns` of X in the state as random walks.
NamedSpec canonical_spec(const std::string& label, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                         const std::vector<int>& dynamic_columns);

/// Columns whose posterior inclusion probability reaches `threshold`; falls
/// back to the single most probable column when none does.
std::vector<int> select_dynamic_columns(const Eigen::VectorXd& inclusion_probability, double threshold = 0.5);

/// The six canonical specifications. The time-invariant fits run first; their
/// inclusion probabilities choose the dynamic columns of LLTV / LLTTV.
AccuracyReport compare_canonical(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                 const std::vector<std::string>& names, const McmcConfig& config,
                                 const CompareOptions& options = {});

}  // namespace bsts
