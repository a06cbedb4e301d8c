#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsts/gibbs.hpp"

namespace bsts {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Highest density interval: the shortest window of ceil(mass * n) sorted
/// samples, lowest start on ties. Needs at least 20 samples.
Interval hdi(std::span<const double> samples, double mass = 0.95);

/// Same window scan without the sample-count floor (n >= 1).
Interval shortest_window(std::vector<double> samples, double mass);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
  double nonzero_probability = 0.0;
};

/// Coefficient table in the layout Variable, Mean, 2.5%, 97.5%, Non-zero probability.
struct SummaryTable {
  std::vector<SummaryRow> rows;

  static const std::vector<std::string>& header();
  /// Full-precision CSV.
  void write_csv(std::ostream& os) const;
  /// Aligned text, three decimals.
  void write_text(std::ostream& os) const;
};

/// Per static coefficient: mean over all draws (exact zeros included), 95% HDI
/// of the draws where the coefficient is included, and the fraction of draws
/// that include it. A never-included coefficient yields an all-zero row.
SummaryTable posterior_summary(const PosteriorDraws& draws);
SummaryTable posterior_summary(const std::vector<std::string>& names, const Eigen::MatrixXd& beta,
                               const Eigen::MatrixXi& inclusion);

/// Posterior mean and 95% HDI of the observation and innovation variances.
SummaryTable variance_summary(const PosteriorDraws& draws);

struct PathBand {
  std::string name;
  Eigen::VectorXd mean;
  Eigen::VectorXd low;
  Eigen::VectorXd high;
};

/// Pointwise posterior mean and HDI of one dynamic-regression coefficient path.
/// Throws std::invalid_argument when `column` is not a dynamic coefficient.
PathBand dynamic_coefficient_paths(const PosteriorDraws& draws, const std::string& column, double mass = 0.95);

/// Pointwise mean and HDI over draws of a (draws x n) sample matrix.
PathBand pointwise_band(const Eigen::MatrixXd& samples, double mass);

}  // namespace bsts
