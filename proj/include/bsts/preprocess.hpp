#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsts/time_series.hpp"

namespace bsts {

struct StandardizedSeries {
  Eigen::VectorXd values;
  double original_mean = 0.0;
  double original_sd = 1.0;

  Eigen::VectorXd destandardize() const { return values.array() * original_sd + original_mean; }
};

/// (x - mean) / sd with the n-1 sample standard deviation.
StandardizedSeries standardize(const Eigen::VectorXd& x);

struct Periodogram {
  Eigen::VectorXd frequency;  // j / n, j = 1..floor(n/2)
  Eigen::VectorXd power;      // |DFT_j|^2 / n of the mean-removed series
  Eigen::Index length = 0;
  double dominant_frequency = 0.0;
  double dominant_period = 0.0;

  /// (1/n) * sum of the two-sided periodogram over nonzero frequencies; equals
  /// the mean-removed variance with divisor n.
  double total_power() const;
};

Periodogram periodogram(const Eigen::VectorXd& x);

/// Classic DTW: absolute-difference local cost, steps (1,0), (0,1), (1,1),
/// no window.
double dtw_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct NamedSeries {
  std::string name;
  Eigen::VectorXd values;
  Frequency frequency = Frequency::Weekly;
};

struct Merge {
  int left = 0;   // cluster ids: 0..n-1 leaves, n + i the i-th merge
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<std::string> labels;
  std::vector<Merge> merges;
  Eigen::MatrixXd distances;

  /// Flat cluster labels (0-based, numbered by first appearance) after
  /// undoing the last k-1 merges.
  std::vector<int> cut(int k) const;
};

/// Standardizes each series, computes pairwise DTW distances and runs average
/// linkage. When `k` is set the result carries flat labels as well.
struct ClusterResult {
  Dendrogram dendrogram;
  std::vector<int> labels;
};

ClusterResult cluster_trends(const std::vector<NamedSeries>& series, std::optional<int> k = std::nullopt,
                             int threads = 1);

/// Average-linkage agglomeration of a symmetric distance matrix.
Dendrogram average_linkage(const Eigen::MatrixXd& distances, std::vector<std::string> labels);

}  // namespace bsts
