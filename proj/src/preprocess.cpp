#include "bsts/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "bsts/gibbs.hpp"

namespace bsts {

StandardizedSeries standardize(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw std::invalid_argument("standardization needs at least two values");
  if (!x.allFinite()) throw std::invalid_argument("standardization input has missing or non-finite values");
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("cannot standardize a series with zero variance");
  return {(x.array() - mean) / sd, mean, sd};
}

double Periodogram::total_power() const {
  double total = 0.0;
  for (Eigen::Index j = 0; j < power.size(); ++j) {
    const bool nyquist = length % 2 == 0 && 2 * (j + 1) == length;
    total += nyquist ? power[j] : 2.0 * power[j];
  }
  return total / static_cast<double>(length);
}

Periodogram periodogram(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 8) throw std::invalid_argument("periodogram needs at least 8 values");
  if (!x.allFinite()) throw std::invalid_argument("periodogram input has missing or non-finite values");
  const Eigen::VectorXd centered = x.array() - x.mean();

  // twiddle table indexed by (j * t) mod n
  Eigen::VectorXd cos_table(n), sin_table(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    cos_table[i] = std::cos(angle);
    sin_table[i] = std::sin(angle);
  }

  const Eigen::Index half = n / 2;
  Periodogram out;
  out.length = n;
  out.frequency.resize(half);
  out.power.resize(half);
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j <= half; ++j) {
    double re = 0.0, im = 0.0;
    Eigen::Index idx = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
      re += centered[t] * cos_table[idx];
      im -= centered[t] * sin_table[idx];
      idx += j;
      if (idx >= n) idx -= n;
    }
    out.frequency[j - 1] = static_cast<double>(j) / static_cast<double>(n);
    out.power[j - 1] = (re * re + im * im) / static_cast<double>(n);
    if (out.power[j - 1] > out.power[best]) best = j - 1;
  }
  out.dominant_frequency = out.frequency[best];
  out.dominant_period = static_cast<double>(n) / static_cast<double>(best + 1);
  return out;
}

double dtw_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw std::invalid_argument("DTW needs two nonempty sequences");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j - 1], prev[j], cur[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<int> Dendrogram::cut(int k) const {
  const int n = static_cast<int>(labels.size());
  if (k < 1 || k > n) throw std::invalid_argument("cluster count must lie in 1.." + std::to_string(n));
  std::vector<int> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n - k; ++i) {
    parent[find(merges[i].left)] = n + i;
    parent[find(merges[i].right)] = n + i;
  }
  std::vector<int> out(n), root_label(2 * n - 1, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (root_label[root] < 0) root_label[root] = next++;
    out[i] = root_label[root];
  }
  return out;
}

Dendrogram average_linkage(const Eigen::MatrixXd& distances, std::vector<std::string> labels) {
  const auto n = static_cast<int>(distances.rows());
  if (n < 2 || distances.cols() != n || static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("linkage needs a square distance matrix over at least two labels");

  Dendrogram out;
  out.labels = std::move(labels);
  out.distances = distances;
  std::vector<int> id(n), size(n, 1);
  std::iota(id.begin(), id.end(), 0);
  std::vector<bool> active(n, true);
  Eigen::MatrixXd d = distances;
  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (active[j] && d(i, j) < best) {
          best = d(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    out.merges.push_back({std::min(id[bi], id[bj]), std::max(id[bi], id[bj]), best, size[bi] + size[bj]});
    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double v = (size[bi] * d(bi, k) + size[bj] * d(bj, k)) / (size[bi] + size[bj]);
      d(bi, k) = d(k, bi) = v;
    }
    size[bi] += size[bj];
    id[bi] = n + step;
    active[bj] = false;
  }
  return out;
}

ClusterResult cluster_trends(const std::vector<NamedSeries>& series, std::optional<int> k, int threads) {
  const auto n = static_cast<int>(series.size());
  if (n < 2) throw std::invalid_argument("clustering needs at least two series");
  for (const auto& s : series)
    if (s.frequency != series.front().frequency)
      throw std::invalid_argument("series '" + s.name + "' has a different sampling frequency");

  std::vector<Eigen::VectorXd> z;
  std::vector<std::string> labels;
  for (const auto& s : series) {
    z.push_back(standardize(s.values).values);
    labels.push_back(s.name);
  }

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int p) {
    const auto [i, j] = pairs[p];
    dist(i, j) = dist(j, i) = dtw_distance(z[i], z[j]);
  });

  ClusterResult out{average_linkage(dist, std::move(labels)), {}};
  if (k) out.labels = out.dendrogram.cut(*k);
  return out;
}

}  // namespace bsts
