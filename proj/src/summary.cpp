#include "bsts/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace bsts {

Interval shortest_window(std::vector<double> samples, double mass) {
  if (samples.empty()) throw std::invalid_argument("interval needs at least one sample");
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("interval mass must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  auto k = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  std::size_t best = 0;
  double width = samples[k - 1] - samples[0];
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double w = samples[i + k - 1] - samples[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {samples[best], samples[best + k - 1]};
}

Interval hdi(std::span<const double> samples, double mass) {
  if (samples.size() < 20) throw std::invalid_argument("HDI needs at least 20 samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("HDI samples must be finite");
  return shortest_window(std::vector<double>(samples.begin(), samples.end()), mass);
}

const std::vector<std::string>& SummaryTable::header() {
  static const std::vector<std::string> h{"Variable", "Mean", "2.5%", "97.5%", "Non-zero probability"};
  return h;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // no negative zero in printed tables
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

}  // namespace

void SummaryTable::write_csv(std::ostream& os) const {
  const auto& h = header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << csv_field(h[i]);
  os << '\n';
  for (const auto& r : rows)
    os << csv_field(r.name) << ',' << full(r.mean) << ',' << full(r.low) << ',' << full(r.high) << ','
       << full(r.nonzero_probability) << '\n';
}

void SummaryTable::write_text(std::ostream& os) const {
  std::size_t width = header()[0].size();
  for (const auto& r : rows) width = std::max(width, r.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << header()[0] << std::right;
  for (std::size_t i = 1; i < header().size(); ++i) os << "  " << std::setw(10) << header()[i];
  os << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.name << std::right;
    for (double v : {r.mean, r.low, r.high, r.nonzero_probability})
      os << "  " << std::setw(10) << fixed3(v);
    os << '\n';
  }
}

SummaryTable posterior_summary(const std::vector<std::string>& names, const Eigen::MatrixXd& beta,
                               const Eigen::MatrixXi& inclusion) {
  const Eigen::Index draws = beta.rows();
  if (draws == 0) throw std::invalid_argument("posterior summary needs at least one draw");
  if (inclusion.rows() != draws || inclusion.cols() != beta.cols() ||
      static_cast<Eigen::Index>(names.size()) != beta.cols())
    throw std::invalid_argument("summary inputs have inconsistent shapes");
  SummaryTable table;
  for (Eigen::Index j = 0; j < beta.cols(); ++j) {
    SummaryRow row;
    row.name = names[j];
    std::vector<double> included;
    for (Eigen::Index d = 0; d < draws; ++d) {
      row.mean += beta(d, j);
      if (inclusion(d, j)) included.push_back(beta(d, j));
    }
    row.mean /= static_cast<double>(draws);
    row.nonzero_probability = static_cast<double>(included.size()) / static_cast<double>(draws);
    if (!included.empty()) {
      const Interval iv = shortest_window(std::move(included), 0.95);
      row.low = iv.low;
      row.high = iv.high;
    }
    table.rows.push_back(row);
  }
  return table;
}

SummaryTable posterior_summary(const PosteriorDraws& draws) {
  return posterior_summary(draws.model.static_names, draws.beta, draws.inclusion);
}

SummaryTable variance_summary(const PosteriorDraws& draws) {
  if (draws.size() == 0) throw std::invalid_argument("variance summary needs at least one draw");
  SummaryTable table;
  auto add = [&](const std::string& name, const Eigen::VectorXd& v) {
    const Interval iv = shortest_window(std::vector<double>(v.data(), v.data() + v.size()), 0.95);
    table.rows.push_back({name, v.mean(), iv.low, iv.high, 1.0});
  };
  add("sigma2.observation", draws.obs_variance);
  for (const auto& b : draws.model.layout)
    for (Eigen::Index j = 0; j < b.innovation_size; ++j)
      add("sigma2." + b.name + "." + draws.model.innovation_names[b.innovation_start + j],
          draws.state_variances.col(b.innovation_start + j));
  return table;
}

PathBand pointwise_band(const Eigen::MatrixXd& samples, double mass) {
  const Eigen::Index n = samples.cols();
  PathBand band{"", samples.colwise().mean().transpose(), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  std::vector<double> col(samples.rows());
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index d = 0; d < samples.rows(); ++d) col[d] = samples(d, t);
    const Interval iv = hdi(col, mass);
    band.low[t] = iv.low;
    band.high[t] = iv.high;
  }
  return band;
}

PathBand dynamic_coefficient_paths(const PosteriorDraws& draws, const std::string& column, double mass) {
  Eigen::Index row = -1;
  for (const auto& [name, index] : draws.model.dynamic_coefficients())
    if (name == column) row = index;
  if (row < 0) throw std::invalid_argument("'" + column + "' is not a dynamic regression coefficient");
  const Eigen::Index n = draws.model.length;
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(draws.size()), n);
  for (std::size_t d = 0; d < draws.size(); ++d) samples.row(static_cast<Eigen::Index>(d)) = draws.states[d].row(row);
  PathBand band = pointwise_band(samples, mass);
  band.name = column;
  return band;
}

}  // namespace bsts
