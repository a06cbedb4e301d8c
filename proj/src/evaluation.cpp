#include "bsts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

namespace bsts {

namespace {

void check_pair(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("actual and predicted differ in length");
  if (actual.size() == 0) throw std::invalid_argument("accuracy metrics need at least one pair");
  if (!actual.allFinite() || !predicted.allFinite()) throw std::invalid_argument("accuracy inputs must be finite");
}

}  // namespace

double smape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    const double denom = (std::abs(actual[i]) + std::abs(predicted[i])) / 2.0;
    if (denom == 0.0) throw std::invalid_argument("sMAPE undefined: actual and predicted both zero at " + std::to_string(i + 1));
    sum += std::abs(predicted[i] - actual[i]) / denom;
  }
  return 100.0 / static_cast<double>(actual.size()) * sum;
}

double mae(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  check_pair(actual, predicted);
  return (predicted - actual).cwiseAbs().sum() / static_cast<double>(actual.size());
}

double mse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  check_pair(actual, predicted);
  return (predicted - actual).squaredNorm() / static_cast<double>(actual.size());
}

const std::vector<std::string>& AccuracyReport::header() {
  static const std::vector<std::string> h{"Model", "Label", "sMAPE", "MAE", "MSE"};
  return h;
}

void AccuracyReport::write_csv(std::ostream& os) const {
  const auto& h = header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  char buf[32];
  auto full = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.description << ',' << r.label;
    if (r.ok)
      os << ',' << full(r.smape) << ',' << full(r.mae) << ',' << full(r.mse) << '\n';
    else
      os << ",NA,NA,NA\n";
  }
}

void AccuracyReport::write_text(std::ostream& os) const {
  std::size_t dw = header()[0].size(), lw = header()[1].size();
  for (const auto& r : rows) {
    dw = std::max(dw, r.description.size());
    lw = std::max(lw, r.label.size());
  }
  os << std::left << std::setw(static_cast<int>(dw)) << header()[0] << "  " << std::setw(static_cast<int>(lw))
     << header()[1] << std::right;
  for (std::size_t i = 2; i < header().size(); ++i) os << "  " << std::setw(10) << header()[i];
  os << '\n';
  char buf[32];
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(dw)) << r.description << "  " << std::setw(static_cast<int>(lw))
       << r.label << std::right;
    if (r.ok) {
      for (double v : {r.smape, r.mae, r.mse}) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        os << "  " << std::setw(10) << buf;
      }
    } else {
      os << "  failed: " << r.error;
    }
    os << '\n';
  }
}

Eigen::VectorXd one_step_ahead(const PosteriorDraws& draws, const Eigen::VectorXd& y, OsaMethod method) {
  if (draws.size() == 0) throw std::invalid_argument("one-step-ahead predictions need at least one draw");
  const AssembledModel& model = draws.model;
  if (y.size() != model.length) throw std::invalid_argument("series length differs from the fitted model");

  auto predict = [&](double h, const Eigen::VectorXd& q, const Eigen::VectorXd& beta) {
    SystemMatrices sm = model.matrices;
    sm.obs_variance = h;
    sm.state_variances = q;
    const Eigen::VectorXd xb = model.static_design * beta;
    const FilterResult f = kalman_filter(sm, model.initial_state, Eigen::VectorXd(y - xb));
    return Eigen::VectorXd(f.osa_mean + xb);
  };

  const auto D = static_cast<double>(draws.size());
  if (method == OsaMethod::PosteriorMean) {
    return predict(draws.obs_variance.mean(), draws.state_variances.colwise().mean().transpose(),
                   draws.beta.colwise().sum().transpose() / D);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(y.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    sum += predict(draws.obs_variance[i], draws.state_variances.row(i).transpose(), draws.beta.row(i).transpose());
  }
  return sum / D;
}

AccuracyRow score(const std::string& label, const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted,
                  Eigen::Index skip) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("actual and predicted differ in length");
  std::vector<double> a, p;
  for (Eigen::Index t = std::max<Eigen::Index>(skip, 0); t < actual.size(); ++t) {
    if (is_missing(actual[t])) continue;
    a.push_back(actual[t]);
    p.push_back(predicted[t]);
  }
  const Eigen::Map<const Eigen::VectorXd> av(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
  AccuracyRow row;
  row.label = label;
  row.smape = smape(av, pv);
  row.mae = mae(av, pv);
  row.mse = mse(av, pv);
  return row;
}

namespace {

struct FitOutcome {
  Eigen::VectorXd osa;
  Eigen::Index state_dim = 0;
  Eigen::VectorXd inclusion;
  std::string error;
};

FitOutcome fit_spec(const Eigen::VectorXd& y, const NamedSpec& spec, const McmcConfig& config,
                    const CompareOptions& options) {
  FitOutcome out;
  try {
    const AssembledModel model = assemble(spec.components, y.size(), options.assemble);
    out.state_dim = model.state_dim();
    const PosteriorDraws draws = run_gibbs(model, y, default_priors(model, y), config);
    out.osa = one_step_ahead(draws, y, options.method);
    out.inclusion = draws.inclusion.cast<double>().colwise().mean().transpose();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

AccuracyReport build_report(const Eigen::VectorXd& y, const std::vector<NamedSpec>& specs,
                            const std::vector<FitOutcome>& fits, Eigen::Index skip) {
  if (skip < 0) {
    skip = 0;
    for (const auto& f : fits) skip = std::max(skip, f.state_dim);
  }
  AccuracyReport report;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    AccuracyRow row;
    if (fits[i].error.empty()) {
      try {
        row = score(specs[i].label, y, fits[i].osa, skip);
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    } else {
      row.ok = false;
      row.error = fits[i].error;
    }
    if (!row.ok) row.error = specs[i].label + ": " + row.error;
    row.label = specs[i].label;
    row.description = specs[i].description.empty() ? specs[i].label : specs[i].description;
    if (!row.ok) row.smape = row.mae = row.mse = std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace

AccuracyReport compare_models(const Eigen::VectorXd& y, const std::vector<NamedSpec>& specs,
                              const McmcConfig& config, const CompareOptions& options) {
  std::vector<FitOutcome> fits(specs.size());
  parallel_for(static_cast<int>(specs.size()), options.threads,
               [&](int i) { fits[i] = fit_spec(y, specs[i], config, options); });
  return build_report(y, specs, fits, options.skip);
}

const std::vector<std::string>& canonical_labels() {
  static const std::vector<std::string> labels{"LL", "LLTI", "LLTV", "LLT", "LLTTI", "LLTTV"};
  return labels;
}

std::string canonical_description(const std::string& label) {
  static const std::map<std::string, std::string> text{
      {"LL", "Local level"},
      {"LLTI", "Local level with time-invariant regressors"},
      {"LLTV", "Local level with time-variant regressors"},
      {"LLT", "Local linear trend"},
      {"LLTTI", "Local linear trend with time-invariant regressors"},
      {"LLTTV", "Local linear trend with time-variant regressors"},
  };
  const auto it = text.find(label);
  if (it == text.end()) throw std::invalid_argument("unknown canonical specification '" + label + "'");
  return it->second;
}

NamedSpec canonical_spec(const std::string& label, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                         const std::vector<int>& dynamic_columns) {
  NamedSpec spec{label, {}, canonical_description(label)};
  const bool trend = label.rfind("LLT", 0) == 0 && label != "LLTI" && label != "LLTV";
  if (trend)
    spec.components.emplace_back(LocalLinearTrend{});
  else
    spec.components.emplace_back(LocalLevel{});
  const bool static_reg = label == "LLTI" || label == "LLTTI";
  const bool dynamic_reg = label == "LLTV" || label == "LLTTV";
  if ((static_reg || dynamic_reg) && X.cols() == 0)
    throw std::invalid_argument("specification " + label + " needs regressors");
  if (static_reg) spec.components.emplace_back(StaticRegression{X, names, std::nullopt});
  if (dynamic_reg) {
    if (dynamic_columns.empty()) throw std::invalid_argument("specification " + label + " needs dynamic columns");
    Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(dynamic_columns.size()));
    std::vector<std::string> sub_names;
    for (std::size_t i = 0; i < dynamic_columns.size(); ++i) {
      sub.col(static_cast<Eigen::Index>(i)) = X.col(dynamic_columns[i]);
      sub_names.push_back(names.empty() ? "x" + std::to_string(dynamic_columns[i] + 1) : names[dynamic_columns[i]]);
    }
    spec.components.emplace_back(DynamicRegression{sub, sub_names, std::nullopt});
  }
  return spec;
}

std::vector<int> select_dynamic_columns(const Eigen::VectorXd& inclusion_probability, double threshold) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < inclusion_probability.size(); ++j)
    if (inclusion_probability[j] >= threshold) out.push_back(static_cast<int>(j));
  if (out.empty() && inclusion_probability.size() > 0) {
    Eigen::Index best = 0;
    inclusion_probability.maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

AccuracyReport compare_canonical(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                 const std::vector<std::string>& names, const McmcConfig& config,
                                 const CompareOptions& options) {
  const auto& labels = canonical_labels();
  std::vector<NamedSpec> specs(labels.size());
  std::vector<FitOutcome> fits(labels.size());

  auto fit = [&](std::size_t i, const std::vector<int>& dynamic) {
    try {
      specs[i] = canonical_spec(labels[i], X, names, dynamic);
    } catch (const std::exception& e) {
      specs[i] = NamedSpec{labels[i], {}, canonical_description(labels[i])};
      fits[i].error = e.what();
      return;
    }
    fits[i] = fit_spec(y, specs[i], config, options);
  };

  // time-invariant stage: LL, LLTI, LLT, LLTTI
  const std::vector<std::size_t> first{0, 1, 3, 4};
  parallel_for(static_cast<int>(first.size()), options.threads, [&](int i) { fit(first[i], {}); });

  // time-variant stage: columns selected by the matching static fit
  const std::vector<std::pair<std::size_t, std::size_t>> second{{2, 1}, {5, 4}};
  parallel_for(static_cast<int>(second.size()), options.threads, [&](int i) {
    const auto [target, source] = second[i];
    if (!fits[source].error.empty()) {
      specs[target] = NamedSpec{labels[target], {}, canonical_description(labels[target])};
      fits[target].error = "time-invariant stage " + labels[source] + " failed: " + fits[source].error;
      return;
    }
    fit(target, select_dynamic_columns(fits[source].inclusion));
  });
  return build_report(y, specs, fits, options.skip);
}

}  // namespace bsts
