#include "bsts/time_series.hpp"

#include <cstdio>
#include <stdexcept>

namespace bsts {

std::string to_string(Frequency f) {
  return f == Frequency::Daily ? "daily" : "weekly";
}

Frequency parse_frequency(const std::string& text) {
  if (text == "daily") return Frequency::Daily;
  if (text == "weekly") return Frequency::Weekly;
  throw std::invalid_argument("unknown frequency '" + text + "' (expected daily or weekly)");
}

int spacing_days(Frequency f) { return f == Frequency::Daily ? 1 : 7; }

TimeSeries::TimeSeries(std::vector<Date> dates, std::vector<double> values, Frequency freq)
    : dates_(std::move(dates)), values_(std::move(values)), freq_(freq) {
  if (values_.empty()) throw std::invalid_argument("time series must have at least one value");
  if (dates_.size() != values_.size())
    throw std::invalid_argument("time series dates and values differ in length");
  const int step = spacing_days(freq_);
  for (std::size_t t = 1; t < dates_.size(); ++t) {
    const auto gap = (dates_[t] - dates_[t - 1]).count();
    if (gap <= 0)
      throw std::invalid_argument("timestamps not strictly increasing at row " + std::to_string(t + 1));
    if (gap != step)
      throw std::invalid_argument("frequency violation at row " + std::to_string(t + 1) + ": gap of " +
                                  std::to_string(gap) + " days for " + to_string(freq_) + " series");
  }
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (std::isinf(values_[t]))
      throw std::invalid_argument("non-finite value at row " + std::to_string(t + 1));
  }
}

TimeSeries TimeSeries::from_values(std::vector<double> values, Frequency freq) {
  const Date start = std::chrono::year{2000} / std::chrono::January / 1;
  std::vector<Date> dates(values.size());
  const int step = spacing_days(freq);
  for (std::size_t t = 0; t < values.size(); ++t)
    dates[t] = start + std::chrono::days{static_cast<long>(t) * step};
  return TimeSeries(std::move(dates), std::move(values), freq);
}

std::size_t TimeSeries::observed_count() const {
  std::size_t n = 0;
  for (double v : values_) n += is_missing(v) ? 0 : 1;
  return n;
}

Eigen::VectorXd TimeSeries::as_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

std::string format_date(TimeSeries::Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

TimeSeries::Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
    throw std::invalid_argument("unparseable date '" + text + "' (expected YYYY-MM-DD)");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date '" + text + "'");
  return std::chrono::sys_days{ymd};
}

double observed_mean(const Eigen::VectorXd& y) {
  double sum = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    if (is_missing(y[t])) continue;
    sum += y[t];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("series has no observed values");
  return sum / static_cast<double>(n);
}

double observed_variance(const Eigen::VectorXd& y) {
  const double mean = observed_mean(y);
  double ss = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    if (is_missing(y[t])) continue;
    ss += (y[t] - mean) * (y[t] - mean);
    ++n;
  }
  return n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
}

}  // namespace bsts
