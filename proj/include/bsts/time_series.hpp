#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bsts {

enum class Frequency { Daily, Weekly };

std::string to_string(Frequency f);
Frequency parse_frequency(const std::string& text);
int spacing_days(Frequency f);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// Equally spaced calendar series. Missing observations are stored as NaN;
/// infinities are rejected at construction.
class TimeSeries {
public:
  using Date = std::chrono::sys_days;

  TimeSeries(std::vector<Date> dates, std::vector<double> values, Frequency freq);

  /// Index-only series with synthetic dates starting 2000-01-01.
  static TimeSeries from_values(std::vector<double> values,
                                Frequency freq = Frequency::Daily);

  std::size_t size() const { return values_.size(); }
  Frequency frequency() const { return freq_; }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t t) const { return values_[t]; }
  bool missing(std::size_t t) const { return is_missing(values_[t]); }
  std::size_t observed_count() const;

  Eigen::VectorXd as_vector() const;

private:
  std::vector<Date> dates_;
  std::vector<double> values_;
  Frequency freq_;
};

std::string format_date(TimeSeries::Date d);
TimeSeries::Date parse_date(const std::string& text);

/// Mean and sample variance (n-1 divisor) over non-missing entries.
double observed_mean(const Eigen::VectorXd& y);
double observed_variance(const Eigen::VectorXd& y);

}  // namespace bsts
