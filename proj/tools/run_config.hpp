#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsts/components.hpp"
#include "bsts/evaluation.hpp"
#include "bsts/gibbs.hpp"
#include "bsts/time_series.hpp"

namespace bsts::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Error with the context a user needs (file, row, column, key).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A CSV with a header row and ISO dates in the first column.
struct Table {
  std::vector<std::string> header;  // without the date column
  std::vector<TimeSeries::Date> dates;
  std::vector<std::vector<std::string>> cells;  // row-major, header.size() per row

  static Table read(const std::filesystem::path& path);
  int column(const std::string& name) const;
};

struct IngestedData {
  TimeSeries target;
  Eigen::MatrixXd regressors;
  std::vector<std::string> regressor_names;
  /// Mean and sd used to standardize each regressor (0 / 1 when off).
  Eigen::VectorXd regressor_mean, regressor_sd;
};

/// Reads the target (empty cell = missing) and the regressors (empty cell is
/// an error naming row and column), checks the date spacing against `freq`
/// and optionally standardizes the regressors.
IngestedData ingest_csv(const std::filesystem::path& path, const std::string& target,
                        const std::vector<std::string>& regressors, Frequency freq, bool standardize);

/// Extracts fully observed numeric columns.
Eigen::MatrixXd numeric_columns(const Table& table, const std::vector<std::string>& names);

/// Fills every default, makes paths absolute against `base_dir` and checks
/// the types of all keys. The result is what manifests embed and hash.
json resolve_config(const json& input, const std::filesystem::path& base_dir);

/// Loads a config file. A manifest written by a previous run is accepted as
/// well: its embedded resolved config is used.
json load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

McmcConfig mcmc_config(const json& resolved);

/// Component specs built from the resolved config against ingested data.
std::vector<ComponentSpec> build_components(const json& components, const IngestedData& data);

/// Variance and spike-and-slab priors: defaults for the model, overridden by
/// the config's prior settings.
ModelPriors build_priors(const json& resolved, const AssembledModel& model, const Eigen::VectorXd& y);

OsaMethod parse_osa_method(const std::string& s);

}  // namespace bsts::cli
