#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bsts/preprocess.hpp"

namespace bsts::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
  out.push_back(trim(std::string_view(line).substr(start)));
  return out;
}

std::optional<double> parse_number(const std::string& cell) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

// The key must be absent or of the expected kind; absent keys get `fallback`.
template <typename T>
T get_or(const json& obj, const char* key, const T& fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key " + where + "." + k);
  }
}

json resolve_variance_prior(const json& c, const char* key, const std::string& where) {
  if (!c.contains(key) || c.at(key).is_null()) return nullptr;
  const json& p = c.at(key);
  reject_unknown(p, {"nu", "s"}, where + "." + key);
  InverseGammaPrior prior{get_or(p, "nu", 0.01, where), get_or(p, "s", 0.01, where)};
  try {
    prior.validate();
  } catch (const std::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
  return {{"nu", prior.nu}, {"s", prior.s}};
}

std::optional<InverseGammaPrior> variance_prior(const json& c, const char* key) {
  if (!c.contains(key) || c.at(key).is_null()) return std::nullopt;
  return InverseGammaPrior{c.at(key).at("nu").get<double>(), c.at(key).at("s").get<double>()};
}

json resolve_component(const json& c, const json& data, const json& priors, const std::string& where) {
  if (!c.is_object() || !c.contains("type")) throw ConfigError(where + " needs a \"type\"");
  const std::string type = get_or<std::string>(c, "type", "", where);
  const auto regressors = data.at("regressors").get<std::vector<std::string>>();
  auto columns = [&](const json& comp) {
    const auto cols = get_or(comp, "columns", regressors, where);
    if (cols.empty()) throw ConfigError(where + ": " + type + " needs at least one column");
    for (const auto& col : cols)
      if (std::find(regressors.begin(), regressors.end(), col) == regressors.end())
        throw ConfigError(where + ": column '" + col + "' is not listed in data.regressors");
    return cols;
  };
  json out = {{"type", type}};
  if (type == "local_level") {
    reject_unknown(c, {"type", "level_prior"}, where);
    out["level_prior"] = resolve_variance_prior(c, "level_prior", where);
  } else if (type == "local_linear_trend") {
    reject_unknown(c, {"type", "level_prior", "slope_prior"}, where);
    out["level_prior"] = resolve_variance_prior(c, "level_prior", where);
    out["slope_prior"] = resolve_variance_prior(c, "slope_prior", where);
  } else if (type == "seasonal") {
    reject_unknown(c, {"type", "period", "prior"}, where);
    if (!c.contains("period")) throw ConfigError(where + ": seasonal needs a period");
    out["period"] = get_or(c, "period", 0, where);
    out["prior"] = resolve_variance_prior(c, "prior", where);
  } else if (type == "intervention") {
    reject_unknown(c, {"type", "kind", "date", "onset", "dynamic", "name", "prior_mean", "prior_variance", "prior"},
                   where);
    const std::string kind = get_or<std::string>(c, "kind", "level_shift", where);
    if (kind != "pulse" && kind != "level_shift" && kind != "slope_shift")
      throw ConfigError(where + ": intervention kind must be pulse, level_shift or slope_shift");
    if (c.contains("date") == c.contains("onset"))
      throw ConfigError(where + ": intervention needs exactly one of date or onset");
    out["kind"] = kind;
    if (c.contains("date")) {
      const auto date = get_or<std::string>(c, "date", "", where);
      try {
        parse_date(date);
      } catch (const std::exception& e) {
        throw ConfigError(where + ".date: " + e.what());
      }
      out["date"] = date;
    } else {
      out["onset"] = get_or(c, "onset", 1, where);
    }
    out["dynamic"] = get_or(c, "dynamic", false, where);
    out["name"] = get_or<std::string>(c, "name", "", where);
    out["prior_mean"] = get_or(c, "prior_mean", 0.0, where);
    out["prior_variance"] = get_or(c, "prior_variance", 1.0, where);
    out["prior"] = resolve_variance_prior(c, "prior", where);
  } else if (type == "static_regression") {
    reject_unknown(c, {"type", "columns", "inclusion_prob", "prior_mean", "slab_variance"}, where);
    out["columns"] = columns(c);
    out["inclusion_prob"] = get_or(c, "inclusion_prob", priors.at("inclusion_prob").get<double>(), where);
    out["prior_mean"] = get_or(c, "prior_mean", priors.at("prior_mean").get<double>(), where);
    out["slab_variance"] = get_or(c, "slab_variance", priors.at("slab_variance").get<double>(), where);
    const double pi = out["inclusion_prob"], v = out["slab_variance"];
    if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError(where + ".inclusion_prob must lie in [0, 1]");
    if (!(v > 0.0)) throw ConfigError(where + ".slab_variance must be positive");
  } else if (type == "dynamic_regression") {
    reject_unknown(c, {"type", "columns", "prior"}, where);
    out["columns"] = columns(c);
    out["prior"] = resolve_variance_prior(c, "prior", where);
  } else {
    throw ConfigError(where + ": unknown component type '" + type + "'");
  }
  return out;
}

json resolve_components(const json& list, const json& data, const json& priors, const std::string& where) {
  if (!list.is_array()) throw ConfigError(where + " must be an array");
  json out = json::array();
  for (std::size_t i = 0; i < list.size(); ++i)
    out.push_back(resolve_component(list[i], data, priors, where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file, expected a header row");
  auto head = split(line);
  if (head.size() < 2) throw ConfigError(path.string() + ": header needs a date column and at least one series");
  t.header.assign(head.begin() + 1, head.end());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != head.size())
      throw ConfigError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(head.size()));
    try {
      t.dates.push_back(parse_date(cells[0]));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ": row " + std::to_string(row) + ": unparseable date '" + cells[0] + "'");
    }
    t.cells.emplace_back(cells.begin() + 1, cells.end());
  }
  if (t.dates.empty()) throw ConfigError(path.string() + ": no data rows");
  return t;
}

int Table::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  throw ConfigError("column '" + name + "' not found in the data file");
}

Eigen::MatrixXd numeric_columns(const Table& table, const std::vector<std::string>& names) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(table.dates.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const int c = table.column(names[j]);
    for (std::size_t r = 0; r < table.cells.size(); ++r) {
      const std::string& cell = table.cells[r][c];
      // rows are reported 1-based counting the header, as in a spreadsheet
      if (cell.empty())
        throw ConfigError("missing value in column '" + names[j] + "' at row " + std::to_string(r + 2));
      const auto v = parse_number(cell);
      if (!v)
        throw ConfigError("invalid number '" + cell + "' in column '" + names[j] + "' at row " +
                          std::to_string(r + 2));
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
    }
  }
  return out;
}

IngestedData ingest_csv(const std::filesystem::path& path, const std::string& target,
                        const std::vector<std::string>& regressors, Frequency freq, bool standardize) {
  const Table table = Table::read(path);
  const int tc = table.column(target);
  std::vector<double> y;
  y.reserve(table.cells.size());
  for (std::size_t r = 0; r < table.cells.size(); ++r) {
    const std::string& cell = table.cells[r][tc];
    if (cell.empty() || cell == "NA") {
      y.push_back(kMissing);
      continue;
    }
    const auto v = parse_number(cell);
    if (!v)
      throw ConfigError("invalid number '" + cell + "' in column '" + target + "' at row " + std::to_string(r + 2));
    y.push_back(*v);
  }
  IngestedData out{TimeSeries(table.dates, std::move(y), freq), numeric_columns(table, regressors), regressors,
                   Eigen::VectorXd::Zero(static_cast<Eigen::Index>(regressors.size())),
                   Eigen::VectorXd::Ones(static_cast<Eigen::Index>(regressors.size()))};
  if (standardize)
    for (Eigen::Index j = 0; j < out.regressors.cols(); ++j) {
      try {
        const StandardizedSeries s = bsts::standardize(out.regressors.col(j));
        out.regressors.col(j) = s.values;
        out.regressor_mean[j] = s.original_mean;
        out.regressor_sd[j] = s.original_sd;
      } catch (const std::exception& e) {
        throw ConfigError("regressor '" + regressors[j] + "': " + e.what());
      }
    }
  return out;
}

json resolve_config(const json& input, const std::filesystem::path& base_dir) {
  reject_unknown(input, {"data", "components", "priors", "mcmc", "calibration", "compare", "cluster", "periodogram",
                         "decompose", "simulate", "output"},
                 "config");
  json out;

  // simulate-only configs carry no data block
  if (input.contains("simulate")) {
    const json& s = input.at("simulate");
    reject_unknown(s, {"length", "start", "frequency", "regressors", "coefficients", "level_sd", "slope_sd", "obs_sd",
                       "regressor_ar", "seed"},
                   "simulate");
    json sim;
    sim["length"] = get_or(s, "length", 230, "simulate");
    sim["start"] = get_or<std::string>(s, "start", "2013-01-06", "simulate");
    sim["frequency"] = to_string(parse_frequency(get_or<std::string>(s, "frequency", "weekly", "simulate")));
    sim["regressors"] = get_or(s, "regressors", 20, "simulate");
    sim["coefficients"] = get_or(s, "coefficients", std::map<std::string, double>{}, "simulate");
    sim["level_sd"] = get_or(s, "level_sd", 0.1, "simulate");
    sim["slope_sd"] = get_or(s, "slope_sd", 0.01, "simulate");
    sim["obs_sd"] = get_or(s, "obs_sd", 0.5, "simulate");
    sim["regressor_ar"] = get_or(s, "regressor_ar", 0.8, "simulate");
    sim["seed"] = get_or<std::uint64_t>(s, "seed", 1, "simulate");
    if (sim["length"].get<int>() < 2 || sim["regressors"].get<int>() < 0)
      throw ConfigError("simulate: length must be >= 2 and regressors >= 0");
    parse_date(sim["start"].get<std::string>());
    out["simulate"] = sim;
    if (!input.contains("data")) return out;
  }

  if (!input.contains("data")) throw ConfigError("config needs a \"data\" block");
  const json& d = input.at("data");
  reject_unknown(d, {"path", "target", "regressors", "frequency", "standardize"}, "data");
  if (!d.contains("path") || !d.contains("target")) throw ConfigError("data needs \"path\" and \"target\"");
  json data;
  std::filesystem::path p = get_or<std::string>(d, "path", "", "data");
  if (p.is_relative()) p = base_dir / p;
  data["path"] = std::filesystem::weakly_canonical(p).string();
  data["target"] = get_or<std::string>(d, "target", "", "data");
  data["regressors"] = get_or(d, "regressors", std::vector<std::string>{}, "data");
  try {
    data["frequency"] = to_string(parse_frequency(get_or<std::string>(d, "frequency", "weekly", "data")));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("data.frequency: ") + e.what());
  }
  data["standardize"] = get_or(d, "standardize", true, "data");
  out["data"] = data;

  const json pin = input.value("priors", json::object());
  reject_unknown(pin, {"nu", "fraction", "inclusion_prob", "prior_mean", "slab_variance"}, "priors");
  json priors = {{"nu", get_or(pin, "nu", 0.01, "priors")},
                 {"fraction", get_or(pin, "fraction", 0.01, "priors")},
                 {"inclusion_prob", get_or(pin, "inclusion_prob", 0.5, "priors")},
                 {"prior_mean", get_or(pin, "prior_mean", 0.0, "priors")},
                 {"slab_variance", get_or(pin, "slab_variance", 1.0, "priors")}};
  if (!(priors["nu"].get<double>() > 0.0) || !(priors["fraction"].get<double>() > 0.0))
    throw ConfigError("priors.nu and priors.fraction must be positive");
  out["priors"] = priors;

  json comps = input.value("components", json::array());
  if (comps.empty()) {
    comps.push_back({{"type", "local_linear_trend"}});
    if (!data["regressors"].empty()) comps.push_back({{"type", "static_regression"}});
  }
  out["components"] = resolve_components(comps, data, priors, "components");

  const json min = input.value("mcmc", json::object());
  reject_unknown(min, {"iterations", "burn_in", "thin", "seed"}, "mcmc");
  McmcConfig mc;
  mc.iterations = get_or(min, "iterations", 1000, "mcmc");
  if (min.contains("burn_in") && !min.at("burn_in").is_null()) mc.burn_in = get_or(min, "burn_in", 0, "mcmc");
  mc.thin = get_or(min, "thin", 1, "mcmc");
  mc.seed = get_or<std::uint64_t>(min, "seed", 1, "mcmc");
  try {
    mc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("mcmc: ") + e.what());
  }
  out["mcmc"] = {{"iterations", mc.iterations}, {"burn_in", mc.resolved_burn_in()}, {"thin", mc.thin}, {"seed", mc.seed}};

  const json cin = input.value("calibration", json::object());
  reject_unknown(cin, {"chains", "update_means"}, "calibration");
  out["calibration"] = {{"chains", get_or(cin, "chains", 30, "calibration")},
                        {"update_means", get_or(cin, "update_means", false, "calibration")}};
  if (out["calibration"]["chains"].get<int>() < 1) throw ConfigError("calibration.chains must be >= 1");

  const json cmp = input.value("compare", json::object());
  reject_unknown(cmp, {"specs", "method", "skip"}, "compare");
  json cmp_out;
  cmp_out["method"] = get_or<std::string>(cmp, "method", "posterior_mean", "compare");
  parse_osa_method(cmp_out["method"]);
  cmp_out["skip"] = get_or(cmp, "skip", -1, "compare");
  if (!cmp.contains("specs") || (cmp.at("specs").is_string() && cmp.at("specs") == "canonical")) {
    cmp_out["specs"] = "canonical";
  } else {
    if (!cmp.at("specs").is_array()) throw ConfigError("compare.specs must be \"canonical\" or an array");
    json specs = json::array();
    for (std::size_t i = 0; i < cmp.at("specs").size(); ++i) {
      const json& s = cmp.at("specs")[i];
      const std::string where = "compare.specs[" + std::to_string(i) + "]";
      reject_unknown(s, {"label", "description", "components"}, where);
      if (!s.contains("label") || !s.contains("components")) throw ConfigError(where + " needs label and components");
      specs.push_back({{"label", get_or<std::string>(s, "label", "", where)},
                       {"description", get_or<std::string>(s, "description", "", where)},
                       {"components", resolve_components(s.at("components"), data, priors, where + ".components")}});
    }
    cmp_out["specs"] = specs;
  }
  out["compare"] = cmp_out;

  const json cl = input.value("cluster", json::object());
  reject_unknown(cl, {"columns", "k"}, "cluster");
  out["cluster"] = {{"columns", get_or(cl, "columns", data["regressors"].get<std::vector<std::string>>(), "cluster")},
                    {"k", cl.contains("k") && !cl.at("k").is_null() ? json(get_or(cl, "k", 2, "cluster")) : json()}};

  const json pg = input.value("periodogram", json::object());
  reject_unknown(pg, {"column"}, "periodogram");
  out["periodogram"] = {{"column", get_or<std::string>(pg, "column", data["target"], "periodogram")}};

  const json dc = input.value("decompose", json::object());
  reject_unknown(dc, {"mass"}, "decompose");
  out["decompose"] = {{"mass", get_or(dc, "mass", 0.95, "decompose")}};
  const double mass = out["decompose"]["mass"];
  if (!(mass > 0.0 && mass < 1.0)) throw ConfigError("decompose.mass must lie in (0, 1)");
  return out;
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json input;
  try {
    input = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  if (input.contains("resolved_config")) return resolve_config(input.at("resolved_config"), base);
  return resolve_config(input, base);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

McmcConfig mcmc_config(const json& resolved) {
  const json& m = resolved.at("mcmc");
  McmcConfig c;
  c.iterations = m.at("iterations");
  c.burn_in = m.at("burn_in").get<int>();
  c.thin = m.at("thin");
  c.seed = m.at("seed");
  return c;
}

std::vector<ComponentSpec> build_components(const json& components, const IngestedData& data) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.target.size());
  auto design = [&](const json& c) {
    const auto cols = c.at("columns").get<std::vector<std::string>>();
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto it = std::find(data.regressor_names.begin(), data.regressor_names.end(), cols[j]);
      X.col(static_cast<Eigen::Index>(j)) = data.regressors.col(it - data.regressor_names.begin());
    }
    return std::pair{X, cols};
  };
  std::vector<ComponentSpec> out;
  for (const auto& c : components) {
    const std::string type = c.at("type");
    if (type == "local_level") {
      out.push_back(LocalLevel{variance_prior(c, "level_prior")});
    } else if (type == "local_linear_trend") {
      out.push_back(LocalLinearTrend{variance_prior(c, "level_prior"), variance_prior(c, "slope_prior")});
    } else if (type == "seasonal") {
      out.push_back(Seasonal{c.at("period").get<int>(), variance_prior(c, "prior")});
    } else if (type == "intervention") {
      Intervention iv;
      const std::string kind = c.at("kind");
      iv.kind = kind == "pulse" ? InterventionKind::Pulse
                : kind == "slope_shift" ? InterventionKind::SlopeShift
                                        : InterventionKind::LevelShift;
      if (c.contains("date")) {
        const auto date = parse_date(c.at("date").get<std::string>());
        const auto& dates = data.target.dates();
        const auto it = std::find(dates.begin(), dates.end(), date);
        if (it == dates.end())
          throw ConfigError("intervention date " + c.at("date").get<std::string>() + " is not a row of the data");
        iv.onset = (it - dates.begin()) + 1;
      } else {
        iv.onset = c.at("onset").get<Eigen::Index>();
      }
      iv.dynamic = c.at("dynamic");
      iv.prior_mean = c.at("prior_mean");
      iv.prior_variance = c.at("prior_variance");
      iv.prior = variance_prior(c, "prior");
      iv.name = c.at("name");
      out.push_back(iv);
    } else if (type == "static_regression") {
      auto [X, cols] = design(c);
      const auto k = X.cols();
      out.push_back(StaticRegression{X, cols,
                                     SpikeSlabPrior::uniform(k, c.at("inclusion_prob"), c.at("prior_mean"),
                                                             c.at("slab_variance"))});
    } else if (type == "dynamic_regression") {
      auto [X, cols] = design(c);
      out.push_back(DynamicRegression{X, cols, variance_prior(c, "prior")});
    }
  }
  return out;
}

ModelPriors build_priors(const json& resolved, const AssembledModel& model, const Eigen::VectorXd& y) {
  const json& p = resolved.at("priors");
  return default_priors(model, y, p.at("nu").get<double>(), p.at("fraction").get<double>());
}

OsaMethod parse_osa_method(const std::string& s) {
  if (s == "posterior_mean") return OsaMethod::PosteriorMean;
  if (s == "draw_average") return OsaMethod::DrawAverage;
  throw ConfigError("compare.method must be posterior_mean or draw_average");
}

}  // namespace bsts::cli
