#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "bsts/archive.hpp"
#include "bsts/preprocess.hpp"
#include "bsts/summary.hpp"

namespace bsts::cli {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Collects outputs so the manifest can list them with their hashes.
class OutputDir {
public:
  OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const std::filesystem::path& path() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    files_[name] = hex64(fnv1a(content));
  }

  // for files produced by library writers
  void record(const std::string& name) { files_[name] = hex64(fnv1a(read_bytes(dir_ / name))); }

  void manifest(const std::string& command, const json& resolved, const json& extra) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config_hash"] = hex64(fnv1a(resolved.dump()));
    if (resolved.contains("data")) m["data_hash"] = hex64(fnv1a(read_bytes(resolved["data"]["path"].get<std::string>())));
    if (resolved.contains("mcmc")) m["seed"] = resolved["mcmc"]["seed"];
    m["outputs"] = files_;
    if (!extra.is_null()) m["details"] = extra;
    m["resolved_config"] = resolved;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> files_;
};

template <typename T>
std::string to_text(const T& table, bool csv) {
  std::ostringstream ss;
  if (csv)
    table.write_csv(ss);
  else
    table.write_text(ss);
  return ss.str();
}

IngestedData ingest(const json& resolved) {
  const json& d = resolved.at("data");
  return ingest_csv(d.at("path").get<std::string>(), d.at("target"), d.at("regressors"),
                    parse_frequency(d.at("frequency")), d.at("standardize"));
}

struct Fit {
  AssembledModel model;
  PosteriorDraws draws;
};

Fit fit_model(const json& resolved, const json& components, const IngestedData& data, std::ostream& log,
              bool quiet, const SpikeSlabPrior* regression = nullptr) {
  const Eigen::VectorXd y = data.target.as_vector();
  Fit f;
  f.model = assemble(build_components(components, data), y.size());
  ModelPriors priors = build_priors(resolved, f.model, y);
  if (regression) priors.regression = *regression;
  const McmcConfig config = mcmc_config(resolved);
  if (!quiet)
    log << "fitting " << f.model.layout.size() << " components, state dimension " << f.model.state_dim() << ", "
        << f.model.static_count() << " static coefficients, " << config.iterations << " iterations\n";
  f.draws = run_gibbs(f.model, y, priors, config);
  return f;
}

std::string scaling_csv(const IngestedData& data) {
  std::string out = "Variable,mean,sd\n";
  for (std::size_t j = 0; j < data.regressor_names.size(); ++j)
    out += data.regressor_names[j] + "," + fmt(data.regressor_mean[j]) + "," + fmt(data.regressor_sd[j]) + "\n";
  return out;
}

std::string fitted_csv(const IngestedData& data, const PosteriorDraws& draws) {
  const Eigen::VectorXd y = data.target.as_vector();
  Eigen::VectorXd fitted = Eigen::VectorXd::Zero(y.size());
  for (std::size_t d = 0; d < draws.size(); ++d) fitted += fitted_mean(draws, d);
  fitted /= static_cast<double>(draws.size());
  const Eigen::VectorXd osa = one_step_ahead(draws, y);
  std::string out = "date,actual,fitted,one_step_ahead\n";
  for (Eigen::Index t = 0; t < y.size(); ++t)
    out += format_date(data.target.dates()[t]) + "," + fmt(y[t]) + "," + fmt(fitted[t]) + "," + fmt(osa[t]) + "\n";
  return out;
}

std::string band_rows(const IngestedData& data, const std::string& name, const Eigen::VectorXd& mean,
                      const Eigen::VectorXd& low, const Eigen::VectorXd& high) {
  std::string out;
  for (Eigen::Index t = 0; t < mean.size(); ++t)
    out += format_date(data.target.dates()[t]) + "," + name + "," + fmt(mean[t]) + "," + fmt(low[t]) + "," +
           fmt(high[t]) + "\n";
  return out;
}

void write_fit_outputs(OutputDir& out, const IngestedData& data, const Fit& f) {
  const SummaryTable summary = posterior_summary(f.draws);
  out.write("summary.csv", to_text(summary, true));
  out.write("summary.txt", to_text(summary, false));
  out.write("variances.csv", to_text(variance_summary(f.draws), true));
  out.write("fitted.csv", fitted_csv(data, f.draws));
  if (!data.regressor_names.empty()) out.write("scaling.csv", scaling_csv(data));
  const auto dynamic = f.model.dynamic_coefficients();
  if (!dynamic.empty()) {
    std::string paths = "date,coefficient,mean,low,high\n";
    for (const auto& [name, index] : dynamic) {
      (void)index;
      const PathBand b = dynamic_coefficient_paths(f.draws, name);
      paths += band_rows(data, name, b.mean, b.low, b.high);
    }
    out.write("dynamic_paths.csv", paths);
  }
}

// ---------------------------------------------------------------------------

void cmd_fit(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  const IngestedData data = ingest(resolved);
  const Fit f = fit_model(resolved, resolved.at("components"), data, log, opt.quiet);
  write_fit_outputs(out, data, f);
  write_archive(f.draws, out.path(), "draws");
  out.record("draws.csv");
  out.record("draws.json");
  out.manifest("fit", resolved, {{"retained_draws", f.draws.size()}});
}

void cmd_summarize(const json& resolved, OutputDir& out, const RunOptions&, std::ostream&) {
  const PosteriorDraws draws = read_archive(out.path(), "draws");
  const SummaryTable summary = posterior_summary(draws);
  out.write("summary_from_archive.csv", to_text(summary, true));
  out.write("variances_from_archive.csv", to_text(variance_summary(draws), true));
  // the fit manifest stays authoritative; summarize writes its own next to it
  json m;
  m["command"] = "summarize";
  m["version"] = kVersion;
  m["config_hash"] = hex64(fnv1a(resolved.dump()));
  m["archive_hash"] = hex64(fnv1a(read_bytes(out.path() / "draws.csv")));
  m["outputs"] = {
      {"summary_from_archive.csv", hex64(fnv1a(read_bytes(out.path() / "summary_from_archive.csv")))},
      {"variances_from_archive.csv", hex64(fnv1a(read_bytes(out.path() / "variances_from_archive.csv")))}};
  m["resolved_config"] = resolved;
  std::ofstream(out.path() / "summarize_manifest.json", std::ios::binary) << m.dump(2) << '\n';
}

void cmd_calibrate(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  const IngestedData data = ingest(resolved);
  const Eigen::VectorXd y = data.target.as_vector();
  const AssembledModel model = assemble(build_components(resolved.at("components"), data), y.size());
  if (model.static_count() == 0) throw ConfigError("calibrate needs static regression coefficients");
  const ModelPriors priors = build_priors(resolved, model, y);
  CalibrationOptions copt;
  copt.chains = resolved.at("calibration").at("chains");
  copt.update_means = resolved.at("calibration").at("update_means");
  copt.threads = opt.threads;
  const McmcConfig config = mcmc_config(resolved);
  if (!opt.quiet)
    log << "calibrating: " << copt.chains << " chains x " << config.iterations << " iterations (burn-in "
        << config.resolved_burn_in() << ") on " << opt.threads << " thread(s)\n";
  const CalibrationResult cal = multi_seed_calibrate(model, y, priors, config, copt);

  std::string chains = "chain,seed,Variable,inclusion_frequency,coefficient_mean\n";
  for (std::size_t c = 0; c < cal.chains.size(); ++c)
    for (Eigen::Index j = 0; j < model.static_count(); ++j)
      chains += std::to_string(c + 1) + "," + std::to_string(cal.chains[c].seed) + "," + model.static_names[j] + "," +
                fmt(cal.chains[c].inclusion_frequency[j]) + "," + fmt(cal.chains[c].coefficient_mean[j]) + "\n";
  out.write("calibration_chains.csv", chains);
  std::string prior = "Variable,inclusion_prob,prior_mean,slab_variance\n";
  for (Eigen::Index j = 0; j < model.static_count(); ++j)
    prior += model.static_names[j] + "," + fmt(cal.prior.inclusion_prob[j]) + "," + fmt(cal.prior.prior_mean[j]) +
             "," + fmt(cal.prior.slab_variance[j]) + "\n";
  out.write("calibrated_prior.csv", prior);

  if (!opt.quiet) log << "final fit under the calibrated prior\n";
  const Fit f = fit_model(resolved, resolved.at("components"), data, log, true, &cal.prior);
  write_fit_outputs(out, data, f);
  out.manifest("calibrate", resolved, {{"chains", copt.chains}, {"retained_draws", f.draws.size()}});
}

void cmd_compare(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  const IngestedData data = ingest(resolved);
  const Eigen::VectorXd y = data.target.as_vector();
  const json& cmp = resolved.at("compare");
  CompareOptions copt;
  copt.method = parse_osa_method(cmp.at("method"));
  copt.threads = opt.threads;
  copt.skip = cmp.at("skip").get<Eigen::Index>();
  const McmcConfig config = mcmc_config(resolved);
  AccuracyReport report;
  if (cmp.at("specs").is_string()) {
    if (data.regressor_names.empty()) throw ConfigError("the canonical comparison needs data.regressors");
    if (!opt.quiet) log << "comparing the six canonical specifications\n";
    report = compare_canonical(y, data.regressors, data.regressor_names, config, copt);
  } else {
    std::vector<NamedSpec> specs;
    for (const auto& s : cmp.at("specs"))
      specs.push_back({s.at("label"), build_components(s.at("components"), data), s.at("description")});
    if (!opt.quiet) log << "comparing " << specs.size() << " specifications\n";
    report = compare_models(y, specs, config, copt);
  }
  out.write("compare.csv", to_text(report, true));
  out.write("compare.txt", to_text(report, false));
  json failures = json::array();
  for (const auto& r : report.rows)
    if (!r.ok) failures.push_back(r.error);
  out.manifest("compare", resolved, {{"failed", failures}});
}

void cmd_decompose(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  const IngestedData data = ingest(resolved);
  const Fit f = fit_model(resolved, resolved.at("components"), data, log, opt.quiet);
  const Decomposition dec = decompose(f.draws, f.model, resolved.at("decompose").at("mass"));
  std::string rows = "date,component,mean,low,high\n";
  for (const auto& c : dec.components) rows += band_rows(data, c.name, c.mean, c.low, c.high);
  out.write("components.csv", rows);
  out.write("fitted.csv", fitted_csv(data, f.draws));
  out.manifest("decompose", resolved, nullptr);
}

void cmd_cluster(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  const json& cl = resolved.at("cluster");
  const auto names = cl.at("columns").get<std::vector<std::string>>();
  if (names.size() < 2) throw ConfigError("cluster.columns needs at least two series");
  const Table table = Table::read(resolved.at("data").at("path").get<std::string>());
  const Frequency freq = parse_frequency(resolved.at("data").at("frequency"));
  // validates the date spacing
  TimeSeries(table.dates, std::vector<double>(table.dates.size(), 0.0), freq);
  const Eigen::MatrixXd X = numeric_columns(table, names);
  std::vector<NamedSeries> series;
  for (std::size_t j = 0; j < names.size(); ++j) series.push_back({names[j], X.col(static_cast<Eigen::Index>(j)), freq});
  std::optional<int> k;
  if (!cl.at("k").is_null()) k = cl.at("k").get<int>();
  if (!opt.quiet) log << "clustering " << names.size() << " series\n";
  const ClusterResult res = cluster_trends(series, k, opt.threads);

  const auto& d = res.dendrogram;
  std::string dist = "series";
  for (const auto& n : names) dist += "," + n;
  dist += "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    dist += names[i];
    for (std::size_t j = 0; j < names.size(); ++j)
      dist += "," + fmt(d.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    dist += "\n";
  }
  out.write("distances.csv", dist);
  // ids 0..n-1 are the input series, n + i the cluster formed at step i
  std::string merges = "step,left,right,height,size\n";
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    const auto& m = d.merges[i];
    auto label = [&](int id) {
      return id < static_cast<int>(names.size()) ? names[id] : "cluster_" + std::to_string(id - names.size() + 1);
    };
    merges += std::to_string(i + 1) + "," + label(m.left) + "," + label(m.right) + "," + fmt(m.height) + "," +
              std::to_string(m.size) + "\n";
  }
  out.write("dendrogram.csv", merges);
  if (k) {
    std::string labels = "series,cluster\n";
    for (std::size_t i = 0; i < names.size(); ++i) labels += names[i] + "," + std::to_string(res.labels[i] + 1) + "\n";
    out.write("clusters.csv", labels);
  }
  out.manifest("cluster", resolved, nullptr);
}

void cmd_periodogram(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  const std::string column = resolved.at("periodogram").at("column");
  const Table table = Table::read(resolved.at("data").at("path").get<std::string>());
  TimeSeries(table.dates, std::vector<double>(table.dates.size(), 0.0),
             parse_frequency(resolved.at("data").at("frequency")));
  const Eigen::VectorXd x = numeric_columns(table, {column}).col(0);
  const Periodogram p = periodogram(x);
  std::string rows = "frequency,period,power\n";
  for (Eigen::Index j = 0; j < p.power.size(); ++j)
    rows += fmt(p.frequency[j]) + "," + fmt(1.0 / p.frequency[j]) + "," + fmt(p.power[j]) + "\n";
  out.write("periodogram.csv", rows);
  if (!opt.quiet) log << column << ": dominant period " << p.dominant_period << "\n";
  out.manifest("periodogram", resolved,
               {{"column", column},
                {"dominant_frequency", p.dominant_frequency},
                {"dominant_period", p.dominant_period},
                {"total_power", p.total_power()}});
}

void cmd_simulate(const json& resolved, OutputDir& out, const RunOptions& opt, std::ostream& log) {
  if (!resolved.contains("simulate")) throw ConfigError("simulate needs a \"simulate\" block");
  const json& s = resolved.at("simulate");
  const int n = s.at("length"), k = s.at("regressors");
  const double phi = s.at("regressor_ar");
  Rng rng(s.at("seed").get<std::uint64_t>());
  std::normal_distribution<double> normal(0.0, 1.0);

  // AR(1) drivers with unit marginal variance
  Eigen::MatrixXd X(n, k);
  for (int j = 0; j < k; ++j) {
    double v = normal(rng);
    for (int t = 0; t < n; ++t) {
      if (t > 0) v = phi * v + std::sqrt(1.0 - phi * phi) * normal(rng);
      X(t, j) = v;
    }
  }
  std::vector<std::string> names;
  for (int j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  for (const auto& [name, value] : s.at("coefficients").items()) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("simulate.coefficients: unknown regressor " + name);
    beta[it - names.begin()] = value.get<double>();
  }

  // trend plus noise from the local linear trend model
  const AssembledModel trend = assemble({LocalLinearTrend{}}, n);
  SystemMatrices sm = trend.matrices;
  const double level_sd = s.at("level_sd"), slope_sd = s.at("slope_sd"), obs_sd = s.at("obs_sd");
  sm.state_variances << level_sd * level_sd, slope_sd * slope_sd;
  sm.obs_variance = obs_sd * obs_sd;
  const GaussianState init{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  const SimulatedData sim = simulate_data(sm, init, n, rng);
  const Eigen::VectorXd y = sim.y + X * beta;

  const Frequency freq = parse_frequency(s.at("frequency"));
  auto date = parse_date(s.at("start"));
  std::string csv = "date,y";
  for (const auto& name : names) csv += "," + name;
  csv += "\n";
  char buf[32];
  for (int t = 0; t < n; ++t, date += std::chrono::days(spacing_days(freq))) {
    csv += format_date(date);
    std::snprintf(buf, sizeof buf, ",%.6f", y[t]);
    csv += buf;
    for (int j = 0; j < k; ++j) {
      std::snprintf(buf, sizeof buf, ",%.6f", X(t, j));
      csv += buf;
    }
    csv += "\n";
  }
  out.write("data.csv", csv);
  if (!opt.quiet) log << "simulated " << n << " rows with " << k << " regressors\n";
  json sim_only = {{"simulate", s}};
  out.manifest("simulate", sim_only, nullptr);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"fit",     "summarize",   "calibrate", "compare",
                                              "decompose", "cluster", "periodogram", "simulate"};
  return names;
}

void run_command(const std::string& command, const json& resolved, const RunOptions& options, std::ostream& log) {
  OutputDir out(options.output);
  if (command != "simulate" && !resolved.contains("data"))
    throw ConfigError(command + " needs a \"data\" block in the config");
  if (command == "fit") return cmd_fit(resolved, out, options, log);
  if (command == "summarize") return cmd_summarize(resolved, out, options, log);
  if (command == "calibrate") return cmd_calibrate(resolved, out, options, log);
  if (command == "compare") return cmd_compare(resolved, out, options, log);
  if (command == "decompose") return cmd_decompose(resolved, out, options, log);
  if (command == "cluster") return cmd_cluster(resolved, out, options, log);
  if (command == "periodogram") return cmd_periodogram(resolved, out, options, log);
  if (command == "simulate") return cmd_simulate(resolved, out, options, log);
  throw ConfigError("unknown command " + command);
}

}  // namespace bsts::cli
