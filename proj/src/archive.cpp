#include "bsts/archive.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bsts {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

ComponentKind parse_kind(const std::string& s) {
  for (auto k : {ComponentKind::Trend, ComponentKind::Seasonal, ComponentKind::Intervention,
                 ComponentKind::StaticRegression, ComponentKind::DynamicRegression})
    if (to_string(k) == s) return k;
  throw std::runtime_error("archive: unknown component kind '" + s + "'");
}

void put(std::string& line, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.push_back(',');
  line.append(buf, static_cast<std::size_t>(len));
}

double parse_double(std::string_view cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw std::runtime_error("archive: bad number at row " + std::to_string(row) + ", column " +
                             std::to_string(col + 1));
  return v;
}

}  // namespace

void write_archive(const PosteriorDraws& draws, const std::filesystem::path& dir, const std::string& stem,
                   const ArchiveOptions& options) {
  const AssembledModel& model = draws.model;
  const Eigen::Index m = model.state_dim(), n = model.length, k = model.static_count(),
                     r = static_cast<Eigen::Index>(model.innovation_names.size());
  std::filesystem::create_directories(dir);

  json layout = json::array();
  for (const auto& b : model.layout)
    layout.push_back({{"name", b.name},
                      {"kind", to_string(b.kind)},
                      {"state", {b.state_start, b.state_size}},
                      {"innovation", {b.innovation_start, b.innovation_size}},
                      {"static", {b.static_start, b.static_size}}});
  json meta = {{"format", kFormatVersion},
               {"draws", draws.size()},
               {"length", n},
               {"layout", layout},
               {"state_names", model.state_names},
               {"innovation_names", model.innovation_names},
               {"static_names", model.static_names},
               {"includes_states", options.include_states},
               {"config",
                {{"iterations", draws.config.iterations},
                 {"burn_in", draws.config.resolved_burn_in()},
                 {"thin", draws.config.thin},
                 {"seed", draws.config.seed}}}};
  {
    std::ofstream js(dir / (stem + ".json"), std::ios::binary);
    if (!js) throw std::runtime_error("cannot write " + (dir / (stem + ".json")).string());
    js << meta.dump(2) << '\n';
  }

  std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
  // names are local to their block; qualify them for the header
  std::vector<std::string> state_cols(m), innov_cols(r);
  for (const auto& b : model.layout) {
    for (Eigen::Index i = 0; i < b.state_size; ++i)
      state_cols[b.state_start + i] = b.name + "." + model.state_names[b.state_start + i];
    for (Eigen::Index i = 0; i < b.innovation_size; ++i)
      innov_cols[b.innovation_start + i] = b.name + "." + model.innovation_names[b.innovation_start + i];
  }
  std::string line = "iteration,sigma2.observation";
  for (Eigen::Index j = 0; j < r; ++j) line += ",sigma2." + innov_cols[j];
  for (Eigen::Index j = 0; j < k; ++j) line += ",beta." + model.static_names[j];
  for (Eigen::Index j = 0; j < k; ++j) line += ",gamma." + model.static_names[j];
  if (options.include_states)
    for (Eigen::Index s = 0; s < m; ++s)
      for (Eigen::Index t = 0; t < n; ++t) line += ",state." + state_cols[s] + "." + std::to_string(t + 1);
  csv << line << '\n';
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    line = std::to_string(draws.iteration[d]);
    put(line, draws.obs_variance[i]);
    for (Eigen::Index j = 0; j < r; ++j) put(line, draws.state_variances(i, j));
    for (Eigen::Index j = 0; j < k; ++j) put(line, draws.beta(i, j));
    for (Eigen::Index j = 0; j < k; ++j) line += draws.inclusion(i, j) ? ",1" : ",0";
    if (options.include_states)
      for (Eigen::Index s = 0; s < m; ++s)
        for (Eigen::Index t = 0; t < n; ++t) put(line, draws.states[d](s, t));
    csv << line << '\n';
  }
}

PosteriorDraws read_archive(const std::filesystem::path& dir, const std::string& stem) {
  std::ifstream js(dir / (stem + ".json"));
  if (!js) throw std::runtime_error("cannot read " + (dir / (stem + ".json")).string());
  const json meta = json::parse(js);
  if (meta.at("format").get<int>() != kFormatVersion) throw std::runtime_error("archive: unsupported format");

  PosteriorDraws out;
  AssembledModel& model = out.model;
  model.length = meta.at("length").get<Eigen::Index>();
  model.state_names = meta.at("state_names").get<std::vector<std::string>>();
  model.innovation_names = meta.at("innovation_names").get<std::vector<std::string>>();
  model.static_names = meta.at("static_names").get<std::vector<std::string>>();
  for (const auto& b : meta.at("layout")) {
    ComponentBlock block;
    block.name = b.at("name").get<std::string>();
    block.kind = parse_kind(b.at("kind").get<std::string>());
    block.state_start = b.at("state")[0];
    block.state_size = b.at("state")[1];
    block.innovation_start = b.at("innovation")[0];
    block.innovation_size = b.at("innovation")[1];
    block.static_start = b.at("static")[0];
    block.static_size = b.at("static")[1];
    model.layout.push_back(block);
  }
  const auto& cfg = meta.at("config");
  out.config.iterations = cfg.at("iterations");
  out.config.burn_in = cfg.at("burn_in").get<int>();
  out.config.thin = cfg.at("thin");
  out.config.seed = cfg.at("seed");

  const auto m = static_cast<Eigen::Index>(model.state_names.size());
  const auto r = static_cast<Eigen::Index>(model.innovation_names.size());
  const auto k = static_cast<Eigen::Index>(model.static_names.size());
  const Eigen::Index n = model.length;
  const bool with_states = meta.at("includes_states").get<bool>();
  const auto count = meta.at("draws").get<Eigen::Index>();
  const std::size_t width = 2 + static_cast<std::size_t>(r + 2 * k + (with_states ? m * n : 0));

  // the archive has no system matrices; keep dimensions consistent anyway
  model.matrices.obs_map = Eigen::MatrixXd::Zero(1, m);
  model.matrices.transition = Eigen::MatrixXd::Zero(m, m);
  model.matrices.error_control = Eigen::MatrixXd::Zero(m, r);
  model.matrices.state_variances = Eigen::VectorXd::Zero(r);
  model.static_design = Eigen::MatrixXd::Zero(n, k);

  out.obs_variance.resize(count);
  out.state_variances.resize(count, r);
  out.beta.resize(count, k);
  out.inclusion.resize(count, k);

  std::ifstream csv(dir / (stem + ".csv"));
  if (!csv) throw std::runtime_error("cannot read " + (dir / (stem + ".csv")).string());
  std::string line;
  std::getline(csv, line);  // header
  std::vector<std::string_view> cells;
  for (Eigen::Index d = 0; d < count; ++d) {
    if (!std::getline(csv, line)) throw std::runtime_error("archive: fewer rows than declared");
    cells.clear();
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      cells.emplace_back(line.data() + start, pos - start);
    cells.emplace_back(line.data() + start, line.size() - start);
    if (cells.size() != width)
      throw std::runtime_error("archive: row " + std::to_string(d + 2) + " has " + std::to_string(cells.size()) +
                               " fields, expected " + std::to_string(width));
    const auto row = static_cast<std::size_t>(d + 2);
    std::size_t c = 0;
    out.iteration.push_back(static_cast<int>(parse_double(cells[c], row, c)));
    ++c;
    out.obs_variance[d] = parse_double(cells[c], row, c);
    ++c;
    for (Eigen::Index j = 0; j < r; ++j, ++c) out.state_variances(d, j) = parse_double(cells[c], row, c);
    for (Eigen::Index j = 0; j < k; ++j, ++c) out.beta(d, j) = parse_double(cells[c], row, c);
    for (Eigen::Index j = 0; j < k; ++j, ++c) out.inclusion(d, j) = cells[c] == "1" ? 1 : 0;
    if (with_states) {
      Eigen::MatrixXd s(m, n);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index t = 0; t < n; ++t, ++c) s(i, t) = parse_double(cells[c], row, c);
      out.states.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace bsts
