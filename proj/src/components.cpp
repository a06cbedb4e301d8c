#include "bsts/components.hpp"

#include <algorithm>
#include <stdexcept>

namespace bsts {

std::string to_string(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::Pulse: return "pulse";
    case InterventionKind::LevelShift: return "level_shift";
    case InterventionKind::SlopeShift: return "slope_shift";
  }
  return "unknown";
}

InterventionKind parse_intervention_kind(const std::string& text) {
  if (text == "pulse") return InterventionKind::Pulse;
  if (text == "level_shift") return InterventionKind::LevelShift;
  if (text == "slope_shift") return InterventionKind::SlopeShift;
  throw std::invalid_argument("unknown intervention kind '" + text + "'");
}

std::string to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Trend: return "trend";
    case ComponentKind::Seasonal: return "seasonal";
    case ComponentKind::Intervention: return "intervention";
    case ComponentKind::StaticRegression: return "static_regression";
    case ComponentKind::DynamicRegression: return "dynamic_regression";
  }
  return "unknown";
}

Eigen::VectorXd intervention_design(InterventionKind kind, Eigen::Index onset, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("intervention design needs a positive length");
  if (onset < 1 || onset > n)
    throw std::invalid_argument("intervention onset " + std::to_string(onset) + " outside 1.." + std::to_string(n));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = onset - 1; t < n; ++t) {
    switch (kind) {
      case InterventionKind::Pulse: x[t] = t == onset - 1 ? 1.0 : 0.0; break;
      case InterventionKind::LevelShift: x[t] = 1.0; break;
      case InterventionKind::SlopeShift: x[t] = static_cast<double>(t - onset + 2); break;
    }
  }
  return x;
}

const ComponentBlock* AssembledModel::find(const std::string& name) const {
  for (const auto& b : layout)
    if (b.name == name) return &b;
  return nullptr;
}

std::vector<std::pair<std::string, Eigen::Index>> AssembledModel::dynamic_coefficients() const {
  std::vector<std::pair<std::string, Eigen::Index>> out;
  for (const auto& b : layout) {
    if (b.kind != ComponentKind::DynamicRegression) continue;
    for (Eigen::Index i = 0; i < b.state_size; ++i)
      out.emplace_back(state_names[b.state_start + i], b.state_start + i);
  }
  return out;
}

namespace {

// One component's contribution to the superposed system before concatenation.
struct StatePiece {
  Eigen::MatrixXd transition;
  Eigen::MatrixXd obs;  // 1 x size or n x size
  Eigen::MatrixXd error_control;
  std::vector<std::string> state_names;
  std::vector<std::string> innovation_names;
  std::vector<std::optional<InverseGammaPrior>> priors;
};

struct StaticPiece {
  Eigen::MatrixXd design;
  std::vector<std::string> names;
  SpikeSlabPrior prior;
};

void check_design(const Eigen::MatrixXd& X, Eigen::Index n, const std::string& what) {
  if (X.rows() != n)
    throw std::invalid_argument(what + " design has " + std::to_string(X.rows()) + " rows, series length is " +
                                std::to_string(n));
  if (X.cols() == 0) throw std::invalid_argument(what + " design has no columns");
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index t = 0; t < n; ++t)
      if (!std::isfinite(X(t, j)))
        throw std::invalid_argument(what + " design has a missing or non-finite value at row " +
                                    std::to_string(t + 1) + ", column " + std::to_string(j + 1));
}

std::vector<std::string> column_names(const std::vector<std::string>& given, Eigen::Index k, const std::string& stem) {
  if (!given.empty()) {
    if (static_cast<Eigen::Index>(given.size()) != k)
      throw std::invalid_argument(stem + " names count differs from design columns");
    return given;
  }
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < k; ++j) out.push_back(stem + std::to_string(j + 1));
  return out;
}

std::string unique_name(std::string base, const std::vector<ComponentBlock>& layout) {
  auto taken = [&](const std::string& s) {
    return std::any_of(layout.begin(), layout.end(), [&](const ComponentBlock& b) { return b.name == s; });
  };
  if (!taken(base)) return base;
  for (int i = 2;; ++i) {
    const std::string candidate = base + "_" + std::to_string(i);
    if (!taken(candidate)) return candidate;
  }
}

StatePiece random_walks(const Eigen::MatrixXd& obs, std::vector<std::string> names,
                        const std::optional<InverseGammaPrior>& prior) {
  const Eigen::Index k = obs.cols();
  StatePiece p;
  p.transition = Eigen::MatrixXd::Identity(k, k);
  p.obs = obs;
  p.error_control = Eigen::MatrixXd::Identity(k, k);
  p.state_names = names;
  p.innovation_names = std::move(names);
  p.priors.assign(k, prior);
  return p;
}

}  // namespace

AssembledModel assemble(const std::vector<ComponentSpec>& components, Eigen::Index n, const AssembleOptions& options) {
  if (n < 1) throw std::invalid_argument("series length must be at least 1");
  if (!(options.initial_variance >= 0.0)) throw std::invalid_argument("initial state variance must be nonnegative");

  AssembledModel model;
  model.length = n;
  std::vector<StatePiece> pieces;
  std::vector<StaticPiece> statics;
  int trend_count = 0;
  int intervention_count = 0;
  Eigen::Index m = 0, r = 0, k = 0;

  auto add_state = [&](const std::string& base, ComponentKind kind, StatePiece piece) {
    ComponentBlock b{unique_name(base, model.layout), kind};
    b.state_start = m;
    b.state_size = piece.transition.rows();
    b.innovation_start = r;
    b.innovation_size = piece.error_control.cols();
    b.static_start = k;
    m += b.state_size;
    r += b.innovation_size;
    model.layout.push_back(b);
    pieces.push_back(std::move(piece));
  };
  auto add_static = [&](const std::string& base, ComponentKind kind, StaticPiece piece) {
    ComponentBlock b{unique_name(base, model.layout), kind};
    b.state_start = m;
    b.innovation_start = r;
    b.static_start = k;
    b.static_size = piece.design.cols();
    k += b.static_size;
    model.layout.push_back(b);
    statics.push_back(std::move(piece));
  };

  for (const auto& spec : components) {
    if (const auto* c = std::get_if<LocalLevel>(&spec)) {
      ++trend_count;
      StatePiece p;
      p.transition = Eigen::MatrixXd::Ones(1, 1);
      p.obs = Eigen::MatrixXd::Ones(1, 1);
      p.error_control = Eigen::MatrixXd::Ones(1, 1);
      p.state_names = {"level"};
      p.innovation_names = {"level"};
      p.priors = {c->level_prior};
      add_state("trend", ComponentKind::Trend, std::move(p));
    } else if (const auto* c = std::get_if<LocalLinearTrend>(&spec)) {
      ++trend_count;
      StatePiece p;
      p.transition.resize(2, 2);
      p.transition << 1, 1, 0, 1;
      p.obs.resize(1, 2);
      p.obs << 1, 0;
      p.error_control = Eigen::MatrixXd::Identity(2, 2);
      p.state_names = {"level", "slope"};
      p.innovation_names = {"level", "slope"};
      p.priors = {c->level_prior, c->slope_prior};
      add_state("trend", ComponentKind::Trend, std::move(p));
    } else if (const auto* c = std::get_if<Seasonal>(&spec)) {
      const int S = c->period;
      if (S < 2) throw std::invalid_argument("seasonal period must be at least 2");
      if (2 * static_cast<Eigen::Index>(S) > n)
        throw std::invalid_argument("seasonal period " + std::to_string(S) + " exceeds half the series length " +
                                    std::to_string(n));
      StatePiece p;
      p.transition = Eigen::MatrixXd::Zero(S - 1, S - 1);
      p.transition.row(0).setConstant(-1.0);
      if (S > 2) p.transition.bottomLeftCorner(S - 2, S - 2).setIdentity();
      p.obs = Eigen::MatrixXd::Zero(1, S - 1);
      p.obs(0, 0) = 1.0;
      p.error_control = Eigen::MatrixXd::Zero(S - 1, 1);
      p.error_control(0, 0) = 1.0;
      for (int i = 1; i < S; ++i) p.state_names.push_back("season_" + std::to_string(i));
      p.innovation_names = {"seasonal"};
      p.priors = {c->prior};
      add_state("seasonal", ComponentKind::Seasonal, std::move(p));
    } else if (const auto* c = std::get_if<Intervention>(&spec)) {
      ++intervention_count;
      const Eigen::VectorXd x = intervention_design(c->kind, c->onset, n);
      const std::string name =
          c->name.empty() ? "intervention_" + std::to_string(intervention_count) : c->name;
      if (c->dynamic) {
        add_state(name, ComponentKind::Intervention, random_walks(x, {name}, c->prior));
      } else {
        SpikeSlabPrior prior = SpikeSlabPrior::uniform(1, 1.0, c->prior_mean, c->prior_variance);
        add_static(name, ComponentKind::Intervention, StaticPiece{x, {name}, prior});
      }
    } else if (const auto* c = std::get_if<StaticRegression>(&spec)) {
      check_design(c->design, n, "static regression");
      const Eigen::Index kc = c->design.cols();
      SpikeSlabPrior prior = c->prior.value_or(SpikeSlabPrior::uniform(kc));
      prior.validate();
      if (prior.size() != kc) throw std::invalid_argument("static regression prior length differs from design columns");
      add_static("regression", ComponentKind::StaticRegression,
                 StaticPiece{c->design, column_names(c->names, kc, "x"), prior});
    } else if (const auto* c = std::get_if<DynamicRegression>(&spec)) {
      check_design(c->design, n, "dynamic regression");
      add_state("dynamic_regression", ComponentKind::DynamicRegression,
                random_walks(c->design, column_names(c->names, c->design.cols(), "x"), c->prior));
    }
  }

  if (trend_count > 1) throw std::invalid_argument("at most one of local level / local linear trend is allowed");
  if (m == 0) throw std::invalid_argument("model has no state component");

  const bool time_varying =
      std::any_of(pieces.begin(), pieces.end(), [](const StatePiece& p) { return p.obs.rows() > 1; });
  SystemMatrices& sm = model.matrices;
  sm.transition = Eigen::MatrixXd::Zero(m, m);
  sm.error_control = Eigen::MatrixXd::Zero(m, r);
  sm.obs_map = Eigen::MatrixXd::Zero(time_varying ? n : 1, m);
  sm.state_variances = Eigen::VectorXd::Ones(r);
  sm.obs_variance = 1.0;

  Eigen::Index si = 0, ri = 0;
  for (auto& p : pieces) {
    const Eigen::Index ms = p.transition.rows(), rs = p.error_control.cols();
    sm.transition.block(si, si, ms, ms) = p.transition;
    sm.error_control.block(si, ri, ms, rs) = p.error_control;
    if (p.obs.rows() == 1)
      sm.obs_map.block(0, si, sm.obs_map.rows(), ms) = p.obs.replicate(sm.obs_map.rows(), 1);
    else
      sm.obs_map.block(0, si, n, ms) = p.obs;
    for (Eigen::Index j = 0; j < rs; ++j)
      if (p.priors[j]) sm.state_variances[ri + j] = p.priors[j]->guess();
    model.state_names.insert(model.state_names.end(), p.state_names.begin(), p.state_names.end());
    model.innovation_names.insert(model.innovation_names.end(), p.innovation_names.begin(),
                                  p.innovation_names.end());
    model.innovation_priors.insert(model.innovation_priors.end(), p.priors.begin(), p.priors.end());
    si += ms;
    ri += rs;
  }

  model.static_design = Eigen::MatrixXd::Zero(n, k);
  model.static_prior = SpikeSlabPrior::uniform(0);
  Eigen::Index ki = 0;
  for (auto& s : statics) {
    model.static_design.middleCols(ki, s.design.cols()) = s.design;
    model.static_names.insert(model.static_names.end(), s.names.begin(), s.names.end());
    model.static_prior = model.static_prior.append(s.prior);
    ki += s.design.cols();
  }

  model.initial_state = GaussianState::diffuse(m, options.initial_variance);
  sm.validate(n);
  return model;
}

}  // namespace bsts
