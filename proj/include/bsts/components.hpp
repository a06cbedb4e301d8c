#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bsts/priors.hpp"
#include "bsts/state_space.hpp"

namespace bsts {

// ---------------------------------------------------------------------------
// Component specifications

/// Random-walk level.
struct LocalLevel {
  std::optional<InverseGammaPrior> level_prior;
};

/// Random-walk level plus random-walk slope.
struct LocalLinearTrend {
  std::optional<InverseGammaPrior> level_prior;
  std::optional<InverseGammaPrior> slope_prior;
};

/// Dummy seasonal with `period` seasons (period - 1 states, sum-to-zero).
struct Seasonal {
  int period = 4;
  std::optional<InverseGammaPrior> prior;
};

enum class InterventionKind { Pulse, LevelShift, SlopeShift };

std::string to_string(InterventionKind kind);
InterventionKind parse_intervention_kind(const std::string& text);

/// Structural event at 1-based time `onset`. Static interventions enter the
/// regression block with inclusion probability 1; dynamic ones become a
/// random-walk coefficient in the state vector.
struct Intervention {
  InterventionKind kind = InterventionKind::LevelShift;
  Eigen::Index onset = 1;
  bool dynamic = false;
  double prior_mean = 0.0;
  double prior_variance = 1.0;
  std::optional<InverseGammaPrior> prior;
  std::string name;
};

/// Time-invariant coefficients with spike-and-slab selection. Kept outside
/// the state vector.
struct StaticRegression {
  Eigen::MatrixXd design;
  std::vector<std::string> names;
  std::optional<SpikeSlabPrior> prior;
};

/// One random-walk coefficient per design column.
struct DynamicRegression {
  Eigen::MatrixXd design;
  std::vector<std::string> names;
  std::optional<InverseGammaPrior> prior;
};

using ComponentSpec =
    std::variant<LocalLevel, LocalLinearTrend, Seasonal, Intervention, StaticRegression, DynamicRegression>;

/// Regressor column for an intervention: pulse is 1 at onset only,
/// level shift is 1 from onset on, slope shift ramps 1, 2, 3, ... from onset.
Eigen::VectorXd intervention_design(InterventionKind kind, Eigen::Index onset, Eigen::Index n);

// ---------------------------------------------------------------------------
// Assembled model

enum class ComponentKind { Trend, Seasonal, Intervention, StaticRegression, DynamicRegression };

std::string to_string(ComponentKind kind);

/// Where one component lives. Ranges are [start, start + size) into the state
/// vector, the innovation vector and the static coefficient vector.
struct ComponentBlock {
  std::string name;
  ComponentKind kind;
  Eigen::Index state_start = 0, state_size = 0;
  Eigen::Index innovation_start = 0, innovation_size = 0;
  Eigen::Index static_start = 0, static_size = 0;
};

struct AssembleOptions {
  double initial_variance = 1e7;
};

struct AssembledModel {
  SystemMatrices matrices;
  GaussianState initial_state;
  std::vector<ComponentBlock> layout;
  Eigen::Index length = 0;

  /// Static regression and static intervention columns (length x k).
  Eigen::MatrixXd static_design;
  std::vector<std::string> static_names;
  SpikeSlabPrior static_prior;

  std::vector<std::string> state_names;
  std::vector<std::string> innovation_names;
  std::vector<std::optional<InverseGammaPrior>> innovation_priors;

  Eigen::Index state_dim() const { return matrices.state_dim(); }
  Eigen::Index static_count() const { return static_design.cols(); }
  const ComponentBlock* find(const std::string& name) const;
  /// State index of each dynamic-regression coefficient, with its name.
  std::vector<std::pair<std::string, Eigen::Index>> dynamic_coefficients() const;
};

/// Superposes components into one state-space model (block-diagonal T, R, Q;
/// Z rows concatenated). Throws std::invalid_argument when the specs are
/// jointly inconsistent with a series of length `n`.
AssembledModel assemble(const std::vector<ComponentSpec>& components, Eigen::Index n,
                        const AssembleOptions& options = {});

// ---------------------------------------------------------------------------
// Decomposition

struct PosteriorDraws;

struct ContributionBand {
  std::string name;
  ComponentKind kind;
  Eigen::VectorXd mean;
  Eigen::VectorXd low;
  Eigen::VectorXd high;
};

struct Decomposition {
  std::vector<ContributionBand> components;
  /// Pointwise posterior mean of the fitted observation mean.
  Eigen::VectorXd fitted_mean;
};

/// Contribution of layout block `block` to the observation mean at every t
/// for draw `draw`.
Eigen::VectorXd component_contribution(const PosteriorDraws& draws, std::size_t draw, const ComponentBlock& block);

/// Fitted observation mean Z_t a_t + x_t' beta for one draw.
Eigen::VectorXd fitted_mean(const PosteriorDraws& draws, std::size_t draw);

/// Pointwise mean and HDI (mass `mass`) of every component's contribution.
Decomposition decompose(const PosteriorDraws& draws, const AssembledModel& model, double mass = 0.95);

}  // namespace bsts
