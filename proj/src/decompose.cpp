#include <stdexcept>

#include "bsts/components.hpp"
#include "bsts/gibbs.hpp"
#include "bsts/summary.hpp"

namespace bsts {

namespace {

void check_draw(const PosteriorDraws& draws, std::size_t draw) {
  if (draw >= draws.size()) throw std::out_of_range("draw index out of range");
  const AssembledModel& m = draws.model;
  if (draws.states[draw].rows() != m.state_dim() || draws.states[draw].cols() != m.length ||
      draws.beta.cols() != m.static_count())
    throw std::invalid_argument("draws do not match the model layout");
}

}  // namespace

Eigen::VectorXd component_contribution(const PosteriorDraws& draws, std::size_t draw, const ComponentBlock& block) {
  check_draw(draws, draw);
  const AssembledModel& m = draws.model;
  const Eigen::Index n = m.length;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (block.state_size > 0) {
    const Eigen::MatrixXd& alpha = draws.states[draw];
    for (Eigen::Index t = 0; t < n; ++t)
      out[t] = m.matrices.obs_row(t).segment(block.state_start, block.state_size).dot(
          alpha.col(t).segment(block.state_start, block.state_size));
  }
  if (block.static_size > 0) {
    out.noalias() += m.static_design.middleCols(block.static_start, block.static_size) *
                     draws.beta.row(static_cast<Eigen::Index>(draw)).segment(block.static_start, block.static_size)
                         .transpose();
  }
  return out;
}

Eigen::VectorXd fitted_mean(const PosteriorDraws& draws, std::size_t draw) {
  check_draw(draws, draw);
  const AssembledModel& m = draws.model;
  Eigen::VectorXd out = m.static_design * draws.beta.row(static_cast<Eigen::Index>(draw)).transpose();
  const Eigen::MatrixXd& alpha = draws.states[draw];
  for (Eigen::Index t = 0; t < m.length; ++t) out[t] += m.matrices.obs_row(t).dot(alpha.col(t));
  return out;
}

Decomposition decompose(const PosteriorDraws& draws, const AssembledModel& model, double mass) {
  if (draws.size() == 0) throw std::invalid_argument("decomposition needs at least one draw");
  if (draws.model.layout.size() != model.layout.size() || draws.model.state_dim() != model.state_dim() ||
      draws.model.static_count() != model.static_count() || draws.model.length != model.length)
    throw std::invalid_argument("draws were not produced on this model layout");
  for (std::size_t i = 0; i < model.layout.size(); ++i) {
    const auto& a = draws.model.layout[i];
    const auto& b = model.layout[i];
    if (a.name != b.name || a.state_start != b.state_start || a.state_size != b.state_size ||
        a.static_start != b.static_start || a.static_size != b.static_size)
      throw std::invalid_argument("draws were not produced on this model layout");
  }

  const auto D = static_cast<Eigen::Index>(draws.size());
  const Eigen::Index n = model.length;
  Decomposition out;
  out.fitted_mean = Eigen::VectorXd::Zero(n);
  for (std::size_t d = 0; d < draws.size(); ++d) out.fitted_mean += fitted_mean(draws, d);
  out.fitted_mean /= static_cast<double>(D);

  Eigen::MatrixXd samples(D, n);
  for (const auto& block : model.layout) {
    for (Eigen::Index d = 0; d < D; ++d)
      samples.row(d) = component_contribution(draws, static_cast<std::size_t>(d), block).transpose();
    PathBand band = pointwise_band(samples, mass);
    out.components.push_back({block.name, block.kind, std::move(band.mean), std::move(band.low), std::move(band.high)});
  }
  return out;
}

}  // namespace bsts
