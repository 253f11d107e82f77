#include "statesel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "statesel/error.hpp"

namespace statesel {

Trajectories predict(const StateSpaceModel& model, const TimeSeriesDataset& data, std::span<const Index> state_idx) {
  const auto n = static_cast<Eigen::Index>(state_idx.size());
  require(n == model.states(), ErrorCode::DimensionMismatch, "state index count does not match the model");
  require(static_cast<Eigen::Index>(data.inputs().size()) == model.inputs() &&
              static_cast<Eigen::Index>(data.outputs().size()) == model.outputs(),
          ErrorCode::DimensionMismatch, "dataset inputs/outputs do not match the model");
  Eigen::Index columns = 0;
  for (const auto& m : data.realizations()) columns += m.cols() - 1;

  const auto m_in = model.inputs();
  const auto p = model.outputs();
  Trajectories t;
  t.x_pred.resize(n, columns);
  t.y_pred.resize(p, columns);
  t.x_true.resize(n, columns);
  t.y_true.resize(p, columns);

  Eigen::Index offset = 0;
  Eigen::VectorXd x0(n);
  for (const auto& m : data.realizations()) {
    const auto steps = m.cols() - 1;
    Eigen::MatrixXd V(m_in, steps);
    for (Eigen::Index r = 0; r < m_in; ++r) {
      V.row(r) = m.row(static_cast<Eigen::Index>(data.inputs()[static_cast<std::size_t>(r)])).head(steps);
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto row = static_cast<Eigen::Index>(state_idx[static_cast<std::size_t>(r)]);
      x0(r) = m(row, 0);
      t.x_true.row(r).segment(offset, steps) = m.row(row).tail(steps);
    }
    for (Eigen::Index r = 0; r < p; ++r) {
      const auto row = static_cast<Eigen::Index>(data.outputs()[static_cast<std::size_t>(r)]);
      t.y_true.row(r).segment(offset, steps) = m.row(row).tail(steps);
    }
    const RolloutResult roll = rollout(model, x0, V);
    t.x_pred.middleCols(offset, steps) = roll.X;
    t.y_pred.middleCols(offset, steps) = roll.Y;
    t.offsets.push_back(offset);
    offset += steps;
  }
  return t;
}

CostBreakdown score(const StateSpaceModel& model, const TimeSeriesDataset& data, std::span<const Index> state_idx,
                    const ChannelScales& scales) {
  const Trajectories t = predict(model, data, state_idx);
  return cost(t.x_pred, t.y_pred, t.x_true, t.y_true, scales);
}

SubsetEvaluator::SubsetEvaluator(const TimeSeriesDataset& train, EvaluationConfig cfg)
    : train_(train), cfg_(cfg), channel_sigma_(static_cast<Eigen::Index>(train.channel_count())) {
  require(cfg_.scale_floor > 0.0, ErrorCode::InvalidArgument, "scale floor must be positive");
  for (Index i = 0; i < train.channel_count(); ++i) {
    channel_sigma_(static_cast<Eigen::Index>(i)) = std::max(cfg_.scale_floor, population_stddev(train.pooled(i)));
  }
}

ChannelScales SubsetEvaluator::scales_for(std::span<const Index> state_idx) const {
  ChannelScales s;
  s.floor = cfg_.scale_floor;
  s.sigma_x.resize(static_cast<Eigen::Index>(state_idx.size()));
  for (std::size_t i = 0; i < state_idx.size(); ++i) {
    s.sigma_x(static_cast<Eigen::Index>(i)) = channel_sigma_(static_cast<Eigen::Index>(state_idx[i]));
  }
  const auto& outs = train_.outputs();
  s.sigma_y.resize(static_cast<Eigen::Index>(outs.size()));
  for (std::size_t j = 0; j < outs.size(); ++j) {
    s.sigma_y(static_cast<Eigen::Index>(j)) = channel_sigma_(static_cast<Eigen::Index>(outs[j]));
  }
  return s;
}

CostBreakdown SubsetEvaluator::evaluate(std::span<const Index> state_idx) const {
  const StateSpaceModel model = fit_model(train_, state_idx, cfg_.truncation);
  return score(model, train_, state_idx, scales_for(state_idx));
}

double SubsetEvaluator::train_cost(std::span<const Index> state_idx) const noexcept {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  try {
    const double j = evaluate(state_idx).J;
    return std::isfinite(j) ? j : kInf;
  } catch (...) {
    return kInf;
  }
}

ModelEvaluation evaluate_selection(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                                   std::span<const Index> state_idx, const EvaluationConfig& cfg) {
  ModelEvaluation out;
  out.model = fit_model(train, state_idx, cfg.truncation);
  const ChannelScales scales = compute_scales(train, state_idx, cfg.scale_floor);
  out.train = score(out.model, train, state_idx, scales);
  out.test = score(out.model, test, state_idx, scales);
  return out;
}

}  // namespace statesel
