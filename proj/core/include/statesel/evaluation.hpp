#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "statesel/cost.hpp"
#include "statesel/dataset.hpp"
#include "statesel/dmdc.hpp"

namespace statesel {

struct EvaluationConfig {
  TruncationPolicy truncation;
  double scale_floor = 1e-9;
};

/// Predictions and truth for every realization, concatenated column-wise. Each
/// realization is rolled out from its own first sample and scored on steps 1..l-1.
struct Trajectories {
  Eigen::MatrixXd x_pred;
  Eigen::MatrixXd y_pred;
  Eigen::MatrixXd x_true;
  Eigen::MatrixXd y_true;
  std::vector<Eigen::Index> offsets;  // first column of each realization
};

Trajectories predict(const StateSpaceModel& model, const TimeSeriesDataset& data, std::span<const Index> state_idx);

CostBreakdown score(const StateSpaceModel& model, const TimeSeriesDataset& data, std::span<const Index> state_idx,
                    const ChannelScales& scales);

/// Scores candidate state sets on a fixed training split: DMDc fit, rollout, cost.
/// Thread-safe; the dataset must outlive the evaluator.
class SubsetEvaluator {
 public:
  explicit SubsetEvaluator(const TimeSeriesDataset& train, EvaluationConfig cfg = {});

  [[nodiscard]] const TimeSeriesDataset& train() const noexcept { return train_; }
  [[nodiscard]] const EvaluationConfig& config() const noexcept { return cfg_; }

  [[nodiscard]] ChannelScales scales_for(std::span<const Index> state_idx) const;

  /// Throws on degenerate snapshots.
  [[nodiscard]] CostBreakdown evaluate(std::span<const Index> state_idx) const;

  /// J on the training split, or +infinity when the fit fails or the rollout diverges.
  [[nodiscard]] double train_cost(std::span<const Index> state_idx) const noexcept;

 private:
  const TimeSeriesDataset& train_;
  EvaluationConfig cfg_;
  Eigen::VectorXd channel_sigma_;
};

struct ModelEvaluation {
  StateSpaceModel model;
  CostBreakdown train;
  CostBreakdown test;
};

/// Final fit on `train` and scoring on both splits with training-only scales.
ModelEvaluation evaluate_selection(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                                   std::span<const Index> state_idx, const EvaluationConfig& cfg = {});

}  // namespace statesel
