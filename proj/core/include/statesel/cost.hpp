#pragma once

#include <span>

#include <Eigen/Dense>

#include "statesel/dataset.hpp"

namespace statesel {

/// Per-channel normalizers taken from the training split only.
struct ChannelScales {
  Eigen::VectorXd sigma_x;
  Eigen::VectorXd sigma_y;
  double floor = 1e-9;
};

/// Normalized MSE over states and outputs; J = J_state + J_output.
struct CostBreakdown {
  double J = 0.0;
  double J_state = 0.0;
  double J_output = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Eigen::Index L = 0;
};

/// Population standard deviation of a sample vector, pooled as given.
double population_stddev(const Eigen::Ref<const Eigen::VectorXd>& samples);

/// sigma_x follows `state_idx`; sigma_y follows `train.outputs()`. Values below `floor`
/// are replaced by `floor`.
ChannelScales compute_scales(const TimeSeriesDataset& train, std::span<const Index> state_idx,
                             double floor = 1e-9);

CostBreakdown cost(const Eigen::MatrixXd& x_pred, const Eigen::MatrixXd& y_pred, const Eigen::MatrixXd& x_true,
                   const Eigen::MatrixXd& y_true, const ChannelScales& scales);

}  // namespace statesel
