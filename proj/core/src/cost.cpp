#include "statesel/cost.hpp"

#include <algorithm>
#include <cmath>

#include "statesel/error.hpp"

namespace statesel {

double population_stddev(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  // Welford's update; the unit tests check it against a two-pass reference.
  double mean = 0.0;
  double m2 = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    ++count;
    const double delta = samples(i) - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (samples(i) - mean);
  }
  if (count == 0) return 0.0;
  return std::sqrt(std::max(0.0, m2 / static_cast<double>(count)));
}

ChannelScales compute_scales(const TimeSeriesDataset& train, std::span<const Index> state_idx, double floor) {
  require(floor > 0.0, ErrorCode::InvalidArgument, "scale floor must be positive");
  require(train.total_steps() > 0, ErrorCode::InvalidArgument, "training data is empty");
  ChannelScales scales;
  scales.floor = floor;
  scales.sigma_x.resize(static_cast<Eigen::Index>(state_idx.size()));
  for (std::size_t i = 0; i < state_idx.size(); ++i) {
    scales.sigma_x(static_cast<Eigen::Index>(i)) = std::max(floor, population_stddev(train.pooled(state_idx[i])));
  }
  const auto& outs = train.outputs();
  scales.sigma_y.resize(static_cast<Eigen::Index>(outs.size()));
  for (std::size_t j = 0; j < outs.size(); ++j) {
    scales.sigma_y(static_cast<Eigen::Index>(j)) = std::max(floor, population_stddev(train.pooled(outs[j])));
  }
  return scales;
}

CostBreakdown cost(const Eigen::MatrixXd& x_pred, const Eigen::MatrixXd& y_pred, const Eigen::MatrixXd& x_true,
                   const Eigen::MatrixXd& y_true, const ChannelScales& scales) {
  require(x_pred.rows() == x_true.rows() && x_pred.cols() == x_true.cols(), ErrorCode::DimensionMismatch,
          "state prediction and truth differ in shape");
  require(y_pred.rows() == y_true.rows() && y_pred.cols() == y_true.cols(), ErrorCode::DimensionMismatch,
          "output prediction and truth differ in shape");
  require(x_pred.cols() == y_pred.cols(), ErrorCode::DimensionMismatch, "state and output horizons differ");
  require(scales.sigma_x.size() == x_true.rows() && scales.sigma_y.size() == y_true.rows(),
          ErrorCode::DimensionMismatch, "scales do not match channel counts");
  require(x_true.cols() >= 1, ErrorCode::InvalidArgument, "cost needs at least one step");
  require(x_true.rows() >= 1 && y_true.rows() >= 1, ErrorCode::InvalidArgument, "cost needs states and outputs");

  CostBreakdown out;
  out.n = x_true.rows();
  out.p = y_true.rows();
  out.L = x_true.cols();
  const double l = static_cast<double>(out.L);
  out.J_state = (scales.sigma_x.cwiseInverse().asDiagonal() * (x_pred - x_true)).squaredNorm() /
                (static_cast<double>(out.n) * l);
  out.J_output = (scales.sigma_y.cwiseInverse().asDiagonal() * (y_pred - y_true)).squaredNorm() /
                 (static_cast<double>(out.p) * l);
  out.J = out.J_state + out.J_output;
  return out;
}

}  // namespace statesel
