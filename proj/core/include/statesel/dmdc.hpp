#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "statesel/dataset.hpp"

namespace statesel {

/// Truncation rank is the largest q with sigma_1 / sigma_q < max_condition.
struct TruncationPolicy {
  double max_condition = 1e9;
};

struct TruncatedSvd {
  Eigen::MatrixXd U;      // rows(M) x q
  Eigen::VectorXd sigma;  // q
  Eigen::MatrixXd W;      // cols(M) x q
  Eigen::Index rank = 0;
};

/// Throws DegenerateSnapshots for an all-zero (or non-finite) matrix.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy = {});

/// W * Sigma^-1 * U^T restricted to the kept triplets.
Eigen::MatrixXd pseudo_inverse(const TruncatedSvd& svd);

struct DynamicsFit {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
  Eigen::Index rank = 0;
};

/// Least-squares one-step operator [Ad Bd] = Xp * pinv([X; V]) through the truncated SVD.
DynamicsFit fit_dynamics(const SnapshotSet& s, const TruncationPolicy& policy = {});

/// Minimum-norm Cd = Y * pinv(X).
Eigen::MatrixXd fit_output_map(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const TruncationPolicy& policy = {});

/// Discrete-time surrogate x(k+1) = Ad x(k) + Bd v(k), y(k) = Cd x(k). No feedthrough.
struct StateSpaceModel {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
  Eigen::MatrixXd Cd;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
  double dt = 0.0;

  [[nodiscard]] Eigen::Index states() const noexcept { return Ad.rows(); }
  [[nodiscard]] Eigen::Index inputs() const noexcept { return Bd.cols(); }
  [[nodiscard]] Eigen::Index outputs() const noexcept { return Cd.rows(); }
  [[nodiscard]] Eigen::MatrixXd Dd() const { return Eigen::MatrixXd::Zero(Cd.rows(), Bd.cols()); }

  /// Throws DimensionMismatch / NonFiniteValue on inconsistent contents.
  void validate() const;
};

/// Assembles snapshots for `state_idx` on `train` and fits Ad, Bd and Cd.
StateSpaceModel fit_model(const TimeSeriesDataset& train, std::span<const Index> state_idx,
                          const TruncationPolicy& policy = {});

struct RolloutResult {
  Eigen::MatrixXd X;  // n x K, steps 1..K
  Eigen::MatrixXd Y;  // p x K
};

/// Open-loop prediction from x0 under inputs V (m x K); column k of the result is step k+1.
RolloutResult rollout(const StateSpaceModel& model, const Eigen::VectorXd& x0, const Eigen::MatrixXd& V);

/// Zero-order-hold discretization via the exponential of the augmented block matrix.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> c2d_zoh(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                    double dt);

void save_model(const std::filesystem::path& path, const StateSpaceModel& model);
StateSpaceModel load_model(const std::filesystem::path& path);

}  // namespace statesel
