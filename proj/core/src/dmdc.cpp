#include "statesel/dmdc.hpp"

#include <cmath>
#include <fstream>

#include <unsupported/Eigen/MatrixFunctions>
#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "statesel/error.hpp"

namespace statesel {

TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, const TruncationPolicy& policy) {
  require(policy.max_condition > 1.0, ErrorCode::InvalidArgument, "max_condition must exceed 1");
  require(m.size() > 0, ErrorCode::DegenerateSnapshots, "empty snapshot matrix");
  require(m.allFinite(), ErrorCode::DegenerateSnapshots, "snapshot matrix has non-finite entries");

  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  require(s.size() > 0 && s(0) > 0.0, ErrorCode::DegenerateSnapshots, "snapshot matrix is identically zero");

  // Monotone in sigma, so equal values at the cut are kept or dropped together.
  Eigen::Index q = 0;
  while (q < s.size() && s(q) > 0.0 && s(0) / s(q) < policy.max_condition) ++q;
  require(q > 0, ErrorCode::DegenerateSnapshots, "truncation left rank 0");

  TruncatedSvd out;
  out.U = svd.matrixU().leftCols(q);
  out.sigma = s.head(q);
  out.W = svd.matrixV().leftCols(q);
  out.rank = q;
  return out;
}

Eigen::MatrixXd pseudo_inverse(const TruncatedSvd& svd) {
  return svd.W * svd.sigma.cwiseInverse().asDiagonal() * svd.U.transpose();
}

DynamicsFit fit_dynamics(const SnapshotSet& s, const TruncationPolicy& policy) {
  const auto n = s.X.rows();
  const auto m = s.V.rows();
  require(s.Xp.rows() == n && s.Xp.cols() == s.X.cols() && s.V.cols() == s.X.cols(),
          ErrorCode::DimensionMismatch, "snapshot blocks disagree in shape");
  Eigen::MatrixXd omega(n + m, s.X.cols());
  omega.topRows(n) = s.X;
  omega.bottomRows(m) = s.V;

  const TruncatedSvd svd = truncated_svd(omega, policy);
  // Xp * W * Sigma^-1, then split U^T by state/input rows.
  const Eigen::MatrixXd core = (s.Xp * svd.W) * svd.sigma.cwiseInverse().asDiagonal();
  DynamicsFit fit;
  fit.Ad = core * svd.U.topRows(n).transpose();
  fit.Bd = core * svd.U.bottomRows(m).transpose();
  fit.rank = svd.rank;
  return fit;
}

Eigen::MatrixXd fit_output_map(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const TruncationPolicy& policy) {
  require(X.cols() == Y.cols(), ErrorCode::DimensionMismatch, "X and Y column counts differ");
  const TruncatedSvd svd = truncated_svd(X, policy);
  return ((Y * svd.W) * svd.sigma.cwiseInverse().asDiagonal()) * svd.U.transpose();
}

void StateSpaceModel::validate() const {
  const auto n = Ad.rows();
  require(Ad.cols() == n, ErrorCode::DimensionMismatch, "Ad must be square");
  require(Bd.rows() == n, ErrorCode::DimensionMismatch, "Bd rows must match state count");
  require(Cd.cols() == n, ErrorCode::DimensionMismatch, "Cd columns must match state count");
  require(state_names.size() == static_cast<std::size_t>(n), ErrorCode::DimensionMismatch,
          "state name count mismatch");
  require(input_names.size() == static_cast<std::size_t>(Bd.cols()), ErrorCode::DimensionMismatch,
          "input name count mismatch");
  require(output_names.size() == static_cast<std::size_t>(Cd.rows()), ErrorCode::DimensionMismatch,
          "output name count mismatch");
  require(Ad.allFinite() && Bd.allFinite() && Cd.allFinite(), ErrorCode::NonFiniteValue,
          "model has non-finite entries");
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "model dt must be positive");
}

StateSpaceModel fit_model(const TimeSeriesDataset& train, std::span<const Index> state_idx,
                          const TruncationPolicy& policy) {
  const SnapshotSet s = assemble_snapshots(train, state_idx);
  DynamicsFit dyn = fit_dynamics(s, policy);
  StateSpaceModel model;
  model.Ad = std::move(dyn.Ad);
  model.Bd = std::move(dyn.Bd);
  model.Cd = fit_output_map(s.X, s.Y, policy);
  model.dt = train.dt();
  for (Index i : state_idx) model.state_names.push_back(train.channel(i).name);
  for (Index i : train.inputs()) model.input_names.push_back(train.channel(i).name);
  for (Index i : train.outputs()) model.output_names.push_back(train.channel(i).name);
  return model;
}

RolloutResult rollout(const StateSpaceModel& model, const Eigen::VectorXd& x0, const Eigen::MatrixXd& V) {
  const auto n = model.states();
  require(x0.size() == n, ErrorCode::DimensionMismatch, "x0 length does not match state count");
  require(V.rows() == model.inputs(), ErrorCode::DimensionMismatch, "input rows do not match model");
  require(model.Cd.cols() == n && model.Bd.rows() == n, ErrorCode::DimensionMismatch, "inconsistent model");
  const auto steps = V.cols();
  RolloutResult out;
  out.X.resize(n, steps);
  Eigen::VectorXd x = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    x = model.Ad * x + model.Bd * V.col(k);
    out.X.col(k) = x;
  }
  out.Y = model.Cd * out.X;
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> c2d_zoh(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                    double dt) {
  require(A.rows() == A.cols(), ErrorCode::DimensionMismatch, "A must be square");
  require(B.rows() == A.rows(), ErrorCode::DimensionMismatch, "B rows must match A");
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
  const auto n = A.rows();
  const auto m = B.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A * dt;
  aug.topRightCorner(n, m) = B * dt;
  const Eigen::MatrixXd e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

void save_model(const std::filesystem::path& path, const StateSpaceModel& model) {
  model.validate();
  nlohmann::json doc;
  doc["dt"] = model.dt;
  doc["state_names"] = model.state_names;
  doc["input_names"] = model.input_names;
  doc["output_names"] = model.output_names;
  doc["Ad"] = detail::matrix_to_json(model.Ad);
  doc["Bd"] = detail::matrix_to_json(model.Bd);
  doc["Cd"] = detail::matrix_to_json(model.Cd);
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

StateSpaceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  StateSpaceModel model;
  try {
    const auto doc = nlohmann::json::parse(in);
    model.dt = doc.at("dt").get<double>();
    model.state_names = doc.at("state_names").get<std::vector<std::string>>();
    model.input_names = doc.at("input_names").get<std::vector<std::string>>();
    model.output_names = doc.at("output_names").get<std::vector<std::string>>();
    const auto n = static_cast<Eigen::Index>(model.state_names.size());
    model.Ad = detail::matrix_from_json(doc.at("Ad"), n);
    model.Bd = detail::matrix_from_json(doc.at("Bd"), static_cast<Eigen::Index>(model.input_names.size()));
    model.Cd = detail::matrix_from_json(doc.at("Cd"), n);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  model.validate();
  return model;
}

}  // namespace statesel
