#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "statesel/error.hpp"

namespace statesel::detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// `cols` is needed for matrices with zero rows, where it cannot be inferred.
inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols = -1) {
  require(j.is_array(), ErrorCode::ParseError, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, cols < 0 ? 0 : cols);
  const auto c = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, c);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == c, ErrorCode::DimensionMismatch,
            "ragged matrix row " + std::to_string(i));
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace statesel::detail
