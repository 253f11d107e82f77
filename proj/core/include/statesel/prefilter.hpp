#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "statesel/dataset.hpp"

namespace statesel {

struct PrefilterConfig {
  double input_corr_threshold = 0.95;
  double variance_epsilon = 1e-12;
  double dedupe_corr_threshold = 0.999999;
  bool dedupe_enabled = true;
  std::size_t workers = 1;

  void validate() const;
};

enum class RemovalReason { NearConstant, InputCollinear, Duplicate };

std::string_view to_string(RemovalReason reason) noexcept;

struct Removal {
  Index index = 0;
  RemovalReason reason = RemovalReason::NearConstant;
  double evidence = 0.0;
  std::optional<Index> representative;  // set for duplicates
};

struct PrefilterReport {
  IndexSet kept;
  std::vector<Removal> removed;
};

/// Pearson correlation; 0 when either vector has zero variance.
double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Rules in order: near-constant (variance of the range-standardized channel below
/// epsilon), input collinearity (max |r| against any input above threshold), then
/// optional duplicate clustering (complete linkage on |r|, lowest index kept).
/// `pool` defaults to every candidate channel.
PrefilterReport prefilter(const TimeSeriesDataset& train, const PrefilterConfig& cfg,
                          std::optional<IndexSet> pool = std::nullopt);

/// CSV rows: index,name,decision,reason,evidence,representative
void write_prefilter_report(const std::filesystem::path& path, const PrefilterReport& report,
                            const TimeSeriesDataset& ds);

}  // namespace statesel
