#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "statesel/cost.hpp"
#include "statesel/dataset.hpp"

namespace statesel {

/// A candidate imported across subsystems by the cross-influence step.
struct CrossImport {
  std::string from;
  std::string to;
  Index index = 0;
  double score = 0.0;
  bool weak = false;
};

struct GenerationRecord {
  std::size_t restart = 0;
  std::size_t generation = 0;
  double best_J = 0.0;
  double mean_J = 0.0;  // over finite fitness values
};

/// Chosen state set plus enough provenance to audit how it was reached.
struct SelectionResult {
  std::string method;
  std::size_t max_states = 0;
  IndexSet indices;  // ascending channel indices
  CostBreakdown train;
  CostBreakdown test;

  // RFE diagnostics
  IndexSet elimination_order;
  std::map<std::string, IndexSet> shortlists;
  std::map<std::string, IndexSet> subsystem_elimination_orders;
  std::vector<CrossImport> imports;
  IndexSet merged_pool;
  std::uint64_t subsets_examined = 0;

  // GA diagnostics
  std::vector<double> restart_best_J;
  std::vector<IndexSet> restart_best_indices;
  std::vector<std::size_t> restart_generations;
  double median_restart_J = 0.0;
  std::uint64_t evaluations = 0;
  std::uint64_t unique_fits = 0;
  std::vector<GenerationRecord> trace;  // written separately as CSV

  std::vector<std::string> warnings;
};

nlohmann::json cost_to_json(const CostBreakdown& c);

/// Structured form with channel names and subsystems resolved against `ds`.
nlohmann::json to_json(const SelectionResult& result, const TimeSeriesDataset& ds);

void write_selection(const std::filesystem::path& path, const SelectionResult& result, const TimeSeriesDataset& ds);

/// restart,generation,best_J,mean_J
void write_generation_trace(const std::filesystem::path& path, const SelectionResult& result);

/// Total order used to pick winners: lower J, then fewer variables, then the
/// lexicographically smaller index set. NaN compares as +infinity.
bool better_subset(double j_a, const IndexSet& a, double j_b, const IndexSet& b);

}  // namespace statesel
