#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "statesel/dataset.hpp"
#include "statesel/evaluation.hpp"
#include "statesel/selection.hpp"

namespace statesel {

/// Row-wise min-max scaled output map and its per-variable mean over outputs.
struct ImportanceMatrix {
  Eigen::MatrixXd I;     // p x n, entries in [0, 1]
  Eigen::VectorXd mean;  // n
};

/// Scales signed entries of each row of Cd to [0, 1]; a constant row maps to zeros.
ImportanceMatrix importance(const Eigen::MatrixXd& Cd);

struct RfeConfig {
  std::size_t max_states = 8;
  double block_fraction = 0.2;
  std::size_t cross_top_k = 2;
  double weak_threshold = 0.2;
  std::size_t exhaustive_limit = 24;
  EvaluationConfig evaluation;
  std::size_t workers = 1;

  void validate() const;
};

struct RfeRanking {
  IndexSet survivors;                  // ascending
  IndexSet elimination_order;          // first eliminated first
  std::vector<IndexSet> chain;         // survivor set after each iteration, starting with the pool
  std::size_t fallback_iterations = 0; // iterations that fell back to variance ranking
};

/// Backward elimination on the training split: fit DMDc on the survivors, score them
/// by mean importance and drop the lowest block (at least one, never below `cap`).
/// Ties drop the higher channel index first.
RfeRanking rfe_rank(const TimeSeriesDataset& train, const IndexSet& pool, std::size_t cap, const RfeConfig& cfg);

struct SubsystemShortlists {
  std::map<std::string, RfeRanking> rankings;
  std::size_t per_subsystem_cap = 0;
  std::vector<std::string> warnings;

  [[nodiscard]] std::map<std::string, IndexSet> shortlists() const;
};

/// Runs rfe_rank separately for every subsystem label carried by candidate channels.
/// Subsystems without pool members are skipped with a warning.
SubsystemShortlists within_subsystem_rfe(const TimeSeriesDataset& train, const IndexSet& pool,
                                         const RfeConfig& cfg);

/// For every ordered pair (S -> T), scores S's pool members by max |r| against T's
/// shortlisted states and T's outputs, and imports the top `cross_top_k` that are not
/// already shortlisted.
std::vector<CrossImport> cross_influence(const TimeSeriesDataset& train, const IndexSet& pool,
                                         const std::map<std::string, IndexSet>& shortlists, const RfeConfig& cfg);

/// Exhaustive sweep over all non-empty subsets of `merged_pool` with at most
/// `cfg.max_states` members, minimizing training J.
SelectionResult merged_search(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                              const IndexSet& merged_pool, const RfeConfig& cfg);

/// 2^n - 1 non-empty subsets of an n-element pool.
std::uint64_t count_subsets(std::size_t n);

/// Number of subsets with 1..cap members drawn from n.
std::uint64_t count_subsets_capped(std::size_t n, std::size_t cap);

/// Within-subsystem RFE, cross-influence imports and the merged exhaustive search.
SelectionResult rfe_select(const TimeSeriesDataset& train, const TimeSeriesDataset& test, const IndexSet& pool,
                           const RfeConfig& cfg);

/// Whole-pool RFE without subsystem balancing; the survivors are the selection.
SelectionResult rfe_naive_select(const TimeSeriesDataset& train, const TimeSeriesDataset& test, const IndexSet& pool,
                                 const RfeConfig& cfg);

}  // namespace statesel
