#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "statesel/dataset.hpp"
#include "statesel/evaluation.hpp"
#include "statesel/selection.hpp"

namespace statesel {

using Mask = std::vector<bool>;

struct GaConfig {
  std::size_t population_size = 480;
  std::optional<std::size_t> elite_count;      // default ceil(0.05 * population)
  double crossover_fraction = 0.8;
  std::optional<std::size_t> max_generations;  // default 100 * genome length
  std::size_t stall_generations = 50;
  double stall_tolerance = 1e-6;
  std::optional<double> mutation_rate;         // default 1 / genome length
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::size_t max_states = 8;
  EvaluationConfig evaluation;
  std::size_t workers = 1;

  void validate() const;
  [[nodiscard]] std::size_t resolved_elite_count() const;
  [[nodiscard]] std::size_t resolved_max_generations(std::size_t genome) const;
  [[nodiscard]] double resolved_mutation_rate(std::size_t genome) const;
};

/// Deterministic draws from a 64-bit Mersenne Twister that do not depend on the
/// standard library's distribution implementations.
class GaRng {
 public:
  GaRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  double unit();                         // uniform in [0, 1)

 private:
  std::mt19937_64 engine_;
};

std::vector<Index> mask_to_indices(const Mask& mask, const IndexSet& pool);

/// Clears random set bits down to `cap`, or sets one random bit in an empty mask.
void repair(Mask& mask, std::size_t cap, GaRng& rng);

/// Memoized training-split fitness keyed by mask. Failed fits score +infinity.
class FitnessCache {
 public:
  FitnessCache(const SubsetEvaluator& evaluator, IndexSet pool);

  double fitness(const Mask& mask);

  /// Fills any uncached masks in parallel, then returns fitness in input order.
  std::vector<double> fitness_batch(const std::vector<Mask>& masks, std::size_t workers);

  [[nodiscard]] std::uint64_t lookups() const;
  [[nodiscard]] std::uint64_t fits() const;

 private:
  const SubsetEvaluator& evaluator_;
  IndexSet pool_;
  mutable std::mutex mutex_;
  std::map<Mask, double> cache_;
  std::uint64_t lookups_ = 0;
  std::uint64_t fits_ = 0;
};

/// Binary-mask genetic search over `pool` minimizing training J, repeated over
/// independently seeded restarts. Returns the best restart.
SelectionResult ga_select(const TimeSeriesDataset& train, const TimeSeriesDataset& test, const IndexSet& pool,
                          const GaConfig& cfg);

}  // namespace statesel
