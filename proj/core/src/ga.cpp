#include "statesel/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "statesel/error.hpp"
#include "statesel/parallel.hpp"

namespace statesel {

void GaConfig::validate() const {
  require(population_size >= 2, ErrorCode::InvalidArgument, "population_size must be at least 2");
  require(resolved_elite_count() < population_size, ErrorCode::InvalidArgument,
          "elite_count must be smaller than population_size");
  require(crossover_fraction >= 0.0 && crossover_fraction <= 1.0, ErrorCode::InvalidArgument,
          "crossover_fraction must lie in [0, 1]");
  require(!mutation_rate || (*mutation_rate >= 0.0 && *mutation_rate <= 1.0), ErrorCode::InvalidArgument,
          "mutation_rate must lie in [0, 1]");
  require(stall_generations >= 1, ErrorCode::InvalidArgument, "stall_generations must be at least 1");
  require(stall_tolerance >= 0.0, ErrorCode::InvalidArgument, "stall_tolerance must be non-negative");
  require(restarts >= 1, ErrorCode::InvalidArgument, "restarts must be at least 1");
  require(max_states >= 1, ErrorCode::InvalidArgument, "max_states must be at least 1");
}

std::size_t GaConfig::resolved_elite_count() const {
  if (elite_count) return *elite_count;
  return static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(population_size)));
}

std::size_t GaConfig::resolved_max_generations(std::size_t genome) const {
  return max_generations ? *max_generations : 100 * genome;
}

double GaConfig::resolved_mutation_rate(std::size_t genome) const {
  return mutation_rate ? *mutation_rate : 1.0 / static_cast<double>(genome);
}

GaRng::GaRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::uint64_t GaRng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % n;
}

double GaRng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::vector<Index> mask_to_indices(const Mask& mask, const IndexSet& pool) {
  IndexSet out;
  for (std::size_t b = 0; b < mask.size(); ++b) {
    if (mask[b]) out.push_back(pool[b]);
  }
  return out;
}

void repair(Mask& mask, std::size_t cap, GaRng& rng) {
  if (mask.empty()) return;
  std::vector<std::size_t> set;
  for (std::size_t b = 0; b < mask.size(); ++b) {
    if (mask[b]) set.push_back(b);
  }
  if (set.empty()) {
    mask[rng.below(mask.size())] = true;
    return;
  }
  while (set.size() > cap) {
    const auto k = static_cast<std::size_t>(rng.below(set.size()));
    mask[set[k]] = false;
    set.erase(set.begin() + static_cast<std::ptrdiff_t>(k));
  }
}

FitnessCache::FitnessCache(const SubsetEvaluator& evaluator, IndexSet pool)
    : evaluator_(evaluator), pool_(std::move(pool)) {}

double FitnessCache::fitness(const Mask& mask) {
  {
    std::lock_guard lock(mutex_);
    ++lookups_;
    if (auto it = cache_.find(mask); it != cache_.end()) return it->second;
  }
  const double j = evaluator_.train_cost(mask_to_indices(mask, pool_));
  std::lock_guard lock(mutex_);
  if (cache_.emplace(mask, j).second) ++fits_;
  return j;
}

std::vector<double> FitnessCache::fitness_batch(const std::vector<Mask>& masks, std::size_t workers) {
  std::vector<Mask> missing;
  {
    std::lock_guard lock(mutex_);
    lookups_ += masks.size();
    for (const auto& m : masks) {
      if (!cache_.contains(m) && std::find(missing.begin(), missing.end(), m) == missing.end()) missing.push_back(m);
    }
  }
  std::vector<double> computed(missing.size());
  parallel_for(missing.size(), workers,
               [&](std::size_t k) { computed[k] = evaluator_.train_cost(mask_to_indices(missing[k], pool_)); });

  std::lock_guard lock(mutex_);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    if (cache_.emplace(missing[k], computed[k]).second) ++fits_;
  }
  std::vector<double> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(cache_.at(m));
  return out;
}

std::uint64_t FitnessCache::lookups() const {
  std::lock_guard lock(mutex_);
  return lookups_;
}

std::uint64_t FitnessCache::fits() const {
  std::lock_guard lock(mutex_);
  return fits_;
}

namespace {

struct Individual {
  Mask mask;
  double J = std::numeric_limits<double>::infinity();
};

bool fitter(const Individual& a, const Individual& b) {
  const double ja = std::isnan(a.J) ? std::numeric_limits<double>::infinity() : a.J;
  const double jb = std::isnan(b.J) ? std::numeric_limits<double>::infinity() : b.J;
  return ja < jb;
}

struct RestartOutcome {
  Individual best;
  std::size_t generations = 0;
  std::vector<GenerationRecord> trace;
};

RestartOutcome run_restart(std::size_t restart, const GaConfig& cfg, std::size_t genome, FitnessCache& cache) {
  GaRng rng(cfg.seed, restart);
  const std::size_t pop = cfg.population_size;
  const std::size_t elites = cfg.resolved_elite_count();
  const std::size_t max_gen = cfg.resolved_max_generations(genome);
  const double mutation = cfg.resolved_mutation_rate(genome);
  const double gene_p = std::min(0.5, static_cast<double>(cfg.max_states) / static_cast<double>(genome));

  std::vector<Individual> population(pop);
  for (auto& ind : population) {
    ind.mask.assign(genome, false);
    for (std::size_t b = 0; b < genome; ++b) ind.mask[b] = rng.unit() < gene_p;
    repair(ind.mask, cfg.max_states, rng);
  }

  auto evaluate = [&](std::vector<Individual>& group) {
    std::vector<Mask> masks;
    masks.reserve(group.size());
    for (const auto& ind : group) masks.push_back(ind.mask);
    const std::vector<double> js = cache.fitness_batch(masks, cfg.workers);
    for (std::size_t k = 0; k < group.size(); ++k) group[k].J = js[k];
  };

  RestartOutcome out;
  std::vector<double> best_history;
  auto record = [&](std::size_t generation) {
    // Stable ranking: fitness, then position.
    std::stable_sort(population.begin(), population.end(), fitter);
    double sum = 0.0;
    std::size_t finite = 0;
    for (const auto& ind : population) {
      if (std::isfinite(ind.J)) {
        sum += ind.J;
        ++finite;
      }
    }
    const double best = population.front().J;
    const double mean = finite > 0 ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
    out.trace.push_back({restart, generation, best, mean});
    best_history.push_back(best);
    if (out.best.mask.empty() || fitter(population.front(), out.best)) out.best = population.front();
  };

  evaluate(population);
  record(0);

  auto tournament = [&]() -> const Individual& {
    const auto a = static_cast<std::size_t>(rng.below(pop));
    const auto b = static_cast<std::size_t>(rng.below(pop));
    // The population is sorted, so the lower position wins ties and better fitness.
    return population[std::min(a, b)];
  };

  std::size_t generation = 0;
  while (generation < max_gen) {
    if (best_history.size() > cfg.stall_generations) {
      const double past = best_history[best_history.size() - 1 - cfg.stall_generations];
      const double now = best_history.back();
      if (!(past - now >= cfg.stall_tolerance)) break;
    }
    std::vector<Individual> next(population.begin(), population.begin() + static_cast<std::ptrdiff_t>(elites));
    std::vector<Individual> offspring(pop - elites);
    for (auto& child : offspring) {
      const Individual& p1 = tournament();
      if (rng.unit() < cfg.crossover_fraction) {
        const Individual& p2 = tournament();
        child.mask.assign(genome, false);
        for (std::size_t b = 0; b < genome; ++b) child.mask[b] = rng.unit() < 0.5 ? p1.mask[b] : p2.mask[b];
      } else {
        child.mask = p1.mask;
      }
      for (std::size_t b = 0; b < genome; ++b) {
        if (rng.unit() < mutation) child.mask[b] = !child.mask[b];
      }
      repair(child.mask, cfg.max_states, rng);
    }
    evaluate(offspring);
    next.insert(next.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
    population = std::move(next);
    ++generation;
    record(generation);
  }
  out.generations = generation;
  return out;
}

}  // namespace

SelectionResult ga_select(const TimeSeriesDataset& train, const TimeSeriesDataset& test, const IndexSet& pool,
                          const GaConfig& cfg) {
  cfg.validate();
  IndexSet genes = pool;
  std::sort(genes.begin(), genes.end());
  genes.erase(std::unique(genes.begin(), genes.end()), genes.end());
  require(!genes.empty(), ErrorCode::InvalidArgument, "GA candidate pool is empty");
  for (Index i : genes) {
    require(i < train.channel_count() && train.channel(i).role == ChannelRole::Candidate,
            ErrorCode::InvalidArgument, "GA pool contains a non-candidate channel");
  }

  const SubsetEvaluator evaluator(train, cfg.evaluation);
  FitnessCache cache(evaluator, genes);

  SelectionResult result;
  result.method = "ga";
  result.max_states = cfg.max_states;

  double best_J = std::numeric_limits<double>::infinity();
  IndexSet best_idx;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RestartOutcome run = run_restart(r, cfg, genes.size(), cache);
    IndexSet idx = mask_to_indices(run.best.mask, genes);
    result.restart_best_J.push_back(run.best.J);
    result.restart_best_indices.push_back(idx);
    result.restart_generations.push_back(run.generations);
    result.trace.insert(result.trace.end(), run.trace.begin(), run.trace.end());
    if (best_idx.empty() || better_subset(run.best.J, idx, best_J, best_idx)) {
      best_J = run.best.J;
      best_idx = std::move(idx);
    }
  }
  require(std::isfinite(best_J), ErrorCode::DegenerateSnapshots, "no GA candidate produced a finite cost");

  std::vector<double> sorted = result.restart_best_J;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  result.median_restart_J = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  result.evaluations = cache.lookups();
  result.unique_fits = cache.fits();

  result.indices = best_idx;
  const ModelEvaluation eval = evaluate_selection(train, test, result.indices, cfg.evaluation);
  result.train = eval.train;
  result.test = eval.test;
  return result;
}

}  // namespace statesel
