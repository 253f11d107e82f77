#include "statesel/rfe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>

#include "statesel/error.hpp"
#include "statesel/parallel.hpp"
#include "statesel/prefilter.hpp"

namespace statesel {

void RfeConfig::validate() const {
  require(max_states >= 1, ErrorCode::InvalidArgument, "max_states must be at least 1");
  require(block_fraction > 0.0 && block_fraction < 1.0, ErrorCode::InvalidArgument,
          "block_fraction must lie in (0, 1)");
  require(exhaustive_limit >= 1 && exhaustive_limit <= 62, ErrorCode::InvalidArgument,
          "exhaustive_limit must lie in [1, 62]");
}

ImportanceMatrix importance(const Eigen::MatrixXd& Cd) {
  ImportanceMatrix out;
  out.I = Eigen::MatrixXd::Zero(Cd.rows(), Cd.cols());
  for (Eigen::Index i = 0; i < Cd.rows(); ++i) {
    const double lo = Cd.row(i).minCoeff();
    const double hi = Cd.row(i).maxCoeff();
    if (hi > lo) out.I.row(i) = (Cd.row(i).array() - lo) / (hi - lo);
  }
  out.mean = Cd.rows() > 0 ? Eigen::VectorXd(out.I.colwise().mean().transpose())
                           : Eigen::VectorXd::Zero(Cd.cols());
  return out;
}

namespace {

double channel_variance(const TimeSeriesDataset& ds, Index i) {
  const Eigen::VectorXd z = ds.pooled(i);
  return (z.array() - z.mean()).square().mean();
}

}  // namespace

RfeRanking rfe_rank(const TimeSeriesDataset& train, const IndexSet& pool, std::size_t cap, const RfeConfig& cfg) {
  cfg.validate();
  require(!pool.empty(), ErrorCode::InvalidArgument, "RFE pool is empty");
  require(cap >= 1, ErrorCode::InvalidArgument, "RFE cap must be at least 1");

  RfeRanking out;
  IndexSet survivors = pool;
  std::sort(survivors.begin(), survivors.end());
  survivors.erase(std::unique(survivors.begin(), survivors.end()), survivors.end());
  out.chain.push_back(survivors);

  while (survivors.size() > cap) {
    const std::size_t count = survivors.size();
    std::vector<double> score(count);
    try {
      const StateSpaceModel model = fit_model(train, survivors, cfg.evaluation.truncation);
      const ImportanceMatrix imp = importance(model.Cd);
      for (std::size_t k = 0; k < count; ++k) score[k] = imp.mean(static_cast<Eigen::Index>(k));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSnapshots) throw;
      ++out.fallback_iterations;
      for (std::size_t k = 0; k < count; ++k) score[k] = channel_variance(train, survivors[k]);
    }

    std::vector<std::size_t> order(count);
    for (std::size_t k = 0; k < count; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] < score[b];
      return survivors[a] > survivors[b];
    });

    const auto block = static_cast<std::size_t>(std::floor(cfg.block_fraction * static_cast<double>(count)));
    const std::size_t drop = std::min(std::max<std::size_t>(1, block), count - cap);
    std::vector<bool> dropped(count, false);
    for (std::size_t k = 0; k < drop; ++k) {
      dropped[order[k]] = true;
      out.elimination_order.push_back(survivors[order[k]]);
    }
    IndexSet next;
    for (std::size_t k = 0; k < count; ++k) {
      if (!dropped[k]) next.push_back(survivors[k]);
    }
    survivors = std::move(next);
    out.chain.push_back(survivors);
  }
  out.survivors = std::move(survivors);
  return out;
}

std::map<std::string, IndexSet> SubsystemShortlists::shortlists() const {
  std::map<std::string, IndexSet> out;
  for (const auto& [name, ranking] : rankings) out[name] = ranking.survivors;
  return out;
}

SubsystemShortlists within_subsystem_rfe(const TimeSeriesDataset& train, const IndexSet& pool, const RfeConfig& cfg) {
  cfg.validate();
  std::set<std::string> labels;
  for (Index i : train.candidates()) labels.insert(train.channel(i).subsystem);
  require(!labels.empty(), ErrorCode::InvalidArgument, "dataset has no candidate channels");

  std::map<std::string, IndexSet> groups;
  for (Index i : pool) {
    require(i < train.channel_count() && train.channel(i).role == ChannelRole::Candidate,
            ErrorCode::InvalidArgument, "pool contains a non-candidate channel");
    groups[train.channel(i).subsystem].push_back(i);
  }

  SubsystemShortlists out;
  for (const auto& label : labels) {
    if (!groups.contains(label)) {
      out.warnings.push_back("subsystem '" + label + "' has no candidates in the pool; skipped");
    }
  }
  require(!groups.empty(), ErrorCode::InvalidArgument, "RFE pool is empty");
  const std::size_t k = groups.size();
  out.per_subsystem_cap = (cfg.max_states + k - 1) / k;

  std::vector<std::pair<std::string, IndexSet>> work(groups.begin(), groups.end());
  std::vector<RfeRanking> results(work.size());
  parallel_for(work.size(), cfg.workers,
               [&](std::size_t w) { results[w] = rfe_rank(train, work[w].second, out.per_subsystem_cap, cfg); });
  for (std::size_t w = 0; w < work.size(); ++w) out.rankings.emplace(work[w].first, std::move(results[w]));
  return out;
}

std::vector<CrossImport> cross_influence(const TimeSeriesDataset& train, const IndexSet& pool,
                                         const std::map<std::string, IndexSet>& shortlists, const RfeConfig& cfg) {
  std::vector<CrossImport> out;
  if (shortlists.size() < 2 || cfg.cross_top_k == 0) return out;

  std::set<Index> shortlisted;
  for (const auto& [name, idx] : shortlists) shortlisted.insert(idx.begin(), idx.end());

  std::map<std::string, IndexSet> members;
  for (Index i : pool) members[train.channel(i).subsystem].push_back(i);

  for (const auto& [from, from_short] : shortlists) {
    for (const auto& [to, to_short] : shortlists) {
      if (from == to) continue;
      IndexSet targets = to_short;
      for (Index o : train.outputs()) {
        if (train.channel(o).subsystem == to) targets.push_back(o);
      }
      std::vector<Eigen::VectorXd> target_data;
      for (Index t : targets) target_data.push_back(train.pooled(t));

      std::vector<std::pair<double, Index>> scored;
      for (Index c : members[from]) {
        if (shortlisted.contains(c)) continue;
        const Eigen::VectorXd z = train.pooled(c);
        double best = 0.0;
        for (const auto& t : target_data) best = std::max(best, std::abs(correlation(z, t)));
        scored.emplace_back(best, c);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      const std::size_t take = std::min(cfg.cross_top_k, scored.size());
      for (std::size_t k = 0; k < take; ++k) {
        out.push_back({from, to, scored[k].second, scored[k].first, scored[k].first < cfg.weak_threshold});
      }
    }
  }
  return out;
}

std::uint64_t count_subsets(std::size_t n) {
  require(n >= 1 && n <= 63, ErrorCode::InvalidArgument, "subset count needs 1 <= n <= 63");
  return (std::uint64_t{1} << n) - 1;
}

std::uint64_t count_subsets_capped(std::size_t n, std::size_t cap) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, j)
  for (std::size_t j = 1; j <= std::min(n, cap); ++j) {
    binom = binom * (n - j + 1) / j;
    total += binom;
  }
  return total;
}

SelectionResult merged_search(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                              const IndexSet& merged_pool, const RfeConfig& cfg) {
  cfg.validate();
  IndexSet pool = merged_pool;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  require(!pool.empty(), ErrorCode::InvalidArgument, "merged pool is empty");
  require(pool.size() <= cfg.exhaustive_limit, ErrorCode::PoolTooLarge,
          "merged pool has " + std::to_string(pool.size()) + " candidates, above the exhaustive limit of " +
              std::to_string(cfg.exhaustive_limit) + "; lower the state cap or the cross imports");

  const SubsetEvaluator evaluator(train, cfg.evaluation);
  const std::uint64_t total_masks = count_subsets(pool.size());
  constexpr std::uint64_t kChunk = 64;
  const std::uint64_t chunks = (total_masks + kChunk - 1) / kChunk;

  struct Best {
    double J = std::numeric_limits<double>::infinity();
    IndexSet idx;
  };
  std::vector<Best> local(chunks);
  parallel_for(static_cast<std::size_t>(chunks), cfg.workers, [&](std::size_t c) {
    Best best;
    const std::uint64_t first = 1 + c * kChunk;
    const std::uint64_t last = std::min(total_masks, first + kChunk - 1);
    IndexSet idx;
    for (std::uint64_t mask = first; mask <= last; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) > cfg.max_states) continue;
      idx.clear();
      for (std::size_t b = 0; b < pool.size(); ++b) {
        if (mask >> b & 1U) idx.push_back(pool[b]);
      }
      const double j = evaluator.train_cost(idx);
      if (best.idx.empty() || better_subset(j, idx, best.J, best.idx)) {
        best.J = j;
        best.idx = idx;
      }
    }
    local[c] = std::move(best);
  });

  Best winner;
  for (auto& b : local) {
    if (b.idx.empty()) continue;
    if (winner.idx.empty() || better_subset(b.J, b.idx, winner.J, winner.idx)) winner = std::move(b);
  }
  require(!winner.idx.empty() && std::isfinite(winner.J), ErrorCode::DegenerateSnapshots,
          "every subset of the merged pool failed to fit");

  SelectionResult result;
  result.method = "rfe";
  result.max_states = cfg.max_states;
  result.indices = winner.idx;
  result.merged_pool = pool;
  result.subsets_examined = count_subsets_capped(pool.size(), cfg.max_states);
  const ModelEvaluation eval = evaluate_selection(train, test, result.indices, cfg.evaluation);
  result.train = eval.train;
  result.test = eval.test;
  return result;
}

SelectionResult rfe_select(const TimeSeriesDataset& train, const TimeSeriesDataset& test, const IndexSet& pool,
                           const RfeConfig& cfg) {
  cfg.validate();
  const SubsystemShortlists step1 = within_subsystem_rfe(train, pool, cfg);
  const auto shortlists = step1.shortlists();
  const std::vector<CrossImport> imports = cross_influence(train, pool, shortlists, cfg);

  std::set<Index> merged;
  for (const auto& [name, idx] : shortlists) merged.insert(idx.begin(), idx.end());
  for (const auto& imp : imports) merged.insert(imp.index);

  SelectionResult result = merged_search(train, test, IndexSet(merged.begin(), merged.end()), cfg);
  result.shortlists = shortlists;
  for (const auto& [name, ranking] : step1.rankings) {
    result.subsystem_elimination_orders[name] = ranking.elimination_order;
  }
  result.imports = imports;
  result.warnings = step1.warnings;
  return result;
}

SelectionResult rfe_naive_select(const TimeSeriesDataset& train, const TimeSeriesDataset& test, const IndexSet& pool,
                                 const RfeConfig& cfg) {
  const RfeRanking ranking = rfe_rank(train, pool, cfg.max_states, cfg);
  SelectionResult result;
  result.method = "rfe_naive";
  result.max_states = cfg.max_states;
  result.indices = ranking.survivors;
  result.elimination_order = ranking.elimination_order;
  const ModelEvaluation eval = evaluate_selection(train, test, result.indices, cfg.evaluation);
  result.train = eval.train;
  result.test = eval.test;
  return result;
}

}  // namespace statesel
