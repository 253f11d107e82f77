#include "statesel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "statesel/error.hpp"

namespace statesel {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json channels_json(const IndexSet& idx, const TimeSeriesDataset& ds) {
  json arr = json::array();
  for (Index i : idx) {
    arr.push_back({{"index", i}, {"name", ds.channel(i).name}, {"subsystem", ds.channel(i).subsystem}});
  }
  return arr;
}

}  // namespace

json cost_to_json(const CostBreakdown& c) {
  return {{"J", number_or_null(c.J)},
          {"J_state", number_or_null(c.J_state)},
          {"J_output", number_or_null(c.J_output)},
          {"n", c.n},
          {"p", c.p},
          {"L", c.L}};
}

json to_json(const SelectionResult& r, const TimeSeriesDataset& ds) {
  json doc;
  doc["method"] = r.method;
  doc["max_states"] = r.max_states;
  doc["indices"] = r.indices;
  doc["selected"] = channels_json(r.indices, ds);
  doc["J_train"] = cost_to_json(r.train);
  doc["J_test"] = cost_to_json(r.test);
  doc["subsets_examined"] = r.subsets_examined;
  if (!r.elimination_order.empty()) doc["elimination_order"] = channels_json(r.elimination_order, ds);
  if (!r.shortlists.empty()) {
    json s = json::object();
    for (const auto& [name, idx] : r.shortlists) s[name] = channels_json(idx, ds);
    doc["shortlists"] = std::move(s);
  }
  if (!r.subsystem_elimination_orders.empty()) {
    json s = json::object();
    for (const auto& [name, idx] : r.subsystem_elimination_orders) s[name] = channels_json(idx, ds);
    doc["subsystem_elimination_orders"] = std::move(s);
  }
  if (!r.imports.empty()) {
    json arr = json::array();
    for (const auto& imp : r.imports) {
      arr.push_back({{"from", imp.from},
                     {"to", imp.to},
                     {"index", imp.index},
                     {"name", ds.channel(imp.index).name},
                     {"score", imp.score},
                     {"weak", imp.weak}});
    }
    doc["cross_imports"] = std::move(arr);
  }
  if (!r.merged_pool.empty()) doc["merged_pool"] = channels_json(r.merged_pool, ds);
  if (!r.restart_best_J.empty()) {
    json restarts = json::array();
    for (std::size_t k = 0; k < r.restart_best_J.size(); ++k) {
      restarts.push_back({{"best_J", number_or_null(r.restart_best_J[k])},
                          {"indices", r.restart_best_indices.at(k)},
                          {"generations", r.restart_generations.at(k)}});
    }
    doc["restarts"] = std::move(restarts);
    doc["median_restart_J"] = number_or_null(r.median_restart_J);
    doc["evaluations"] = r.evaluations;
    doc["unique_fits"] = r.unique_fits;
  }
  if (!r.warnings.empty()) doc["warnings"] = r.warnings;
  return doc;
}

void write_selection(const std::filesystem::path& path, const SelectionResult& result, const TimeSeriesDataset& ds) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << to_json(result, ds).dump(2) << '\n';
}

void write_generation_trace(const std::filesystem::path& path, const SelectionResult& result) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out.precision(17);
  out << "restart,generation,best_J,mean_J\n";
  for (const auto& g : result.trace) {
    out << g.restart << ',' << g.generation << ',' << g.best_J << ',' << g.mean_J << '\n';
  }
}

bool better_subset(double j_a, const IndexSet& a, double j_b, const IndexSet& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (std::isnan(j_a)) j_a = kInf;
  if (std::isnan(j_b)) j_b = kInf;
  if (j_a != j_b) return j_a < j_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace statesel
