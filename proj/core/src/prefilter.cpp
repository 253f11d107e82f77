#include "statesel/prefilter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "statesel/error.hpp"
#include "statesel/parallel.hpp"

namespace statesel {

void PrefilterConfig::validate() const {
  require(input_corr_threshold > 0.0 && input_corr_threshold <= 1.0, ErrorCode::InvalidArgument,
          "input_corr_threshold must lie in (0, 1]");
  require(variance_epsilon >= 0.0, ErrorCode::InvalidArgument, "variance_epsilon must be non-negative");
  require(dedupe_corr_threshold > 0.0 && dedupe_corr_threshold <= 1.0, ErrorCode::InvalidArgument,
          "dedupe_corr_threshold must lie in (0, 1]");
}

std::string_view to_string(RemovalReason reason) noexcept {
  switch (reason) {
    case RemovalReason::NearConstant: return "near_constant";
    case RemovalReason::InputCollinear: return "input_collinear";
    case RemovalReason::Duplicate: return "duplicate";
  }
  return "unknown";
}

namespace {

// Centered, unit-norm copy; zero vector when the input has no variance.
Eigen::VectorXd normalized(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd c = v.array() - v.mean();
  const double norm = c.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return Eigen::VectorXd::Zero(v.size());
  return c / norm;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "correlation needs equal-length vectors");
  require(a.size() >= 2, ErrorCode::InvalidArgument, "correlation needs at least two samples");
  return clamp_unit(normalized(a).dot(normalized(b)));
}

PrefilterReport prefilter(const TimeSeriesDataset& train, const PrefilterConfig& cfg, std::optional<IndexSet> pool) {
  cfg.validate();
  IndexSet candidates = pool ? std::move(*pool) : train.candidates();
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (Index i : candidates) {
    require(i < train.channel_count() && train.channel(i).role == ChannelRole::Candidate,
            ErrorCode::InvalidArgument, "prefilter pool contains a non-candidate channel");
  }

  PrefilterReport report;
  IndexSet survivors;

  // Rule 1: near-constants on range-standardized data.
  for (Index i : candidates) {
    const Eigen::VectorXd z = train.pooled(i);
    const double lo = z.minCoeff();
    const double hi = z.maxCoeff();
    double variance = 0.0;
    if (hi > lo) {
      const Eigen::ArrayXd s = (z.array() - lo) / (hi - lo);
      variance = (s - s.mean()).square().mean();
    }
    if (variance < cfg.variance_epsilon || !(hi > lo)) {
      report.removed.push_back({i, RemovalReason::NearConstant, variance, std::nullopt});
    } else {
      survivors.push_back(i);
    }
  }

  // Rule 2: collinearity with any input.
  std::vector<Eigen::VectorXd> inputs;
  for (Index u : train.inputs()) inputs.push_back(normalized(train.pooled(u)));
  std::vector<Eigen::VectorXd> unit(survivors.size());
  parallel_for(survivors.size(), cfg.workers, [&](std::size_t k) { unit[k] = normalized(train.pooled(survivors[k])); });

  IndexSet after_inputs;
  std::vector<Eigen::VectorXd> after_unit;
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    double worst = 0.0;
    for (const auto& u : inputs) worst = std::max(worst, std::abs(clamp_unit(unit[k].dot(u))));
    if (worst > cfg.input_corr_threshold) {
      report.removed.push_back({survivors[k], RemovalReason::InputCollinear, worst, std::nullopt});
    } else {
      after_inputs.push_back(survivors[k]);
      after_unit.push_back(std::move(unit[k]));
    }
  }

  if (!cfg.dedupe_enabled || after_inputs.size() < 2) {
    report.kept = std::move(after_inputs);
    return report;
  }

  // Rule 3: complete-linkage agglomeration on |r|. Two clusters merge only when every
  // cross pair meets the threshold; the closest eligible pair merges first.
  const std::size_t k = after_inputs.size();
  Eigen::MatrixXd absr(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  parallel_for(k, cfg.workers, [&](std::size_t a) {
    for (std::size_t b = 0; b < k; ++b) {
      absr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          a == b ? 1.0 : std::abs(clamp_unit(after_unit[a].dot(after_unit[b])));
    }
  });

  // link(a, b) = min |r| over cross pairs, maintained for active cluster heads.
  Eigen::MatrixXd link = absr;
  std::vector<std::vector<std::size_t>> members(k);
  std::vector<bool> active(k, true);
  for (std::size_t a = 0; a < k; ++a) members[a] = {a};
  while (true) {
    double best = -1.0;
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t a = 0; a < k; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < k; ++b) {
        if (!active[b]) continue;
        const double v = link(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v > best) {
          best = v;
          ba = a;
          bb = b;
        }
      }
    }
    if (best < cfg.dedupe_corr_threshold) break;
    // Merge bb into ba (ba < bb, so the head stays the lowest position).
    members[ba].insert(members[ba].end(), members[bb].begin(), members[bb].end());
    members[bb].clear();
    active[bb] = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (!active[c] || c == ba) continue;
      const auto ia = static_cast<Eigen::Index>(ba);
      const auto ic = static_cast<Eigen::Index>(c);
      const double merged = std::min(link(ia, ic), link(static_cast<Eigen::Index>(bb), ic));
      link(ia, ic) = merged;
      link(ic, ia) = merged;
    }
  }

  for (std::size_t a = 0; a < k; ++a) {
    if (!active[a]) continue;
    auto& group = members[a];
    std::sort(group.begin(), group.end());
    const std::size_t rep = group.front();
    report.kept.push_back(after_inputs[rep]);
    for (std::size_t g = 1; g < group.size(); ++g) {
      report.removed.push_back({after_inputs[group[g]], RemovalReason::Duplicate,
                                absr(static_cast<Eigen::Index>(group[g]), static_cast<Eigen::Index>(rep)),
                                after_inputs[rep]});
    }
  }
  std::sort(report.kept.begin(), report.kept.end());
  return report;
}

void write_prefilter_report(const std::filesystem::path& path, const PrefilterReport& report,
                            const TimeSeriesDataset& ds) {
  struct Row {
    Index index;
    std::string decision;
    std::string reason;
    double evidence;
    std::string representative;
  };
  std::vector<Row> rows;
  for (Index i : report.kept) rows.push_back({i, "kept", "", 0.0, ""});
  for (const auto& r : report.removed) {
    rows.push_back({r.index, "removed", std::string(to_string(r.reason)), r.evidence,
                    r.representative ? ds.channel(*r.representative).name : ""});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.index < b.index; });
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out.precision(17);
  out << "index,name,decision,reason,evidence,representative\n";
  for (const auto& r : rows) {
    out << r.index << ',' << ds.channel(r.index).name << ',' << r.decision << ',' << r.reason << ',' << r.evidence
        << ',' << r.representative << '\n';
  }
}

}  // namespace statesel
