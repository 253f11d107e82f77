#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace statesel {

using Index = std::size_t;
using IndexSet = std::vector<Index>;

enum class ChannelRole { Input, Output, Candidate };

std::string_view to_string(ChannelRole role) noexcept;
ChannelRole parse_role(std::string_view text);

struct ChannelMeta {
  std::string name;
  ChannelRole role = ChannelRole::Candidate;
  std::string subsystem;
  // Optional defining formula (benchmark generators record how a channel was derived).
  std::string formula;

  friend bool operator==(const ChannelMeta&, const ChannelMeta&) = default;
};

/// Multi-realization recording: every realization is a channels x steps matrix whose
/// rows follow the manifest order. Immutable after construction.
class TimeSeriesDataset {
 public:
  TimeSeriesDataset() = default;
  TimeSeriesDataset(double dt, std::vector<ChannelMeta> manifest,
                    std::vector<Eigen::MatrixXd> realizations);

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] const std::vector<ChannelMeta>& manifest() const noexcept { return manifest_; }
  [[nodiscard]] const std::vector<Eigen::MatrixXd>& realizations() const noexcept {
    return realizations_;
  }
  [[nodiscard]] const ChannelMeta& channel(Index i) const { return manifest_.at(i); }
  [[nodiscard]] std::size_t channel_count() const noexcept { return manifest_.size(); }
  [[nodiscard]] std::size_t realization_count() const noexcept { return realizations_.size(); }
  [[nodiscard]] std::size_t total_steps() const noexcept;

  [[nodiscard]] const IndexSet& inputs() const noexcept { return inputs_; }
  [[nodiscard]] const IndexSet& outputs() const noexcept { return outputs_; }
  [[nodiscard]] const IndexSet& candidates() const noexcept { return candidates_; }

  [[nodiscard]] std::optional<Index> find(std::string_view name) const;
  /// Throws UnknownChannel when absent.
  [[nodiscard]] Index index_of(std::string_view name) const;

  /// All samples of one channel, realizations concatenated in order.
  [[nodiscard]] Eigen::VectorXd pooled(Index channel) const;

 private:
  double dt_ = 0.0;
  std::vector<ChannelMeta> manifest_;
  std::vector<Eigen::MatrixXd> realizations_;
  IndexSet inputs_;
  IndexSet outputs_;
  IndexSet candidates_;
};

/// One-step snapshot pairs. Columns never straddle a realization boundary.
struct SnapshotSet {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Xp;
  Eigen::MatrixXd V;
  Eigen::MatrixXd Y;

  [[nodiscard]] Eigen::Index columns() const noexcept { return X.cols(); }
};

struct SplitSpec {
  double train_fraction = 0.8;
};

struct ManifestFile {
  std::filesystem::path path;
  std::optional<double> dt_seconds;
};

struct Manifest {
  double dt_seconds = 0.0;
  std::vector<ChannelMeta> channels;
  std::vector<ManifestFile> files;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Reads one realization CSV. Columns are matched to `channels` by header name and
/// returned in manifest order.
Eigen::MatrixXd read_realization_csv(const std::filesystem::path& path,
                                     const std::vector<ChannelMeta>& channels);
void write_realization_csv(const std::filesystem::path& path,
                           const std::vector<ChannelMeta>& channels,
                           const Eigen::MatrixXd& data);

/// Loads the listed CSV files (one realization each) against a manifest. When
/// `data_paths` is empty the files named in the manifest are used, resolved
/// relative to the manifest's directory.
TimeSeriesDataset ingest(std::span<const std::filesystem::path> data_paths,
                         const std::filesystem::path& manifest_path);
TimeSeriesDataset ingest(const std::filesystem::path& manifest_path);

/// Writes `<stem>_<r>.csv` per realization plus `<stem>_manifest.json` into `dir`.
/// Returns the manifest path.
std::filesystem::path emit(const TimeSeriesDataset& ds, const std::filesystem::path& dir,
                           const std::string& stem = "data");

/// Leading-prefix split of every realization. Both sides must keep at least two steps.
std::pair<TimeSeriesDataset, TimeSeriesDataset> split(const TimeSeriesDataset& ds,
                                                      const SplitSpec& spec);

SnapshotSet assemble_snapshots(const TimeSeriesDataset& ds, std::span<const Index> state_idx);

}  // namespace statesel
