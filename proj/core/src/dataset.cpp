#include "statesel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "statesel/error.hpp"

namespace statesel {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ChannelRole role) noexcept {
  switch (role) {
    case ChannelRole::Input: return "input";
    case ChannelRole::Output: return "output";
    case ChannelRole::Candidate: return "candidate";
  }
  return "candidate";
}

ChannelRole parse_role(std::string_view text) {
  if (text == "input") return ChannelRole::Input;
  if (text == "output") return ChannelRole::Output;
  if (text == "candidate") return ChannelRole::Candidate;
  throw Error(ErrorCode::InvalidManifest, "unknown channel role '" + std::string(text) + "'");
}

TimeSeriesDataset::TimeSeriesDataset(double dt, std::vector<ChannelMeta> manifest,
                                     std::vector<Eigen::MatrixXd> realizations)
    : dt_(dt), manifest_(std::move(manifest)), realizations_(std::move(realizations)) {
  require(std::isfinite(dt_) && dt_ > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
  std::unordered_set<std::string> seen;
  for (Index i = 0; i < manifest_.size(); ++i) {
    const auto& ch = manifest_[i];
    require(!ch.name.empty(), ErrorCode::InvalidManifest, "channel " + std::to_string(i) + " has no name");
    require(seen.insert(ch.name).second, ErrorCode::DuplicateChannel, "duplicate channel '" + ch.name + "'");
    switch (ch.role) {
      case ChannelRole::Input: inputs_.push_back(i); break;
      case ChannelRole::Output: outputs_.push_back(i); break;
      case ChannelRole::Candidate: candidates_.push_back(i); break;
    }
  }
  require(!inputs_.empty(), ErrorCode::InvalidManifest, "dataset needs at least one input channel");
  require(!outputs_.empty(), ErrorCode::InvalidManifest, "dataset needs at least one output channel");
  require(!realizations_.empty(), ErrorCode::InvalidArgument, "dataset has no realizations");
  for (std::size_t r = 0; r < realizations_.size(); ++r) {
    const auto& m = realizations_[r];
    require(static_cast<std::size_t>(m.rows()) == manifest_.size(), ErrorCode::DimensionMismatch,
            "realization " + std::to_string(r) + " has " + std::to_string(m.rows()) +
                " channels, manifest declares " + std::to_string(manifest_.size()));
    require(m.cols() >= 2, ErrorCode::TooShort,
            "realization " + std::to_string(r) + " has fewer than 2 steps");
    require(m.allFinite(), ErrorCode::NonFiniteValue,
            "realization " + std::to_string(r) + " contains non-finite values");
  }
}

std::size_t TimeSeriesDataset::total_steps() const noexcept {
  std::size_t total = 0;
  for (const auto& m : realizations_) total += static_cast<std::size_t>(m.cols());
  return total;
}

std::optional<Index> TimeSeriesDataset::find(std::string_view name) const {
  for (Index i = 0; i < manifest_.size(); ++i) {
    if (manifest_[i].name == name) return i;
  }
  return std::nullopt;
}

Index TimeSeriesDataset::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw Error(ErrorCode::UnknownChannel, "no channel named '" + std::string(name) + "'");
  return *idx;
}

Eigen::VectorXd TimeSeriesDataset::pooled(Index channel) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(total_steps()));
  Eigen::Index offset = 0;
  const auto row = static_cast<Eigen::Index>(channel);
  for (const auto& m : realizations_) {
    out.segment(offset, m.cols()) = m.row(row).transpose();
    offset += m.cols();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  Manifest manifest;
  try {
    manifest.dt_seconds = doc.at("dt_seconds").get<double>();
    std::unordered_set<std::string> seen;
    for (const auto& entry : doc.at("channels")) {
      ChannelMeta ch;
      ch.name = entry.at("name").get<std::string>();
      ch.role = parse_role(entry.at("role").get<std::string>());
      ch.subsystem = entry.value("subsystem", std::string{});
      ch.formula = entry.value("formula", std::string{});
      if (!seen.insert(ch.name).second) {
        throw Error(ErrorCode::DuplicateChannel, "duplicate channel '" + ch.name + "' in " + path.string());
      }
      manifest.channels.push_back(std::move(ch));
    }
    if (doc.contains("files")) {
      for (const auto& entry : doc.at("files")) {
        ManifestFile file;
        if (entry.is_string()) {
          file.path = entry.get<std::string>();
        } else {
          file.path = entry.at("path").get<std::string>();
          if (entry.contains("dt_seconds")) file.dt_seconds = entry.at("dt_seconds").get<double>();
        }
        manifest.files.push_back(std::move(file));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, path.string() + ": " + e.what());
  }
  require(std::isfinite(manifest.dt_seconds) && manifest.dt_seconds > 0.0, ErrorCode::InvalidManifest,
          "dt_seconds must be positive in " + path.string());
  return manifest;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  json doc;
  doc["dt_seconds"] = manifest.dt_seconds;
  doc["channels"] = json::array();
  for (const auto& ch : manifest.channels) {
    json entry{{"name", ch.name}, {"role", to_string(ch.role)}, {"subsystem", ch.subsystem}};
    if (!ch.formula.empty()) entry["formula"] = ch.formula;
    doc["channels"].push_back(std::move(entry));
  }
  doc["files"] = json::array();
  for (const auto& f : manifest.files) {
    json entry{{"path", f.path.generic_string()}};
    if (f.dt_seconds) entry["dt_seconds"] = *f.dt_seconds;
    doc["files"].push_back(std::move(entry));
  }
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

void append_double(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

Eigen::MatrixXd read_realization_csv(const fs::path& path, const std::vector<ChannelMeta>& channels) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, path.string() + ": empty file");
  const auto header = split_fields(line);

  std::unordered_map<std::string, Index> wanted;
  for (Index i = 0; i < channels.size(); ++i) wanted.emplace(channels[i].name, i);

  // column -> manifest row
  std::vector<Index> column_to_row(header.size());
  std::vector<bool> present(channels.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(header[c]);
    auto it = wanted.find(name);
    require(it != wanted.end(), ErrorCode::UnknownChannel,
            path.string() + ": column '" + name + "' is not in the manifest");
    require(!present[it->second], ErrorCode::DuplicateChannel,
            path.string() + ": column '" + name + "' appears twice");
    present[it->second] = true;
    column_to_row[c] = it->second;
  }
  for (Index i = 0; i < channels.size(); ++i) {
    require(present[i], ErrorCode::MissingChannel,
            path.string() + ": channel '" + channels[i].name + "' missing from header");
  }

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    require(fields.size() == header.size(), ErrorCode::RaggedRow,
            path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                " fields, found " + std::to_string(fields.size()));
    std::vector<double> row(channels.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      const auto f = fields[c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      const auto& name = channels[column_to_row[c]].name;
      require(ec == std::errc{} && ptr == f.data() + f.size(), ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line_no) + ": channel '" + name + "': cannot parse '" +
                  std::string(f) + "'");
      require(std::isfinite(v), ErrorCode::NonFiniteValue,
              path.string() + ":" + std::to_string(line_no) + ": channel '" + name + "' is not finite");
      row[column_to_row[c]] = v;
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  // values is steps x channels row-major == channels x steps column-major
  Eigen::MatrixXd data = Eigen::Map<const Eigen::MatrixXd>(values.data(),
                                                           static_cast<Eigen::Index>(channels.size()),
                                                           static_cast<Eigen::Index>(rows));
  return data;
}

void write_realization_csv(const fs::path& path, const std::vector<ChannelMeta>& channels,
                           const Eigen::MatrixXd& data) {
  require(static_cast<std::size_t>(data.rows()) == channels.size(), ErrorCode::DimensionMismatch,
          "channel count does not match data rows");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  std::string buf;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (i) buf += ',';
    buf += channels[i].name;
  }
  buf += '\n';
  for (Eigen::Index k = 0; k < data.cols(); ++k) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (i) buf += ',';
      append_double(buf, data(i, k));
    }
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

TimeSeriesDataset ingest(std::span<const fs::path> data_paths, const fs::path& manifest_path) {
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<fs::path> files(data_paths.begin(), data_paths.end());
  if (files.empty()) {
    require(!manifest.files.empty(), ErrorCode::InvalidManifest,
            manifest_path.string() + " lists no data files and none were given");
    for (const auto& f : manifest.files) {
      if (f.dt_seconds) {
        require(std::abs(*f.dt_seconds - manifest.dt_seconds) <= 1e-12 * manifest.dt_seconds,
                ErrorCode::InvalidManifest,
                f.path.string() + ": dt_seconds disagrees with the manifest's declared dt");
      }
      files.push_back(f.path.is_absolute() ? f.path : manifest_path.parent_path() / f.path);
    }
  }
  std::vector<Eigen::MatrixXd> realizations;
  realizations.reserve(files.size());
  for (const auto& f : files) realizations.push_back(read_realization_csv(f, manifest.channels));
  return TimeSeriesDataset(manifest.dt_seconds, manifest.channels, std::move(realizations));
}

TimeSeriesDataset ingest(const fs::path& manifest_path) {
  return ingest(std::span<const fs::path>{}, manifest_path);
}

fs::path emit(const TimeSeriesDataset& ds, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  Manifest manifest;
  manifest.dt_seconds = ds.dt();
  manifest.channels = ds.manifest();
  for (std::size_t r = 0; r < ds.realization_count(); ++r) {
    const std::string name = stem + "_" + std::to_string(r) + ".csv";
    write_realization_csv(dir / name, ds.manifest(), ds.realizations()[r]);
    manifest.files.push_back({name, std::nullopt});
  }
  const fs::path manifest_path = dir / (stem + "_manifest.json");
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

// ---------------------------------------------------------------------------

std::pair<TimeSeriesDataset, TimeSeriesDataset> split(const TimeSeriesDataset& ds, const SplitSpec& spec) {
  require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0, ErrorCode::InvalidArgument,
          "train_fraction must lie in (0, 1)");
  std::vector<Eigen::MatrixXd> train;
  std::vector<Eigen::MatrixXd> test;
  for (std::size_t r = 0; r < ds.realization_count(); ++r) {
    const auto& m = ds.realizations()[r];
    const auto steps = m.cols();
    const auto n_train = static_cast<Eigen::Index>(std::floor(spec.train_fraction * static_cast<double>(steps)));
    const auto n_test = steps - n_train;
    require(n_train >= 2 && n_test >= 2, ErrorCode::TooShort,
            "realization " + std::to_string(r) + " with " + std::to_string(steps) + " steps splits into " +
                std::to_string(n_train) + "/" + std::to_string(n_test) + "; both sides need at least 2");
    train.emplace_back(m.leftCols(n_train));
    test.emplace_back(m.rightCols(n_test));
  }
  return {TimeSeriesDataset(ds.dt(), ds.manifest(), std::move(train)),
          TimeSeriesDataset(ds.dt(), ds.manifest(), std::move(test))};
}

SnapshotSet assemble_snapshots(const TimeSeriesDataset& ds, std::span<const Index> state_idx) {
  require(!state_idx.empty(), ErrorCode::InvalidArgument, "state index set is empty");
  for (Index i : state_idx) {
    require(i < ds.channel_count(), ErrorCode::InvalidArgument, "state index " + std::to_string(i) + " out of range");
    require(ds.channel(i).role == ChannelRole::Candidate, ErrorCode::InvalidArgument,
            "channel '" + ds.channel(i).name + "' is not a candidate and cannot be a state");
  }
  Eigen::Index columns = 0;
  for (const auto& m : ds.realizations()) columns += m.cols() - 1;

  const auto n = static_cast<Eigen::Index>(state_idx.size());
  const auto m_in = static_cast<Eigen::Index>(ds.inputs().size());
  const auto p = static_cast<Eigen::Index>(ds.outputs().size());
  SnapshotSet s;
  s.X.resize(n, columns);
  s.Xp.resize(n, columns);
  s.V.resize(m_in, columns);
  s.Y.resize(p, columns);

  Eigen::Index offset = 0;
  for (const auto& m : ds.realizations()) {
    const auto pairs = m.cols() - 1;
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto row = static_cast<Eigen::Index>(state_idx[static_cast<std::size_t>(r)]);
      s.X.row(r).segment(offset, pairs) = m.row(row).head(pairs);
      s.Xp.row(r).segment(offset, pairs) = m.row(row).tail(pairs);
    }
    for (Eigen::Index r = 0; r < m_in; ++r) {
      const auto row = static_cast<Eigen::Index>(ds.inputs()[static_cast<std::size_t>(r)]);
      s.V.row(r).segment(offset, pairs) = m.row(row).head(pairs);
    }
    for (Eigen::Index r = 0; r < p; ++r) {
      const auto row = static_cast<Eigen::Index>(ds.outputs()[static_cast<std::size_t>(r)]);
      s.Y.row(r).segment(offset, pairs) = m.row(row).head(pairs);
    }
    offset += pairs;
  }
  return s;
}

}  // namespace statesel
