#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "statesel/dataset.hpp"
#include "statesel/error.hpp"
#include "statesel/ga.hpp"
#include "statesel/prefilter.hpp"
#include "statesel/rfe.hpp"

namespace statesel::cli {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitOutputExists = 3;
inline constexpr int kExitPoolTooLarge = 4;

int exit_status_for(ErrorCode code) noexcept;

struct RunConfig {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> data;  // empty: files listed in the manifest
  std::filesystem::path out;
  SplitSpec split;
  PrefilterConfig prefilter;
  RfeConfig rfe;
  GaConfig ga;
  EvaluationConfig evaluation;
  std::string method = "both";  // rfe, ga, both, rfe_naive
  std::vector<std::size_t> caps = {8};
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

/// Reads a JSON run configuration. Relative paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& cfg);

/// STATESEL_WORKERS, when set to a non-negative integer.
std::optional<std::size_t> workers_from_env();

/// Creates `dir`. An existing non-empty directory is an error unless `overwrite`.
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

struct GenerateOptions {
  std::string kind;                         // rlc or synth
  std::optional<std::filesystem::path> spec;
  std::string preset = "coupled";           // synth only: overshadow, coupled, decoupled
  std::optional<std::uint64_t> seed;        // synth only
  std::filesystem::path out;
  bool overwrite = false;
};

/// Writes data_<r>.csv, data_manifest.json and truth.json. Returns the manifest path.
std::filesystem::path cmd_generate(const GenerateOptions& opt);

/// Writes prefilter.csv into cfg.out and returns the report.
PrefilterReport cmd_prefilter(const RunConfig& cfg, bool overwrite);

struct CostRow {
  std::size_t cap = 0;
  std::string method;
  double J_train = 0.0;
  double J_test = 0.0;
  std::size_t selected_count = 0;
  std::vector<std::string> selected;
};

/// Prefilter, then every (cap, method) pair: selection, final fit, rollout, cost.
/// Writes cost_table.csv, per-run selection/model/trace files and the effective config.
std::vector<CostRow> cmd_select(const RunConfig& cfg, bool overwrite);

struct PredictOptions {
  std::filesystem::path model;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> data;
  double train_fraction = 0.8;
  std::size_t realization = 0;
  std::size_t horizon = 0;
  std::filesystem::path out;
};

/// Rolls the model out from the first test-split sample and writes predicted vs
/// recorded values for `horizon` steps.
void cmd_predict(const PredictOptions& opt);

/// Reads cost_table.csv and the selection files in `dir` and writes report.csv.
/// Returns the rendered text table.
std::string cmd_report(const std::filesystem::path& dir);

/// Entry point used by the executable.
int run(int argc, char** argv);

}  // namespace statesel::cli
