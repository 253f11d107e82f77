#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "statesel/benchgen.hpp"
#include "statesel/dmdc.hpp"
#include "statesel/error.hpp"
#include "statesel/evaluation.hpp"
#include "statesel/selection.hpp"

namespace statesel::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutputExists: return kExitOutputExists;
    case ErrorCode::PoolTooLarge: return kExitPoolTooLarge;
    default: return kExitError;
  }
}

void RunConfig::validate() const {
  require(!manifest.empty(), ErrorCode::InvalidArgument, "a manifest path is required");
  require(fs::exists(manifest), ErrorCode::IoError, "manifest not found: " + manifest.string());
  for (const auto& d : data) require(fs::exists(d), ErrorCode::IoError, "data file not found: " + d.string());
  require(!caps.empty(), ErrorCode::InvalidArgument, "the cap sweep list is empty");
  for (std::size_t c : caps) require(c >= 1, ErrorCode::InvalidArgument, "caps must be at least 1");
  static const std::set<std::string> methods = {"rfe", "ga", "both", "rfe_naive"};
  require(methods.contains(method), ErrorCode::InvalidArgument,
          "method must be one of rfe, ga, both, rfe_naive (got '" + method + "')");
  require(split.train_fraction > 0.0 && split.train_fraction < 1.0, ErrorCode::InvalidArgument,
          "train_fraction must lie in (0, 1)");
  prefilter.validate();
  rfe.validate();
  ga.validate();
}

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  require(j.is_object(), ErrorCode::InvalidManifest, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, ErrorCode::InvalidManifest, "unknown config key '" + section + "." + key + "'");
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

json opt(const auto& o) { return o ? json(*o) : json(nullptr); }

}  // namespace

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig cfg;
  try {
    check_keys(j, "", {"paths", "split", "prefilter", "rfe", "ga", "truncation", "cost", "run"});
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, "paths", {"manifest", "data", "out"});
      if (p.contains("manifest")) cfg.manifest = resolve(base_dir, p.at("manifest").get<std::string>());
      if (p.contains("data")) {
        for (const auto& d : p.at("data")) cfg.data.push_back(resolve(base_dir, d.get<std::string>()));
      }
      if (p.contains("out")) cfg.out = resolve(base_dir, p.at("out").get<std::string>());
    }
    if (j.contains("split")) {
      check_keys(j.at("split"), "split", {"train_fraction"});
      read(j.at("split"), "train_fraction", cfg.split.train_fraction);
    }
    if (j.contains("prefilter")) {
      const auto& p = j.at("prefilter");
      check_keys(p, "prefilter",
                 {"input_corr_threshold", "variance_epsilon", "dedupe_corr_threshold", "dedupe_enabled"});
      read(p, "input_corr_threshold", cfg.prefilter.input_corr_threshold);
      read(p, "variance_epsilon", cfg.prefilter.variance_epsilon);
      read(p, "dedupe_corr_threshold", cfg.prefilter.dedupe_corr_threshold);
      read(p, "dedupe_enabled", cfg.prefilter.dedupe_enabled);
    }
    if (j.contains("rfe")) {
      const auto& r = j.at("rfe");
      check_keys(r, "rfe", {"block_fraction", "cross_top_k", "weak_threshold", "exhaustive_limit"});
      read(r, "block_fraction", cfg.rfe.block_fraction);
      read(r, "cross_top_k", cfg.rfe.cross_top_k);
      read(r, "weak_threshold", cfg.rfe.weak_threshold);
      read(r, "exhaustive_limit", cfg.rfe.exhaustive_limit);
    }
    if (j.contains("ga")) {
      const auto& g = j.at("ga");
      check_keys(g, "ga",
                 {"population_size", "elite_count", "crossover_fraction", "max_generations", "stall_generations",
                  "stall_tolerance", "mutation_rate", "restarts"});
      read(g, "population_size", cfg.ga.population_size);
      read(g, "elite_count", cfg.ga.elite_count);
      read(g, "crossover_fraction", cfg.ga.crossover_fraction);
      read(g, "max_generations", cfg.ga.max_generations);
      read(g, "stall_generations", cfg.ga.stall_generations);
      read(g, "stall_tolerance", cfg.ga.stall_tolerance);
      read(g, "mutation_rate", cfg.ga.mutation_rate);
      read(g, "restarts", cfg.ga.restarts);
    }
    if (j.contains("truncation")) {
      check_keys(j.at("truncation"), "truncation", {"max_condition"});
      read(j.at("truncation"), "max_condition", cfg.evaluation.truncation.max_condition);
    }
    if (j.contains("cost")) {
      check_keys(j.at("cost"), "cost", {"scale_floor"});
      read(j.at("cost"), "scale_floor", cfg.evaluation.scale_floor);
    }
    if (j.contains("run")) {
      const auto& r = j.at("run");
      check_keys(r, "run", {"method", "caps", "seed", "workers"});
      read(r, "method", cfg.method);
      read(r, "caps", cfg.caps);
      read(r, "seed", cfg.seed);
      read(r, "workers", cfg.workers);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("bad run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const RunConfig& cfg) {
  json data = json::array();
  for (const auto& d : cfg.data) data.push_back(d.string());
  return {
      {"paths", {{"manifest", cfg.manifest.string()}, {"data", data}, {"out", cfg.out.string()}}},
      {"split", {{"train_fraction", cfg.split.train_fraction}}},
      {"prefilter",
       {{"input_corr_threshold", cfg.prefilter.input_corr_threshold},
        {"variance_epsilon", cfg.prefilter.variance_epsilon},
        {"dedupe_corr_threshold", cfg.prefilter.dedupe_corr_threshold},
        {"dedupe_enabled", cfg.prefilter.dedupe_enabled}}},
      {"rfe",
       {{"block_fraction", cfg.rfe.block_fraction},
        {"cross_top_k", cfg.rfe.cross_top_k},
        {"weak_threshold", cfg.rfe.weak_threshold},
        {"exhaustive_limit", cfg.rfe.exhaustive_limit}}},
      {"ga",
       {{"population_size", cfg.ga.population_size},
        {"elite_count", opt(cfg.ga.elite_count)},
        {"crossover_fraction", cfg.ga.crossover_fraction},
        {"max_generations", opt(cfg.ga.max_generations)},
        {"stall_generations", cfg.ga.stall_generations},
        {"stall_tolerance", cfg.ga.stall_tolerance},
        {"mutation_rate", opt(cfg.ga.mutation_rate)},
        {"restarts", cfg.ga.restarts}}},
      {"truncation", {{"max_condition", cfg.evaluation.truncation.max_condition}}},
      {"cost", {{"scale_floor", cfg.evaluation.scale_floor}}},
      {"run", {{"method", cfg.method}, {"caps", cfg.caps}, {"seed", cfg.seed}, {"workers", cfg.workers}}},
  };
}

std::optional<std::size_t> workers_from_env() {
  const char* raw = std::getenv("STATESEL_WORKERS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::size_t value = 0;
  std::istringstream in(raw);
  in >> value;
  require(!in.fail() && in.eof(), ErrorCode::InvalidArgument,
          std::string("STATESEL_WORKERS must be a non-negative integer (got '") + raw + "')");
  return value;
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  require(!dir.empty(), ErrorCode::InvalidArgument, "an output directory is required");
  if (fs::exists(dir)) {
    require(fs::is_directory(dir), ErrorCode::OutputExists, dir.string() + " exists and is not a directory");
    require(overwrite || fs::is_empty(dir), ErrorCode::OutputExists,
            dir.string() + " is not empty; pass --overwrite to replace its contents");
  }
  fs::create_directories(dir);
}

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TimeSeriesDataset load_dataset(const fs::path& manifest, const std::vector<fs::path>& data) {
  return ingest(std::span<const fs::path>(data), manifest);
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_trajectories(std::ostream& out, const std::string& split_name, const StateSpaceModel& model,
                        const TimeSeriesDataset& data, const IndexSet& idx) {
  const Trajectories t = predict(model, data, idx);
  for (std::size_t r = 0; r < t.offsets.size(); ++r) {
    const Eigen::Index begin = t.offsets[r];
    const Eigen::Index end = r + 1 < t.offsets.size() ? t.offsets[r + 1] : t.x_pred.cols();
    for (Eigen::Index c = begin; c < end; ++c) {
      out << split_name << ',' << r << ',' << (c - begin + 1);
      for (Eigen::Index i = 0; i < t.x_pred.rows(); ++i) out << ',' << num(t.x_pred(i, c)) << ',' << num(t.x_true(i, c));
      for (Eigen::Index i = 0; i < t.y_pred.rows(); ++i) out << ',' << num(t.y_pred(i, c)) << ',' << num(t.y_true(i, c));
      out << '\n';
    }
  }
}

void write_trace(const fs::path& path, const StateSpaceModel& model, const TimeSeriesDataset& train,
                 const TimeSeriesDataset& test, const IndexSet& idx) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << "split,realization,step";
  for (const auto& n : model.state_names) out << ',' << n << ".pred," << n << ".true";
  for (const auto& n : model.output_names) out << ',' << n << ".pred," << n << ".true";
  out << '\n';
  write_trajectories(out, "train", model, train, idx);
  write_trajectories(out, "test", model, test, idx);
}

std::vector<std::string> methods_for(const std::string& method) {
  if (method == "both") return {"rfe", "ga"};
  return {method};
}

}  // namespace

fs::path cmd_generate(const GenerateOptions& opt) {
  prepare_output_dir(opt.out, opt.overwrite);
  json spec_doc;
  if (opt.spec) {
    std::ifstream in(*opt.spec);
    require(in.good(), ErrorCode::IoError, "cannot read spec " + opt.spec->string());
    try {
      in >> spec_doc;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, opt.spec->string() + ": " + e.what());
    }
  }
  GeneratedDataset gen;
  if (opt.kind == "rlc") {
    gen = simulate_rlc(opt.spec ? rlc_spec_from_json(spec_doc) : default_rlc_spec());
  } else if (opt.kind == "synth") {
    SynthSystemSpec spec;
    if (opt.spec) {
      spec = synth_spec_from_json(spec_doc);
    } else if (opt.preset == "overshadow") {
      spec = default_overshadow_spec();
    } else if (opt.preset == "coupled") {
      spec = default_coupled_spec();
    } else if (opt.preset == "decoupled") {
      spec = default_decoupled_spec();
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown synth preset '" + opt.preset + "'");
    }
    if (opt.seed) spec.seed = *opt.seed;
    gen = simulate_synth(spec);
  } else {
    throw Error(ErrorCode::InvalidArgument, "generate kind must be rlc or synth (got '" + opt.kind + "')");
  }
  const fs::path manifest = emit(gen.data, opt.out, "data");
  write_truth(opt.out / "truth.json", gen.truth);
  return manifest;
}

PrefilterReport cmd_prefilter(const RunConfig& cfg, bool overwrite) {
  cfg.validate();
  prepare_output_dir(cfg.out, overwrite);
  const TimeSeriesDataset ds = load_dataset(cfg.manifest, cfg.data);
  const auto [train, test] = split(ds, cfg.split);
  PrefilterConfig pc = cfg.prefilter;
  pc.workers = cfg.workers;
  PrefilterReport report = prefilter(train, pc);
  write_prefilter_report(cfg.out / "prefilter.csv", report, train);
  return report;
}

std::vector<CostRow> cmd_select(const RunConfig& cfg, bool overwrite) {
  cfg.validate();
  prepare_output_dir(cfg.out, overwrite);
  write_json(cfg.out / "effective_config.json", to_json(cfg));

  const TimeSeriesDataset ds = load_dataset(cfg.manifest, cfg.data);
  const auto [train, test] = split(ds, cfg.split);
  PrefilterConfig pc = cfg.prefilter;
  pc.workers = cfg.workers;
  const PrefilterReport pf = prefilter(train, pc);
  write_prefilter_report(cfg.out / "prefilter.csv", pf, train);
  require(!pf.kept.empty(), ErrorCode::InvalidArgument, "prefilter removed every candidate");

  std::vector<CostRow> rows;
  for (std::size_t cap : cfg.caps) {
    for (const auto& method : methods_for(cfg.method)) {
      SelectionResult result;
      if (method == "ga") {
        GaConfig g = cfg.ga;
        g.max_states = cap;
        g.seed = cfg.seed;
        g.workers = cfg.workers;
        g.evaluation = cfg.evaluation;
        result = ga_select(train, test, pf.kept, g);
      } else {
        RfeConfig r = cfg.rfe;
        r.max_states = cap;
        r.workers = cfg.workers;
        r.evaluation = cfg.evaluation;
        result = method == "rfe" ? rfe_select(train, test, pf.kept, r) : rfe_naive_select(train, test, pf.kept, r);
      }
      const std::string tag = method + "_cap" + std::to_string(cap);
      write_selection(cfg.out / ("selection_" + tag + ".json"), result, train);
      const StateSpaceModel model = fit_model(train, result.indices, cfg.evaluation.truncation);
      save_model(cfg.out / ("model_" + tag + ".json"), model);
      write_trace(cfg.out / ("trace_" + tag + ".csv"), model, train, test, result.indices);
      if (method == "ga") write_generation_trace(cfg.out / ("generations_" + tag + ".csv"), result);

      CostRow row{cap, method, result.train.J, result.test.J, result.indices.size(), {}};
      for (Index i : result.indices) row.selected.push_back(train.channel(i).name);
      rows.push_back(std::move(row));
    }
  }

  std::ofstream table(cfg.out / "cost_table.csv");
  require(table.good(), ErrorCode::IoError, "cannot write cost_table.csv");
  table << "cap,method,J_train,J_test,selected_count\n";
  for (const auto& r : rows) {
    table << r.cap << ',' << r.method << ',' << num(r.J_train) << ',' << num(r.J_test) << ',' << r.selected_count << '\n';
  }
  return rows;
}

void cmd_predict(const PredictOptions& opt) {
  const StateSpaceModel model = load_model(opt.model);
  const TimeSeriesDataset ds = load_dataset(opt.manifest, opt.data);
  const auto [train, test] = split(ds, SplitSpec{opt.train_fraction});
  require(opt.realization < test.realization_count(), ErrorCode::InvalidArgument,
          "realization index out of range");

  auto lookup = [&](const std::vector<std::string>& names, ChannelRole role) {
    IndexSet idx;
    for (const auto& n : names) {
      const auto found = test.find(n);
      require(found.has_value(), ErrorCode::UnknownChannel, "model channel '" + n + "' is not in the dataset");
      require(test.channel(*found).role == role, ErrorCode::UnknownChannel,
              "model channel '" + n + "' has role " + std::string(to_string(test.channel(*found).role)) +
                  " in the dataset, expected " + std::string(to_string(role)));
      idx.push_back(*found);
    }
    return idx;
  };
  const IndexSet sx = lookup(model.state_names, ChannelRole::Candidate);
  const IndexSet sv = lookup(model.input_names, ChannelRole::Input);
  const IndexSet sy = lookup(model.output_names, ChannelRole::Output);

  const Eigen::MatrixXd& real = test.realizations()[opt.realization];
  const auto available = static_cast<std::size_t>(real.cols() - 1);
  require(opt.horizon <= available, ErrorCode::TooShort,
          "horizon " + std::to_string(opt.horizon) + " exceeds the " + std::to_string(available) +
              " steps available in the test split");

  const auto h = static_cast<Eigen::Index>(opt.horizon);
  Eigen::VectorXd x0(static_cast<Eigen::Index>(sx.size()));
  for (std::size_t k = 0; k < sx.size(); ++k) x0(static_cast<Eigen::Index>(k)) = real(static_cast<Eigen::Index>(sx[k]), 0);
  Eigen::MatrixXd V(static_cast<Eigen::Index>(sv.size()), h);
  for (std::size_t k = 0; k < sv.size(); ++k) V.row(static_cast<Eigen::Index>(k)) = real.row(static_cast<Eigen::Index>(sv[k])).head(h);
  const RolloutResult roll = rollout(model, x0, V);

  std::ofstream out(opt.out);
  require(out.good(), ErrorCode::IoError, "cannot write " + opt.out.string());
  out << "step";
  for (const auto& n : model.state_names) out << ',' << n << ".pred," << n << ".true";
  for (const auto& n : model.output_names) out << ',' << n << ".pred," << n << ".true";
  out << '\n';
  for (Eigen::Index k = 0; k < h; ++k) {
    out << (k + 1);
    for (std::size_t i = 0; i < sx.size(); ++i) {
      out << ',' << num(roll.X(static_cast<Eigen::Index>(i), k)) << ','
          << num(real(static_cast<Eigen::Index>(sx[i]), k + 1));
    }
    for (std::size_t i = 0; i < sy.size(); ++i) {
      out << ',' << num(roll.Y(static_cast<Eigen::Index>(i), k)) << ','
          << num(real(static_cast<Eigen::Index>(sy[i]), k + 1));
    }
    out << '\n';
  }
}

std::string cmd_report(const fs::path& dir) {
  const fs::path table_path = dir / "cost_table.csv";
  std::ifstream in(table_path);
  require(in.good(), ErrorCode::IoError, "cannot read " + table_path.string());
  std::string line;
  std::getline(in, line);
  require(line == "cap,method,J_train,J_test,selected_count", ErrorCode::ParseError,
          table_path.string() + ": unexpected header");

  struct Row {
    std::string cap, method, j_train, j_test, count, selected, subsets, fits;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    require(f.size() == 5, ErrorCode::ParseError, table_path.string() + ": malformed row '" + line + "'");
    Row r{f[0], f[1], f[2], f[3], f[4], "", "", ""};
    const fs::path sel = dir / ("selection_" + r.method + "_cap" + r.cap + ".json");
    if (fs::exists(sel)) {
      std::ifstream js(sel);
      const json doc = json::parse(js);
      for (const auto& s : doc.at("selected")) {
        if (!r.selected.empty()) r.selected += ';';
        r.selected += s.at("name").get<std::string>();
      }
      if (doc.contains("subsets_examined") && doc.at("subsets_examined").get<std::uint64_t>() > 0) {
        r.subsets = std::to_string(doc.at("subsets_examined").get<std::uint64_t>());
      }
      if (doc.contains("unique_fits")) r.fits = std::to_string(doc.at("unique_fits").get<std::uint64_t>());
    }
    rows.push_back(std::move(r));
  }

  std::ofstream out(dir / "report.csv");
  require(out.good(), ErrorCode::IoError, "cannot write report.csv");
  out << "cap,method,J_train,J_test,selected_count,selected,subsets_examined,unique_fits\n";
  std::ostringstream text;
  text << std::left << std::setw(5) << "cap" << std::setw(11) << "method" << std::setw(24) << "J_train"
       << std::setw(24) << "J_test" << std::setw(7) << "count" << "selected\n";
  for (const auto& r : rows) {
    out << r.cap << ',' << r.method << ',' << r.j_train << ',' << r.j_test << ',' << r.count << ',' << r.selected
        << ',' << r.subsets << ',' << r.fits << '\n';
    text << std::left << std::setw(5) << r.cap << std::setw(11) << r.method << std::setw(24) << r.j_train
         << std::setw(24) << r.j_test << std::setw(7) << r.count << r.selected << '\n';
  }
  return text.str();
}

int run(int argc, char** argv) {
  CLI::App app{"State-variable selection for DMDc surrogate models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "statesel 0.1.0");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Simulate a benchmark dataset");
  generate->add_option("kind", gen.kind, "rlc or synth")->required()->check(CLI::IsMember({"rlc", "synth"}));
  std::string spec_path;
  generate->add_option("--spec", spec_path, "Generator spec file (JSON)")->check(CLI::ExistingFile);
  generate->add_option("--preset", gen.preset, "synth preset: overshadow, coupled, decoupled")
      ->check(CLI::IsMember({"overshadow", "coupled", "decoupled"}));
  std::uint64_t gen_seed = 0;
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "Noise and disturbance seed (synth)");
  std::string gen_out;
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_flag("--overwrite", gen.overwrite, "Replace an existing non-empty output directory");

  struct Common {
    std::string config;
    std::string manifest;
    std::vector<std::string> data;
    std::string out;
    bool overwrite = false;
    std::optional<std::size_t> workers;
  };
  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--manifest", c.manifest, "Dataset manifest; overrides the config");
    sub->add_option("--data", c.data, "Realization CSV files; overrides the config");
    sub->add_option("--out", c.out, "Output directory; overrides the config");
    sub->add_flag("--overwrite", c.overwrite, "Replace an existing non-empty output directory");
    sub->add_option("--workers", c.workers, "Worker threads (0 = all cores); overrides STATESEL_WORKERS");
  };

  Common pf_opts;
  auto* pf_cmd = app.add_subcommand("prefilter", "Screen candidate channels and write prefilter.csv");
  add_common(pf_cmd, pf_opts);

  Common sel_opts;
  std::string method;
  std::vector<std::size_t> caps;
  std::optional<std::uint64_t> seed;
  auto* sel_cmd = app.add_subcommand("select", "Run the cap sweep and write cost tables, models and traces");
  add_common(sel_cmd, sel_opts);
  sel_cmd->add_option("--method", method, "rfe, ga, both or rfe_naive")
      ->check(CLI::IsMember({"rfe", "ga", "both", "rfe_naive"}));
  sel_cmd->add_option("--cap", caps, "Maximum state count; repeat for a sweep");
  sel_cmd->add_option("--seed", seed, "GA seed");

  PredictOptions pred;
  std::string pred_model, pred_manifest, pred_out;
  std::vector<std::string> pred_data;
  auto* pred_cmd = app.add_subcommand("predict", "Roll a saved model out over a dataset's test split");
  pred_cmd->add_option("--model", pred_model, "Model file")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--manifest", pred_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--data", pred_data, "Realization CSV files");
  pred_cmd->add_option("--horizon", pred.horizon, "Number of steps to predict")->required();
  pred_cmd->add_option("--train-fraction", pred.train_fraction, "Leading fraction treated as training");
  pred_cmd->add_option("--realization", pred.realization, "Realization index");
  pred_cmd->add_option("--out", pred_out, "Trace CSV to write")->required();

  std::string report_dir;
  auto* rep_cmd = app.add_subcommand("report", "Summarize a select run directory into report.csv");
  rep_cmd->add_option("--out", report_dir, "Directory written by select")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto build_config = [](const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (!c.manifest.empty()) cfg.manifest = c.manifest;
    if (!c.data.empty()) cfg.data.assign(c.data.begin(), c.data.end());
    if (!c.out.empty()) cfg.out = c.out;
    if (auto env = workers_from_env()) cfg.workers = *env;
    if (c.workers) cfg.workers = *c.workers;
    return cfg;
  };

  try {
    if (generate->parsed()) {
      if (!spec_path.empty()) gen.spec = spec_path;
      if (gen_seed_opt->count() > 0) gen.seed = gen_seed;
      gen.out = gen_out;
      const fs::path manifest = cmd_generate(gen);
      std::cout << "wrote " << manifest.string() << '\n';
    } else if (pf_cmd->parsed()) {
      const RunConfig cfg = build_config(pf_opts);
      const PrefilterReport report = cmd_prefilter(cfg, pf_opts.overwrite);
      std::cout << "kept " << report.kept.size() << " of " << report.kept.size() + report.removed.size()
                << " candidates\n";
    } else if (sel_cmd->parsed()) {
      RunConfig cfg = build_config(sel_opts);
      if (!method.empty()) cfg.method = method;
      if (!caps.empty()) cfg.caps = caps;
      if (seed) cfg.seed = *seed;
      const auto rows = cmd_select(cfg, sel_opts.overwrite);
      for (const auto& r : rows) {
        std::cout << "cap " << r.cap << ' ' << r.method << ": J_train " << r.J_train << ", J_test " << r.J_test
                  << ", " << r.selected_count << " selected\n";
      }
    } else if (pred_cmd->parsed()) {
      pred.model = pred_model;
      pred.manifest = pred_manifest;
      pred.data.assign(pred_data.begin(), pred_data.end());
      pred.out = pred_out;
      cmd_predict(pred);
    } else if (rep_cmd->parsed()) {
      std::cout << cmd_report(report_dir);
    }
  } catch (const Error& e) {
    std::cerr << "statesel: " << e.what() << '\n';
    return exit_status_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "statesel: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

}  // namespace statesel::cli
