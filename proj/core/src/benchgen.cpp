#include "statesel/benchgen.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

#include "json_util.hpp"
#include "statesel/dmdc.hpp"
#include "statesel/error.hpp"

namespace statesel {

using nlohmann::json;

void SquareWaveSpec::validate() const {
  require(std::isfinite(period) && period > 0.0, ErrorCode::InvalidArgument, "square wave period must be positive");
  require(duty > 0.0 && duty < 1.0, ErrorCode::InvalidArgument, "square wave duty must lie in (0, 1)");
  require(std::isfinite(offset) && std::isfinite(amplitude) && std::isfinite(phase), ErrorCode::InvalidArgument,
          "square wave parameters must be finite");
}

double square_wave(const SquareWaveSpec& spec, double t) {
  const double pos = (t - spec.phase) / spec.period;
  const double frac = pos - std::floor(pos);
  return frac < spec.duty ? spec.offset + spec.amplitude : spec.offset;
}

void write_truth(const std::filesystem::path& path, const json& truth) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << truth.dump(2) << '\n';
}

namespace {

json wave_to_json(const SquareWaveSpec& w) {
  return {{"offset", w.offset}, {"amplitude", w.amplitude}, {"period", w.period}, {"duty", w.duty}, {"phase", w.phase}};
}

SquareWaveSpec wave_from_json(const json& j) {
  SquareWaveSpec w;
  w.offset = j.value("offset", w.offset);
  w.amplitude = j.value("amplitude", w.amplitude);
  w.period = j.value("period", w.period);
  w.duty = j.value("duty", w.duty);
  w.phase = j.value("phase", w.phase);
  w.validate();
  return w;
}

std::size_t sample_count(double duration, double dt) {
  require(std::isfinite(duration) && duration > 0.0, ErrorCode::InvalidArgument, "duration must be positive");
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  require(n >= 2, ErrorCode::TooShort, "duration must cover at least two samples");
  return n;
}

bool hurwitz(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return true;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

// Exact discrete simulation from rest; column k holds x(k).
Eigen::MatrixXd simulate_states(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd, const Eigen::MatrixXd& V) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(Ad.rows(), V.cols());
  for (Eigen::Index k = 0; k + 1 < V.cols(); ++k) X.col(k + 1) = Ad * X.col(k) + Bd * V.col(k);
  return X;
}

}  // namespace

// ---------------------------------------------------------------- series RLC

void RlcParams::validate() const {
  for (double v : {R, L, C, dt, duration}) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidArgument, "RLC parameters must be positive");
  }
  (void)samples();
}

std::size_t RlcParams::samples() const { return sample_count(duration, dt); }

std::vector<SquareWaveSpec> default_rlc_excitation() {
  const double offsets[] = {0.0, 0.25, -0.25, 0.5, -0.5};
  const double amplitudes[] = {1.0, 2.0, 1.5, 3.0, 2.5};
  std::vector<SquareWaveSpec> out;
  for (int r = 0; r < 5; ++r) {
    out.push_back({offsets[r], amplitudes[r], 0.020 + 0.004 * r, 0.5, 0.004 * r});
  }
  return out;
}

RlcSpec default_rlc_spec() { return {RlcParams{}, default_rlc_excitation()}; }

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rlc_matrices(const RlcParams& p) {
  p.validate();
  Eigen::MatrixXd A(2, 2);
  A << 0.0, 1.0 / p.C, -1.0 / p.L, -p.R / p.L;
  Eigen::MatrixXd B(2, 1);
  B << 0.0, -1.0 / p.L;
  return {A, B};
}

namespace {

struct RlcChannel {
  std::string name;
  std::string formula;
  std::string group;  // physical, duplicate, input_collinear, constant
  std::function<double(double vs, double vc, double i)> eval;
};

std::vector<RlcChannel> rlc_channels(const RlcParams& p) {
  const double R = p.R;
  const double L = p.L;
  const double C = p.C;
  auto vl = [R](double vs, double vc, double i) { return -(vs + R * i + vc); };
  auto constant = [](std::string name, double v) {
    return RlcChannel{std::move(name), std::to_string(v), "constant", [v](double, double, double) { return v; }};
  };
  std::vector<RlcChannel> ch = {
      {"capacitor.v", "v_C", "physical", [](double, double vc, double) { return vc; }},
      {"capacitor.p.i", "i", "physical", [](double, double, double i) { return i; }},
      {"inductor.v", "-(v_S + R*i + v_C)", "physical", vl},
      {"capacitor.E", "0.5*C*v_C^2", "physical", [C](double, double vc, double) { return 0.5 * C * vc * vc; }},
      {"inductor.E", "0.5*L*i^2", "physical", [L](double, double, double i) { return 0.5 * L * i * i; }},
      {"capacitor.P", "v_C*i", "physical", [](double, double vc, double i) { return vc * i; }},
      {"inductor.P", "v_L*i", "physical", [vl](double vs, double vc, double i) { return vl(vs, vc, i) * i; }},
      {"source.P", "v_S*i", "physical", [](double vs, double, double i) { return vs * i; }},

      {"capacitor.q", "C*v_C", "duplicate", [C](double, double vc, double) { return C * vc; }},
      {"capacitor.v_mV", "1000*v_C", "duplicate", [](double, double vc, double) { return 1000.0 * vc; }},
      {"capacitor.v_kV", "0.001*v_C", "duplicate", [](double, double vc, double) { return 0.001 * vc; }},
      {"inductor.p.i", "i", "duplicate", [](double, double, double i) { return i; }},
      {"resistor.p.i", "i", "duplicate", [](double, double, double i) { return i; }},
      {"source.p.i", "-i", "duplicate", [](double, double, double i) { return -i; }},
      {"resistor.v", "R*i", "duplicate", [R](double, double, double i) { return R * i; }},
      {"inductor.flux", "L*i", "duplicate", [L](double, double, double i) { return L * i; }},
      {"capacitor.i_mA", "1000*i", "duplicate", [](double, double, double i) { return 1000.0 * i; }},
      {"resistor.P", "R*i^2", "duplicate", [R](double, double, double i) { return R * i * i; }},
      {"inductor.E_mJ", "500*L*i^2", "duplicate", [L](double, double, double i) { return 500.0 * L * i * i; }},
      {"capacitor.E_mJ", "500*C*v_C^2", "duplicate", [C](double, double vc, double) { return 500.0 * C * vc * vc; }},
      {"inductor.n.v", "v_S + R*i + v_C", "duplicate", [vl](double vs, double vc, double i) { return -vl(vs, vc, i); }},
      {"capacitor.P_abs", "-v_C*i", "duplicate", [](double, double vc, double i) { return -vc * i; }},
      {"source.P_delivered", "-v_S*i", "duplicate", [](double vs, double, double i) { return -vs * i; }},

      {"source.v", "v_S", "input_collinear", [](double vs, double, double) { return vs; }},
      {"source.p.v", "v_S", "input_collinear", [](double vs, double, double) { return vs; }},
      {"source.v_mV", "1000*v_S", "input_collinear", [](double vs, double, double) { return 1000.0 * vs; }},
      {"source.n.v_rel", "-v_S", "input_collinear", [](double vs, double, double) { return -vs; }},
      {"source.v_x2", "2*v_S", "input_collinear", [](double vs, double, double) { return 2.0 * vs; }},
      {"source.v_kV", "0.001*v_S", "input_collinear", [](double vs, double, double) { return 0.001 * vs; }},
  };
  for (auto&& c : {constant("ground.v", 0.0), constant("source.n.v", 0.0), constant("capacitor.n.v", 0.0),
                   constant("resistor.R", R), constant("inductor.L", L), constant("capacitor.C", C),
                   constant("ambient.T", 293.15), constant("capacitor.T", 293.15), constant("inductor.T", 293.15),
                   constant("resistor.T", 293.15), constant("capacitor.v_rating", 50.0),
                   constant("inductor.i_rating", 10.0), constant("resistor.P_rating", 5.0),
                   constant("circuit.tau", L / R)}) {
    ch.push_back(c);
  }
  return ch;
}

}  // namespace

GeneratedDataset simulate_rlc(const RlcSpec& spec) {
  const RlcParams& p = spec.params;
  p.validate();
  require(!spec.excitation.empty(), ErrorCode::InvalidArgument, "RLC needs at least one excitation");
  for (const auto& w : spec.excitation) w.validate();

  const auto [A, B] = rlc_matrices(p);
  const auto [Ad, Bd] = c2d_zoh(A, B, p.dt);
  const std::vector<RlcChannel> cand = rlc_channels(p);
  const std::size_t n = p.samples();

  std::vector<ChannelMeta> manifest;
  manifest.push_back({"source.v_in", ChannelRole::Input, "circuit", "v_S"});
  manifest.push_back({"output.v_C", ChannelRole::Output, "circuit", "v_C"});
  manifest.push_back({"output.v_R", ChannelRole::Output, "circuit", "R*i"});
  for (const auto& c : cand) manifest.push_back({c.name, ChannelRole::Candidate, "circuit", c.formula});

  std::vector<Eigen::MatrixXd> reals;
  for (const auto& wave : spec.excitation) {
    Eigen::MatrixXd V(1, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) V(0, static_cast<Eigen::Index>(k)) = square_wave(wave, p.dt * static_cast<double>(k));
    const Eigen::MatrixXd X = simulate_states(Ad, Bd, V);
    Eigen::MatrixXd data(static_cast<Eigen::Index>(manifest.size()), static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < data.cols(); ++k) {
      const double vs = V(0, k);
      const double vc = X(0, k);
      const double i = X(1, k);
      data(0, k) = vs;
      data(1, k) = vc;
      data(2, k) = p.R * i;
      for (std::size_t c = 0; c < cand.size(); ++c) data(static_cast<Eigen::Index>(3 + c), k) = cand[c].eval(vs, vc, i);
    }
    reals.push_back(std::move(data));
  }

  GeneratedDataset out{TimeSeriesDataset(p.dt, std::move(manifest), std::move(reals)), json::object()};
  json channels = json::array();
  for (const auto& c : cand) channels.push_back({{"name", c.name}, {"formula", c.formula}, {"group", c.group}});
  out.truth = {{"kind", "rlc"},
               {"spec", to_json(spec)},
               {"true_states", {"capacitor.v", "capacitor.p.i"}},
               {"state_formulas", {"v_C", "i"}},
               {"A", detail::matrix_to_json(A)},
               {"B", detail::matrix_to_json(B)},
               {"Ad", detail::matrix_to_json(Ad)},
               {"Bd", detail::matrix_to_json(Bd)},
               {"candidates", std::move(channels)}};
  return out;
}

json to_json(const RlcSpec& spec) {
  json waves = json::array();
  for (const auto& w : spec.excitation) waves.push_back(wave_to_json(w));
  const RlcParams& p = spec.params;
  return {{"R", p.R}, {"L", p.L}, {"C", p.C}, {"dt", p.dt}, {"duration", p.duration}, {"excitation", waves}};
}

RlcSpec rlc_spec_from_json(const json& j) {
  RlcSpec spec = default_rlc_spec();
  RlcParams& p = spec.params;
  p.R = j.value("R", p.R);
  p.L = j.value("L", p.L);
  p.C = j.value("C", p.C);
  p.dt = j.value("dt", p.dt);
  p.duration = j.value("duration", p.duration);
  if (j.contains("excitation")) {
    spec.excitation.clear();
    for (const auto& w : j.at("excitation")) spec.excitation.push_back(wave_from_json(w));
  }
  p.validate();
  return spec;
}

// ---------------------------------------------------------------- synthetic LTI

namespace {

std::map<std::string, std::size_t> subsystem_positions(const SynthSystemSpec& spec) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t s = 0; s < spec.subsystems.size(); ++s) pos[spec.subsystems[s].name] = s;
  return pos;
}

}  // namespace

void SynthSystemSpec::validate() const {
  require(!subsystems.empty(), ErrorCode::InvalidArgument, "synthetic system needs at least one subsystem");
  require(!inputs.empty(), ErrorCode::InvalidArgument, "synthetic system needs at least one input");
  const auto m = static_cast<Eigen::Index>(inputs.size());
  std::map<std::string, std::size_t> seen;
  for (const auto& s : subsystems) {
    require(!s.name.empty() && seen.emplace(s.name, 0).second, ErrorCode::InvalidArgument,
            "subsystem names must be unique and non-empty");
    require(s.A.rows() > 0 && s.A.rows() == s.A.cols(), ErrorCode::DimensionMismatch,
            "subsystem " + s.name + ": A must be square and non-empty");
    require(s.B.rows() == s.A.rows() && s.B.cols() == m, ErrorCode::DimensionMismatch,
            "subsystem " + s.name + ": B must be n_s x inputs");
    require(s.C.rows() > 0 && s.C.cols() == s.A.rows(), ErrorCode::DimensionMismatch,
            "subsystem " + s.name + ": C must be p_s x n_s");
    require(std::isfinite(s.output_gain), ErrorCode::InvalidArgument, "output gain must be finite");
  }
  const auto pos = subsystem_positions(*this);
  auto check = [&](const SynthCoupling& c, bool state) {
    require(pos.contains(c.from) && pos.contains(c.to) && c.from != c.to, ErrorCode::InvalidArgument,
            "coupling must join two distinct known subsystems");
    const auto& to = subsystems[pos.at(c.to)];
    const auto& from = subsystems[pos.at(c.from)];
    require(c.gain.rows() == (state ? to.A.rows() : to.C.rows()) && c.gain.cols() == from.A.rows(),
            ErrorCode::DimensionMismatch, "coupling block " + c.from + " -> " + c.to + " has the wrong shape");
  };
  for (const auto& c : state_coupling) check(c, true);
  for (const auto& c : output_coupling) check(c, false);
  for (const auto& mix : mixtures) {
    require(pos.contains(mix.subsystem), ErrorCode::InvalidArgument, "mixture names an unknown subsystem");
    require(static_cast<Eigen::Index>(mix.weights.size()) == subsystems[pos.at(mix.subsystem)].A.rows(),
            ErrorCode::DimensionMismatch, "mixture weights must match the subsystem's state count");
  }
  require(distractor.rate > 0.0 && distractor.hold > 0.0 && distractor.scale >= 0.0, ErrorCode::InvalidArgument,
          "distractor rate and hold must be positive");
  require(noise_level >= 0.0, ErrorCode::InvalidArgument, "noise_level must be non-negative");
  require(!excitation.empty(), ErrorCode::InvalidArgument, "synthetic system needs at least one realization");
  for (const auto& r : excitation) {
    require(r.size() == inputs.size(), ErrorCode::DimensionMismatch, "each realization needs one wave per input");
    for (const auto& w : r) w.validate();
  }
  (void)samples();
}

std::size_t SynthSystemSpec::samples() const { return sample_count(duration, dt); }

std::size_t SynthSystemSpec::state_count() const {
  std::size_t n = 0;
  for (const auto& s : subsystems) n += static_cast<std::size_t>(s.A.rows());
  return n;
}

SynthMatrices synth_matrices(const SynthSystemSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.state_count());
  const auto m = static_cast<Eigen::Index>(spec.inputs.size());
  Eigen::Index p = 0;
  for (const auto& s : spec.subsystems) p += s.C.rows();

  std::vector<Eigen::Index> x0;
  std::vector<Eigen::Index> y0;
  Eigen::Index xo = 0;
  Eigen::Index yo = 0;
  for (const auto& s : spec.subsystems) {
    x0.push_back(xo);
    y0.push_back(yo);
    xo += s.A.rows();
    yo += s.C.rows();
  }

  SynthMatrices out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, m), Eigen::MatrixXd::Zero(p, n)};
  for (std::size_t k = 0; k < spec.subsystems.size(); ++k) {
    const auto& s = spec.subsystems[k];
    require(hurwitz(s.A), ErrorCode::UnstableSystem, "subsystem " + s.name + " has an unstable A block");
    out.A.block(x0[k], x0[k], s.A.rows(), s.A.cols()) = s.A;
    out.B.block(x0[k], 0, s.B.rows(), m) = s.B;
    out.C.block(y0[k], x0[k], s.C.rows(), s.C.cols()) = s.output_gain * s.C;
  }
  const auto pos = subsystem_positions(spec);
  for (const auto& c : spec.state_coupling) {
    const std::size_t f = pos.at(c.from);
    const std::size_t t = pos.at(c.to);
    out.A.block(x0[t], x0[f], c.gain.rows(), c.gain.cols()) += c.gain;
  }
  for (const auto& c : spec.output_coupling) {
    const std::size_t f = pos.at(c.from);
    const std::size_t t = pos.at(c.to);
    out.C.block(y0[t], x0[f], c.gain.rows(), c.gain.cols()) += spec.subsystems[f].output_gain * c.gain;
  }
  require(hurwitz(out.A), ErrorCode::UnstableSystem, "coupled system matrix is unstable");
  return out;
}

GeneratedDataset simulate_synth(const SynthSystemSpec& spec) {
  const SynthMatrices sys = synth_matrices(spec);
  const auto [Ad, Bd] = c2d_zoh(sys.A, sys.B, spec.dt);
  const std::size_t n_samples = spec.samples();
  const auto cols = static_cast<Eigen::Index>(n_samples);

  // Channel layout: inputs, outputs, then per subsystem states, distractors, mixtures.
  std::vector<ChannelMeta> manifest;
  for (const auto& u : spec.inputs) manifest.push_back({u, ChannelRole::Input, "", u});
  for (const auto& s : spec.subsystems) {
    for (Eigen::Index r = 0; r < s.C.rows(); ++r) {
      manifest.push_back({s.name + ".y" + std::to_string(r + 1), ChannelRole::Output, s.name,
                          "output " + std::to_string(r + 1) + " of " + s.name});
    }
  }
  struct CandidateSource {
    enum Kind { State, Distractor, Mixture } kind;
    Eigen::Index index;  // global state index, distractor ordinal or mixture ordinal
  };
  std::vector<CandidateSource> sources;
  std::vector<std::string> true_states;
  std::size_t distractor_total = 0;
  Eigen::Index xo = 0;
  for (const auto& s : spec.subsystems) {
    for (Eigen::Index r = 0; r < s.A.rows(); ++r) {
      const std::string name = s.name + ".x" + std::to_string(r + 1);
      manifest.push_back({name, ChannelRole::Candidate, s.name, "state " + std::to_string(r + 1) + " of " + s.name});
      true_states.push_back(name);
      sources.push_back({CandidateSource::State, xo + r});
    }
    for (std::size_t d = 0; d < s.distractors; ++d) {
      manifest.push_back({s.name + ".d" + std::to_string(d + 1), ChannelRole::Candidate, s.name,
                          "lagged unobserved disturbance"});
      sources.push_back({CandidateSource::Distractor, static_cast<Eigen::Index>(distractor_total++)});
    }
    for (std::size_t k = 0; k < spec.mixtures.size(); ++k) {
      const auto& mix = spec.mixtures[k];
      if (mix.subsystem != s.name) continue;
      std::string formula;
      for (std::size_t w = 0; w < mix.weights.size(); ++w) {
        if (w > 0) formula += " + ";
        formula += std::to_string(mix.weights[w]) + "*" + s.name + ".x" + std::to_string(w + 1);
      }
      manifest.push_back({s.name + ".mix" + std::to_string(k + 1), ChannelRole::Candidate, s.name, formula});
      sources.push_back({CandidateSource::Mixture, static_cast<Eigen::Index>(k)});
    }
    xo += s.A.rows();
  }
  std::vector<Eigen::Index> mixture_offset(spec.mixtures.size());
  for (std::size_t k = 0; k < spec.mixtures.size(); ++k) {
    Eigen::Index off = 0;
    for (const auto& s : spec.subsystems) {
      if (s.name == spec.mixtures[k].subsystem) break;
      off += s.A.rows();
    }
    mixture_offset[k] = off;
  }

  const double lag = std::exp(-spec.distractor.rate * spec.dt);
  const auto hold = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.distractor.hold / spec.dt)));
  const auto m = static_cast<Eigen::Index>(spec.inputs.size());
  const auto n_in = static_cast<Eigen::Index>(spec.inputs.size());
  const Eigen::Index n_out = sys.C.rows();

  std::vector<Eigen::MatrixXd> reals;
  for (std::size_t r = 0; r < spec.excitation.size(); ++r) {
    Eigen::MatrixXd V(m, cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
      const double t = spec.dt * static_cast<double>(k);
      for (Eigen::Index u = 0; u < m; ++u) V(u, k) = square_wave(spec.excitation[r][static_cast<std::size_t>(u)], t);
    }
    const Eigen::MatrixXd X = simulate_states(Ad, Bd, V);
    const Eigen::MatrixXd Y = sys.C * X;

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(distractor_total), cols);
    if (distractor_total > 0) {
      std::mt19937_64 rng(spec.seed * 1000003ULL + r);
      std::normal_distribution<double> gauss(0.0, spec.distractor.scale);
      for (Eigen::Index d = 0; d < D.rows(); ++d) {
        double w = 0.0;
        for (Eigen::Index k = 0; k + 1 < cols; ++k) {
          if (static_cast<std::size_t>(k) % hold == 0) w = gauss(rng);
          D(d, k + 1) = lag * D(d, k) + (1.0 - lag) * w;
        }
      }
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(manifest.size()), cols);
    data.topRows(n_in) = V;
    data.middleRows(n_in, n_out) = Y;
    for (std::size_t c = 0; c < sources.size(); ++c) {
      const auto row = n_in + n_out + static_cast<Eigen::Index>(c);
      const auto& src = sources[c];
      switch (src.kind) {
        case CandidateSource::State: data.row(row) = X.row(src.index); break;
        case CandidateSource::Distractor: data.row(row) = D.row(src.index); break;
        case CandidateSource::Mixture: {
          const auto& mix = spec.mixtures[static_cast<std::size_t>(src.index)];
          data.row(row).setZero();
          for (std::size_t w = 0; w < mix.weights.size(); ++w) {
            data.row(row) += mix.weights[w] * X.row(mixture_offset[static_cast<std::size_t>(src.index)] +
                                                    static_cast<Eigen::Index>(w));
          }
          break;
        }
      }
    }
    reals.push_back(std::move(data));
  }

  if (spec.noise_level > 0.0) {
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto row = n_in; row < static_cast<Eigen::Index>(manifest.size()); ++row) {
      double sum = 0.0;
      double sq = 0.0;
      double count = 0.0;
      for (const auto& d : reals) {
        sum += d.row(row).sum();
        sq += d.row(row).squaredNorm();
        count += static_cast<double>(d.cols());
      }
      const double mean = sum / count;
      const double sd = std::sqrt(std::max(0.0, sq / count - mean * mean));
      for (auto& d : reals) {
        for (Eigen::Index k = 0; k < cols; ++k) d(row, k) += spec.noise_level * sd * gauss(rng);
      }
    }
  }

  GeneratedDataset out{TimeSeriesDataset(spec.dt, std::move(manifest), std::move(reals)), json::object()};
  out.truth = {{"kind", "synth"},
               {"spec", to_json(spec)},
               {"true_states", true_states},
               {"A", detail::matrix_to_json(sys.A)},
               {"B", detail::matrix_to_json(sys.B)},
               {"C", detail::matrix_to_json(sys.C)},
               {"Ad", detail::matrix_to_json(Ad)},
               {"Bd", detail::matrix_to_json(Bd)}};
  json channels = json::array();
  for (const auto& c : out.data.manifest()) {
    channels.push_back({{"name", c.name}, {"role", to_string(c.role)}, {"subsystem", c.subsystem}, {"formula", c.formula}});
  }
  out.truth["channels"] = std::move(channels);
  return out;
}

json to_json(const SynthSystemSpec& spec) {
  json subs = json::array();
  for (const auto& s : spec.subsystems) {
    subs.push_back({{"name", s.name},
                    {"A", detail::matrix_to_json(s.A)},
                    {"B", detail::matrix_to_json(s.B)},
                    {"C", detail::matrix_to_json(s.C)},
                    {"output_gain", s.output_gain},
                    {"distractors", s.distractors}});
  }
  auto couplings = [](const std::vector<SynthCoupling>& list) {
    json arr = json::array();
    for (const auto& c : list) arr.push_back({{"from", c.from}, {"to", c.to}, {"gain", detail::matrix_to_json(c.gain)}});
    return arr;
  };
  json mixes = json::array();
  for (const auto& mix : spec.mixtures) mixes.push_back({{"subsystem", mix.subsystem}, {"weights", mix.weights}});
  json exc = json::array();
  for (const auto& r : spec.excitation) {
    json row = json::array();
    for (const auto& w : r) row.push_back(wave_to_json(w));
    exc.push_back(std::move(row));
  }
  return {{"inputs", spec.inputs},
          {"subsystems", std::move(subs)},
          {"state_coupling", couplings(spec.state_coupling)},
          {"output_coupling", couplings(spec.output_coupling)},
          {"mixtures", std::move(mixes)},
          {"distractor",
           {{"rate", spec.distractor.rate}, {"hold", spec.distractor.hold}, {"scale", spec.distractor.scale}}},
          {"noise_level", spec.noise_level},
          {"seed", spec.seed},
          {"dt", spec.dt},
          {"duration", spec.duration},
          {"excitation", std::move(exc)}};
}

SynthSystemSpec synth_spec_from_json(const json& j) {
  SynthSystemSpec spec;
  try {
    spec.inputs = j.at("inputs").get<std::vector<std::string>>();
    const auto m = static_cast<Eigen::Index>(spec.inputs.size());
    for (const auto& s : j.at("subsystems")) {
      SynthSubsystem sub;
      sub.name = s.at("name").get<std::string>();
      sub.A = detail::matrix_from_json(s.at("A"));
      sub.B = detail::matrix_from_json(s.at("B"), m);
      sub.C = detail::matrix_from_json(s.at("C"), sub.A.cols());
      sub.output_gain = s.value("output_gain", 1.0);
      sub.distractors = s.value("distractors", std::size_t{0});
      spec.subsystems.push_back(std::move(sub));
    }
    auto couplings = [&](const char* key) {
      std::vector<SynthCoupling> out;
      if (!j.contains(key)) return out;
      for (const auto& c : j.at(key)) {
        out.push_back({c.at("from").get<std::string>(), c.at("to").get<std::string>(),
                       detail::matrix_from_json(c.at("gain"))});
      }
      return out;
    };
    spec.state_coupling = couplings("state_coupling");
    spec.output_coupling = couplings("output_coupling");
    if (j.contains("mixtures")) {
      for (const auto& mix : j.at("mixtures")) {
        spec.mixtures.push_back({mix.at("subsystem").get<std::string>(), mix.at("weights").get<std::vector<double>>()});
      }
    }
    if (j.contains("distractor")) {
      const auto& d = j.at("distractor");
      spec.distractor.rate = d.value("rate", spec.distractor.rate);
      spec.distractor.hold = d.value("hold", spec.distractor.hold);
      spec.distractor.scale = d.value("scale", spec.distractor.scale);
    }
    spec.noise_level = j.value("noise_level", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.dt = j.value("dt", spec.dt);
    spec.duration = j.value("duration", spec.duration);
    for (const auto& r : j.at("excitation")) {
      std::vector<SquareWaveSpec> row;
      for (const auto& w : r) row.push_back(wave_from_json(w));
      spec.excitation.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("bad synthetic system spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

namespace {

std::vector<std::vector<SquareWaveSpec>> two_input_excitation() {
  std::vector<std::vector<SquareWaveSpec>> out;
  const double offsets[] = {0.0, 0.5, -0.5};
  const double amplitudes[] = {1.0, 1.5, 2.0};
  for (int r = 0; r < 3; ++r) {
    out.push_back({{offsets[r], amplitudes[r], 40.0, 0.5, 6.0 * r},
                   {-offsets[r], amplitudes[2 - r], 56.0, 0.5, 9.0 + 6.0 * r}});
  }
  return out;
}

Eigen::MatrixXd mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> values) {
  Eigen::MatrixXd m(rows, cols);
  auto it = values.begin();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

}  // namespace

SynthSystemSpec default_overshadow_spec() {
  SynthSystemSpec spec;
  spec.inputs = {"u_A", "u_B"};
  spec.subsystems.push_back({"A", mat(2, 2, {-0.5, 0.3, 2.0, -4.0}), mat(2, 2, {0.01, 0.0, 0.0, 0.0}),
                             mat(1, 2, {1.0, 1.0}), 1e4, 2});
  spec.subsystems.push_back({"B", mat(2, 2, {-0.3, 0.2, 1.5, -3.0}), mat(2, 2, {0.0, 1.0, 0.0, 0.0}),
                             mat(1, 2, {1.0, -0.5}), 1.0, 2});
  spec.output_coupling.push_back({"A", "B", mat(1, 2, {1e-3, 0.0})});
  spec.seed = 7;
  spec.excitation = two_input_excitation();
  return spec;
}

SynthSystemSpec default_coupled_spec() {
  SynthSystemSpec spec;
  spec.inputs = {"u_A", "u_B"};
  spec.subsystems.push_back({"A", mat(3, 3, {-0.4, 0.2, 0.0, 0.5, -1.0, 0.3, 0.0, 0.4, -0.8}),
                             mat(3, 2, {1.0, 0.0, 0.0, 0.0, 0.0, 0.3}), mat(1, 3, {1.0, 0.5, -0.4}), 10.0, 2});
  spec.subsystems.push_back({"B", mat(3, 3, {-0.3, 0.3, 0.0, -0.2, -0.9, 0.4, 0.1, 0.0, -0.6}),
                             mat(3, 2, {0.0, 1.0, 0.2, 0.0, 0.0, 0.0}), mat(1, 3, {0.6, -0.3, 1.0}), 1.0, 2});
  spec.state_coupling.push_back({"A", "B", mat(3, 3, {0.15, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0})});
  spec.seed = 11;
  spec.excitation = two_input_excitation();
  return spec;
}

SynthSystemSpec default_decoupled_spec() {
  SynthSystemSpec spec;
  spec.inputs = {"u"};
  spec.subsystems.push_back({"A", mat(2, 2, {-0.5, 0.3, 2.0, -4.0}), mat(2, 1, {1.0, 0.0}), mat(1, 2, {1.0, 1.0}),
                             1.0, 0});
  spec.subsystems.push_back({"B", mat(2, 2, {-0.3, 0.2, 1.5, -3.0}), mat(2, 1, {0.0, 0.0}), mat(1, 2, {1.0, -0.5}),
                             1.0, 0});
  spec.seed = 3;
  for (int r = 0; r < 3; ++r) spec.excitation.push_back({{0.25 * r, 1.0 + 0.5 * r, 40.0, 0.5, 6.0 * r}});
  return spec;
}

}  // namespace statesel
