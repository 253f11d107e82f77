#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "statesel/dataset.hpp"

namespace statesel {

struct SquareWaveSpec {
  double offset = 0.0;
  double amplitude = 1.0;
  double period = 1.0;  // seconds
  double duty = 0.5;
  double phase = 0.0;   // seconds

  void validate() const;
};

/// offset + amplitude while the fractional position of (t - phase) in the period is below duty.
double square_wave(const SquareWaveSpec& spec, double t);

/// A generated dataset together with everything a test needs to check it.
struct GeneratedDataset {
  TimeSeriesDataset data;
  nlohmann::json truth;
};

void write_truth(const std::filesystem::path& path, const nlohmann::json& truth);

// ---------------------------------------------------------------- series RLC

struct RlcParams {
  double R = 1.0;      // ohm
  double L = 1e-3;     // henry
  double C = 1e-3;     // farad
  double dt = 1e-3;    // seconds
  double duration = 8.0;

  void validate() const;
  [[nodiscard]] std::size_t samples() const;
};

struct RlcSpec {
  RlcParams params;
  std::vector<SquareWaveSpec> excitation;  // one realization per entry
};

/// Five staggered square waves with distinct offsets and amplitudes.
std::vector<SquareWaveSpec> default_rlc_excitation();
RlcSpec default_rlc_spec();

/// Continuous model with state (v_C, i) and the source voltage as input:
/// C dv_C/dt = i, L di/dt = -v_C - R i - v_S.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rlc_matrices(const RlcParams& p);

/// Exact ZOH simulation from rest. Channels: the source voltage (input), the
/// capacitor and resistor voltages (outputs) and 43 derived candidate channels.
GeneratedDataset simulate_rlc(const RlcSpec& spec);

nlohmann::json to_json(const RlcSpec& spec);
RlcSpec rlc_spec_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- synthetic LTI

struct SynthSubsystem {
  std::string name;
  Eigen::MatrixXd A;  // n_s x n_s, continuous time
  Eigen::MatrixXd B;  // n_s x m over the global inputs
  Eigen::MatrixXd C;  // p_s x n_s
  double output_gain = 1.0;
  std::size_t distractors = 0;
};

/// Block from subsystem `from` into `to`. For state coupling the block is
/// n_to x n_from and enters the continuous dynamics; for output coupling it is
/// p_to x n_from and is multiplied by the output gain of `from`.
struct SynthCoupling {
  std::string from;
  std::string to;
  Eigen::MatrixXd gain;
};

/// Extra candidate channel: weighted sum of one subsystem's states.
struct SynthMixture {
  std::string subsystem;
  std::vector<double> weights;
};

/// First-order lag driven by an unobserved, held Gaussian disturbance.
struct DistractorSpec {
  double rate = 0.5;  // 1/seconds
  double hold = 5.0;  // seconds between disturbance changes
  double scale = 1.0;
};

struct SynthSystemSpec {
  std::vector<std::string> inputs;
  std::vector<SynthSubsystem> subsystems;
  std::vector<SynthCoupling> state_coupling;
  std::vector<SynthCoupling> output_coupling;
  std::vector<SynthMixture> mixtures;
  DistractorSpec distractor;
  double noise_level = 0.0;  // measurement noise std relative to each channel's std
  std::uint64_t seed = 0;
  double dt = 0.1;
  double duration = 200.0;
  std::vector<std::vector<SquareWaveSpec>> excitation;  // realization x input

  void validate() const;
  [[nodiscard]] std::size_t samples() const;
  [[nodiscard]] std::size_t state_count() const;
};

struct SynthMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;  // all outputs, gains and output coupling applied
};

/// Assembled block system. Throws UnstableSystem when a block or the whole
/// coupled matrix has an eigenvalue with non-negative real part.
SynthMatrices synth_matrices(const SynthSystemSpec& spec);

/// Candidates per subsystem: its true states, then distractors, then mixtures.
GeneratedDataset simulate_synth(const SynthSystemSpec& spec);

nlohmann::json to_json(const SynthSystemSpec& spec);
SynthSystemSpec synth_spec_from_json(const nlohmann::json& j);

/// Two subsystems with two states each and a 1e4 output-gain ratio. The
/// high-gain subsystem leaks into the other's output.
SynthSystemSpec default_overshadow_spec();

/// Two subsystems with three states each and moderate state coupling.
SynthSystemSpec default_coupled_spec();

/// Like the overshadowing system but without any coupling and with the input
/// driving the first subsystem only.
SynthSystemSpec default_decoupled_spec();

}  // namespace statesel
