#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vcselrc/dynamics.hpp"
#include "vcselrc/topology.hpp"

namespace vcselrc {

enum class SequenceKind { uniform, binary };

struct SymbolSequence {
  std::vector<double> values;
  SequenceKind kind = SequenceKind::uniform;
  std::uint64_t seed = 0;
};

/// Pseudo-random input symbols in [0, 1] (uniform) or {0, 1} (binary).
SymbolSequence generate_sequence(SequenceKind kind, std::size_t length,
                                 std::uint64_t seed);

struct SamplingConfig {
  double symbol_rate = 454.5454e6;
  double sample_rate = 5e9;
  std::size_t discard = 2;
  std::size_t shots = 1024;
  double detection_noise = 0.05; // per-shot std relative to full scale
  /// Samples between the recorded-trace origin and the first symbol slot.
  std::size_t alignment_offset = 11;
  /// Leading symbols dropped before the state matrix is formed.
  std::size_t warmup_symbols = 50;

  /// sample_rate / symbol_rate, required to be an integer to 1e-6 relative.
  [[nodiscard]] std::size_t samples_per_symbol() const;
  /// Symbol period implied by the integer sample grid.
  [[nodiscard]] double symbol_period() const;
  void validate() const;
};

/// N x J reservoir states; row i holds symbol `first_symbol + i`.
struct StateMatrix {
  Eigen::MatrixXd entries;
  std::vector<std::size_t> node_ids;
  std::uint64_t symbol_seed = 0;
  std::size_t first_symbol = 0;

  [[nodiscard]] std::size_t rows() const {
    return static_cast<std::size_t>(entries.rows());
  }
  [[nodiscard]] std::size_t cols() const {
    return static_cast<std::size_t>(entries.cols());
  }
};

/// Modulator drive for one symbol stream. Voltages are in units of V_pi.
struct MzmWaveform {
  std::vector<double> voltages;
  std::vector<double> levels; // transmitted intensity per symbol, in [0, 1]
  double depth = 1.0;
  /// Expected level for symbols with mean 1/2.
  [[nodiscard]] double mean_level() const { return 1.0 - 0.5 * depth; }
};

/// sin^2 modulator transfer, T(v) = sin^2(pi v / 2) with v in units of V_pi.
double mzm_transfer(double voltage);

/// Pre-compensated drive: v_n = (2/pi) asin(sqrt(1 - d + d r_n)), so the
/// transmitted intensity is affine in r_n. Throws std::invalid_argument for
/// values outside [0, 1] or depth outside (0, 1].
MzmWaveform encode_mzm(const std::vector<double> &values, double depth = 1.0);

/// Samples x nodes traces of one shot; shot index and its derived seed.
using ShotSource =
    std::function<Eigen::MatrixXd(std::size_t shot, std::uint64_t shot_seed)>;

/// Pointwise mean over config.shots realizations, summed in shot order.
Eigen::MatrixXd detect_and_average(const ShotSource &source,
                                   const SamplingConfig &config,
                                   std::uint64_t seed);

/// Shot source adding white Gaussian detection noise of
/// `relative_noise * max(clean column)` to every sample of a clean trace.
ShotSource noisy_detector(Eigen::MatrixXd clean, double relative_noise);

/// Thrown when a trace is not made of whole symbol slots.
class LengthMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// q_{n,j} = mean of samples discard..sps-1 of slot n, slots starting at
/// config.alignment_offset, leading config.warmup_symbols rows dropped.
StateMatrix extract_states(const Eigen::MatrixXd &sampled,
                           const SamplingConfig &config,
                           std::vector<std::size_t> node_ids,
                           std::uint64_t symbol_seed = 0);

enum class RunMode { response, reflection, surrogate };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string &text);

enum class SurrogateShape { saturating, identity };

/// Everything needed to turn a symbol stream into recorded traces, besides
/// the topology, laser parameters, and sampling.
struct SimulationSettings {
  DynamicsOptions dynamics;  // dt, coupling, injection, noise, scheme
  double modulation_depth = 1.0;
  double reflectivity = 0.5;
  /// Adds the facet echo to the recorded response, as seen by a detector
  /// that cannot separate the two.
  bool response_includes_reflection = true;
  double surrogate_coupling_gain = 0.2;
  SurrogateShape surrogate_shape = SurrogateShape::saturating;
  std::uint64_t surrogate_seed = 0; // node response shapes, fixed per device
};

/// Averaged recorded traces for the recorded nodes (samples x J).
struct RecordedRun {
  Eigen::MatrixXd traces;
  std::vector<std::size_t> node_ids;
  std::uint64_t symbol_seed = 0;
  std::size_t symbols = 0;
};

/// Clean per-node traces on the sample grid for one mode, before detection.
/// The recorded-trace origin precedes the first symbol slot by
/// config.alignment_offset samples.
Eigen::MatrixXd clean_traces(const LatticeTopology &topology,
                             const LaserParams &params,
                             const SymbolSequence &sequence,
                             const SamplingConfig &config, RunMode mode,
                             double power_ratio, double detuning_nm,
                             std::uint64_t seed,
                             const SimulationSettings &settings);

RecordedRun record_run(const LatticeTopology &topology,
                       const LaserParams &params,
                       const SymbolSequence &sequence,
                       const SamplingConfig &config, RunMode mode,
                       double power_ratio, double detuning_nm,
                       std::uint64_t seed, const SimulationSettings &settings);

/// encode -> dynamics (per mode) -> detect and average -> extract states.
StateMatrix synthesize_run(const LatticeTopology &topology,
                           const LaserParams &params,
                           const SymbolSequence &sequence,
                           const SamplingConfig &config, RunMode mode,
                           double power_ratio, double detuning_nm,
                           std::uint64_t seed,
                           const SimulationSettings &settings);

/// Mean of q over inputs inside a sliding window of the given width,
/// evaluated at `points` evenly spaced centers in [0, 1].
struct ResponseCurve {
  std::vector<double> centers;
  std::vector<double> means;
  std::vector<std::size_t> counts;
};
ResponseCurve sliding_response(const std::vector<double> &inputs,
                               const std::vector<double> &states,
                               double width = 0.02, std::size_t points = 101);

} // namespace vcselrc
