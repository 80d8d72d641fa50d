#include "vcselrc/signal_chain.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "vcselrc/seeding.hpp"

namespace vcselrc {

SymbolSequence generate_sequence(SequenceKind kind, std::size_t length,
                                 std::uint64_t seed) {
  SymbolSequence seq;
  seq.kind = kind;
  seq.seed = seed;
  seq.values.resize(length);
  std::mt19937_64 rng(seed);
  for (auto &v : seq.values) {
    const std::uint64_t x = rng();
    v = kind == SequenceKind::binary
            ? static_cast<double>(x >> 63)
            : static_cast<double>(x >> 11) * 0x1.0p-53;
  }
  return seq;
}

std::size_t SamplingConfig::samples_per_symbol() const {
  if (!(symbol_rate > 0.0) || !(sample_rate > 0.0))
    throw std::invalid_argument("sample and symbol rates must be positive");
  const double ratio = sample_rate / symbol_rate;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * rounded) {
    std::ostringstream msg;
    msg << "sample rate / symbol rate = " << ratio << " is not an integer";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

double SamplingConfig::symbol_period() const {
  return static_cast<double>(samples_per_symbol()) / sample_rate;
}

void SamplingConfig::validate() const {
  if (discard >= samples_per_symbol())
    throw std::invalid_argument(
        "discarded samples must be fewer than samples per symbol");
  if (shots == 0) throw std::invalid_argument("at least one shot is required");
  if (detection_noise < 0.0)
    throw std::invalid_argument("detection noise must be non-negative");
}

double mzm_transfer(double voltage) {
  const double s = std::sin(0.5 * std::numbers::pi * voltage);
  return s * s;
}

MzmWaveform encode_mzm(const std::vector<double> &values, double depth) {
  if (!(depth > 0.0) || depth > 1.0)
    throw std::invalid_argument("modulation depth must lie in (0, 1]");
  MzmWaveform wave;
  wave.depth = depth;
  wave.voltages.reserve(values.size());
  wave.levels.reserve(values.size());
  for (double r : values) {
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("symbol values must lie in [0, 1]");
    const double target = 1.0 - depth + depth * r;
    const double v = 2.0 / std::numbers::pi * std::asin(std::sqrt(target));
    wave.voltages.push_back(v);
    wave.levels.push_back(mzm_transfer(v));
  }
  return wave;
}

Eigen::MatrixXd detect_and_average(const ShotSource &source,
                                   const SamplingConfig &config,
                                   std::uint64_t seed) {
  if (config.shots == 0)
    throw std::invalid_argument("at least one shot is required");
  Eigen::MatrixXd sum = source(0, derive_seed(seed, {0}));
  for (std::size_t shot = 1; shot < config.shots; ++shot) {
    const Eigen::MatrixXd next = source(shot, derive_seed(seed, {shot}));
    if (next.rows() != sum.rows() || next.cols() != sum.cols())
      throw std::invalid_argument("shots differ in shape");
    sum += next;
  }
  return sum / static_cast<double>(config.shots);
}

ShotSource noisy_detector(Eigen::MatrixXd clean, double relative_noise) {
  Eigen::RowVectorXd scale = clean.colwise().maxCoeff() * relative_noise;
  if (clean.rows() == 0) scale.setZero(clean.cols());
  return [clean = std::move(clean), scale](std::size_t,
                                           std::uint64_t shot_seed) {
    if (scale.isZero(0.0)) return clean;
    std::mt19937_64 rng(shot_seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd shot = clean;
    for (Eigen::Index j = 0; j < shot.cols(); ++j) {
      const double s = scale(j);
      for (Eigen::Index k = 0; k < shot.rows(); ++k) shot(k, j) += s * normal(rng);
    }
    return shot;
  };
}

StateMatrix extract_states(const Eigen::MatrixXd &sampled,
                           const SamplingConfig &config,
                           std::vector<std::size_t> node_ids,
                           std::uint64_t symbol_seed) {
  const std::size_t sps = config.samples_per_symbol();
  if (config.discard >= sps)
    throw std::invalid_argument(
        "discarded samples must be fewer than samples per symbol");
  const auto samples = static_cast<std::size_t>(sampled.rows());
  if (samples % sps != 0) {
    std::ostringstream msg;
    msg << "trace of " << samples << " samples is not a whole number of "
        << sps << "-sample symbols";
    throw LengthMismatch(msg.str());
  }
  if (node_ids.size() != static_cast<std::size_t>(sampled.cols()))
    throw std::invalid_argument("node id list does not match trace columns");

  const std::size_t slots =
      samples >= config.alignment_offset
          ? (samples - config.alignment_offset) / sps
          : 0;
  const std::size_t first = std::min(config.warmup_symbols, slots);
  const std::size_t skip = config.discard;
  const double inv = 1.0 / static_cast<double>(sps - skip);

  StateMatrix states;
  states.node_ids = std::move(node_ids);
  states.symbol_seed = symbol_seed;
  states.first_symbol = first;
  states.entries.resize(static_cast<Eigen::Index>(slots - first),
                        sampled.cols());
  for (std::size_t n = first; n < slots; ++n) {
    const std::size_t start = config.alignment_offset + n * sps;
    for (Eigen::Index j = 0; j < sampled.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k = skip; k < sps; ++k)
        sum += sampled(static_cast<Eigen::Index>(start + k), j);
      states.entries(static_cast<Eigen::Index>(n - first), j) = sum * inv;
    }
  }
  return states;
}

std::string to_string(RunMode mode) {
  switch (mode) {
  case RunMode::response: return "response";
  case RunMode::reflection: return "reflection";
  case RunMode::surrogate: return "surrogate";
  }
  return "unknown";
}

RunMode parse_run_mode(const std::string &text) {
  if (text == "response") return RunMode::response;
  if (text == "reflection") return RunMode::reflection;
  if (text == "surrogate") return RunMode::surrogate;
  throw std::invalid_argument("unknown run mode '" + text + "'");
}

namespace {

double mean_free_running(const LatticeTopology &topology,
                         const LaserParams &params) {
  double sum = 0.0;
  std::size_t n = 0;
  for (auto j : topology.active_nodes()) {
    sum += params.free_running_intensity(params.pump_rate.at(j));
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Shifts a trace so the symbol clock starts `offset` samples in, padding the
/// head with the first row and the tail with the last row up to whole slots.
Eigen::MatrixXd apply_latency(const Eigen::MatrixXd &trace, std::size_t offset,
                              std::size_t sps) {
  const auto body = static_cast<std::size_t>(trace.rows());
  std::size_t total = body + offset;
  total = (total + sps - 1) / sps * sps;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(total), trace.cols());
  if (body == 0) {
    out.setZero();
    return out;
  }
  for (std::size_t k = 0; k < offset; ++k) out.row(static_cast<Eigen::Index>(k)) = trace.row(0);
  out.middleRows(static_cast<Eigen::Index>(offset), trace.rows()) = trace;
  for (std::size_t k = offset + body; k < total; ++k)
    out.row(static_cast<Eigen::Index>(k)) = trace.row(trace.rows() - 1);
  return out;
}

} // namespace

Eigen::MatrixXd clean_traces(const LatticeTopology &topology,
                             const LaserParams &params,
                             const SymbolSequence &sequence,
                             const SamplingConfig &config, RunMode mode,
                             double power_ratio, double detuning_nm,
                             std::uint64_t seed,
                             const SimulationSettings &settings) {
  config.validate();
  if (power_ratio < 0.0)
    throw std::invalid_argument("power ratio must be non-negative");
  const std::size_t sps = config.samples_per_symbol();
  const double sample_interval = 1.0 / config.sample_rate;
  const MzmWaveform wave = encode_mzm(sequence.values, settings.modulation_depth);

  InjectionField injection;
  injection.levels = wave.levels;
  injection.symbol_period = config.symbol_period();
  injection.mean_level = wave.mean_level();
  injection.detuning = detuning_from_wavelength(detuning_nm);
  injection.power_ratio = power_ratio;

  ReflectionOptions reflection;
  reflection.tau_ext = settings.dynamics.tau_ext;
  reflection.reflectivity = settings.reflectivity;
  reflection.reference_intensity = mean_free_running(topology, params);

  const auto n = static_cast<Eigen::Index>(topology.size());
  const auto samples = static_cast<Eigen::Index>(sequence.values.size() * sps);
  Eigen::MatrixXd raw;
  switch (mode) {
  case RunMode::response: {
    DynamicsOptions opts = settings.dynamics;
    opts.duration = static_cast<double>(sequence.values.size()) *
                    injection.symbol_period;
    const double per_sample = sample_interval / opts.dt;
    opts.output_every = static_cast<std::size_t>(std::llround(per_sample));
    if (opts.output_every == 0 ||
        std::abs(per_sample - static_cast<double>(opts.output_every)) >
            1e-6 * per_sample)
      throw std::invalid_argument(
          "sample interval is not a whole number of integration steps");
    opts.noise_seed = derive_seed(seed, {tag(SeedStream::dynamics_noise)});
    raw = integrate_network(topology, params, injection, opts);
    if (settings.response_includes_reflection)
      raw += reflection_traces(injection, topology, sample_interval, reflection);
    break;
  }
  case RunMode::reflection:
    raw = reflection_traces(injection, topology, sample_interval, reflection);
    break;
  case RunMode::surrogate: {
    const auto shapes =
        settings.surrogate_shape == SurrogateShape::identity
            ? identity_nonlinearities(topology.size())
            : saturating_nonlinearities(topology.size(), settings.surrogate_seed);
    raw.setZero(samples, n);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (std::size_t s = 0; s < sequence.values.size(); ++s) {
      x = surrogate_step(topology, shapes, settings.surrogate_coupling_gain, x,
                         wave.levels[s]);
      for (std::size_t k = 0; k < sps; ++k)
        raw.row(static_cast<Eigen::Index>(s * sps + k)) = x.transpose();
    }
    break;
  }
  }
  return apply_latency(raw, config.alignment_offset, sps);
}

RecordedRun record_run(const LatticeTopology &topology,
                       const LaserParams &params,
                       const SymbolSequence &sequence,
                       const SamplingConfig &config, RunMode mode,
                       double power_ratio, double detuning_nm,
                       std::uint64_t seed, const SimulationSettings &settings) {
  const Eigen::MatrixXd all = clean_traces(topology, params, sequence, config,
                                           mode, power_ratio, detuning_nm, seed,
                                           settings);
  RecordedRun run;
  run.node_ids = topology.recorded_nodes();
  run.symbol_seed = sequence.seed;
  run.symbols = static_cast<std::size_t>(all.rows()) / config.samples_per_symbol();
  Eigen::MatrixXd clean(all.rows(), static_cast<Eigen::Index>(run.node_ids.size()));
  for (std::size_t c = 0; c < run.node_ids.size(); ++c)
    clean.col(static_cast<Eigen::Index>(c)) =
        all.col(static_cast<Eigen::Index>(run.node_ids[c]));
  run.traces = detect_and_average(
      noisy_detector(std::move(clean), config.detection_noise), config,
      derive_seed(seed, {tag(SeedStream::detection_noise)}));
  return run;
}

StateMatrix synthesize_run(const LatticeTopology &topology,
                           const LaserParams &params,
                           const SymbolSequence &sequence,
                           const SamplingConfig &config, RunMode mode,
                           double power_ratio, double detuning_nm,
                           std::uint64_t seed,
                           const SimulationSettings &settings) {
  RecordedRun run = record_run(topology, params, sequence, config, mode,
                               power_ratio, detuning_nm, seed, settings);
  return extract_states(run.traces, config, std::move(run.node_ids),
                        sequence.seed);
}

ResponseCurve sliding_response(const std::vector<double> &inputs,
                               const std::vector<double> &states, double width,
                               std::size_t points) {
  if (inputs.size() != states.size())
    throw std::invalid_argument("inputs and states differ in length");
  if (points < 2) throw std::invalid_argument("need at least two points");
  ResponseCurve curve;
  for (std::size_t p = 0; p < points; ++p) {
    const double c = static_cast<double>(p) / static_cast<double>(points - 1);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (std::abs(inputs[i] - c) <= 0.5 * width) {
        sum += states[i];
        ++count;
      }
    }
    curve.centers.push_back(c);
    curve.means.push_back(count ? sum / static_cast<double>(count) : std::nan(""));
    curve.counts.push_back(count);
  }
  return curve;
}

} // namespace vcselrc
