#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vcselrc/dynamics.hpp"
#include "vcselrc/signal_chain.hpp"
#include "vcselrc/tasks.hpp"
#include "vcselrc/topology.hpp"

namespace vcselrc {

inline constexpr int kConfigFormatVersion = 1;

struct TopologySettings {
  std::size_t rows = 5;
  std::size_t cols = 5;
  WeightProfile weights;
  InputProfile input;
  std::vector<std::size_t> inactive{24};   // corner (4,4)
  std::vector<std::size_t> unrecorded{12}; // center (2,2)
};

struct ReadoutSettings {
  double alpha = 0.1;
  bool bias = true;
  std::size_t folds = 5;
  std::size_t guard = 10;
  bool trained_threshold = true;
  bool without_bias = false;
};

/// Everything a run depends on. A run is reproducible from this and the
/// master seed alone.
struct RunConfig {
  int format_version = kConfigFormatVersion;
  std::uint64_t master_seed = 1;
  std::string output_dir = "results";
  std::size_t workers = 1;

  TopologySettings topology;
  LaserParams laser; // per-node vectors are derived, not configured
  Heterogeneity heterogeneity;
  SimulationSettings simulation;
  SamplingConfig sampling;
  std::size_t sequence_length = 1000;
  ReadoutSettings readout;
  std::vector<TaskSpec> tasks;

  std::vector<double> epsilons{0.20, 0.13, 0.05, 0.02};
  std::vector<double> detunings_nm{0.0};
  std::vector<RunMode> modes{RunMode::response, RunMode::reflection};
};

/// Defaults plus the benchmark task list: memory up to k = 10, HR and XOR
/// for m = 2..4 and 2..3, DAC for m = 1..4.
RunConfig default_config();

/// Plain-text `[section]` / `key = value` form with every field spelled out.
std::string serialize_config(const RunConfig &config);

/// Inverse of serialize_config. Missing keys keep their defaults; unknown
/// sections or keys and a missing or unsupported format_version are errors.
RunConfig parse_config(const std::string &text);

RunConfig load_config(const std::filesystem::path &path);

/// 64-bit FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const RunConfig &config);

/// "section.key" names of every configurable field, in file order.
std::vector<std::string> config_keys();

/// Sets one field from its text form, as it would appear in a config file.
void set_config_value(RunConfig &config, const std::string &key, const std::string &value);

std::string format_task(const TaskSpec &task);
TaskSpec parse_task(const std::string &text);

} // namespace vcselrc
