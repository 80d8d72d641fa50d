#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vcselrc/config.hpp"

namespace vcselrc {

struct GridPoint {
  double epsilon = 0.0;
  double detuning_nm = 0.0;
  RunMode mode = RunMode::response;
};

struct PointResult {
  GridPoint point;
  std::vector<TaskRecord> records;
  std::optional<std::string> error; // set when the point failed
};

struct Provenance {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string code_version;
};

struct SweepResult {
  std::vector<PointResult> points; // grid order
  Provenance provenance;

  [[nodiscard]] bool any_failed() const;
};

/// The fixed physical system shared by every grid point.
struct Device {
  LatticeTopology topology;
  LaserParams params;
  SimulationSettings settings;
};

Device build_device(const RunConfig &config);

/// Modes outermost, then detunings, then epsilons, each in config order.
std::vector<GridPoint> enumerate_grid(const RunConfig &config);

/// Seed for one grid point, keyed on its coordinates (not its position in
/// the grid) so a point reproduces in isolation.
std::uint64_t point_seed(std::uint64_t master_seed, const GridPoint &point);

/// Input sequences shared by all points of a sweep.
SymbolSequence sweep_sequence(const RunConfig &config, SequenceKind kind);

/// Synthesizes the states for one point and scores every configured task.
/// Throws on failure.
PointResult run_point(const RunConfig &config, const Device &device,
                      const GridPoint &point);

/// Runs the whole grid on config.workers threads. A failing point is
/// recorded with its error and the sweep carries on.
SweepResult run_experiment(const RunConfig &config,
                           const std::function<void(const PointResult &)> &progress = {});

/// results_<mode>.csv per mode, failures.csv, provenance.txt, config.ini.
void write_results(const std::filesystem::path &dir, const SweepResult &result,
                   const RunConfig &config);

/// Reads what write_results wrote (records and failures; grid order is
/// recovered from the files).
SweepResult read_results(const std::filesystem::path &dir);

/// Reads a trace file and extracts states with the rates from its header and
/// the discard/offset/warmup rules from `config`.
StateMatrix ingest_traces(const std::filesystem::path &path, SamplingConfig config);

std::string code_version();

} // namespace vcselrc
