#include "vcselrc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "vcselrc/seeding.hpp"
#include "vcselrc/trace_io.hpp"

#ifndef VCSELRC_VERSION
#define VCSELRC_VERSION "unknown"
#endif

namespace vcselrc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Errors go in a single CSV cell.
std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

const char *kResultsHeader = "task,m_or_k,epsilon,detuning_nm,metric,value,baseline,fold_std";

} // namespace

bool SweepResult::any_failed() const {
  return std::any_of(points.begin(), points.end(),
                     [](const PointResult &p) { return p.error.has_value(); });
}

std::string code_version() { return std::string("vcselrc ") + VCSELRC_VERSION; }

Device build_device(const RunConfig &config) {
  const auto &t = config.topology;
  Device device{build_lattice(t.rows, t.cols, t.weights, t.input, t.inactive, t.unrecorded),
                {}, config.simulation};
  device.params = make_laser_params(device.topology, config.heterogeneity,
                                    derive_seed(config.master_seed, {tag(SeedStream::heterogeneity)}),
                                    config.laser);
  if (device.settings.surrogate_seed == 0)
    device.settings.surrogate_seed = derive_seed(config.master_seed, {tag(SeedStream::heterogeneity), 1});
  return device;
}

std::vector<GridPoint> enumerate_grid(const RunConfig &config) {
  std::vector<GridPoint> grid;
  for (RunMode mode : config.modes)
    for (double dl : config.detunings_nm)
      for (double eps : config.epsilons) grid.push_back({eps, dl, mode});
  return grid;
}

std::uint64_t point_seed(std::uint64_t master_seed, const GridPoint &point) {
  return derive_seed(master_seed, {0x706f696e74ULL, static_cast<std::uint64_t>(point.mode),
                                   std::bit_cast<std::uint64_t>(point.epsilon),
                                   std::bit_cast<std::uint64_t>(point.detuning_nm)});
}

SymbolSequence sweep_sequence(const RunConfig &config, SequenceKind kind) {
  const auto stream = kind == SequenceKind::uniform ? SeedStream::uniform_sequence
                                                    : SeedStream::binary_sequence;
  return generate_sequence(kind, config.sequence_length,
                           derive_seed(config.master_seed, {tag(stream)}));
}

PointResult run_point(const RunConfig &config, const Device &device,
                      const GridPoint &point) {
  PointResult result;
  result.point = point;

  EvaluationOptions eval;
  eval.cv.alpha = config.readout.alpha;
  eval.cv.bias = config.readout.bias;
  eval.folds = config.readout.folds;
  eval.guard = config.readout.guard;
  eval.also_trained_threshold = config.readout.trained_threshold;
  eval.also_without_bias = config.readout.without_bias;

  const std::uint64_t seed = point_seed(config.master_seed, point);
  std::map<SequenceKind, std::pair<SymbolSequence, StateMatrix>> runs;
  for (const auto &task : config.tasks) {
    const SequenceKind kind = input_kind(task.kind);
    auto it = runs.find(kind);
    if (it == runs.end()) {
      SymbolSequence seq = sweep_sequence(config, kind);
      StateMatrix states = synthesize_run(device.topology, device.params, seq, config.sampling,
                                          point.mode, point.epsilon, point.detuning_nm,
                                          derive_seed(seed, {static_cast<std::uint64_t>(kind)}),
                                          device.settings);
      it = runs.emplace(kind, std::make_pair(std::move(seq), std::move(states))).first;
    }
    auto records = evaluate_task(it->second.second, it->second.first.values, task, eval);
    for (auto &r : records) result.records.push_back(std::move(r));
  }
  return result;
}

SweepResult run_experiment(const RunConfig &config,
                           const std::function<void(const PointResult &)> &progress) {
  SweepResult sweep;
  sweep.provenance = {config_hash(config), config.master_seed, code_version()};
  const auto grid = enumerate_grid(config);
  sweep.points.resize(grid.size());

  Device device = build_device(config);
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      PointResult res;
      try {
        res = run_point(config, device, grid[i]);
      } catch (const std::exception &e) {
        res = PointResult{grid[i], {}, std::string(e.what())};
      }
      sweep.points[i] = std::move(res);
      if (progress) {
        std::lock_guard lock(report);
        progress(sweep.points[i]);
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(grid.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return sweep;
}

void write_results(const std::filesystem::path &dir, const SweepResult &result,
                   const RunConfig &config) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string &name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };

  std::vector<RunMode> modes;
  for (const auto &p : result.points)
    if (std::find(modes.begin(), modes.end(), p.point.mode) == modes.end())
      modes.push_back(p.point.mode);

  for (RunMode mode : modes) {
    auto out = open("results_" + to_string(mode) + ".csv");
    out << kResultsHeader << '\n';
    for (const auto &p : result.points) {
      if (p.point.mode != mode || p.error) continue;
      for (const auto &r : p.records)
        out << r.task << ',' << r.m_or_k << ',' << fmt(p.point.epsilon) << ','
            << fmt(p.point.detuning_nm) << ',' << r.metric << ',' << fmt(r.value) << ','
            << fmt(r.baseline) << ',' << fmt(r.fold_std) << '\n';
    }
  }

  auto failures = open("failures.csv");
  failures << "mode,epsilon,detuning_nm,error\n";
  for (const auto &p : result.points)
    if (p.error)
      failures << to_string(p.point.mode) << ',' << fmt(p.point.epsilon) << ','
               << fmt(p.point.detuning_nm) << ',' << sanitize(*p.error) << '\n';

  auto prov = open("provenance.txt");
  prov << "config_hash=" << result.provenance.config_hash << '\n'
       << "master_seed=" << result.provenance.master_seed << '\n'
       << "code_version=" << result.provenance.code_version << '\n';

  open("config.ini") << serialize_config(config);
}

SweepResult read_results(const std::filesystem::path &dir) {
  SweepResult sweep;
  std::map<std::tuple<int, double, double>, std::size_t> index;
  auto slot = [&](RunMode mode, double eps, double dl) -> PointResult & {
    const auto key = std::make_tuple(static_cast<int>(mode), dl, -eps);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, sweep.points.size()).first;
      sweep.points.push_back(PointResult{{eps, dl, mode}, {}, std::nullopt});
    }
    return sweep.points[it->second];
  };

  if (std::ifstream prov(dir / "provenance.txt"); prov) {
    std::string line;
    while (std::getline(prov, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key == "config_hash") sweep.provenance.config_hash = value;
      else if (key == "master_seed") sweep.provenance.master_seed = std::stoull(value);
      else if (key == "code_version") sweep.provenance.code_version = value;
    }
  }

  for (RunMode mode : {RunMode::response, RunMode::reflection, RunMode::surrogate}) {
    std::ifstream in(dir / ("results_" + to_string(mode) + ".csv"));
    if (!in) continue;
    std::string line;
    std::getline(in, line);
    if (line != kResultsHeader)
      throw std::runtime_error("unexpected header in results_" + to_string(mode) + ".csv");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() != 8) throw std::runtime_error("malformed results row: " + line);
      TaskRecord r;
      r.task = cells[0];
      r.m_or_k = std::stoull(cells[1]);
      r.metric = cells[4];
      r.value = std::stod(cells[5]);
      r.baseline = std::stod(cells[6]);
      r.fold_std = std::stod(cells[7]);
      slot(mode, std::stod(cells[2]), std::stod(cells[3])).records.push_back(std::move(r));
    }
  }

  if (std::ifstream in(dir / "failures.csv"); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() < 4) throw std::runtime_error("malformed failures row: " + line);
      slot(parse_run_mode(cells[0]), std::stod(cells[1]), std::stod(cells[2])).error = cells[3];
    }
  }

  // modes, then detuning ascending, then epsilon descending
  std::vector<PointResult> sorted;
  for (const auto &[key, i] : index) sorted.push_back(std::move(sweep.points[i]));
  sweep.points = std::move(sorted);
  return sweep;
}

StateMatrix ingest_traces(const std::filesystem::path &path, SamplingConfig config) {
  TraceFile file = read_trace_file(path);
  config.sample_rate = file.sample_rate;
  config.symbol_rate = file.symbol_rate;
  return extract_states(file.traces, config, std::move(file.node_ids), file.seed);
}

} // namespace vcselrc
