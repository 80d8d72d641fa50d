// vcselrc: simulate, sweep, ingest, report, selftest.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "vcselrc/config.hpp"
#include "vcselrc/experiment.hpp"
#include "vcselrc/readout.hpp"
#include "vcselrc/report.hpp"
#include "vcselrc/seeding.hpp"
#include "vcselrc/trace_io.hpp"

using namespace vcselrc;

namespace {

// Every config field becomes --section.key on the given subcommand.
struct ConfigFlags {
  std::string path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App *app) {
    app->add_option("-c,--config", path, "config file")->check(CLI::ExistingFile);
    for (const auto &key : config_keys())
      app->add_option("--" + key, overrides[key])->group("Config fields");
  }

  RunConfig resolve() const {
    RunConfig config = path.empty() ? default_config() : load_config(path);
    for (const auto &[key, value] : overrides)
      if (!value.empty()) set_config_value(config, key, value);
    return config;
  }
};

void print_records(std::ostream &out, const std::vector<TaskRecord> &records,
                   double epsilon, double detuning) {
  out << "task,m_or_k,epsilon,detuning_nm,metric,value,baseline,fold_std\n";
  for (const auto &r : records) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%zu,%.17g,%.17g,%s,%.17g,%.17g,%.17g\n",
                  r.task.c_str(), r.m_or_k, epsilon, detuning, r.metric.c_str(), r.value,
                  r.baseline, r.fold_std);
    out << line;
  }
}

EvaluationOptions evaluation_options(const RunConfig &config) {
  EvaluationOptions eval;
  eval.cv.alpha = config.readout.alpha;
  eval.cv.bias = config.readout.bias;
  eval.folds = config.readout.folds;
  eval.guard = config.readout.guard;
  eval.also_trained_threshold = config.readout.trained_threshold;
  eval.also_without_bias = config.readout.without_bias;
  return eval;
}

std::vector<TaskRecord> score(const RunConfig &config, const StateMatrix &states,
                              const SymbolSequence &seq) {
  std::vector<TaskRecord> records;
  const auto eval = evaluation_options(config);
  for (const auto &task : config.tasks) {
    if (input_kind(task.kind) != seq.kind) continue;
    for (auto &r : evaluate_task(states, seq.values, task, eval)) records.push_back(std::move(r));
  }
  return records;
}

SequenceKind parse_kind(const std::string &text) {
  if (text == "uniform") return SequenceKind::uniform;
  if (text == "binary") return SequenceKind::binary;
  throw std::invalid_argument("sequence kind must be uniform or binary");
}

int check(const std::string &name, bool ok, const std::string &detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
  return ok ? 0 : 1;
}

int selftest() {
  int failures = 0;
  char buf[128];

  failures += check("hr baseline", trivial_baseline(TaskKind::header_recognition, 3) == 0.125,
                    "2^-3");
  std::snprintf(buf, sizeof buf, "%.15f", trivial_baseline(TaskKind::dac, 2));
  failures += check("dac baseline",
                    std::abs(trivial_baseline(TaskKind::dac, 2) - std::sqrt(5.0 / 36.0)) < 1e-12, buf);

  RunConfig config = default_config();
  config.sequence_length = 400;
  config.sampling.shots = 16;
  config.simulation.surrogate_shape = SurrogateShape::identity;
  config.simulation.surrogate_coupling_gain = 1.0;
  const LatticeTopology line = delay_line(6);
  const StateMatrix states =
      synthesize_run(line, make_laser_params(line, config.heterogeneity, 1),
                     sweep_sequence(config, SequenceKind::uniform), config.sampling,
                     RunMode::surrogate, 0.2, 0.0, 3, config.simulation);
  const auto records = evaluate_task(states, sweep_sequence(config, SequenceKind::uniform).values,
                                     parse_task("memory:3"), evaluation_options(config));
  std::snprintf(buf, sizeof buf, "M1 = %.4f", records.front().value);
  failures += check("delay-line memory", records.front().value > 0.99, buf);

  const Device device = build_device(config);
  const SymbolSequence seq = sweep_sequence(config, SequenceKind::binary);
  const RecordedRun run = record_run(device.topology, device.params, seq, config.sampling,
                                     RunMode::reflection, 0.2, 0.0, 7, device.settings);
  std::stringstream file;
  write_trace_file(file, {run.traces, config.sampling.sample_rate, config.sampling.symbol_rate,
                          run.symbols, run.symbol_seed, run.node_ids});
  const TraceFile back = parse_trace_file(file.str());
  failures += check("trace round trip", back.traces == run.traces, "bit-exact");

  std::cout << (failures ? "selftest failed\n" : "selftest passed\n");
  return failures ? 1 : 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Simulated VCSEL-array reservoir computer: sweeps, trace scoring, figures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  ConfigFlags sim_flags, sweep_flags, ingest_flags;

  auto *simulate = app.add_subcommand("simulate", "synthesize traces for one operating point");
  sim_flags.attach(simulate);
  double sim_eps = 0.2, sim_dl = 0.0;
  std::string sim_mode = "response", sim_kind = "binary", sim_out = "traces.csv";
  bool sim_score = false;
  simulate->add_option("--epsilon", sim_eps, "injected power ratio");
  simulate->add_option("--detuning", sim_dl, "detuning in nm");
  simulate->add_option("--mode", sim_mode, "response, reflection or surrogate");
  simulate->add_option("--kind", sim_kind, "input sequence: uniform or binary");
  simulate->add_option("-o,--out", sim_out, "trace file to write");
  simulate->add_flag("--score", sim_score, "also score the configured tasks");

  auto *sweep = app.add_subcommand("sweep", "run the (epsilon, detuning, mode) grid");
  sweep_flags.attach(sweep);
  bool sweep_quiet = false;
  sweep->add_flag("-q,--quiet", sweep_quiet, "no progress output");

  auto *ingest = app.add_subcommand("ingest", "score a recorded trace file");
  ingest_flags.attach(ingest);
  std::string ingest_path, ingest_inputs, ingest_kind = "binary", ingest_out, ingest_weights;
  double ingest_eps = std::nan(""), ingest_dl = std::nan("");
  ingest->add_option("traces", ingest_path, "trace file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--inputs", ingest_inputs,
                     "input symbols, one per line (default: regenerate from the file seed)");
  ingest->add_option("--kind", ingest_kind, "sequence kind when regenerating: uniform or binary");
  ingest->add_option("--epsilon", ingest_eps, "label for the results rows");
  ingest->add_option("--detuning", ingest_dl, "label for the results rows");
  ingest->add_option("-o,--out", ingest_out, "results CSV (default stdout)");
  ingest->add_option("--weights", ingest_weights,
                     "write readout weights trained on all rows for the first task");

  auto *report = app.add_subcommand("report", "emit figure tables from a results directory");
  std::string report_dir = "results", report_out;
  report->add_option("dir", report_dir, "results directory")->check(CLI::ExistingDirectory);
  report->add_option("-o,--out", report_out, "where to write figures (default: dir)");

  auto *self = app.add_subcommand("selftest", "quick end-to-end sanity checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const RunConfig config = sim_flags.resolve();
      const Device device = build_device(config);
      const GridPoint point{sim_eps, sim_dl, parse_run_mode(sim_mode)};
      const SymbolSequence seq = sweep_sequence(config, parse_kind(sim_kind));
      const std::uint64_t seed =
          derive_seed(point_seed(config.master_seed, point), {static_cast<std::uint64_t>(seq.kind)});
      const RecordedRun run = record_run(device.topology, device.params, seq, config.sampling,
                                         point.mode, point.epsilon, point.detuning_nm, seed,
                                         device.settings);
      write_trace_file(sim_out, {run.traces, config.sampling.sample_rate,
                                 config.sampling.symbol_rate, run.symbols, run.symbol_seed,
                                 run.node_ids});
      std::cerr << "wrote " << run.traces.rows() << " samples x " << run.traces.cols()
                << " nodes to " << sim_out << '\n';
      if (sim_score) {
        const StateMatrix states =
            extract_states(run.traces, config.sampling, run.node_ids, run.symbol_seed);
        print_records(std::cout, score(config, states, seq), sim_eps, sim_dl);
      }
      return 0;
    }

    if (*sweep) {
      const RunConfig config = sweep_flags.resolve();
      const auto total = enumerate_grid(config).size();
      std::size_t done = 0;
      const SweepResult result = run_experiment(config, [&](const PointResult &p) {
        ++done;
        if (!sweep_quiet)
          std::cerr << '[' << done << '/' << total << "] " << to_string(p.point.mode)
                    << " eps=" << p.point.epsilon << " dl=" << p.point.detuning_nm
                    << (p.error ? " FAILED: " + *p.error : std::string(" ok")) << '\n';
      });
      write_results(config.output_dir, result, config);
      emit_figures(result, config.output_dir);
      std::cout << summarize(result);
      return result.any_failed() ? 1 : 0;
    }

    if (*ingest) {
      const RunConfig config = ingest_flags.resolve();
      const StateMatrix states = ingest_traces(ingest_path, config.sampling);
      const TraceFile header = read_trace_file(ingest_path);
      SymbolSequence seq;
      if (!ingest_inputs.empty()) {
        std::ifstream in(ingest_inputs);
        if (!in) throw std::runtime_error("cannot read " + ingest_inputs);
        double v;
        while (in >> v) seq.values.push_back(v);
        seq.kind = SequenceKind::binary;
        for (double x : seq.values)
          if (x != 0.0 && x != 1.0) seq.kind = SequenceKind::uniform;
      } else {
        seq = generate_sequence(parse_kind(ingest_kind), header.symbols, header.seed);
      }
      if (seq.values.size() != header.symbols)
        throw std::runtime_error("input sequence has " + std::to_string(seq.values.size()) +
                                 " symbols, trace file has " + std::to_string(header.symbols));
      const auto records = score(config, states, seq);
      if (ingest_out.empty()) {
        print_records(std::cout, records, ingest_eps, ingest_dl);
      } else {
        std::ofstream out(ingest_out);
        print_records(out, records, ingest_eps, ingest_dl);
      }
      if (!ingest_weights.empty()) {
        for (const auto &task : config.tasks) {
          if (input_kind(task.kind) != seq.kind || task.kind == TaskKind::header_recognition)
            continue;
          Eigen::VectorXd full = task.kind == TaskKind::memory ? target_memory(seq.values, 1)
                                 : task.kind == TaskKind::xor_parity
                                     ? target_xor(seq.values, task.m_or_k)
                                     : target_dac(seq.values, task.m_or_k);
          const Eigen::VectorXd y = align_targets(full, states);
          std::vector<Eigen::Index> rows;
          for (Eigen::Index i = 0; i < y.size(); ++i)
            if (!std::isnan(y(i))) rows.push_back(i);
          ReadoutModel model = ridge_fit(states.entries(rows, Eigen::all), y(rows),
                                         config.readout.alpha, config.readout.bias);
          if (task.kind == TaskKind::xor_parity) model.threshold = 0.5;
          std::ofstream out(ingest_weights);
          write_weights_csv(out, model, states.node_ids);
          std::cerr << "weights for " << format_task(task) << " written to " << ingest_weights
                    << '\n';
          break;
        }
      }
      return 0;
    }

    if (*report) {
      const SweepResult result = read_results(report_dir);
      for (const auto &path : emit_figures(result, report_out.empty() ? report_dir : report_out))
        std::cerr << "wrote " << path.string() << '\n';
      std::cout << summarize(result);
      return result.any_failed() ? 1 : 0;
    }

    if (*self) return selftest();
  } catch (const TraceFormatError &e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
