#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vcselrc/config.hpp"
#include "vcselrc/experiment.hpp"
#include "vcselrc/readout.hpp"
#include "vcselrc/report.hpp"
#include "vcselrc/seeding.hpp"
#include "vcselrc/trace_io.hpp"

namespace py = pybind11;
using namespace vcselrc;

namespace {

py::dict record_dict(const TaskRecord &r) {
  py::dict d;
  d["task"] = r.task;
  d["m_or_k"] = r.m_or_k;
  d["metric"] = r.metric;
  d["value"] = r.value;
  d["baseline"] = r.baseline;
  d["fold_std"] = r.fold_std;
  d["per_fold"] = r.per_fold;
  return d;
}

py::list point_records(const PointResult &p) {
  py::list out;
  for (const auto &r : p.records) {
    py::dict d = record_dict(r);
    d["epsilon"] = p.point.epsilon;
    d["detuning_nm"] = p.point.detuning_nm;
    d["mode"] = to_string(p.point.mode);
    out.append(d);
  }
  return out;
}

SequenceKind kind_from(const std::string &s) {
  if (s == "uniform") return SequenceKind::uniform;
  if (s == "binary") return SequenceKind::binary;
  throw std::invalid_argument("kind must be 'uniform' or 'binary'");
}

} // namespace

PYBIND11_MODULE(_vcselrc, m) {
  m.doc() = "Simulated VCSEL-array reservoir computer";
  m.attr("__version__") = code_version();

  py::register_exception<TraceFormatError>(m, "TraceFormatError", PyExc_ValueError);

  py::class_<RunConfig>(m, "Config")
      .def(py::init(&default_config))
      .def_static("from_ini", &parse_config, py::arg("text"))
      .def_static("load", [](const std::string &path) { return load_config(path); })
      .def("to_ini", &serialize_config)
      .def("hash", &config_hash)
      .def("set", &set_config_value, py::arg("key"), py::arg("value"))
      .def_static("keys", &config_keys)
      .def_readwrite("master_seed", &RunConfig::master_seed)
      .def_readwrite("sequence_length", &RunConfig::sequence_length)
      .def_readwrite("workers", &RunConfig::workers)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("epsilons", &RunConfig::epsilons)
      .def_readwrite("detunings_nm", &RunConfig::detunings_nm)
      .def_property(
          "tasks",
          [](const RunConfig &c) {
            std::vector<std::string> out;
            for (const auto &t : c.tasks) out.push_back(format_task(t));
            return out;
          },
          [](RunConfig &c, const std::vector<std::string> &tasks) {
            c.tasks.clear();
            for (const auto &t : tasks) c.tasks.push_back(parse_task(t));
          })
      .def_property(
          "modes",
          [](const RunConfig &c) {
            std::vector<std::string> out;
            for (auto mode : c.modes) out.push_back(to_string(mode));
            return out;
          },
          [](RunConfig &c, const std::vector<std::string> &modes) {
            c.modes.clear();
            for (const auto &mode : modes) c.modes.push_back(parse_run_mode(mode));
          });

  m.def(
      "sweep",
      [](const RunConfig &config, const std::string &output_dir) {
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(config);
          if (!output_dir.empty()) {
            write_results(output_dir, result, config);
            emit_figures(result, output_dir);
          }
        }
        py::list records, failures;
        for (const auto &p : result.points) {
          if (p.error) {
            py::dict f;
            f["epsilon"] = p.point.epsilon;
            f["detuning_nm"] = p.point.detuning_nm;
            f["mode"] = to_string(p.point.mode);
            f["error"] = *p.error;
            failures.append(f);
          }
          for (auto r : point_records(p)) records.append(r);
        }
        py::dict out;
        out["records"] = records;
        out["failures"] = failures;
        out["config_hash"] = result.provenance.config_hash;
        return out;
      },
      py::arg("config"), py::arg("output_dir") = "",
      "Runs the grid; returns records and failures, and writes result files when "
      "output_dir is given.");

  m.def(
      "simulate",
      [](const RunConfig &config, double epsilon, double detuning_nm, const std::string &mode,
         const std::string &kind) {
        const Device device = build_device(config);
        const GridPoint point{epsilon, detuning_nm, parse_run_mode(mode)};
        const SymbolSequence seq = sweep_sequence(config, kind_from(kind));
        StateMatrix states;
        {
          py::gil_scoped_release release;
          states = synthesize_run(
              device.topology, device.params, seq, config.sampling, point.mode, epsilon,
              detuning_nm,
              derive_seed(point_seed(config.master_seed, point), {static_cast<std::uint64_t>(seq.kind)}),
              device.settings);
        }
        py::dict out;
        out["states"] = states.entries;
        out["node_ids"] = states.node_ids;
        out["first_symbol"] = states.first_symbol;
        out["inputs"] = seq.values;
        return out;
      },
      py::arg("config"), py::arg("epsilon") = 0.2, py::arg("detuning_nm") = 0.0,
      py::arg("mode") = "response", py::arg("kind") = "binary",
      "State matrix for one operating point, with the input sequence that drove it.");

  m.def(
      "ingest",
      [](const std::string &path, const RunConfig &config) {
        const StateMatrix states = ingest_traces(path, config.sampling);
        py::dict out;
        out["states"] = states.entries;
        out["node_ids"] = states.node_ids;
        out["first_symbol"] = states.first_symbol;
        out["symbol_seed"] = states.symbol_seed;
        return out;
      },
      py::arg("path"), py::arg("config") = default_config());

  m.def(
      "evaluate",
      [](const Eigen::MatrixXd &states, std::size_t first_symbol, const std::vector<double> &inputs,
         const std::string &task, const RunConfig &config) {
        StateMatrix q;
        q.entries = states;
        q.first_symbol = first_symbol;
        EvaluationOptions eval;
        eval.cv.alpha = config.readout.alpha;
        eval.cv.bias = config.readout.bias;
        eval.folds = config.readout.folds;
        eval.guard = config.readout.guard;
        eval.also_trained_threshold = config.readout.trained_threshold;
        eval.also_without_bias = config.readout.without_bias;
        py::list out;
        for (const auto &r : evaluate_task(q, inputs, parse_task(task), eval)) out.append(record_dict(r));
        return out;
      },
      py::arg("states"), py::arg("first_symbol"), py::arg("inputs"), py::arg("task"),
      py::arg("config") = default_config(),
      "Scores a task such as 'xor:2' on a state matrix with 5-fold CV.");

  m.def(
      "ridge_fit",
      [](const Eigen::MatrixXd &states, const Eigen::VectorXd &targets, double alpha, bool bias) {
        const ReadoutModel model = ridge_fit(states, targets, alpha, bias);
        py::dict out;
        out["weights"] = model.weights;
        out["bias"] = model.bias;
        out["rank_warning"] = model.rank_warning;
        return out;
      },
      py::arg("states"), py::arg("targets"), py::arg("alpha") = 0.1, py::arg("bias") = false);

  m.def("target_memory", &target_memory, py::arg("r"), py::arg("k"));
  m.def("target_xor", &target_xor, py::arg("r"), py::arg("m"));
  m.def("target_dac", &target_dac, py::arg("r"), py::arg("m"));
  m.def("target_header", &target_header, py::arg("r"), py::arg("header"));
  m.def(
      "trivial_baseline",
      [](const std::string &task, std::size_t m) { return trivial_baseline(parse_task_kind(task), m); },
      py::arg("task"), py::arg("m"));
  m.def(
      "sequence",
      [](const std::string &kind, std::size_t length, std::uint64_t seed) {
        return generate_sequence(kind_from(kind), length, seed).values;
      },
      py::arg("kind"), py::arg("length"), py::arg("seed"));
}
