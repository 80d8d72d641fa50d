// Acceptance checks. `acceptance N` runs one criterion, `acceptance` runs
// them all. One PASS/FAIL line per criterion; exit status is the number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vcselrc/dynamics.hpp"
#include "vcselrc/experiment.hpp"
#include "vcselrc/readout.hpp"
#include "vcselrc/report.hpp"
#include "vcselrc/seeding.hpp"
#include "vcselrc/signal_chain.hpp"
#include "vcselrc/tasks.hpp"
#include "vcselrc/topology.hpp"
#include "vcselrc/trace_io.hpp"

using namespace vcselrc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char *fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

bool same_or_both_nan(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

// ---------------------------------------------------------------- 1

Outcome ridge_oracle() {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> rows(5, 200), cols(1, 30), coin(0, 1);
  std::uniform_real_distribution<double> log_alpha(-2.0, 1.0), unit(-1.0, 1.0);
  double worst = 0.0, fit_time = 0.0;
  const auto t0 = Clock::now();
  for (int instance = 0; instance < 200; ++instance) {
    const int n = rows(rng), j = cols(rng);
    const bool bias = coin(rng) == 1;
    const double alpha = std::pow(10.0, log_alpha(rng));
    Eigen::MatrixXd q(n, j);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < j; ++c) q(r, c) = unit(rng);
      y(r) = unit(rng);
    }

    const auto t_fit = Clock::now();
    const ReadoutModel model = ridge_fit(q, y, alpha, bias);
    fit_time += seconds_since(t_fit);

    oracle::Matrix design(n, std::vector<double>(j + (bias ? 1 : 0), 1.0));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < j; ++c) design[r][c] = q(r, c);
    const std::vector<double> target(y.data(), y.data() + n);
    const auto w = oracle::ridge_gradient_descent(design, target, alpha);

    for (int c = 0; c < j; ++c) worst = std::max(worst, std::abs(model.weights(c) - w[c]));
    if (bias) worst = std::max(worst, std::abs(model.bias - w[j]));
  }
  const bool ok = worst < 1e-6 && fit_time < 10.0;
  return {ok, format("max |dw| = %.3g over 200 instances, ridge_fit %.3f s (with oracle %.1f s)",
                     worst, fit_time, seconds_since(t0))};
}

// ---------------------------------------------------------------- 2

Outcome task_targets() {
  const auto r = generate_sequence(SequenceKind::binary, 1000, 77).values;
  std::size_t mismatches = 0, compared = 0;
  auto compare = [&](const Eigen::VectorXd &got, const std::vector<double> &want) {
    if (static_cast<std::size_t>(got.size()) != want.size()) {
      ++mismatches;
      return;
    }
    for (std::size_t n = 0; n < want.size(); ++n, ++compared)
      if (!same_or_both_nan(got(static_cast<Eigen::Index>(n)), want[n])) ++mismatches;
  };
  for (std::size_t m = 1; m <= 4; ++m) {
    compare(target_xor(r, m), oracle::xor_targets(r, m));
    compare(target_dac(r, m), oracle::dac_targets(r, m));
    for (unsigned long code = 0; code < (1ul << m); ++code) {
      std::vector<int> header(m);
      for (std::size_t i = 0; i < m; ++i) header[i] = static_cast<int>((code >> (m - 1 - i)) & 1ul);
      compare(target_header(r, header), oracle::header_targets(r, code, m));
    }
  }
  return {mismatches == 0, format("%zu mismatches in %zu target values (m = 1..4)", mismatches, compared)};
}

// ---------------------------------------------------------------- 3

Outcome baselines() {
  bool ok = true;
  for (std::size_t m = 1; m <= 4; ++m)
    ok = ok && trivial_baseline(TaskKind::header_recognition, m) == std::ldexp(1.0, -static_cast<int>(m));
  const double dac2 = trivial_baseline(TaskKind::dac, 2);
  const double dac1 = trivial_baseline(TaskKind::dac, 1);
  ok = ok && std::abs(dac2 - std::sqrt(5.0 / 36.0)) < 1e-12 &&
       std::abs(dac2 - oracle::dac_constant_rmse(2)) < 1e-12 && dac1 == 0.5;
  return {ok, format("HR 2^-m exact for m = 1..4; DAC m=2 %.17g; DAC m=1 %.17g", dac2, dac1)};
}

// ---------------------------------------------------------------- 4

double record_value(const std::vector<TaskRecord> &records, const std::string &task,
                    const std::string &metric, std::size_t k) {
  for (const auto &r : records)
    if (r.task == task && r.metric == metric && r.m_or_k == k) return r.value;
  throw std::runtime_error("missing record " + task + " " + metric);
}

EvaluationOptions evaluation(const RunConfig &config) {
  EvaluationOptions eval;
  eval.cv.alpha = config.readout.alpha;
  eval.cv.bias = config.readout.bias;
  eval.folds = config.readout.folds;
  eval.guard = config.readout.guard;
  return eval;
}

Outcome memory_probe() {
  RunConfig config = default_config();
  config.simulation.surrogate_shape = SurrogateShape::identity;
  config.simulation.surrogate_coupling_gain = 1.0;
  const std::size_t nodes = 6;
  const LatticeTopology line = delay_line(nodes);
  const SymbolSequence seq = sweep_sequence(config, SequenceKind::uniform);
  const StateMatrix probe =
      synthesize_run(line, make_laser_params(line, config.heterogeneity, 1), seq, config.sampling,
                     RunMode::surrogate, 0.2, 0.0, 3, config.simulation);
  const auto line_records = evaluate_task(probe, seq.values, parse_task("memory:10"), evaluation(config));
  const double m1 = record_value(line_records, "memory", "memory_correlation", 1);
  const double mc = record_value(line_records, "memory", "memory_capacity", 10);

  config = default_config();
  const Device device = build_device(config);
  const GridPoint point{0.2, 0.0, RunMode::reflection};
  const StateMatrix refl = synthesize_run(
      device.topology, device.params, seq, config.sampling, point.mode, point.epsilon,
      point.detuning_nm,
      derive_seed(point_seed(config.master_seed, point), {static_cast<std::uint64_t>(seq.kind)}),
      device.settings);
  const auto refl_records = evaluate_task(refl, seq.values, parse_task("memory:10"), evaluation(config));
  const double m1_refl = record_value(refl_records, "memory", "memory_correlation", 1);

  const bool ok = m1 >= 0.99 && mc <= static_cast<double>(nodes) + 1.0 && m1_refl > 0.8;
  return {ok, format("delay line J=%zu: M1 = %.4f, MC = %.3f (<= %zu); reflection M1 = %.4f (N = %zu)",
                     nodes, m1, mc, nodes + 1, m1_refl, seq.values.size())};
}

// ---------------------------------------------------------------- 5

double xor2_ber(const RunConfig &config, const Device &device, RunMode mode, double epsilon) {
  RunConfig c = config;
  c.tasks = {parse_task("xor:2")};
  const PointResult p = run_point(c, device, {epsilon, 0.0, mode});
  return record_value(p.records, "xor", "ber", 2);
}

Outcome nonlinearity_separation() {
  const auto t0 = Clock::now();
  const RunConfig config = default_config();
  const Device device = build_device(config);
  const double response = xor2_ber(config, device, RunMode::response, 0.2);
  const double reflection = xor2_ber(config, device, RunMode::reflection, 0.2);
  const double elapsed = seconds_since(t0);
  const bool ok = response < 0.05 && reflection > 0.05 && elapsed <= 600.0;
  return {ok, format("XOR-2 BER response %.4f (< 0.05), reflection %.4f (> 0.05), N = %zu, %.0f s",
                     response, reflection, config.sequence_length, elapsed)};
}

// ---------------------------------------------------------------- 6

std::vector<double> ranks(const std::vector<double> &v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double> &a, const std::vector<double> &b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome epsilon_trend() {
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const std::vector<std::string> tasks{"xor:2", "hr:2", "hr:3", "hr:4"};
  RunConfig base = default_config();
  base.modes = {RunMode::response};
  base.tasks.clear();
  for (const auto &t : tasks) base.tasks.push_back(parse_task(t));

  const auto &eps = base.epsilons;
  std::map<std::string, std::vector<double>> mean_ber;
  for (const auto &t : tasks) mean_ber[t].assign(eps.size(), 0.0);
  for (std::uint64_t seed : seeds) {
    RunConfig config = base;
    config.master_seed = seed;
    const SweepResult sweep = run_experiment(config);
    if (sweep.any_failed()) return {false, format("sweep with seed %llu had failed points",
                                                  static_cast<unsigned long long>(seed))};
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto &records = sweep.points[i].records;
      for (const auto &t : tasks) {
        const TaskSpec spec = parse_task(t);
        mean_ber[t][i] += record_value(records, to_string(spec.kind), "ber", spec.m_or_k) / static_cast<double>(seeds.size());
      }
    }
  }

  std::vector<double> neg_eps;
  for (double e : eps) neg_eps.push_back(-e);
  bool ok = true;
  std::string detail;
  for (const auto &t : tasks) {
    const double rho = spearman(mean_ber[t], neg_eps);
    ok = ok && rho >= 0.8;
    detail += format("%s rho %.2f [", t.c_str(), rho);
    for (std::size_t i = 0; i < eps.size(); ++i)
      detail += format(i ? " %.4f" : "%.4f", mean_ber[t][i]);
    detail += "]; ";
  }
  return {ok, detail + "mean BER over 5 seeds at eps 0.20 0.13 0.05 0.02"};
}

// ---------------------------------------------------------------- 7

Outcome shot_averaging() {
  const Eigen::Index samples = 10000;
  Eigen::MatrixXd clean(samples, 1);
  for (Eigen::Index i = 0; i < samples; ++i)
    clean(i, 0) = 1.0 + 0.5 * std::sin(0.01 * static_cast<double>(i));
  SamplingConfig config;
  const ShotSource source = noisy_detector(clean, config.detection_noise);
  auto residual_std = [&](std::size_t shots) {
    config.shots = shots;
    const Eigen::VectorXd d = detect_and_average(source, config, 11).col(0) - clean.col(0);
    const double mean = d.mean();
    return std::sqrt((d.array() - mean).square().sum() / static_cast<double>(samples - 1));
  };
  const double single = residual_std(1), averaged = residual_std(1024);
  const double ratio = averaged / single;
  const bool ok = ratio >= 0.9 / 32.0 && ratio <= 1.1 / 32.0;
  return {ok, format("std ratio %.5f, window [%.5f, %.5f]", ratio, 0.9 / 32.0, 1.1 / 32.0)};
}

// ---------------------------------------------------------------- 8

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const RunConfig config = default_config();
  const auto root = std::filesystem::temp_directory_path() / "vcselrc_acceptance_8";
  std::filesystem::remove_all(root);
  const auto first = root / "a", second = root / "b";
  for (const auto &dir : {first, second}) {
    const SweepResult sweep = run_experiment(config);
    write_results(dir, sweep, config);
    emit_figures(sweep, dir);
  }

  std::size_t files = 0, differing = 0;
  for (const auto &entry : std::filesystem::directory_iterator(first)) {
    ++files;
    const auto name = entry.path().filename();
    if (!std::filesystem::exists(second / name) || slurp(entry.path()) != slurp(second / name))
      ++differing;
  }

  const Device device = build_device(config);
  const SymbolSequence seq = sweep_sequence(config, SequenceKind::binary);
  const RecordedRun run = record_run(device.topology, device.params, seq, config.sampling,
                                     RunMode::response, 0.2, 0.0, 9, device.settings);
  const StateMatrix direct =
      extract_states(run.traces, config.sampling, run.node_ids, run.symbol_seed);
  const StateMatrix synthesized =
      synthesize_run(device.topology, device.params, seq, config.sampling, RunMode::response, 0.2,
                     0.0, 9, device.settings);
  write_trace_file(root / "traces.csv", {run.traces, config.sampling.sample_rate,
                                         config.sampling.symbol_rate, run.symbols,
                                         run.symbol_seed, run.node_ids});
  const StateMatrix ingested = ingest_traces(root / "traces.csv", config.sampling);
  const bool states_equal = ingested.entries == direct.entries &&
                            direct.entries == synthesized.entries &&
                            ingested.node_ids == direct.node_ids &&
                            ingested.first_symbol == direct.first_symbol &&
                            ingested.symbol_seed == direct.symbol_seed;
  std::filesystem::remove_all(root);

  const bool ok = files >= 9 && differing == 0 && states_equal;
  return {ok, format("%zu result files, %zu differ; trace round trip %s", files, differing,
                     states_equal ? "bit-exact" : "NOT bit-exact")};
}

// ---------------------------------------------------------------- 9

Outcome dynamics_sanity() {
  const LatticeTopology single = build_lattice(1, 1, {}, {});
  LaserParams p;
  p.pump_rate = {1.5 * p.threshold_pump()};
  p.frequency_offset = {0.0};
  const double analytic = p.free_running_intensity(p.pump_rate[0]);
  const double root = oracle::free_running_intensity(
      {p.linewidth_enhancement, p.photon_lifetime, p.carrier_lifetime, p.gain_coefficient,
       p.transparency_carrier, p.gain_saturation, p.pump_rate[0]});

  InjectionField kick; // one injected slot pushes the node off its fixed point
  kick.levels = {1.0};
  kick.mean_level = 1.0;
  kick.power_ratio = 0.5;
  DynamicsOptions opt;
  opt.coupling_strength = 0.0;
  opt.duration = 8e-9;
  double worst = 0.0;
  for (double dt : {opt.dt, opt.dt / 2.0}) {
    DynamicsOptions o = opt;
    o.dt = dt;
    o.output_every = static_cast<std::size_t>(std::llround(0.2e-9 / dt));
    const NodeTraces t = integrate_network(single, p, kick, o);
    worst = std::max(worst, std::abs(t.col(0).tail(5).mean() / analytic - 1.0));
  }

  // Echo lag: the reflected trace must equal the drive delayed by exactly
  // 11 samples, and no other lag may fit.
  const SamplingConfig sampling;
  const LatticeTopology lattice = default_lattice();
  InjectionField drive;
  drive.levels = generate_sequence(SequenceKind::uniform, 40, 5).values;
  drive.symbol_period = sampling.symbol_period();
  drive.power_ratio = 0.2;
  ReflectionOptions ropt;
  const NodeTraces echo = reflection_traces(drive, lattice, 1.0 / sampling.sample_rate, ropt);
  const std::size_t sps = sampling.samples_per_symbol();
  const Eigen::Index node = 0;
  auto fits_lag = [&](std::size_t lag) {
    double scale = 0.0;
    for (Eigen::Index k = 0; k < echo.rows(); ++k) {
      const std::size_t s = static_cast<std::size_t>(k);
      if (s < lag) {
        if (echo(k, node) != 0.0) return false;
        continue;
      }
      const double level = drive.levels[(s - lag) / sps];
      if (level <= 0.0) continue;
      const double ratio = echo(k, node) / level;
      if (scale == 0.0) scale = ratio;
      if (std::abs(ratio / scale - 1.0) > 1e-12) return false;
    }
    return scale > 0.0;
  };
  std::vector<std::size_t> lags;
  for (std::size_t lag = 0; lag <= 3 * sps; ++lag)
    if (fits_lag(lag)) lags.push_back(lag);

  const bool ok = worst < 1e-3 && std::abs(analytic / root - 1.0) < 1e-12 && lags.size() == 1 &&
                  lags[0] == 11;
  return {ok, format("steady state off by %.2e (dt and dt/2); echo lag %s samples at %zu samples/symbol",
                     worst, lags.size() == 1 ? std::to_string(lags[0]).c_str() : "ambiguous", sps)};
}

struct Criterion {
  const char *name;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> criteria{
      {"ridge oracle equivalence", ridge_oracle},
      {"task targets match brute force", task_targets},
      {"trivial baselines", baselines},
      {"memory probe", memory_probe},
      {"nonlinearity separation", nonlinearity_separation},
      {"epsilon trend", epsilon_trend},
      {"shot averaging", shot_averaging},
      {"determinism and round trip", determinism},
      {"dynamics sanity", dynamics_sanity},
  };

  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "usage: acceptance [1-" << criteria.size() << "]...\n";
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(n));
  }
  if (selected.empty())
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);

  int failures = 0;
  for (std::size_t n : selected) {
    const auto &c = criteria[n - 1];
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception &e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << c.name
              << "): " << outcome.detail << std::endl;
    if (!outcome.pass) ++failures;
  }
  return failures;
}
