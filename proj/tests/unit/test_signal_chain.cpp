#include "doctest.h"

#include <cmath>
#include <random>

#include "vcselrc/seeding.hpp"
#include "vcselrc/signal_chain.hpp"

using namespace vcselrc;

namespace {

double stddev(const Eigen::MatrixXd &m) {
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().sum() / static_cast<double>(m.size() - 1));
}

ShotSource white_noise(Eigen::Index rows, double sigma) {
  return [rows, sigma](std::size_t, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    Eigen::MatrixXd m(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) m(i, 0) = normal(rng);
    return m;
  };
}

} // namespace

TEST_CASE("sequences") {
  const auto b = generate_sequence(SequenceKind::binary, 1000, 3);
  const auto u = generate_sequence(SequenceKind::uniform, 1000, 3);
  CHECK(b.values.size() == 1000);
  double ones = 0.0;
  for (double v : b.values) {
    CHECK((v == 0.0 || v == 1.0));
    ones += v;
  }
  CHECK(ones > 430);
  CHECK(ones < 570);
  for (double v : u.values) CHECK((v >= 0.0 && v < 1.0));
  CHECK(generate_sequence(SequenceKind::uniform, 1000, 3).values == u.values);
  CHECK_FALSE(generate_sequence(SequenceKind::uniform, 1000, 4).values == u.values);
}

TEST_CASE("sampling grid") {
  SamplingConfig c;
  CHECK(c.samples_per_symbol() == 11);
  CHECK(c.symbol_period() == doctest::Approx(2.2e-9).epsilon(1e-15));
  c.discard = 11;
  CHECK_THROWS(c.validate());
  c.discard = 2;
  c.symbol_rate = 4.3e8;
  CHECK_THROWS_AS(static_cast<void>(c.samples_per_symbol()), std::invalid_argument);
}

TEST_CASE("modulator pre-compensation makes the level affine in r") {
  const std::vector<double> r{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto full = encode_mzm(r, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(full.levels[i] == doctest::Approx(r[i]).epsilon(1e-15));
  CHECK(full.levels.front() == 0.0);
  CHECK(full.levels.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mzm_transfer(1.0) == doctest::Approx(1.0).epsilon(1e-15));

  const auto half = encode_mzm(r, 0.5);
  for (std::size_t i = 0; i < r.size(); ++i)
    CHECK(half.levels[i] == doctest::Approx(0.5 + 0.5 * r[i]).epsilon(1e-15));
  CHECK(half.mean_level() == 0.75);

  CHECK_THROWS_AS(encode_mzm({1.2}), std::invalid_argument);
  CHECK_THROWS_AS(encode_mzm({-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(encode_mzm({0.5}, 0.0), std::invalid_argument);
}

TEST_CASE("shot averaging") {
  SamplingConfig c;
  const Eigen::MatrixXd clean = Eigen::MatrixXd::Constant(22, 2, 0.3);

  SUBCASE("zero noise gives the clean trace for any shot count") {
    c.shots = 7;
    CHECK(detect_and_average(noisy_detector(clean, 0.0), c, 1) == clean);
  }
  SUBCASE("one shot is the raw trace") {
    c.shots = 1;
    const auto source = noisy_detector(clean, 0.05);
    CHECK(detect_and_average(source, c, 1) == source(0, derive_seed(1, {0})));
  }
  SUBCASE("detector noise is relative to the column maximum") {
    c.shots = 1;
    Eigen::MatrixXd big = Eigen::MatrixXd::Constant(20000, 1, 2.0);
    const Eigen::MatrixXd noisy = detect_and_average(noisy_detector(big, 0.05), c, 3);
    CHECK(stddev(noisy) == doctest::Approx(0.1).epsilon(0.03));
  }
  SUBCASE("residual noise falls as one over the square root of shots") {
    const double sigma = 1.0;
    c.shots = 1;
    const double single = stddev(detect_and_average(white_noise(10000, sigma), c, 5));
    c.shots = 1024;
    const double averaged = stddev(detect_and_average(white_noise(10000, sigma), c, 5));
    CHECK(single == doctest::Approx(sigma).epsilon(0.03));
    CHECK(averaged / single >= 0.9 / 32.0);
    CHECK(averaged / single <= 1.1 / 32.0);
  }
}

TEST_CASE("state extraction") {
  SamplingConfig c;
  c.alignment_offset = 0;
  c.warmup_symbols = 0;
  Eigen::MatrixXd trace(22, 1);
  for (Eigen::Index k = 0; k < 22; ++k) trace(k, 0) = static_cast<double>(k);

  const StateMatrix q = extract_states(trace, c, {4}, 9);
  REQUIRE(q.rows() == 2);
  CHECK(q.entries(0, 0) == doctest::Approx(6.0)); // mean of 2..10
  CHECK(q.entries(1, 0) == doctest::Approx(17.0));
  CHECK(q.node_ids == std::vector<std::size_t>{4});
  CHECK(q.symbol_seed == 9);

  SUBCASE("alignment offset shifts the slot grid") {
    c.alignment_offset = 11;
    const StateMatrix s = extract_states(trace, c, {4}, 9);
    REQUIRE(s.rows() == 1);
    CHECK(s.entries(0, 0) == doctest::Approx(17.0));
  }
  SUBCASE("warmup rows are dropped and remembered") {
    c.warmup_symbols = 1;
    const StateMatrix s = extract_states(trace, c, {4}, 9);
    CHECK(s.rows() == 1);
    CHECK(s.first_symbol == 1);
  }
  SUBCASE("partial symbols are rejected") {
    CHECK_THROWS_AS(extract_states(trace.topRows(21), c, {4}, 9), LengthMismatch);
  }
}

TEST_CASE("simulated runs") {
  const auto topo = default_lattice();
  const LaserParams params = make_laser_params(topo, {}, 2);
  SamplingConfig c;
  c.warmup_symbols = 5;
  c.detection_noise = 0.0;
  c.shots = 1;
  SimulationSettings s;
  s.surrogate_shape = SurrogateShape::identity;

  const auto a = generate_sequence(SequenceKind::uniform, 60, 1);
  const auto b = generate_sequence(SequenceKind::uniform, 60, 2);
  SymbolSequence sum = a, half = a;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    sum.values[i] = 0.5 * (a.values[i] + b.values[i]);
    half.values[i] = 0.5 * a.values[i];
  }

  SUBCASE("identity surrogate states are linear in the input") {
    auto run = [&](const SymbolSequence &seq) {
      return synthesize_run(topo, params, seq, c, RunMode::surrogate, 0.2, 0.0, 1, s).entries;
    };
    const Eigen::MatrixXd qa = run(a), qb = run(b), qs = run(sum);
    CHECK(qs.rows() == 55);
    CHECK(qs.cols() == 23);
    CHECK((qs - 0.5 * (qa + qb)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("reflection states are affine in the previous symbol") {
    const StateMatrix qa = synthesize_run(topo, params, a, c, RunMode::reflection, 0.2, 0.0, 1, s);
    const StateMatrix qh = synthesize_run(topo, params, half, c, RunMode::reflection, 0.2, 0.0, 1, s);
    for (Eigen::Index i = 0; i < qa.entries.rows(); ++i) {
      const std::size_t n = qa.first_symbol + static_cast<std::size_t>(i);
      CHECK(qa.entries(i, 0) / a.values[n - 1] ==
            doctest::Approx(qh.entries(i, 0) / half.values[n - 1]).epsilon(1e-12));
    }
  }

  SUBCASE("later symbols never reach earlier states") {
    for (RunMode mode : {RunMode::surrogate, RunMode::reflection}) {
      SymbolSequence edited = a;
      edited.values[30] = 1.0 - edited.values[30];
      const StateMatrix q0 = synthesize_run(topo, params, a, c, mode, 0.2, 0.0, 1, s);
      const StateMatrix q1 = synthesize_run(topo, params, edited, c, mode, 0.2, 0.0, 1, s);
      const auto rows = static_cast<Eigen::Index>(30 - q0.first_symbol);
      CHECK(q0.entries.topRows(rows) == q1.entries.topRows(rows));
      CHECK_FALSE(q0.entries == q1.entries);
    }
  }

  SUBCASE("record and extract agree with the one-call pipeline") {
    c.detection_noise = 0.05;
    c.shots = 4;
    const RecordedRun run = record_run(topo, params, a, c, RunMode::reflection, 0.2, 0.0, 8, s);
    const StateMatrix direct = synthesize_run(topo, params, a, c, RunMode::reflection, 0.2, 0.0, 8, s);
    CHECK(run.symbols * 11 == static_cast<std::size_t>(run.traces.rows()));
    CHECK(extract_states(run.traces, c, run.node_ids, run.symbol_seed).entries == direct.entries);
  }
}

TEST_CASE("sliding response curve") {
  const std::vector<double> in{0.0, 0.01, 0.5, 0.505, 1.0};
  const std::vector<double> out{1.0, 3.0, 5.0, 7.0, 9.0};
  const auto curve = sliding_response(in, out, 0.02, 3);
  CHECK(curve.centers == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(curve.means[0] == doctest::Approx(2.0));
  CHECK(curve.means[1] == doctest::Approx(6.0));
  CHECK(curve.counts[2] == 1);
}
