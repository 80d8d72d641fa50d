#include "vcselrc/tasks.hpp"

#include <cmath>
#include <stdexcept>

namespace vcselrc {

namespace {

const double kUndefined = std::nan("");

void require_bits(const std::vector<double> &r) {
  for (double v : r)
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("bit sequence contains a value other than 0 or 1");
}

void require_m(std::size_t m) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
}

std::vector<int> header_bits(std::size_t value, std::size_t m) {
  std::vector<int> bits(m);
  for (std::size_t k = 0; k < m; ++k) bits[k] = static_cast<int>((value >> (m - 1 - k)) & 1U);
  return bits;
}

} // namespace

Eigen::VectorXd target_memory(const std::vector<double> &r, std::size_t k) {
  if (k >= r.size())
    throw std::invalid_argument("memory delay must be shorter than the sequence");
  Eigen::VectorXd y = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r.size()), kUndefined);
  for (std::size_t n = k; n < r.size(); ++n) y(static_cast<Eigen::Index>(n)) = r[n - k];
  return y;
}

Eigen::VectorXd target_header(const std::vector<double> &r,
                              const std::vector<int> &header) {
  const std::size_t m = header.size();
  require_m(m);
  require_bits(r);
  for (int b : header)
    if (b != 0 && b != 1) throw std::invalid_argument("header bits must be 0 or 1");
  Eigen::VectorXd y = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r.size()), kUndefined);
  for (std::size_t n = m - 1; n < r.size(); ++n) {
    bool match = true;
    for (std::size_t i = 0; i < m && match; ++i)
      match = static_cast<int>(r[n + 1 - m + i]) == header[i];
    y(static_cast<Eigen::Index>(n)) = match ? 1.0 : 0.0;
  }
  return y;
}

Eigen::VectorXd target_xor(const std::vector<double> &r, std::size_t m) {
  require_m(m);
  require_bits(r);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r.size()), kUndefined);
  for (std::size_t n = m - 1; n < r.size(); ++n) {
    int sum = 0;
    for (std::size_t i = n + 1 - m; i <= n; ++i) sum += static_cast<int>(r[i]);
    y(static_cast<Eigen::Index>(n)) = static_cast<double>(sum % 2);
  }
  return y;
}

Eigen::VectorXd target_dac(const std::vector<double> &r, std::size_t m) {
  require_m(m);
  require_bits(r);
  if (m > 52) throw std::invalid_argument("m too large for an exact DAC target");
  const double scale = std::ldexp(1.0, static_cast<int>(m)) - 1.0;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r.size()), kUndefined);
  for (std::size_t n = m - 1; n < r.size(); ++n) {
    std::uint64_t value = 0;
    for (std::size_t i = n + 1 - m; i <= n; ++i)
      value = (value << 1) | static_cast<std::uint64_t>(r[i]);
    y(static_cast<Eigen::Index>(n)) = static_cast<double>(value) / scale;
  }
  return y;
}

Correlation squared_correlation(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a(i)) || !std::isfinite(b(i))) continue;
    sa += a(i);
    sb += b(i);
    ++n;
  }
  if (n < 2) throw std::invalid_argument("need at least two valid samples");
  const double ma = sa / static_cast<double>(n);
  const double mb = sb / static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a(i)) || !std::isfinite(b(i))) continue;
    const double da = a(i) - ma;
    const double db = b(i) - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) return {0.0, true};
  return {std::min(1.0, cov * cov / (va * vb)), false};
}

Correlation memory_correlation(const Eigen::VectorXd &outputs,
                               const std::vector<double> &r, std::size_t k) {
  if (static_cast<std::size_t>(outputs.size()) != r.size())
    throw std::invalid_argument("outputs and inputs differ in length");
  return squared_correlation(outputs, target_memory(r, k));
}

double memory_capacity(const std::vector<double> &m, std::size_t k_max) {
  if (m.size() < k_max)
    throw std::invalid_argument("memory correlations missing for some delays");
  double sum = 0.0;
  for (std::size_t k = 0; k < k_max; ++k) sum += m[k];
  return sum;
}

double rmse(const Eigen::VectorXd &outputs, const Eigen::VectorXd &targets) {
  if (outputs.size() != targets.size()) throw std::invalid_argument("length mismatch");
  double ss = 0.0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (std::isnan(targets(i))) continue;
    const double d = outputs(i) - targets(i);
    ss += d * d;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("rmse of an empty set");
  return std::sqrt(ss / static_cast<double>(n));
}

double bit_error_ratio(const Eigen::VectorXd &decisions, const Eigen::VectorXd &targets) {
  if (decisions.size() != targets.size()) throw std::invalid_argument("length mismatch");
  std::size_t errors = 0, n = 0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (std::isnan(targets(i))) continue;
    errors += (decisions(i) > 0.5) != (targets(i) > 0.5) ? 1 : 0;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("bit error ratio of an empty set");
  return static_cast<double>(errors) / static_cast<double>(n);
}

std::string to_string(TaskKind kind) {
  switch (kind) {
  case TaskKind::memory: return "memory";
  case TaskKind::header_recognition: return "hr";
  case TaskKind::xor_parity: return "xor";
  case TaskKind::dac: return "dac";
  }
  return "unknown";
}

TaskKind parse_task_kind(const std::string &text) {
  if (text == "memory" || text == "mc") return TaskKind::memory;
  if (text == "hr" || text == "header_recognition") return TaskKind::header_recognition;
  if (text == "xor") return TaskKind::xor_parity;
  if (text == "dac") return TaskKind::dac;
  throw std::invalid_argument("unknown task '" + text + "'");
}

double trivial_baseline(TaskKind kind, std::size_t m) {
  switch (kind) {
  case TaskKind::memory: return 0.0;
  case TaskKind::header_recognition:
    require_m(m);
    return std::ldexp(1.0, -static_cast<int>(m));
  case TaskKind::xor_parity: require_m(m); return 0.5;
  case TaskKind::dac: {
    require_m(m);
    const std::size_t levels = std::size_t{1} << m;
    const double top = static_cast<double>(levels - 1);
    double ss = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
      const double d = static_cast<double>(i) / top - 0.5;
      ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(levels));
  }
  }
  return 0.0;
}

SequenceKind input_kind(TaskKind kind) {
  return kind == TaskKind::memory ? SequenceKind::uniform : SequenceKind::binary;
}

Eigen::VectorXd align_targets(const Eigen::VectorXd &full, const StateMatrix &states) {
  const auto first = static_cast<Eigen::Index>(states.first_symbol);
  const auto rows = static_cast<Eigen::Index>(states.rows());
  if (first + rows > full.size())
    throw std::invalid_argument("state matrix extends past the input sequence");
  return full.segment(first, rows);
}

namespace {

Metric ber_metric() {
  return [](const Eigen::VectorXd &d, const Eigen::VectorXd &y) {
    return bit_error_ratio(d, y);
  };
}

CvResult score_header(const StateMatrix &states, const std::vector<double> &r,
                      const std::vector<int> &header, const CvOptions &cv,
                      const FoldPlan &plan) {
  const Eigen::VectorXd y = align_targets(target_header(r, header), states);
  return cross_validate(states.entries, y, plan, cv, ber_metric());
}

} // namespace

HeaderRecognition header_recognition_ber(const StateMatrix &states,
                                         const std::vector<double> &r, std::size_t m,
                                         const CvOptions &cv, std::size_t folds,
                                         std::size_t guard) {
  require_m(m);
  if (m > 8) throw std::invalid_argument("header recognition limited to m <= 8");
  CvOptions options = cv;
  if (options.threshold == ThresholdRule::none) options.threshold = ThresholdRule::fixed;
  const FoldPlan plan = make_fold_plan(states.rows(), folds, guard);
  const std::size_t count = std::size_t{1} << m;

  HeaderRecognition out;
  out.baseline = trivial_baseline(TaskKind::header_recognition, m);
  out.per_fold.assign(folds, 0.0);
  for (std::size_t h = 0; h < count; ++h) {
    const CvResult res = score_header(states, r, header_bits(h, m), options, plan);
    out.per_header.push_back(res.mean);
    out.fold_std += res.fold_std / static_cast<double>(count);
    for (std::size_t f = 0; f < folds; ++f)
      out.per_fold[f] += res.per_fold[f] / static_cast<double>(count);
  }
  double sum = 0.0;
  for (double b : out.per_header) sum += b;
  out.mean_ber = sum / static_cast<double>(count);
  return out;
}

std::vector<TaskRecord> evaluate_task(const StateMatrix &states,
                                      const std::vector<double> &r,
                                      const TaskSpec &spec,
                                      const EvaluationOptions &options) {
  std::vector<TaskRecord> records;
  const FoldPlan plan = make_fold_plan(states.rows(), options.folds, options.guard);
  const std::string task = to_string(spec.kind);
  const std::size_t m = spec.m_or_k;

  std::vector<std::pair<bool, std::string>> bias_variants{{options.cv.bias, ""}};
  if (options.also_without_bias && options.cv.bias) bias_variants.emplace_back(false, "_nobias");

  auto record = [&](std::size_t mk, std::string metric, double baseline,
                    const CvResult &res) {
    TaskRecord rec;
    rec.task = task;
    rec.m_or_k = mk;
    rec.metric = std::move(metric);
    rec.value = res.mean;
    rec.baseline = baseline;
    rec.fold_std = res.fold_std;
    rec.per_fold = res.per_fold;
    records.push_back(std::move(rec));
  };

  for (const auto &[bias, suffix] : bias_variants) {
    CvOptions cv = options.cv;
    cv.bias = bias;
    switch (spec.kind) {
    case TaskKind::memory: {
      cv.threshold = ThresholdRule::none;
      const Metric corr = [](const Eigen::VectorXd &a, const Eigen::VectorXd &y) {
        return squared_correlation(a, y).value;
      };
      std::vector<double> mk;
      CvResult total;
      total.per_fold.assign(options.folds, 0.0);
      for (std::size_t k = 1; k <= m; ++k) {
        const Eigen::VectorXd y = align_targets(target_memory(r, k), states);
        const CvResult res = cross_validate(states.entries, y, plan, cv, corr);
        record(k, "memory_correlation" + suffix, 0.0, res);
        mk.push_back(res.mean);
        for (std::size_t f = 0; f < options.folds; ++f) total.per_fold[f] += res.per_fold[f];
      }
      total.mean = memory_capacity(mk, m);
      double ss = 0.0;
      for (double v : total.per_fold) ss += (v - total.mean) * (v - total.mean);
      total.fold_std = options.folds > 1 ? std::sqrt(ss / static_cast<double>(options.folds - 1)) : 0.0;
      record(m, "memory_capacity" + suffix, 0.0, total);
      break;
    }
    case TaskKind::header_recognition: {
      const double base = trivial_baseline(spec.kind, m);
      auto run = [&](ThresholdRule rule, const std::string &metric) {
        cv.threshold = rule;
        if (spec.header) {
          if (spec.header->size() != m)
            throw std::invalid_argument("header length must equal m");
          record(m, metric + suffix, base, score_header(states, r, *spec.header, cv, plan));
        } else {
          const auto hr = header_recognition_ber(states, r, m, cv, options.folds, options.guard);
          CvResult res;
          res.mean = hr.mean_ber;
          res.fold_std = hr.fold_std;
          res.per_fold = hr.per_fold;
          record(m, metric + suffix, base, res);
        }
      };
      run(ThresholdRule::fixed, "ber");
      if (options.also_trained_threshold) run(ThresholdRule::train_optimal, "ber_trained_threshold");
      break;
    }
    case TaskKind::xor_parity: {
      const Eigen::VectorXd y = align_targets(target_xor(r, m), states);
      cv.threshold = ThresholdRule::fixed;
      record(m, "ber" + suffix, 0.5, cross_validate(states.entries, y, plan, cv, ber_metric()));
      if (options.also_trained_threshold) {
        cv.threshold = ThresholdRule::train_optimal;
        record(m, "ber_trained_threshold" + suffix, 0.5,
               cross_validate(states.entries, y, plan, cv, ber_metric()));
      }
      break;
    }
    case TaskKind::dac: {
      const Eigen::VectorXd y = align_targets(target_dac(r, m), states);
      cv.threshold = ThresholdRule::none;
      const Metric err = [](const Eigen::VectorXd &a, const Eigen::VectorXd &t) {
        return rmse(a, t);
      };
      record(m, "rmse" + suffix, trivial_baseline(spec.kind, m),
             cross_validate(states.entries, y, plan, cv, err));
      break;
    }
    }
  }
  return records;
}

} // namespace vcselrc
