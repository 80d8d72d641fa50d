#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vcselrc/readout.hpp"
#include "vcselrc/signal_chain.hpp"

namespace vcselrc {

// Target generators return one entry per input symbol. Positions without a
// defined target (the first k or m-1 symbols) hold NaN and are dropped from
// training and scoring.

/// y_n = r_{n-k}; k = 0 gives y = r. Throws for k >= r.size().
Eigen::VectorXd target_memory(const std::vector<double> &r, std::size_t k);

/// y_n = 1 iff (r_{n-m+1}, ..., r_n) equals `header`.
Eigen::VectorXd target_header(const std::vector<double> &r,
                              const std::vector<int> &header);

/// m-bit parity: y_n = (r_{n-m+1} + ... + r_n) mod 2.
Eigen::VectorXd target_xor(const std::vector<double> &r, std::size_t m);

/// Normalized m-bit value, oldest bit most significant:
/// y_n = sum_{k=1..m} 2^{m-k} r_{n-m+k} / (2^m - 1).
Eigen::VectorXd target_dac(const std::vector<double> &r, std::size_t m);

struct Correlation {
  double value = 0.0;
  bool degenerate = false; // zero variance in either argument
};

/// Squared Pearson correlation over positions where both are finite.
Correlation squared_correlation(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

/// M_k between outputs a_n and inputs r_{n-k}; a is aligned with r.
Correlation memory_correlation(const Eigen::VectorXd &outputs,
                               const std::vector<double> &r, std::size_t k);

/// MC = sum_{k=1..k_max} M_k, with M[k-1] = M_k.
double memory_capacity(const std::vector<double> &m, std::size_t k_max = 10);

/// Root-mean-square error over finite target positions; throws when none.
double rmse(const Eigen::VectorXd &outputs, const Eigen::VectorXd &targets);

/// Fraction of finite target positions where decision != target.
double bit_error_ratio(const Eigen::VectorXd &decisions, const Eigen::VectorXd &targets);

enum class TaskKind { memory, header_recognition, xor_parity, dac };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string &text);

/// HR: all-zeros guess, 2^-m. XOR: 0.5. DAC: RMSE of the constant 0.5 guess
/// over the 2^m equiprobable levels. Memory: 0.
double trivial_baseline(TaskKind kind, std::size_t m);

struct TaskSpec {
  TaskKind kind = TaskKind::memory;
  std::size_t m_or_k = 1; // bits m, or the largest delay k for memory
  std::optional<std::vector<int>> header; // single-header HR evaluation
};

/// Input statistics a task expects.
SequenceKind input_kind(TaskKind kind);

/// One scored quantity, e.g. (xor, 2, ber).
struct TaskRecord {
  std::string task;
  std::size_t m_or_k = 0;
  std::string metric;
  double value = 0.0;
  double baseline = 0.0;
  double fold_std = 0.0;
  std::vector<double> per_fold;
};

struct EvaluationOptions {
  CvOptions cv;            // threshold rule is set per task
  std::size_t folds = 5;
  std::size_t guard = 10;
  bool also_trained_threshold = true; // report ber_trained_threshold
  bool also_without_bias = false;     // report *_nobias variants
};

/// Slices a full-sequence target to the rows of a state matrix.
Eigen::VectorXd align_targets(const Eigen::VectorXd &full, const StateMatrix &states);

struct HeaderRecognition {
  double mean_ber = 0.0;
  double baseline = 0.0;
  double fold_std = 0.0; // mean over headers of the per-header fold std
  std::vector<double> per_header; // indexed by the header's binary value
  std::vector<double> per_fold;   // fold-wise mean over headers
};

/// Trains one readout per m-bit header (2^m of them) and averages the BERs.
HeaderRecognition header_recognition_ber(const StateMatrix &states,
                                         const std::vector<double> &r, std::size_t m,
                                         const CvOptions &cv, std::size_t folds = 5,
                                         std::size_t guard = 10);

/// Scores one task on a state matrix driven by the full input sequence r.
std::vector<TaskRecord> evaluate_task(const StateMatrix &states,
                                      const std::vector<double> &r,
                                      const TaskSpec &spec,
                                      const EvaluationOptions &options);

} // namespace vcselrc
