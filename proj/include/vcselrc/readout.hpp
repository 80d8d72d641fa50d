#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace vcselrc {

/// Linear output layer a = Q w (+ b).
struct ReadoutModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  bool has_bias = false;
  std::optional<double> threshold;
  double alpha = 0.1;
  /// Set when alpha == 0 and the design was rank deficient; the weights are
  /// then the minimum-norm least-squares solution.
  bool rank_warning = false;
};

/// argmin_v |y - A v|^2 + alpha |v|^2 with A = Q, or [Q 1] when `bias`.
/// Solved through the normal equations with a Cholesky factorization,
/// falling back to an eigendecomposition when Cholesky fails.
ReadoutModel ridge_fit(const Eigen::MatrixXd &states, const Eigen::VectorXd &targets,
                       double alpha = 0.1, bool bias = false);

Eigen::VectorXd predict(const ReadoutModel &model, const Eigen::MatrixXd &states);

/// decision_n = a_n >= threshold, as 0/1.
Eigen::VectorXd threshold_decide(const Eigen::VectorXd &outputs, double threshold);

/// Threshold minimizing training errors over midpoints of the sorted outputs
/// (plus one point below and above the range). Ties go to the candidate
/// closest to 0.5.
double optimal_threshold(const Eigen::VectorXd &outputs,
                         const Eigen::VectorXd &boolean_targets);

/// Contiguous folds; the first `guard` rows of every fold after the first are
/// masked (assignment -1) and used for neither training nor testing.
struct FoldPlan {
  std::size_t n_folds = 5;
  std::size_t guard = 10;
  std::vector<int> assignments;
};

FoldPlan make_fold_plan(std::size_t rows, std::size_t n_folds = 5,
                        std::size_t guard = 10);

enum class ThresholdRule { none, fixed, train_optimal };

struct CvOptions {
  double alpha = 0.1;
  bool bias = true;
  ThresholdRule threshold = ThresholdRule::none;
  double fixed_threshold = 0.5;
  bool parallel = false;
};

/// Metric over one test fold: (outputs or decisions, targets).
using Metric =
    std::function<double(const Eigen::VectorXd &, const Eigen::VectorXd &)>;

struct CvResult {
  std::vector<double> per_fold;
  std::vector<double> thresholds; // per fold, when a threshold rule is used
  double mean = 0.0;
  double fold_std = 0.0; // sample standard deviation across folds
  bool small_fold_warning = false;
};

/// Fits on all folds but one and scores the held-out fold, for every fold.
/// Rows whose target is NaN are undefined and skipped.
CvResult cross_validate(const Eigen::MatrixXd &states, const Eigen::VectorXd &targets,
                        const FoldPlan &plan, const CvOptions &options,
                        const Metric &metric);

/// Out-of-fold predictions (NaN on guard rows and undefined targets), for
/// metrics that need the pooled test outputs.
Eigen::VectorXd cross_predict(const Eigen::MatrixXd &states,
                              const Eigen::VectorXd &targets, const FoldPlan &plan,
                              const CvOptions &options);

/// `# alpha=<a> threshold=<t|none> bias=<b>` followed by `node_id,weight` rows.
void write_weights_csv(std::ostream &out, const ReadoutModel &model,
                       const std::vector<std::size_t> &node_ids);
ReadoutModel read_weights_csv(std::istream &in, std::vector<std::size_t> *node_ids = nullptr);

} // namespace vcselrc
