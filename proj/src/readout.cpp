#include "vcselrc/readout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vcselrc {

namespace {

Eigen::MatrixXd design(const Eigen::MatrixXd &states, bool bias) {
  if (!bias) return states;
  Eigen::MatrixXd a(states.rows(), states.cols() + 1);
  a.leftCols(states.cols()) = states;
  a.col(states.cols()).setOnes();
  return a;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

ReadoutModel ridge_fit(const Eigen::MatrixXd &states, const Eigen::VectorXd &targets,
                       double alpha, bool bias) {
  if (states.rows() != targets.size())
    throw std::invalid_argument("state rows and target length differ");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");

  const Eigen::MatrixXd a = design(states, bias);
  const Eigen::Index cols = a.cols();
  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() += alpha;
  const Eigen::VectorXd rhs = a.transpose() * targets;

  ReadoutModel model;
  model.alpha = alpha;
  model.has_bias = bias;
  Eigen::VectorXd v;

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool solved = false;
  if (llt.info() == Eigen::Success) {
    bool trusted = alpha > 0.0;
    if (!trusted) {
      // Cholesky can succeed on a numerically singular Gram matrix.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
      const double top = eig.eigenvalues().maxCoeff();
      const double tol = 1e3 * static_cast<double>(std::max(a.rows(), cols)) *
                         std::numeric_limits<double>::epsilon() * top;
      trusted = top > 0.0 && eig.eigenvalues().minCoeff() > tol;
    }
    if (trusted) {
      v = llt.solve(rhs);
      solved = true;
    }
  }
  if (!solved) {
    if (alpha > 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
      const Eigen::VectorXd inv = eig.eigenvalues().cwiseInverse();
      v = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * rhs;
    } else {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
      v = cod.solve(targets);
      model.rank_warning = cod.rank() < cols;
    }
  }

  if (bias) {
    model.weights = v.head(cols - 1);
    model.bias = v(cols - 1);
  } else {
    model.weights = v;
  }
  return model;
}

Eigen::VectorXd predict(const ReadoutModel &model, const Eigen::MatrixXd &states) {
  if (states.cols() != model.weights.size())
    throw std::invalid_argument("state columns do not match readout weights");
  Eigen::VectorXd out = states * model.weights;
  if (model.has_bias) out.array() += model.bias;
  return out;
}

Eigen::VectorXd threshold_decide(const Eigen::VectorXd &outputs, double threshold) {
  return (outputs.array() >= threshold).cast<double>();
}

double optimal_threshold(const Eigen::VectorXd &outputs,
                         const Eigen::VectorXd &boolean_targets) {
  const auto n = static_cast<std::size_t>(outputs.size());
  if (n == 0) return 0.5;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return outputs(static_cast<Eigen::Index>(i)) < outputs(static_cast<Eigen::Index>(j));
  });

  // Threshold below everything: every row decides 1, errors = number of zeros.
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i)
    ones += boolean_targets(static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0;
  long errors = static_cast<long>(n - ones);
  const auto value = [&](std::size_t k) {
    return outputs(static_cast<Eigen::Index>(order[k]));
  };

  double best_theta = value(0) - 1.0;
  long best_errors = errors;
  auto consider = [&](double theta, long err) {
    if (err < best_errors ||
        (err == best_errors && std::abs(theta - 0.5) < std::abs(best_theta - 0.5))) {
      best_errors = err;
      best_theta = theta;
    }
  };
  for (std::size_t k = 0; k < n; ++k) {
    // Moving the threshold above value(k) flips row k to 0.
    errors += boolean_targets(static_cast<Eigen::Index>(order[k])) > 0.5 ? 1 : -1;
    if (k + 1 < n && value(k + 1) == value(k)) continue;
    const double theta = k + 1 < n ? 0.5 * (value(k) + value(k + 1)) : value(k) + 1.0;
    consider(theta, errors);
  }
  return best_theta;
}

FoldPlan make_fold_plan(std::size_t rows, std::size_t n_folds, std::size_t guard) {
  if (n_folds < 2) throw std::invalid_argument("need at least two folds");
  if (rows < n_folds) throw std::invalid_argument("fewer rows than folds");
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.guard = guard;
  plan.assignments.resize(rows);
  for (std::size_t f = 0; f < n_folds; ++f) {
    const std::size_t begin = f * rows / n_folds;
    const std::size_t end = (f + 1) * rows / n_folds;
    for (std::size_t i = begin; i < end; ++i) {
      const bool masked = f > 0 && i - begin < guard;
      plan.assignments[i] = masked ? -1 : static_cast<int>(f);
    }
  }
  return plan;
}

namespace {

struct FoldOutcome {
  double metric = 0.0;
  double threshold = std::nan("");
  bool small = false;
  Eigen::VectorXd outputs;
  std::vector<Eigen::Index> test_rows;
};

std::vector<Eigen::Index> select_rows(const FoldPlan &plan, const Eigen::VectorXd &targets,
                                      int fold, bool want_test) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
    const int a = plan.assignments[i];
    if (a < 0 || std::isnan(targets(static_cast<Eigen::Index>(i)))) continue;
    if ((a == fold) == want_test) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

FoldOutcome run_fold(const Eigen::MatrixXd &states, const Eigen::VectorXd &targets,
                     const FoldPlan &plan, const CvOptions &options, int fold,
                     const Metric *metric) {
  const auto train = select_rows(plan, targets, fold, false);
  const auto test = select_rows(plan, targets, fold, true);
  if (train.empty() || test.empty())
    throw std::invalid_argument("fold " + std::to_string(fold) +
                                " has no training or test rows");
  const Eigen::MatrixXd q_train = states(train, Eigen::all);
  const Eigen::VectorXd y_train = targets(train);
  const ReadoutModel model = ridge_fit(q_train, y_train, options.alpha, options.bias);

  FoldOutcome out;
  out.small = static_cast<Eigen::Index>(test.size()) < states.cols() ||
              static_cast<Eigen::Index>(train.size()) < states.cols();
  out.test_rows = test;
  out.outputs = predict(model, states(test, Eigen::all));
  if (options.threshold != ThresholdRule::none) {
    out.threshold = options.threshold == ThresholdRule::fixed
                        ? options.fixed_threshold
                        : optimal_threshold(predict(model, q_train), y_train);
    out.outputs = threshold_decide(out.outputs, out.threshold);
  }
  if (metric) out.metric = (*metric)(out.outputs, targets(test));
  return out;
}

std::vector<FoldOutcome> run_folds(const Eigen::MatrixXd &states,
                                   const Eigen::VectorXd &targets, const FoldPlan &plan,
                                   const CvOptions &options, const Metric *metric) {
  if (static_cast<std::size_t>(states.rows()) != plan.assignments.size() ||
      states.rows() != targets.size())
    throw std::invalid_argument("fold plan does not cover the state matrix");
  std::vector<FoldOutcome> outcomes(plan.n_folds);
  if (options.parallel) {
    std::vector<std::future<FoldOutcome>> pending;
    for (std::size_t f = 0; f < plan.n_folds; ++f)
      pending.push_back(std::async(std::launch::async, run_fold, std::cref(states),
                                   std::cref(targets), std::cref(plan), std::cref(options),
                                   static_cast<int>(f), metric));
    for (std::size_t f = 0; f < plan.n_folds; ++f) outcomes[f] = pending[f].get();
  } else {
    for (std::size_t f = 0; f < plan.n_folds; ++f)
      outcomes[f] = run_fold(states, targets, plan, options, static_cast<int>(f), metric);
  }
  return outcomes;
}

} // namespace

CvResult cross_validate(const Eigen::MatrixXd &states, const Eigen::VectorXd &targets,
                        const FoldPlan &plan, const CvOptions &options,
                        const Metric &metric) {
  const auto outcomes = run_folds(states, targets, plan, options, &metric);
  CvResult result;
  for (const auto &o : outcomes) {
    result.per_fold.push_back(o.metric);
    result.thresholds.push_back(o.threshold);
    result.small_fold_warning = result.small_fold_warning || o.small;
  }
  const double n = static_cast<double>(result.per_fold.size());
  result.mean = std::accumulate(result.per_fold.begin(), result.per_fold.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : result.per_fold) ss += (v - result.mean) * (v - result.mean);
  result.fold_std = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return result;
}

Eigen::VectorXd cross_predict(const Eigen::MatrixXd &states,
                              const Eigen::VectorXd &targets, const FoldPlan &plan,
                              const CvOptions &options) {
  const auto outcomes = run_folds(states, targets, plan, options, nullptr);
  Eigen::VectorXd pooled = Eigen::VectorXd::Constant(states.rows(), std::nan(""));
  for (const auto &o : outcomes)
    for (std::size_t k = 0; k < o.test_rows.size(); ++k)
      pooled(o.test_rows[k]) = o.outputs(static_cast<Eigen::Index>(k));
  return pooled;
}

void write_weights_csv(std::ostream &out, const ReadoutModel &model,
                       const std::vector<std::size_t> &node_ids) {
  if (node_ids.size() != static_cast<std::size_t>(model.weights.size()))
    throw std::invalid_argument("node id list does not match readout weights");
  out << "# alpha=" << format_double(model.alpha) << " threshold="
      << (model.threshold ? format_double(*model.threshold) : "none")
      << " bias=" << (model.has_bias ? format_double(model.bias) : "none") << '\n';
  out << "node_id,weight\n";
  for (std::size_t k = 0; k < node_ids.size(); ++k)
    out << node_ids[k] << ',' << format_double(model.weights(static_cast<Eigen::Index>(k)))
        << '\n';
}

ReadoutModel read_weights_csv(std::istream &in, std::vector<std::size_t> *node_ids) {
  ReadoutModel model;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("weights file lacks its metadata line");
  std::istringstream meta(line.substr(2));
  std::string item;
  while (meta >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad metadata item '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "alpha") {
      model.alpha = std::stod(value);
    } else if (key == "threshold") {
      if (value != "none") model.threshold = std::stod(value);
    } else if (key == "bias") {
      model.has_bias = value != "none";
      if (model.has_bias) model.bias = std::stod(value);
    }
  }
  if (!std::getline(in, line) || line != "node_id,weight")
    throw std::runtime_error("weights file lacks its column header");
  std::vector<double> weights;
  std::vector<std::size_t> ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad weights row '" + line + "'");
    ids.push_back(std::stoul(line.substr(0, comma)));
    weights.push_back(std::stod(line.substr(comma + 1)));
  }
  model.weights = Eigen::Map<Eigen::VectorXd>(weights.data(),
                                              static_cast<Eigen::Index>(weights.size()));
  if (node_ids) *node_ids = std::move(ids);
  return model;
}

} // namespace vcselrc
