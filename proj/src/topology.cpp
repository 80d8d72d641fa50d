#include "vcselrc/topology.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vcselrc {

namespace {

constexpr double kDistanceTolerance = 1e-9;

void check_index(std::size_t node, std::size_t total) {
  if (node >= total) {
    throw std::out_of_range("node index " + std::to_string(node) +
                            " outside lattice of " + std::to_string(total) +
                            " nodes");
  }
}

} // namespace

double lattice_distance(std::size_t a, std::size_t b, std::size_t cols,
                        std::size_t total) {
  check_index(a, total);
  check_index(b, total);
  const auto ra = static_cast<double>(a / cols);
  const auto ca = static_cast<double>(a % cols);
  const auto rb = static_cast<double>(b / cols);
  const auto cb = static_cast<double>(b % cols);
  return std::hypot(ra - rb, ca - cb);
}

double center_distance(std::size_t node, std::size_t rows, std::size_t cols) {
  check_index(node, rows * cols);
  const double r = static_cast<double>(node / cols);
  const double c = static_cast<double>(node % cols);
  const double rc = 0.5 * static_cast<double>(rows - 1);
  const double cc = 0.5 * static_cast<double>(cols - 1);
  return std::hypot(r - rc, c - cc);
}

std::size_t LatticeTopology::active_count() const {
  std::size_t n = 0;
  for (bool a : active) n += a ? 1 : 0;
  return n;
}

std::vector<std::size_t> LatticeTopology::recorded_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j)
    if (recorded[j]) out.push_back(j);
  return out;
}

std::vector<std::size_t> LatticeTopology::active_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j)
    if (active[j]) out.push_back(j);
  return out;
}

std::size_t LatticeTopology::degree(std::size_t node) const {
  check_index(node, size());
  std::size_t d = 0;
  for (Eigen::Index l = 0; l < coupling.cols(); ++l)
    if (coupling(static_cast<Eigen::Index>(node), l) > 0.0) ++d;
  return d;
}

double LatticeTopology::mean_active_input_weight() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (!active[j]) continue;
    sum += input_weights(static_cast<Eigen::Index>(j));
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

LatticeTopology build_lattice(std::size_t rows, std::size_t cols,
                              const WeightProfile &weights,
                              const InputProfile &input,
                              const std::vector<std::size_t> &inactive,
                              const std::vector<std::size_t> &unrecorded) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("lattice needs at least one row and column");
  if (weights.self < 0.0 || weights.nearest < 0.0 || weights.diagonal < 0.0)
    throw std::invalid_argument("coupling weights must be non-negative");
  if (weights.self < weights.nearest || weights.nearest < weights.diagonal)
    throw std::invalid_argument(
        "coupling weights must not increase with lattice distance");
  if (!(input.sigma > 0.0))
    throw std::invalid_argument("input profile width must be positive");

  LatticeTopology topo;
  topo.rows = rows;
  topo.cols = cols;
  const std::size_t total = rows * cols;
  topo.active.assign(total, true);
  topo.recorded.assign(total, true);
  for (auto j : inactive) {
    check_index(j, total);
    topo.active[j] = false;
    topo.recorded[j] = false;
  }
  for (auto j : unrecorded) {
    check_index(j, total);
    topo.recorded[j] = false;
  }

  const auto n = static_cast<Eigen::Index>(total);
  topo.coupling = Eigen::MatrixXd::Zero(n, n);
  topo.input_weights = Eigen::VectorXd::Zero(n);
  const double sqrt2 = std::sqrt(2.0);
  for (std::size_t j = 0; j < total; ++j) {
    if (!topo.active[j]) continue;
    const double dc = center_distance(j, rows, cols);
    topo.input_weights(static_cast<Eigen::Index>(j)) =
        std::exp(-dc * dc / (2.0 * input.sigma * input.sigma));
    for (std::size_t l = 0; l < total; ++l) {
      if (!topo.active[l]) continue;
      const double d = lattice_distance(j, l, cols, total);
      double w = 0.0;
      if (d < kDistanceTolerance)
        w = weights.self;
      else if (std::abs(d - 1.0) < kDistanceTolerance)
        w = weights.nearest;
      else if (std::abs(d - sqrt2) < kDistanceTolerance)
        w = weights.diagonal;
      topo.coupling(static_cast<Eigen::Index>(j),
                    static_cast<Eigen::Index>(l)) = w;
    }
  }
  return topo;
}

LatticeTopology default_lattice(const WeightProfile &weights,
                                const InputProfile &input) {
  constexpr std::size_t kSide = 5;
  return build_lattice(kSide, kSide, weights, input, {4 * kSide + 4},
                       {2 * kSide + 2});
}

LatticeTopology delay_line(std::size_t nodes) {
  if (nodes == 0) throw std::invalid_argument("delay line needs at least one node");
  LatticeTopology t;
  t.rows = 1;
  t.cols = nodes;
  t.active.assign(nodes, true);
  t.recorded.assign(nodes, true);
  const auto n = static_cast<Eigen::Index>(nodes);
  t.coupling = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 1; j < n; ++j) t.coupling(j, j - 1) = 1.0;
  t.input_weights = Eigen::VectorXd::Zero(n);
  t.input_weights(0) = 1.0;
  return t;
}

} // namespace vcselrc
