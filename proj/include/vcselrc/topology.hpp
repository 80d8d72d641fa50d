#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace vcselrc {

/// Relative coupling weights per lattice-distance class.
///
/// The defaults are engineering choices in relative units, not measured
/// values; the dynamics module scales them by a global coupling strength.
struct WeightProfile {
  double self = 1.0;      ///< distance 0 (self-feedback)
  double nearest = 0.5;   ///< distance 1
  double diagonal = 0.25; ///< distance sqrt(2)
};

/// Gaussian injection profile around the array center,
/// w_in = exp(-d^2 / (2 sigma^2)). Default sigma is an engineering choice.
struct InputProfile {
  double sigma = 1.5;
};

/// Square laser lattice with its internal coupling and injection weights.
/// Immutable once built.
struct LatticeTopology {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<bool> active;
  std::vector<bool> recorded;
  Eigen::MatrixXd coupling;      // w_res, size() x size()
  Eigen::VectorXd input_weights; // w_in

  [[nodiscard]] std::size_t size() const { return rows * cols; }
  [[nodiscard]] std::size_t active_count() const;
  [[nodiscard]] std::vector<std::size_t> recorded_nodes() const;
  [[nodiscard]] std::vector<std::size_t> active_nodes() const;
  /// Number of nonzero coupling entries in a node's row (self included).
  [[nodiscard]] std::size_t degree(std::size_t node) const;
  /// Mean input weight over active nodes.
  [[nodiscard]] double mean_active_input_weight() const;
};

/// Euclidean distance between the integer grid coordinates of two nodes.
/// Throws std::out_of_range when an index does not fit the grid.
double lattice_distance(std::size_t a, std::size_t b, std::size_t cols,
                        std::size_t total);

/// Distance from a node to the (continuous) grid midpoint.
double center_distance(std::size_t node, std::size_t rows, std::size_t cols);

LatticeTopology build_lattice(std::size_t rows, std::size_t cols,
                              const WeightProfile &weights,
                              const InputProfile &input,
                              const std::vector<std::size_t> &inactive = {},
                              const std::vector<std::size_t> &unrecorded = {});

/// 5x5 array, corner node (4,4) off, center node (2,2) active but unrecorded.
LatticeTopology default_lattice(const WeightProfile &weights = {},
                                const InputProfile &input = {});

/// Chain of `nodes` lasers where node j only sees node j-1 from the previous
/// step and only node 0 is driven: a shift register for memory probes.
LatticeTopology delay_line(std::size_t nodes);

} // namespace vcselrc
