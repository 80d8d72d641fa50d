#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vcselrc/topology.hpp"

namespace vcselrc {

/// Per-node intensity traces: one row per output sample, one column per
/// lattice node (inactive nodes are all-zero columns).
using NodeTraces = Eigen::MatrixXd;

/// Class-B semiconductor laser parameters. Carrier numbers and intensities
/// are in arbitrary but consistent units. The defaults are invented
/// engineering values chosen to give GHz relaxation oscillations; they are
/// not fitted to any device.
struct LaserParams {
  double linewidth_enhancement = 3.0; // alpha_H
  double photon_lifetime = 5e-12;     // s
  double carrier_lifetime = 1e-9;     // s
  double gain_coefficient = 1e4;      // 1/s per carrier unit
  double transparency_carrier = 1e8;  // carrier units
  double gain_saturation = 1e-7;      // 1/intensity units
  std::vector<double> pump_rate;        // carriers/s, one per node
  std::vector<double> frequency_offset; // rad/s, one per node

  [[nodiscard]] double threshold_carrier() const;
  [[nodiscard]] double threshold_pump() const;
  /// Solitary steady-state intensity for a given pump rate (0 below threshold).
  [[nodiscard]] double free_running_intensity(double pump) const;
  /// Solitary steady-state carrier number for a given pump rate.
  [[nodiscard]] double free_running_carrier(double pump) const;
  /// Net modal gain G(N, I) = g (N - N0) / (1 + s I).
  [[nodiscard]] double gain(double carrier, double intensity) const;
  void validate(std::size_t nodes) const;
};

/// Device-to-device spread, frozen per seed.
struct Heterogeneity {
  double pump_factor = 1.5;           // mean pump relative to threshold
  double pump_spread = 0.05;          // relative standard deviation
  double wavelength_spread_nm = 0.01; // standard deviation of emission offsets
  double wavelength_nm = 980.0;
};

/// Fills pump rates and frequency offsets for every active node.
LaserParams make_laser_params(const LatticeTopology &topology,
                              const Heterogeneity &spread, std::uint64_t seed,
                              LaserParams base = {});

/// Angular detuning for a wavelength offset: -2 pi c dl / l0^2.
double detuning_from_wavelength(double delta_lambda_nm,
                                double wavelength_nm = 980.0);

/// Injected light: piecewise-constant intensity levels, one per symbol slot,
/// as produced by the modulator. The field amplitude injected into node j is
/// sqrt(eps_j * P_j * level / mean_level) where eps_j = eps * w_in_j / <w_in>
/// and P_j is the node's free-running intensity.
struct InjectionField {
  std::vector<double> levels;
  double symbol_period = 2.2e-9;
  /// Expected level of the modulated drive; fixed a priori so the
  /// normalization never looks at future symbols.
  double mean_level = 0.5;
  double detuning = 0.0; // rad/s
  double power_ratio = 0.0;

  [[nodiscard]] double level_at_slot(long slot) const;
};

enum class Integrator { euler, heun };

struct DynamicsOptions {
  double dt = 0.2e-12;
  double duration = 0.0;
  double tau_ext = 2.2e-9;
  double coupling_strength = 2e9;   // kappa, 1/s
  double injection_strength = 1e11; // eta, 1/s
  double coupling_phase = 0.0;      // Omega * tau_ext
  double noise_strength = 0.0;      // spontaneous emission, intensity/s
  std::uint64_t noise_seed = 0;
  std::size_t output_every = 1; // steps averaged into one output sample
  Integrator scheme = Integrator::euler;
  double blowup_factor = 1e6;
};

class NumericalBlowup : public std::runtime_error {
public:
  NumericalBlowup(std::size_t node, double time, double intensity);
  std::size_t node;
  double time;
};

/// Mutable state of one integration: fields, carriers, and the delay line
/// holding the last tau_ext of fields. Confined to a single worker.
class NetworkState {
public:
  NetworkState(std::size_t nodes, std::size_t delay_steps);

  std::vector<std::complex<double>> fields;
  std::vector<double> carriers;

  /// Field of `node` one delay ago (relative to the current step).
  [[nodiscard]] std::complex<double> delayed(std::size_t node,
                                             std::size_t ahead = 0) const;
  /// Stores the current fields into the delay line and advances.
  void push_history();
  /// Fills the whole delay line with the current fields.
  void fill_history();
  [[nodiscard]] std::size_t delay_steps() const { return delay_steps_; }

private:
  std::size_t nodes_;
  std::size_t delay_steps_;
  std::size_t head_ = 0;
  std::vector<std::complex<double>> history_;
};

/// Integrates the delay-coupled rate equations
///   dE/dt = 1/2 (1 + i a)(G - 1/tp) E + i dw_j E
///           + k sum_l w_jl E_l(t - tau) e^{-i phi} + h A_j(t) e^{-i Dw t} + noise
///   dN/dt = P_j - N/tN - G |E|^2
/// and returns |E_j|^2 boxcar-averaged over `output_every` steps.
/// Throws std::invalid_argument when tau_ext or the symbol period are not
/// whole numbers of steps, NumericalBlowup when an intensity exceeds
/// blowup_factor times the node's free-running intensity.
NodeTraces integrate_network(const LatticeTopology &topology,
                             const LaserParams &params,
                             const InjectionField &injection,
                             const DynamicsOptions &options);

struct ReflectionOptions {
  double tau_ext = 2.2e-9;
  double reflectivity = 0.5;
  double reference_intensity = 1.0; // intensity that eps is measured against
};

/// Linear echo of the injection off each node's facet, arriving one extra
/// round trip later: R * eps * I_ref * (w_in_j / <w_in>) * level(t - tau) /
/// mean_level. Zero before the first echo arrives.
NodeTraces reflection_traces(const InjectionField &injection,
                             const LatticeTopology &topology,
                             double sample_interval,
                             const ReflectionOptions &options = {});

using NodeFunction = std::function<double(double)>;

/// One symbol of the discrete-time surrogate:
/// x'_j = f_j(gain * sum_l w_jl x_l + w_in_j * input).
Eigen::VectorXd surrogate_step(const LatticeTopology &topology,
                               const std::vector<NodeFunction> &nonlinearities,
                               double coupling_gain,
                               const Eigen::VectorXd &state, double input);

std::vector<NodeFunction> identity_nonlinearities(std::size_t nodes);

/// Saturating responses f(u) = s (1 - exp(-u / s)) with node-specific
/// saturation levels s drawn from [0.3, 1.0).
std::vector<NodeFunction> saturating_nonlinearities(std::size_t nodes,
                                                    std::uint64_t seed);

} // namespace vcselrc
