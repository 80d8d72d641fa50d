#include "vcselrc/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

namespace vcselrc {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

std::size_t whole_steps(double span, double dt, const char *what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * rounded) {
    std::ostringstream msg;
    msg << what << " (" << span << " s) is not a whole number of steps of "
        << dt << " s";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

struct Link {
  std::size_t node;
  std::complex<double> weight;
};

} // namespace

double LaserParams::threshold_carrier() const {
  return transparency_carrier + 1.0 / (gain_coefficient * photon_lifetime);
}

double LaserParams::threshold_pump() const {
  return threshold_carrier() / carrier_lifetime;
}

double LaserParams::free_running_intensity(double pump) const {
  const double excess = pump - threshold_pump();
  if (excess <= 0.0) return 0.0;
  return excess / (1.0 / photon_lifetime +
                   gain_saturation / (gain_coefficient * photon_lifetime *
                                      carrier_lifetime));
}

double LaserParams::free_running_carrier(double pump) const {
  const double intensity = free_running_intensity(pump);
  if (intensity == 0.0) return pump * carrier_lifetime;
  return transparency_carrier + (1.0 + gain_saturation * intensity) /
                                    (gain_coefficient * photon_lifetime);
}

double LaserParams::gain(double carrier, double intensity) const {
  return gain_coefficient * (carrier - transparency_carrier) /
         (1.0 + gain_saturation * intensity);
}

void LaserParams::validate(std::size_t nodes) const {
  if (!(photon_lifetime > 0.0) || !(carrier_lifetime > 0.0) ||
      !(gain_coefficient > 0.0))
    throw std::invalid_argument(
        "lifetimes and gain coefficient must be positive");
  if (gain_saturation < 0.0)
    throw std::invalid_argument("gain saturation must be non-negative");
  if (pump_rate.size() != nodes || frequency_offset.size() != nodes)
    throw std::invalid_argument(
        "per-node laser parameters do not match the lattice size");
}

LaserParams make_laser_params(const LatticeTopology &topology,
                              const Heterogeneity &spread, std::uint64_t seed,
                              LaserParams base) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = topology.size();
  base.pump_rate.assign(n, 0.0);
  base.frequency_offset.assign(n, 0.0);
  const double p_th = base.threshold_pump();
  for (std::size_t j = 0; j < n; ++j) {
    // Draw for every node so the spread of node j does not depend on which
    // other nodes are switched off.
    const double dp = normal(rng);
    const double dl = normal(rng);
    if (!topology.active[j]) continue;
    base.pump_rate[j] = p_th * spread.pump_factor * (1.0 + spread.pump_spread * dp);
    base.frequency_offset[j] = detuning_from_wavelength(
        spread.wavelength_spread_nm * dl, spread.wavelength_nm);
  }
  return base;
}

double detuning_from_wavelength(double delta_lambda_nm, double wavelength_nm) {
  const double l0 = wavelength_nm * 1e-9;
  return -2.0 * std::numbers::pi * kSpeedOfLight * (delta_lambda_nm * 1e-9) /
         (l0 * l0);
}

double InjectionField::level_at_slot(long slot) const {
  if (slot < 0 || static_cast<std::size_t>(slot) >= levels.size()) return 0.0;
  return levels[static_cast<std::size_t>(slot)];
}

NumericalBlowup::NumericalBlowup(std::size_t node_, double time_,
                                 double intensity)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "numerical blow-up at node " << node_ << ", t = " << time_
            << " s (|E|^2 = " << intensity << ")";
        return msg.str();
      }()),
      node(node_), time(time_) {}

NetworkState::NetworkState(std::size_t nodes, std::size_t delay_steps)
    : fields(nodes), carriers(nodes, 0.0), nodes_(nodes),
      delay_steps_(delay_steps), history_(nodes * delay_steps) {}

std::complex<double> NetworkState::delayed(std::size_t node,
                                           std::size_t ahead) const {
  const std::size_t slot = (head_ + ahead) % delay_steps_;
  return history_[slot * nodes_ + node];
}

void NetworkState::push_history() {
  std::copy(fields.begin(), fields.end(),
            history_.begin() + static_cast<std::ptrdiff_t>(head_ * nodes_));
  head_ = (head_ + 1) % delay_steps_;
}

void NetworkState::fill_history() {
  for (std::size_t s = 0; s < delay_steps_; ++s)
    std::copy(fields.begin(), fields.end(),
              history_.begin() + static_cast<std::ptrdiff_t>(s * nodes_));
}

NodeTraces integrate_network(const LatticeTopology &topology,
                             const LaserParams &params,
                             const InjectionField &injection,
                             const DynamicsOptions &options) {
  const std::size_t n = topology.size();
  params.validate(n);
  if (!(options.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (options.output_every == 0)
    throw std::invalid_argument("output_every must be at least 1");
  if (injection.power_ratio < 0.0)
    throw std::invalid_argument("power ratio must be non-negative");
  if (!(injection.mean_level > 0.0))
    throw std::invalid_argument("injection mean level must be positive");

  const std::size_t delay = whole_steps(options.tau_ext, options.dt, "tau_ext");
  const std::size_t per_symbol =
      whole_steps(injection.symbol_period, options.dt, "symbol period");
  const auto total_steps =
      static_cast<std::size_t>(std::llround(options.duration / options.dt));
  const std::size_t samples = total_steps / options.output_every;

  const double alpha = params.linewidth_enhancement;
  const double inv_tp = 1.0 / params.photon_lifetime;
  const double inv_tn = 1.0 / params.carrier_lifetime;
  const double dt = options.dt;
  const std::complex<double> half_one_ia(0.5, 0.5 * alpha);
  const std::complex<double> feedback_phase =
      std::polar(options.coupling_strength, -options.coupling_phase);

  const std::vector<std::size_t> nodes = topology.active_nodes();
  const double mean_w = topology.mean_active_input_weight();
  std::vector<std::vector<Link>> links(n);
  std::vector<double> drive(n, 0.0); // eta * sqrt(eps_j P_j / mean_level)
  std::vector<double> ceiling(n, 0.0);
  for (auto j : nodes) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (auto l : nodes) {
      const double w = topology.coupling(jj, static_cast<Eigen::Index>(l));
      if (w > 0.0) links[j].push_back({l, feedback_phase * w});
    }
    const double p_free = params.free_running_intensity(params.pump_rate[j]);
    const double eps_j = mean_w > 0.0 ? injection.power_ratio *
                                            topology.input_weights(jj) / mean_w
                                      : 0.0;
    drive[j] = options.injection_strength *
               std::sqrt(eps_j * p_free / injection.mean_level);
    ceiling[j] = options.blowup_factor * std::max(p_free, 1.0);
  }

  NetworkState state(n, delay);
  for (auto j : nodes) {
    state.fields[j] = std::sqrt(params.free_running_intensity(params.pump_rate[j]));
    state.carriers[j] = params.free_running_carrier(params.pump_rate[j]);
  }
  state.fill_history();

  std::mt19937_64 rng(options.noise_seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double noise_amp = std::sqrt(0.5 * options.noise_strength * dt);
  const bool noisy = options.noise_strength > 0.0;

  std::vector<std::complex<double>> field_rate(n), trial(n), noise(n);
  std::vector<double> carrier_rate(n), trial_carrier(n);
  NodeTraces out = NodeTraces::Zero(static_cast<Eigen::Index>(samples),
                                    static_cast<Eigen::Index>(n));
  std::vector<double> accum(n, 0.0);

  // Right-hand side at step `step` for fields/carriers; `ahead` selects the
  // delayed field relative to the current delay-line head.
  auto rhs = [&](const std::vector<std::complex<double>> &e,
                 const std::vector<double> &c, std::size_t step,
                 std::size_t ahead) {
    const long slot = static_cast<long>(step / per_symbol);
    const double level = injection.level_at_slot(slot);
    const double t = static_cast<double>(step) * dt;
    const std::complex<double> carrier_wave =
        std::polar(1.0, -injection.detuning * t);
    const double amp = std::sqrt(std::max(level, 0.0));
    for (auto j : nodes) {
      const double intensity = std::norm(e[j]);
      const double g = params.gain(c[j], intensity);
      std::complex<double> coupled(0.0, 0.0);
      for (const auto &link : links[j])
        coupled += link.weight * state.delayed(link.node, ahead);
      field_rate[j] = half_one_ia * (g - inv_tp) * e[j] +
                      std::complex<double>(0.0, params.frequency_offset[j]) * e[j] +
                      coupled + drive[j] * amp * carrier_wave;
      carrier_rate[j] = params.pump_rate[j] - c[j] * inv_tn - g * intensity;
    }
  };

  for (std::size_t step = 0; step < total_steps; ++step) {
    for (auto j : nodes) accum[j] += std::norm(state.fields[j]);
    if (noisy)
      for (auto j : nodes)
        noise[j] = noise_amp * std::complex<double>(normal(rng), normal(rng));

    rhs(state.fields, state.carriers, step, 0);
    if (options.scheme == Integrator::euler) {
      for (auto j : nodes) {
        trial[j] = state.fields[j] + dt * field_rate[j] + noise[j];
        trial_carrier[j] = state.carriers[j] + dt * carrier_rate[j];
      }
    } else {
      const auto k1_field = field_rate;
      const auto k1_carrier = carrier_rate;
      for (auto j : nodes) {
        trial[j] = state.fields[j] + dt * k1_field[j] + noise[j];
        trial_carrier[j] = state.carriers[j] + dt * k1_carrier[j];
      }
      rhs(trial, trial_carrier, step + 1, 1);
      for (auto j : nodes) {
        trial[j] = state.fields[j] + 0.5 * dt * (k1_field[j] + field_rate[j]) +
                   noise[j];
        trial_carrier[j] =
            state.carriers[j] + 0.5 * dt * (k1_carrier[j] + carrier_rate[j]);
      }
    }
    // The delay line stores E(step); it is read again `delay` steps later.
    state.push_history();
    for (auto j : nodes) {
      state.fields[j] = trial[j];
      state.carriers[j] = trial_carrier[j];
      const double intensity = std::norm(trial[j]);
      if (!(intensity <= ceiling[j]))
        throw NumericalBlowup(j, static_cast<double>(step + 1) * dt, intensity);
    }

    if ((step + 1) % options.output_every == 0) {
      const auto row = static_cast<Eigen::Index>(step / options.output_every);
      if (row < out.rows())
        for (auto j : nodes) {
          out(row, static_cast<Eigen::Index>(j)) =
              accum[j] / static_cast<double>(options.output_every);
          accum[j] = 0.0;
        }
    }
  }
  return out;
}

NodeTraces reflection_traces(const InjectionField &injection,
                             const LatticeTopology &topology,
                             double sample_interval,
                             const ReflectionOptions &options) {
  if (!(sample_interval > 0.0))
    throw std::invalid_argument("sample interval must be positive");
  const std::size_t per_symbol =
      whole_steps(injection.symbol_period, sample_interval, "symbol period");
  const std::size_t delay =
      whole_steps(options.tau_ext, sample_interval, "tau_ext");
  const std::size_t samples = injection.levels.size() * per_symbol;
  const std::size_t n = topology.size();
  const double mean_w = topology.mean_active_input_weight();

  NodeTraces out = NodeTraces::Zero(static_cast<Eigen::Index>(samples),
                                    static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (!topology.active[j] || mean_w <= 0.0) continue;
    const double gain = options.reflectivity * injection.power_ratio *
                        options.reference_intensity *
                        topology.input_weights(static_cast<Eigen::Index>(j)) /
                        (mean_w * injection.mean_level);
    for (std::size_t k = delay; k < samples; ++k)
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          gain * injection.level_at_slot(static_cast<long>((k - delay) / per_symbol));
  }
  return out;
}

Eigen::VectorXd surrogate_step(const LatticeTopology &topology,
                               const std::vector<NodeFunction> &nonlinearities,
                               double coupling_gain,
                               const Eigen::VectorXd &state, double input) {
  const auto n = static_cast<Eigen::Index>(topology.size());
  if (state.size() != n || nonlinearities.size() != topology.size())
    throw std::invalid_argument("surrogate state does not match the lattice");
  const Eigen::VectorXd drive =
      coupling_gain * (topology.coupling * state) + topology.input_weights * input;
  Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j)
    if (topology.active[static_cast<std::size_t>(j)])
      next(j) = nonlinearities[static_cast<std::size_t>(j)](drive(j));
  return next;
}

std::vector<NodeFunction> identity_nonlinearities(std::size_t nodes) {
  return std::vector<NodeFunction>(nodes, [](double u) { return u; });
}

std::vector<NodeFunction> saturating_nonlinearities(std::size_t nodes,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(0.3, 1.0);
  std::vector<NodeFunction> out;
  out.reserve(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double s = level(rng);
    out.emplace_back([s](double u) { return s * (1.0 - std::exp(-u / s)); });
  }
  return out;
}

} // namespace vcselrc
