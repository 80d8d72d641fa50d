#include "vcselrc/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace vcselrc {

namespace {

namespace pt = boost::property_tree;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T> &items, F &&format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + format(items[i]);
  return out;
}

double to_double(const std::string &s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("'" + s + "' is not a number");
  return v;
}

std::uint64_t to_u64(const std::string &s) {
  std::size_t used = 0;
  if (!s.empty() && s.front() == '-') throw std::invalid_argument("'" + s + "' is negative");
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("'" + s + "' is not an integer");
  return v;
}

bool to_bool(const std::string &s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("'" + s + "' is not a boolean");
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig &)> get;
  std::function<void(RunConfig &, const std::string &)> set;
};


template <typename Member>
Field number_field(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](const RunConfig &c) { return fmt(member(const_cast<RunConfig &>(c))); },
          [member](RunConfig &c, const std::string &v) { member(c) = to_double(v); }};
}

template <typename Member>
Field count_field(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](const RunConfig &c) {
            return std::to_string(member(const_cast<RunConfig &>(c)));
          },
          [member](RunConfig &c, const std::string &v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_u64(v));
          }};
}

template <typename Member>
Field bool_field(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](const RunConfig &c) {
            return std::string(member(const_cast<RunConfig &>(c)) ? "true" : "false");
          },
          [member](RunConfig &c, const std::string &v) { member(c) = to_bool(v); }};
}

template <typename Member>
Field index_list_field(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](const RunConfig &c) {
            return join(member(const_cast<RunConfig &>(c)),
                        [](std::size_t v) { return std::to_string(v); });
          },
          [member](RunConfig &c, const std::string &v) {
            auto &list = member(c);
            list.clear();
            for (const auto &item : split(v, ',')) list.push_back(to_u64(item));
          }};
}

template <typename Member>
Field real_list_field(std::string section, std::string key, Member member) {
  return {std::move(section), std::move(key),
          [member](const RunConfig &c) {
            return join(member(const_cast<RunConfig &>(c)), [](double v) { return fmt(v); });
          },
          [member](RunConfig &c, const std::string &v) {
            auto &list = member(c);
            list.clear();
            for (const auto &item : split(v, ',')) list.push_back(to_double(item));
          }};
}

#define VCSELRC_MEMBER(expr) [](RunConfig &c) -> auto & { return c.expr; }

const std::vector<Field> &fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(count_field("run", "master_seed", VCSELRC_MEMBER(master_seed)));
    f.push_back({"run", "output_dir", [](const RunConfig &c) { return c.output_dir; },
                 [](RunConfig &c, const std::string &v) { c.output_dir = v; }});
    f.push_back(count_field("run", "workers", VCSELRC_MEMBER(workers)));

    f.push_back(count_field("topology", "rows", VCSELRC_MEMBER(topology.rows)));
    f.push_back(count_field("topology", "cols", VCSELRC_MEMBER(topology.cols)));
    f.push_back(number_field("topology", "weight_self", VCSELRC_MEMBER(topology.weights.self)));
    f.push_back(number_field("topology", "weight_nearest", VCSELRC_MEMBER(topology.weights.nearest)));
    f.push_back(number_field("topology", "weight_diagonal", VCSELRC_MEMBER(topology.weights.diagonal)));
    f.push_back(number_field("topology", "input_sigma", VCSELRC_MEMBER(topology.input.sigma)));
    f.push_back(index_list_field("topology", "inactive", VCSELRC_MEMBER(topology.inactive)));
    f.push_back(index_list_field("topology", "unrecorded", VCSELRC_MEMBER(topology.unrecorded)));

    f.push_back(number_field("laser", "linewidth_enhancement", VCSELRC_MEMBER(laser.linewidth_enhancement)));
    f.push_back(number_field("laser", "photon_lifetime", VCSELRC_MEMBER(laser.photon_lifetime)));
    f.push_back(number_field("laser", "carrier_lifetime", VCSELRC_MEMBER(laser.carrier_lifetime)));
    f.push_back(number_field("laser", "gain_coefficient", VCSELRC_MEMBER(laser.gain_coefficient)));
    f.push_back(number_field("laser", "transparency_carrier", VCSELRC_MEMBER(laser.transparency_carrier)));
    f.push_back(number_field("laser", "gain_saturation", VCSELRC_MEMBER(laser.gain_saturation)));
    f.push_back(number_field("laser", "pump_factor", VCSELRC_MEMBER(heterogeneity.pump_factor)));
    f.push_back(number_field("laser", "pump_spread", VCSELRC_MEMBER(heterogeneity.pump_spread)));
    f.push_back(number_field("laser", "wavelength_spread_nm", VCSELRC_MEMBER(heterogeneity.wavelength_spread_nm)));
    f.push_back(number_field("laser", "wavelength_nm", VCSELRC_MEMBER(heterogeneity.wavelength_nm)));

    f.push_back(number_field("dynamics", "dt", VCSELRC_MEMBER(simulation.dynamics.dt)));
    f.push_back(number_field("dynamics", "tau_ext", VCSELRC_MEMBER(simulation.dynamics.tau_ext)));
    f.push_back(number_field("dynamics", "coupling_strength", VCSELRC_MEMBER(simulation.dynamics.coupling_strength)));
    f.push_back(number_field("dynamics", "injection_strength", VCSELRC_MEMBER(simulation.dynamics.injection_strength)));
    f.push_back(number_field("dynamics", "coupling_phase", VCSELRC_MEMBER(simulation.dynamics.coupling_phase)));
    f.push_back(number_field("dynamics", "noise_strength", VCSELRC_MEMBER(simulation.dynamics.noise_strength)));
    f.push_back(number_field("dynamics", "blowup_factor", VCSELRC_MEMBER(simulation.dynamics.blowup_factor)));
    f.push_back({"dynamics", "integrator",
                 [](const RunConfig &c) {
                   return std::string(c.simulation.dynamics.scheme == Integrator::heun ? "heun" : "euler");
                 },
                 [](RunConfig &c, const std::string &v) {
                   if (v == "euler") c.simulation.dynamics.scheme = Integrator::euler;
                   else if (v == "heun") c.simulation.dynamics.scheme = Integrator::heun;
                   else throw std::invalid_argument("unknown integrator '" + v + "'");
                 }});
    f.push_back(number_field("dynamics", "modulation_depth", VCSELRC_MEMBER(simulation.modulation_depth)));
    f.push_back(number_field("dynamics", "reflectivity", VCSELRC_MEMBER(simulation.reflectivity)));
    f.push_back(bool_field("dynamics", "response_includes_reflection",
                           VCSELRC_MEMBER(simulation.response_includes_reflection)));
    f.push_back(number_field("dynamics", "surrogate_coupling_gain",
                             VCSELRC_MEMBER(simulation.surrogate_coupling_gain)));
    f.push_back({"dynamics", "surrogate_shape",
                 [](const RunConfig &c) {
                   return std::string(c.simulation.surrogate_shape == SurrogateShape::identity
                                          ? "identity" : "saturating");
                 },
                 [](RunConfig &c, const std::string &v) {
                   if (v == "identity") c.simulation.surrogate_shape = SurrogateShape::identity;
                   else if (v == "saturating") c.simulation.surrogate_shape = SurrogateShape::saturating;
                   else throw std::invalid_argument("unknown surrogate shape '" + v + "'");
                 }});

    f.push_back(number_field("sampling", "symbol_rate", VCSELRC_MEMBER(sampling.symbol_rate)));
    f.push_back(number_field("sampling", "sample_rate", VCSELRC_MEMBER(sampling.sample_rate)));
    f.push_back(count_field("sampling", "discard", VCSELRC_MEMBER(sampling.discard)));
    f.push_back(count_field("sampling", "shots", VCSELRC_MEMBER(sampling.shots)));
    f.push_back(number_field("sampling", "detection_noise", VCSELRC_MEMBER(sampling.detection_noise)));
    f.push_back(count_field("sampling", "alignment_offset", VCSELRC_MEMBER(sampling.alignment_offset)));
    f.push_back(count_field("sampling", "warmup_symbols", VCSELRC_MEMBER(sampling.warmup_symbols)));

    f.push_back(count_field("sequence", "length", VCSELRC_MEMBER(sequence_length)));

    f.push_back(number_field("readout", "alpha", VCSELRC_MEMBER(readout.alpha)));
    f.push_back(bool_field("readout", "bias", VCSELRC_MEMBER(readout.bias)));
    f.push_back(count_field("readout", "folds", VCSELRC_MEMBER(readout.folds)));
    f.push_back(count_field("readout", "guard", VCSELRC_MEMBER(readout.guard)));
    f.push_back(bool_field("readout", "trained_threshold", VCSELRC_MEMBER(readout.trained_threshold)));
    f.push_back(bool_field("readout", "without_bias", VCSELRC_MEMBER(readout.without_bias)));

    f.push_back({"tasks", "list",
                 [](const RunConfig &c) { return join(c.tasks, format_task); },
                 [](RunConfig &c, const std::string &v) {
                   c.tasks.clear();
                   for (const auto &item : split(v, ',')) c.tasks.push_back(parse_task(item));
                 }});

    f.push_back(real_list_field("sweep", "epsilon", VCSELRC_MEMBER(epsilons)));
    f.push_back(real_list_field("sweep", "detuning_nm", VCSELRC_MEMBER(detunings_nm)));
    f.push_back({"sweep", "modes",
                 [](const RunConfig &c) {
                   return join(c.modes, [](RunMode m) { return to_string(m); });
                 },
                 [](RunConfig &c, const std::string &v) {
                   c.modes.clear();
                   for (const auto &item : split(v, ',')) c.modes.push_back(parse_run_mode(item));
                 }});
    return f;
  }();
  return table;
}

#undef VCSELRC_MEMBER

} // namespace

std::string format_task(const TaskSpec &task) {
  std::string out = to_string(task.kind) + ":" + std::to_string(task.m_or_k);
  if (task.header) {
    out += ":";
    for (int b : *task.header) out += static_cast<char>('0' + b);
  }
  return out;
}

TaskSpec parse_task(const std::string &text) {
  const auto parts = split(text, ':');
  if (parts.size() < 2 || parts.size() > 3)
    throw std::invalid_argument("task '" + text + "' is not kind:m[:header]");
  TaskSpec spec;
  spec.kind = parse_task_kind(parts[0]);
  spec.m_or_k = static_cast<std::size_t>(to_u64(parts[1]));
  if (spec.m_or_k == 0) throw std::invalid_argument("task '" + text + "' needs m >= 1");
  if (parts.size() == 3) {
    if (spec.kind != TaskKind::header_recognition)
      throw std::invalid_argument("only hr tasks take a header");
    std::vector<int> bits;
    for (char ch : parts[2]) {
      if (ch != '0' && ch != '1') throw std::invalid_argument("header '" + parts[2] + "' is not binary");
      bits.push_back(ch - '0');
    }
    if (bits.size() != spec.m_or_k)
      throw std::invalid_argument("header length must equal m in '" + text + "'");
    spec.header = std::move(bits);
  }
  return spec;
}

RunConfig default_config() {
  RunConfig c;
  c.tasks = {
      {TaskKind::memory, 10, std::nullopt},
      {TaskKind::header_recognition, 2, std::nullopt},
      {TaskKind::header_recognition, 3, std::nullopt},
      {TaskKind::header_recognition, 4, std::nullopt},
      {TaskKind::xor_parity, 2, std::nullopt},
      {TaskKind::xor_parity, 3, std::nullopt},
      {TaskKind::dac, 1, std::nullopt},
      {TaskKind::dac, 2, std::nullopt},
      {TaskKind::dac, 3, std::nullopt},
      {TaskKind::dac, 4, std::nullopt},
  };
  return c;
}

std::string serialize_config(const RunConfig &config) {
  std::ostringstream out;
  out << "format_version = " << config.format_version << '\n';
  std::string section;
  for (const auto &field : fields()) {
    if (field.section != section) {
      section = field.section;
      out << "\n[" << section << "]\n";
    }
    out << field.key << " = " << field.get(config) << '\n';
  }
  return out.str();
}

RunConfig parse_config(const std::string &text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }

  const auto version = tree.get_optional<int>("format_version");
  if (!version) throw std::invalid_argument("config: missing format_version");
  if (*version != kConfigFormatVersion)
    throw std::invalid_argument("config: unsupported format_version " + std::to_string(*version));

  RunConfig config = default_config();
  std::set<std::string> known;
  for (const auto &field : fields()) known.insert(field.section + "." + field.key);

  for (const auto &[name, node] : tree) {
    if (name == "format_version") continue;
    if (node.empty())
      throw std::invalid_argument("config: unknown top-level key '" + name + "'");
    for (const auto &[key, value] : node) {
      if (!known.count(name + "." + key))
        throw std::invalid_argument("config: unknown key [" + name + "] " + key);
    }
  }
  for (const auto &field : fields()) {
    const auto value = tree.get_optional<std::string>(pt::ptree::path_type(field.section + "." + field.key, '.'));
    if (!value) continue;
    try {
      field.set(config, trim(*value));
    } catch (const std::exception &e) {
      throw std::invalid_argument("config: [" + field.section + "] " + field.key + ": " + e.what());
    }
  }
  return config;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto &field : fields()) keys.push_back(field.section + "." + field.key);
  return keys;
}

void set_config_value(RunConfig &config, const std::string &key, const std::string &value) {
  for (const auto &field : fields()) {
    if (field.section + "." + field.key != key) continue;
    try {
      field.set(config, trim(value));
    } catch (const std::exception &e) {
      throw std::invalid_argument(key + ": " + e.what());
    }
    return;
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_hash(const RunConfig &config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace vcselrc
