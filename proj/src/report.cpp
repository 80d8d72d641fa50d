#include "vcselrc/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace vcselrc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string where(const GridPoint &p) {
  return fmt(p.epsilon) + ',' + fmt(p.detuning_nm) + ',' + to_string(p.mode);
}

// One value-vs-m figure with a trivial-guess curve appended.
void value_figure(const SweepResult &result, const std::filesystem::path &path,
                  const std::string &task, const std::string &metric,
                  const std::string &index_name) {
  auto out = open_csv(path);
  out << index_name << ',' << metric << ",epsilon,detuning_nm,mode\n";
  std::map<std::size_t, double> trivial;
  for (const auto &p : result.points) {
    if (p.error) continue;
    for (const auto &r : p.records) {
      if (r.task != task || r.metric != metric) continue;
      out << r.m_or_k << ',' << fmt(r.value) << ',' << where(p.point) << '\n';
      trivial[r.m_or_k] = r.baseline;
    }
  }
  for (const auto &[m, base] : trivial) out << m << ',' << fmt(base) << ",,,trivial\n";
}

} // namespace

std::vector<std::filesystem::path> emit_figures(const SweepResult &result,
                                                const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  const auto memory = dir / "fig_memory.csv";
  {
    auto out = open_csv(memory);
    out << "k,M_k,epsilon,detuning_nm,mode\n";
    for (const auto &p : result.points) {
      if (p.error) continue;
      for (const auto &r : p.records)
        if (r.task == "memory" && r.metric == "memory_correlation")
          out << r.m_or_k << ',' << fmt(r.value) << ',' << where(p.point) << '\n';
    }
  }
  written.push_back(memory);

  value_figure(result, dir / "fig_hr.csv", "hr", "ber", "m");
  written.push_back(dir / "fig_hr.csv");
  value_figure(result, dir / "fig_dac.csv", "dac", "rmse", "m");
  written.push_back(dir / "fig_dac.csv");

  const auto xor_table = dir / "table_xor.csv";
  {
    auto out = open_csv(xor_table);
    out << "m,epsilon,detuning_nm,mode,ber,ber_trained_threshold,baseline\n";
    for (const auto &p : result.points) {
      if (p.error) continue;
      std::map<std::size_t, std::map<std::string, const TaskRecord *>> by_m;
      for (const auto &r : p.records)
        if (r.task == "xor") by_m[r.m_or_k][r.metric] = &r;
      for (const auto &[m, metrics] : by_m) {
        const auto ber = metrics.find("ber");
        const auto trained = metrics.find("ber_trained_threshold");
        out << m << ',' << where(p.point) << ','
            << (ber != metrics.end() ? fmt(ber->second->value) : "") << ','
            << (trained != metrics.end() ? fmt(trained->second->value) : "") << ','
            << fmt(0.5) << '\n';
      }
    }
  }
  written.push_back(xor_table);
  return written;
}

std::string summarize(const SweepResult &result) {
  std::ostringstream out;
  for (const auto &p : result.points) {
    out << to_string(p.point.mode) << " eps=" << p.point.epsilon
        << " dl=" << p.point.detuning_nm << "nm";
    if (p.error) {
      out << " FAILED: " << *p.error << '\n';
      continue;
    }
    out << '\n';
    for (const auto &r : p.records) {
      if (r.metric == "memory_correlation") continue;
      char line[160];
      std::snprintf(line, sizeof line, "  %-6s %2zu %-22s %.4f (trivial %.4f, fold std %.4f)\n",
                    r.task.c_str(), r.m_or_k, r.metric.c_str(), r.value, r.baseline, r.fold_std);
      out << line;
    }
  }
  return out.str();
}

} // namespace vcselrc
