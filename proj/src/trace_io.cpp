#include "vcselrc/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

namespace vcselrc {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Line {
  std::string_view text;
  std::size_t offset;
};

std::vector<Line> split_lines(std::string_view contents) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view text = contents.substr(start, end - start);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    lines.push_back({text, start});
    start = end + 1;
  }
  return lines;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto *first = text.data();
  const auto *last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

} // namespace

std::string to_string(TraceErrorKind kind) {
  switch (kind) {
  case TraceErrorKind::malformed_header: return "malformed header";
  case TraceErrorKind::column_count: return "inconsistent column count";
  case TraceErrorKind::samples_per_symbol: return "non-integer samples per symbol";
  case TraceErrorKind::length_mismatch: return "length mismatch";
  case TraceErrorKind::bad_value: return "bad value";
  }
  return "trace error";
}

TraceFormatError::TraceFormatError(TraceErrorKind kind_, std::size_t byte_offset_,
                                   const std::string &detail)
    : std::runtime_error(to_string(kind_) + " at byte " + std::to_string(byte_offset_) +
                         ": " + detail),
      kind(kind_), byte_offset(byte_offset_) {}

void write_trace_file(std::ostream &out, const TraceFile &file) {
  const auto cols = static_cast<std::size_t>(file.traces.cols());
  out << "#nodes=" << cols << " #sample_rate=" << format_double(file.sample_rate)
      << " #symbol_rate=" << format_double(file.symbol_rate)
      << " #symbols=" << file.symbols << " #seed=" << file.seed << '\n';
  if (!file.node_ids.empty()) {
    out << "#node_ids=";
    for (std::size_t k = 0; k < file.node_ids.size(); ++k)
      out << (k ? "," : "") << file.node_ids[k];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < file.traces.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < file.traces.cols(); ++j)
      out << ',' << format_double(file.traces(i, j));
    out << '\n';
  }
}

void write_trace_file(const std::filesystem::path &path, const TraceFile &file) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_file(out, file);
}

TraceFile parse_trace_file(const std::string &contents) {
  const auto lines = split_lines(contents);
  std::map<std::string, std::pair<std::string, std::size_t>> header;
  std::size_t first_row = 0;
  for (; first_row < lines.size(); ++first_row) {
    const Line &line = lines[first_row];
    if (line.text.empty() || line.text.front() != '#') break;
    std::size_t pos = 0;
    while (pos < line.text.size()) {
      while (pos < line.text.size() && line.text[pos] == ' ') ++pos;
      if (pos >= line.text.size()) break;
      std::size_t end = line.text.find(' ', pos);
      if (end == std::string_view::npos) end = line.text.size();
      const std::string_view token = line.text.substr(pos, end - pos);
      const std::size_t eq = token.find('=');
      if (token.front() != '#' || eq == std::string_view::npos)
        throw TraceFormatError(TraceErrorKind::malformed_header, line.offset + pos,
                               "expected #key=value, got '" + std::string(token) + "'");
      header[std::string(token.substr(1, eq - 1))] = {std::string(token.substr(eq + 1)),
                                                      line.offset + pos};
      pos = end;
    }
  }

  auto require = [&](const std::string &key) -> const std::pair<std::string, std::size_t> & {
    const auto it = header.find(key);
    if (it == header.end())
      throw TraceFormatError(TraceErrorKind::malformed_header, 0, "missing #" + key);
    return it->second;
  };
  auto header_number = [&](const std::string &key, auto tag) {
    using T = decltype(tag);
    const auto &[text, offset] = require(key);
    const auto value = parse_number<T>(text);
    if (!value)
      throw TraceFormatError(TraceErrorKind::malformed_header, offset,
                             "bad value for #" + key + ": '" + text + "'");
    return *value;
  };

  TraceFile file;
  const auto nodes = header_number("nodes", std::size_t{});
  file.sample_rate = header_number("sample_rate", double{});
  file.symbol_rate = header_number("symbol_rate", double{});
  file.symbols = header_number("symbols", std::size_t{});
  file.seed = header_number("seed", std::uint64_t{});
  if (!(file.sample_rate > 0.0) || !(file.symbol_rate > 0.0))
    throw TraceFormatError(TraceErrorKind::malformed_header, require("sample_rate").second,
                           "rates must be positive");

  const double ratio = file.sample_rate / file.symbol_rate;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * rounded)
    throw TraceFormatError(TraceErrorKind::samples_per_symbol, require("sample_rate").second,
                           "sample_rate / symbol_rate = " + format_double(ratio));
  const auto sps = static_cast<std::size_t>(rounded);

  if (const auto it = header.find("node_ids"); it != header.end()) {
    std::string_view list = it->second.first;
    std::size_t pos = 0;
    while (pos <= list.size() && !list.empty()) {
      std::size_t end = list.find(',', pos);
      if (end == std::string_view::npos) end = list.size();
      const auto id = parse_number<std::size_t>(list.substr(pos, end - pos));
      if (!id)
        throw TraceFormatError(TraceErrorKind::malformed_header, it->second.second,
                               "bad node id list");
      file.node_ids.push_back(*id);
      pos = end + 1;
    }
    if (file.node_ids.size() != nodes)
      throw TraceFormatError(TraceErrorKind::malformed_header, it->second.second,
                             "node id list does not match #nodes");
  } else {
    for (std::size_t j = 0; j < nodes; ++j) file.node_ids.push_back(j);
  }

  std::vector<const Line *> rows;
  for (std::size_t i = first_row; i < lines.size(); ++i)
    if (!lines[i].text.empty()) rows.push_back(&lines[i]);

  file.traces.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nodes));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Line &line = *rows[r];
    std::size_t pos = 0;
    std::size_t field = 0;
    while (true) {
      std::size_t end = line.text.find(',', pos);
      const bool last = end == std::string_view::npos;
      if (last) end = line.text.size();
      const std::string_view cell = line.text.substr(pos, end - pos);
      if (field > nodes)
        throw TraceFormatError(TraceErrorKind::column_count, line.offset + pos,
                               "row " + std::to_string(r) + " has more than " +
                                   std::to_string(nodes + 1) + " fields");
      if (field == 0) {
        const auto index = parse_number<std::size_t>(cell);
        if (!index || *index != r)
          throw TraceFormatError(TraceErrorKind::bad_value, line.offset + pos,
                                 "expected sample index " + std::to_string(r));
      } else {
        const auto value = parse_number<double>(cell);
        if (!value)
          throw TraceFormatError(TraceErrorKind::bad_value, line.offset + pos,
                                 "'" + std::string(cell) + "' is not a number");
        file.traces(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(field - 1)) = *value;
      }
      ++field;
      if (last) break;
      pos = end + 1;
    }
    if (field != nodes + 1)
      throw TraceFormatError(TraceErrorKind::column_count, line.offset,
                             "row " + std::to_string(r) + " has " + std::to_string(field) +
                                 " fields, expected " + std::to_string(nodes + 1));
  }

  if (rows.size() % sps != 0) {
    const std::size_t whole = rows.size() / sps * sps;
    throw TraceFormatError(TraceErrorKind::length_mismatch, rows[whole]->offset,
                           std::to_string(rows.size()) + " samples do not fill whole " +
                               std::to_string(sps) + "-sample symbols; final symbol truncated");
  }
  if (rows.size() != file.symbols * sps)
    throw TraceFormatError(TraceErrorKind::length_mismatch, contents.size(),
                           "header announces " + std::to_string(file.symbols) +
                               " symbols, file holds " + std::to_string(rows.size() / sps));
  return file;
}

TraceFile read_trace_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_file(buf.str());
}

} // namespace vcselrc
