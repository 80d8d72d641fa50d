#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vcselrc {

/// Recorded traces as stored on disk.
///
/// Layout:
///   #nodes=<J> #sample_rate=<Hz> #symbol_rate=<Hz> #symbols=<N> #seed=<u64>
///   #node_ids=<id>,<id>,...          (optional; defaults to 0..J-1)
///   <sample_index>,<node_0>,...,<node_{J-1}>
/// Values are written with 17 significant digits so a write/read cycle is
/// bit-exact.
struct TraceFile {
  Eigen::MatrixXd traces; // samples x nodes
  double sample_rate = 0.0;
  double symbol_rate = 0.0;
  std::size_t symbols = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> node_ids;
};

enum class TraceErrorKind {
  malformed_header,
  column_count,
  samples_per_symbol,
  length_mismatch,
  bad_value,
};

std::string to_string(TraceErrorKind kind);

class TraceFormatError : public std::runtime_error {
public:
  TraceFormatError(TraceErrorKind kind, std::size_t byte_offset,
                   const std::string &detail);
  TraceErrorKind kind;
  std::size_t byte_offset;
};

void write_trace_file(std::ostream &out, const TraceFile &file);
void write_trace_file(const std::filesystem::path &path, const TraceFile &file);

/// Parses and validates a trace file; every defect raises TraceFormatError
/// with its own kind and the byte offset where it was found.
TraceFile parse_trace_file(const std::string &contents);
TraceFile read_trace_file(const std::filesystem::path &path);

} // namespace vcselrc
