#pragma once

#include "diph/estimation.hpp"
#include "diph/kernel.hpp"
#include "diph/simgen.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace diph {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kCsvSchemaVersion = 1;

// Hyperedge text: one hyperedge per line, node labels separated by the
// delimiter, surrounding whitespace trimmed.
struct ParseOptions {
  char delimiter = ',';
  // Nodes appearing in fewer edges are removed from every edge.
  int min_node_count = 2;
  // Blank lines become empty hyperedges instead of being skipped.
  bool blank_as_empty = false;
};

struct ParseResult {
  Hypergraph graph;
  std::vector<std::string> warnings;
};

// Vocabulary in first-appearance order. Throws DataError on invalid UTF-8 or
// when no node survives the frequency filter.
ParseResult parse_hyperedges(std::istream& in, const ParseOptions& opts = {});
ParseResult read_hyperedges(const std::string& path, const ParseOptions& opts = {});

// Inverse of parse_hyperedges (labels, or indices without a vocabulary).
void write_hyperedges(const Hypergraph& H, std::ostream& out, char delimiter = ',');

// Persisted model: a line-oriented, tab-separated UTF-8 text with a
// 64-bit FNV-1a checksum trailer. Floats carry 17 significant digits.
//
//   diph-model  <version>
//   n_v         <n>
//   d           <d>
//   vocab       0|1
//   beta        <beta>
//   provenance  <key>  <value>          (zero or more)
//   node        <i>  <label>  <alpha>  <V_i1> ... <V_id>   (n lines)
//   checksum    <16 hex digits over every preceding byte>
struct ModelFile {
  LatentConfig config;
  std::vector<std::string> vocab;  // empty when nodes are unlabelled
  std::vector<std::pair<std::string, std::string>> provenance;
};

ModelFile make_model_file(const FitResult& result, const FitOptions& opts,
                          std::vector<std::string> vocab);

std::string serialize_model(const ModelFile& model);
// Throws VersionError, ChecksumError or DataError.
ModelFile parse_model(const std::string& text);

void write_model(const ModelFile& model, const std::string& path);
void write_model(const FitResult& result, const FitOptions& opts,
                 std::vector<std::string> vocab, const std::string& path);
ModelFile read_model(const std::string& path);

// Report outputs. Every CSV row starts with a schema_version column;
// the seconds column is only emitted when with_timing is set.
void write_report_csv(const ExperimentReport& report, std::ostream& out,
                      bool with_timing = false);
void write_report_json(const ExperimentReport& report, std::ostream& out,
                       bool with_timing = false);

std::string format_double(double value);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace diph
