#include "diph/io.hpp"

#include "diph/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace diph {

namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (int k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, delim)) out.push_back(cur);
  if (!s.empty() && s.back() == delim) out.emplace_back();
  return out;
}

double parse_double(const std::string& token, int line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw DataError("model file line " + std::to_string(line) + ": bad number '" + token + "'");
  }
  return v;
}

int parse_int(const std::string& token, int line) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(token, &pos);
    if (pos == token.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError("model file line " + std::to_string(line) + ": bad integer '" + token + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ParseResult parse_hyperedges(std::istream& in, const ParseOptions& opts) {
  ParseResult result;
  std::vector<std::string> vocab;
  std::map<std::string, int> index;
  std::vector<std::vector<int>> raw_edges;
  std::vector<int> counts;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!valid_utf8(line)) {
      throw DataError("line " + std::to_string(line_no) + " is not valid UTF-8");
    }
    const std::string body = trim(line);
    if (body.empty()) {
      if (opts.blank_as_empty) raw_edges.emplace_back();
      continue;
    }
    std::vector<int> edge;
    bool warned_dup = false;
    for (const std::string& raw : split(body, opts.delimiter)) {
      const std::string token = trim(raw);
      if (token.empty()) {
        result.warnings.push_back("line " + std::to_string(line_no) + ": empty token ignored");
        continue;
      }
      auto [it, inserted] = index.emplace(token, static_cast<int>(vocab.size()));
      if (inserted) {
        vocab.push_back(token);
        counts.push_back(0);
      }
      if (std::find(edge.begin(), edge.end(), it->second) != edge.end()) {
        if (!warned_dup) {
          result.warnings.push_back("line " + std::to_string(line_no) +
                                    ": duplicate token '" + token + "' removed");
          warned_dup = true;
        }
        continue;
      }
      edge.push_back(it->second);
      ++counts[it->second];
    }
    raw_edges.push_back(std::move(edge));
  }

  // Frequency filter, preserving first-appearance order.
  std::vector<int> remap(vocab.size(), -1);
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (counts[i] >= opts.min_node_count) {
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(vocab[i]);
    }
  }
  if (kept.empty()) throw DataError("no node survives the minimum-count filter");
  const std::size_t dropped = vocab.size() - kept.size();
  if (dropped > 0) {
    result.warnings.push_back(std::to_string(dropped) + " node(s) appearing in fewer than " +
                              std::to_string(opts.min_node_count) + " edges removed");
  }

  std::vector<Subset> edges;
  edges.reserve(raw_edges.size());
  for (const auto& raw : raw_edges) {
    Subset e;
    for (int i : raw) {
      if (remap[i] >= 0) e.push_back(remap[i]);
    }
    std::sort(e.begin(), e.end());
    edges.push_back(std::move(e));
  }
  const int n = static_cast<int>(kept.size());
  result.graph = Hypergraph(n, std::move(edges), std::move(kept));
  return result;
}

ParseResult read_hyperedges(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open hyperedge file '" + path + "'");
  return parse_hyperedges(in, opts);
}

void write_hyperedges(const Hypergraph& H, std::ostream& out, char delimiter) {
  for (const Subset& e : H.edges()) {
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (k > 0) out << delimiter;
      out << H.label(e[k]);
    }
    out << '\n';
  }
}

ModelFile make_model_file(const FitResult& result, const FitOptions& opts,
                          std::vector<std::string> vocab) {
  ModelFile m;
  m.config = result.config;
  m.vocab = std::move(vocab);
  m.provenance = {
      {"d", std::to_string(opts.d)},
      {"max_iters", std::to_string(opts.max_iters)},
      {"step_size", format_double(opts.step_size)},
      {"backtrack_factor", format_double(opts.backtrack_factor)},
      {"tol", format_double(opts.tol)},
      {"batch_size", opts.full_batch ? std::string("full") : std::to_string(opts.batch_size)},
      {"n_inits", std::to_string(opts.n_inits)},
      {"floor_eps", format_double(opts.floor_eps)},
      {"seed", std::to_string(opts.seed)},
      {"objective", format_double(result.final_objective)},
      {"aic", format_double(result.aic)},
      {"converged", result.converged ? "true" : "false"},
      {"iterations", std::to_string(result.iterations_used)},
  };
  return m;
}

std::string serialize_model(const ModelFile& model) {
  require_valid(model.config);
  const int n = model.config.num_nodes();
  const int d = model.config.dim();
  if (!model.vocab.empty() && static_cast<int>(model.vocab.size()) != n) {
    throw ValidationError("vocabulary length does not match the model");
  }
  auto check_field = [](const std::string& s, const char* what) {
    if (s.find_first_of("\t\r\n") != std::string::npos) {
      throw ValidationError(std::string(what) + " may not contain tabs or newlines: '" + s + "'");
    }
  };
  std::ostringstream out;
  out << "diph-model\t" << kModelFormatVersion << '\n';
  out << "n_v\t" << n << '\n';
  out << "d\t" << d << '\n';
  out << "vocab\t" << (model.vocab.empty() ? 0 : 1) << '\n';
  out << "beta\t" << format_double(model.config.beta) << '\n';
  for (const auto& [key, value] : model.provenance) {
    check_field(key, "provenance key");
    check_field(value, "provenance value");
    out << "provenance\t" << key << '\t' << value << '\n';
  }
  for (int i = 0; i < n; ++i) {
    const std::string label = model.vocab.empty() ? std::to_string(i) : model.vocab[i];
    check_field(label, "label");
    out << "node\t" << i << '\t' << label << '\t' << format_double(model.config.alpha(i));
    for (int c = 0; c < d; ++c) out << '\t' << format_double(model.config.V(i, c));
    out << '\n';
  }
  std::string body = out.str();
  body += "checksum\t" + hex64(fnv1a64(body)) + "\n";
  return body;
}

ModelFile parse_model(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      const auto end = text.find('\n', start);
      if (end == std::string::npos) {
        lines.push_back(text.substr(start));
        break;
      }
      lines.push_back(text.substr(start, end - start));
      start = end + 1;
    }
  }
  if (lines.empty()) throw DataError("model file is empty");
  const auto header = split(lines[0], '\t');
  if (header.size() != 2 || header[0] != "diph-model") {
    throw DataError("not a model file (missing 'diph-model' header)");
  }
  int version = 0;
  try {
    version = parse_int(header[1], 1);
  } catch (const DataError&) {
    throw VersionError("unreadable model format version '" + header[1] + "'");
  }
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version) +
                       " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }

  // Checksum trailer: last line, covering every byte before it.
  const auto pos = text.rfind("checksum\t");
  if (pos == std::string::npos || (pos > 0 && text[pos - 1] != '\n')) {
    throw ChecksumError("model file has no checksum trailer (truncated?)");
  }
  const auto eol = text.find('\n', pos);
  if (eol != std::string::npos && eol != text.size() - 1) {
    throw ChecksumError("data after the checksum trailer");
  }
  const std::string trailer = trim(text.substr(pos + 9, eol == std::string::npos ? eol : eol - pos - 9));
  if (trailer != hex64(fnv1a64(std::string_view(text).substr(0, pos)))) {
    throw ChecksumError("model file checksum mismatch");
  }

  ModelFile model;
  int n = -1, d = -1, has_vocab = 0;
  bool have_beta = false;
  std::vector<bool> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const int line_no = static_cast<int>(ln) + 1;
    const auto fields = split(lines[ln], '\t');
    if (fields.empty() || fields[0].empty()) continue;
    const std::string& tag = fields[0];
    if (tag == "checksum") break;
    if (tag == "n_v" && fields.size() == 2) {
      n = parse_int(fields[1], line_no);
    } else if (tag == "d" && fields.size() == 2) {
      d = parse_int(fields[1], line_no);
    } else if (tag == "vocab" && fields.size() == 2) {
      has_vocab = parse_int(fields[1], line_no);
    } else if (tag == "beta" && fields.size() == 2) {
      model.config.beta = parse_double(fields[1], line_no);
      have_beta = true;
    } else if (tag == "provenance" && fields.size() == 3) {
      model.provenance.emplace_back(fields[1], fields[2]);
    } else if (tag == "node") {
      if (n <= 0 || d <= 0) throw DataError("node line before n_v and d");
      if (static_cast<int>(fields.size()) != 4 + d) {
        throw DataError("model file line " + std::to_string(line_no) + ": expected " +
                        std::to_string(4 + d) + " fields");
      }
      if (model.config.V.size() == 0) {
        model.config.V.resize(n, d);
        model.config.alpha.resize(n);
        seen.assign(n, false);
        if (has_vocab) model.vocab.resize(n);
      }
      const int i = parse_int(fields[1], line_no);
      if (i < 0 || i >= n || seen[i]) {
        throw DataError("model file line " + std::to_string(line_no) + ": bad node index");
      }
      seen[i] = true;
      if (has_vocab) model.vocab[i] = fields[2];
      model.config.alpha(i) = parse_double(fields[3], line_no);
      for (int c = 0; c < d; ++c) model.config.V(i, c) = parse_double(fields[4 + c], line_no);
    } else {
      throw DataError("model file line " + std::to_string(line_no) + ": unrecognized record");
    }
  }
  if (n <= 0 || d <= 0 || !have_beta) throw DataError("model file is missing n_v, d or beta");
  if (seen.size() != static_cast<std::size_t>(n) ||
      std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("model file does not list every node");
  }
  const auto violations = validate_config(model.config);
  if (!violations.empty()) {
    throw DataError("model file holds an invalid configuration: " + violations.front().message);
  }
  return model;
}

void write_model(const ModelFile& model, const std::string& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_model(const FitResult& result, const FitOptions& opts,
                 std::vector<std::string> vocab, const std::string& path) {
  write_model(make_model_file(result, opts, std::move(vocab)), path);
}

ModelFile read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void write_report_csv(const ExperimentReport& report, std::ostream& out, bool with_timing) {
  out << "schema_version,simulation,n_v,d,n_e,replicate,seed,fit_ok,final_objective,"
         "rel_err_V,rel_err_beta,rel_err_alpha,rel_err_L,acc_diph,acc_nsc,acc_score";
  if (with_timing) out << ",seconds";
  out << '\n';
  for (const auto& r : report.records) {
    auto num = [&](double v) { return r.fit_ok ? format_double(v) : std::string(); };
    auto acc = [&](double v) { return r.fit_ok && v >= 0.0 ? format_double(v) : std::string(); };
    out << kCsvSchemaVersion << ',' << r.simulation << ',' << r.n_v << ',' << r.d << ','
        << r.n_e << ',' << r.replicate << ',' << r.seed << ',' << (r.fit_ok ? 1 : 0) << ','
        << num(r.final_objective) << ',' << num(r.errors.V) << ',' << num(r.errors.beta) << ','
        << num(r.errors.alpha) << ',' << num(r.errors.L) << ',' << acc(r.acc_diph) << ','
        << acc(r.acc_nsc) << ',' << acc(r.acc_score);
    if (with_timing) out << ',' << format_double(r.seconds);
    out << '\n';
  }
}

void write_report_json(const ExperimentReport& report, std::ostream& out, bool with_timing) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kCsvSchemaVersion;
  doc["kind"] = "diph-experiment-report";
  auto& rows = doc["records"] = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    nlohmann::ordered_json row;
    row["simulation"] = r.simulation;
    row["n_v"] = r.n_v;
    row["d"] = r.d;
    row["n_e"] = r.n_e;
    row["replicate"] = r.replicate;
    row["seed"] = r.seed;
    row["fit_ok"] = r.fit_ok;
    if (r.fit_ok) {
      row["final_objective"] = r.final_objective;
      row["rel_err"] = {{"V", r.errors.V}, {"beta", r.errors.beta},
                        {"alpha", r.errors.alpha}, {"L", r.errors.L}};
      if (r.acc_diph >= 0.0) {
        row["accuracy"] = {{"diph", r.acc_diph}, {"nsc", r.acc_nsc}, {"score", r.acc_score}};
      }
    } else {
      row["error"] = r.error;
    }
    if (with_timing) row["seconds"] = r.seconds;
    rows.push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace diph
