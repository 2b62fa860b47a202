// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numerical failure.

#include "diph/clustering.hpp"
#include "diph/dpp.hpp"
#include "diph/error.hpp"
#include "diph/estimation.hpp"
#include "diph/io.hpp"
#include "diph/metrics.hpp"
#include "diph/simgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace diph;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by fit, select-d and simulate.
struct FitFlags {
  int d = 2;
  int max_iters = FitOptions{}.max_iters;
  double step_size = FitOptions{}.step_size;
  double backtrack_factor = FitOptions{}.backtrack_factor;
  double tol = FitOptions{}.tol;
  std::string batch_size = std::to_string(FitOptions{}.batch_size);
  int n_inits = FitOptions{}.n_inits;
  double floor_eps = FitOptions{}.floor_eps;
  std::uint64_t seed = 0;

  FitOptions options() const {
    FitOptions o;
    o.d = d;
    o.max_iters = max_iters;
    o.step_size = step_size;
    o.backtrack_factor = backtrack_factor;
    o.tol = tol;
    o.n_inits = n_inits;
    o.floor_eps = floor_eps;
    o.seed = seed;
    if (batch_size == "full") {
      o.full_batch = true;
    } else {
      try {
        std::size_t pos = 0;
        o.batch_size = std::stoi(batch_size, &pos);
        if (pos != batch_size.size()) throw std::invalid_argument(batch_size);
      } catch (const std::exception&) {
        throw UsageError("--batch-size must be a positive integer or 'full'");
      }
    }
    return o;
  }
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_d) {
  if (with_d) cmd->add_option("--d", f.d, "latent dimension")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters)->capture_default_str();
  cmd->add_option("--step-size", f.step_size, "initial step")->capture_default_str();
  cmd->add_option("--backtrack-factor", f.backtrack_factor)->capture_default_str();
  cmd->add_option("--tol", f.tol, "relative objective change per epoch")->capture_default_str();
  cmd->add_option("--batch-size", f.batch_size, "edges per step, or 'full'")
      ->capture_default_str();
  cmd->add_option("--n-inits", f.n_inits, "random restarts")->capture_default_str();
  cmd->add_option("--floor-eps", f.floor_eps)->capture_default_str();
  cmd->add_option("--seed", f.seed)->capture_default_str();
}

struct EdgeFlags {
  std::string delimiter = ",";
  int min_count = ParseOptions{}.min_node_count;
  bool blank_as_empty = false;

  ParseOptions options() const {
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    return {delimiter[0], min_count, blank_as_empty};
  }
};

void add_edge_flags(CLI::App* cmd, EdgeFlags& f) {
  cmd->add_option("--delimiter", f.delimiter, "token separator")->capture_default_str();
  cmd->add_option("--min-count", f.min_count, "drop nodes in fewer edges")
      ->capture_default_str();
  cmd->add_flag("--blank-as-empty", f.blank_as_empty, "blank lines are empty hyperedges");
}

ParseResult load_edges(const std::string& path, const ParseOptions& opts) {
  ParseResult parsed = read_hyperedges(path, opts);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  return parsed;
}

std::string label_of(const ModelFile& m, int i) {
  return m.vocab.empty() ? std::to_string(i) : m.vocab[i];
}

std::map<std::string, int> label_index(const ModelFile& m) {
  std::map<std::string, int> index;
  for (int i = 0; i < m.config.num_nodes(); ++i) index.emplace(label_of(m, i), i);
  return index;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

// Comma-separated labels to a sorted subset; unknown labels are named.
Subset parse_labels(const std::string& text, const ModelFile& m) {
  const auto index = label_index(m);
  Subset out;
  std::vector<std::string> unknown;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    const auto it = index.find(token);
    if (it == index.end()) {
      unknown.push_back(token);
    } else if (std::find(out.begin(), out.end(), it->second) == out.end()) {
      out.push_back(it->second);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown node label(s):";
    for (const auto& u : unknown) msg += " '" + u + "'";
    throw DataError(msg);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Output file, or stdout when the path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw DataError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(trim(token), &pos));
      if (pos != trim(token).size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + " expects comma-separated integers");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Hypergraph determinantal point process (DiPH) toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "diph model format " + std::to_string(kModelFormatVersion));

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a hyperedge file");
  std::string fit_edges, fit_out;
  FitFlags fit_flags;
  EdgeFlags fit_edge_flags;
  bool fit_timestamp = false;
  fit_cmd->add_option("edges", fit_edges, "hyperedge file")->required();
  fit_cmd->add_option("--out", fit_out, "model file")->required();
  fit_cmd->add_flag("--timestamp", fit_timestamp, "record the wall-clock time in the model");
  add_fit_flags(fit_cmd, fit_flags, true);
  add_edge_flags(fit_cmd, fit_edge_flags);

  // select-d
  auto* sel_cmd = app.add_subcommand("select-d", "choose the latent dimension by AIC");
  std::string sel_edges, sel_out;
  int d_min = 1, d_max = 4;
  FitFlags sel_flags;
  EdgeFlags sel_edge_flags;
  sel_cmd->add_option("edges", sel_edges, "hyperedge file")->required();
  sel_cmd->add_option("--d-min", d_min)->capture_default_str();
  sel_cmd->add_option("--d-max", d_max)->capture_default_str();
  sel_cmd->add_option("--out", sel_out, "AIC table CSV (default stdout)");
  add_fit_flags(sel_cmd, sel_flags, false);
  add_edge_flags(sel_cmd, sel_edge_flags);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw hyperedges from a model");
  std::string sample_model, sample_out;
  int sample_n = 1;
  std::optional<int> sample_size;
  std::uint64_t sample_seed = 0;
  sample_cmd->add_option("model", sample_model, "model file")->required();
  sample_cmd->add_option("--n", sample_n, "number of draws")->capture_default_str();
  sample_cmd->add_option("--size", sample_size, "condition on this edge size");
  sample_cmd->add_option("--seed", sample_seed)->capture_default_str();
  sample_cmd->add_option("--out", sample_out, "hyperedge file (default stdout)");

  // complete
  auto* complete_cmd = app.add_subcommand("complete", "rank completions of a partial edge");
  std::string complete_model, complete_given, complete_out;
  int complete_top = 5;
  complete_cmd->add_option("model", complete_model, "model file")->required();
  complete_cmd->add_option("--given", complete_given, "comma-separated labels")->required();
  complete_cmd->add_option("--top", complete_top)->capture_default_str();
  complete_cmd->add_option("--out", complete_out, "CSV (default stdout)");

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "probabilities and marginals of an edge");
  std::string probe_model, probe_edge, probe_out;
  probe_cmd->add_option("model", probe_model, "model file")->required();
  probe_cmd->add_option("--edge", probe_edge, "comma-separated labels")->required();
  probe_cmd->add_option("--out", probe_out, "JSON (default stdout)");

  // cluster
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster the nodes of a model");
  std::string cluster_model, cluster_method = "line-kmeans", cluster_edges, cluster_out;
  int cluster_k = 2;
  std::optional<double> cluster_tau;
  std::uint64_t cluster_seed = 0;
  EdgeFlags cluster_edge_flags;
  cluster_edge_flags.min_count = 1;
  cluster_cmd->add_option("model", cluster_model, "model file")->required();
  cluster_cmd->add_option("--k", cluster_k, "number of clusters")->required();
  cluster_cmd->add_option("--method", cluster_method)
      ->check(CLI::IsMember({"line-kmeans", "nsc", "score"}))
      ->capture_default_str();
  cluster_cmd->add_option("--edges", cluster_edges, "hyperedge file (nsc, score)");
  cluster_cmd->add_option("--tau", cluster_tau, "NSC degree regularizer (default 0.1)");
  cluster_cmd->add_option("--seed", cluster_seed)->capture_default_str();
  cluster_cmd->add_option("--out", cluster_out, "labels CSV (default stdout)");
  add_edge_flags(cluster_cmd, cluster_edge_flags);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run a simulation grid");
  std::string sim_design, sim_dims = "2,3,4", sim_edges = "500,1000,2000,3000", sim_out,
                          sim_json;
  SimGrid grid;
  std::optional<double> sim_kappa;
  std::optional<int> sim_clusters;
  bool sim_timing = false;
  FitFlags sim_flags;
  sim_cmd->add_option("design", sim_design, "sim1 (uniform) or sim2 (clustered)")
      ->required()
      ->check(CLI::IsMember({"sim1", "sim2"}));
  sim_cmd->add_option("--n-v", grid.n_v)->capture_default_str();
  sim_cmd->add_option("--dims", sim_dims, "comma-separated latent dimensions")
      ->capture_default_str();
  sim_cmd->add_option("--n-edges", sim_edges, "comma-separated edge counts")
      ->capture_default_str();
  sim_cmd->add_option("--replicates", grid.replicates)->capture_default_str();
  sim_cmd->add_option("--beta", grid.beta)->capture_default_str();
  sim_cmd->add_option("--kappa", sim_kappa, "vMF concentration (sim2, default 10)");
  sim_cmd->add_option("--clusters", sim_clusters, "cluster count (sim2, default 3)");
  sim_cmd->add_option("--out", sim_out, "report CSV")->required();
  sim_cmd->add_option("--json", sim_json, "also write a JSON report");
  sim_cmd->add_flag("--timing", sim_timing, "include per-replicate seconds");
  add_fit_flags(sim_cmd, sim_flags, false);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "compare an estimate with a reference model");
  std::string eval_hat, eval_star, eval_out;
  eval_cmd->add_option("--model-hat", eval_hat, "estimated model")->required();
  eval_cmd->add_option("--model-star", eval_star, "reference model")->required();
  eval_cmd->add_option("--out", eval_out, "JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (fit_cmd->parsed()) {
    const ParseResult parsed = load_edges(fit_edges, fit_edge_flags.options());
    const FitOptions opts = fit_flags.options();
    const FitResult result = fit(parsed.graph, opts);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    ModelFile model = make_model_file(result, opts, parsed.graph.vocab());
    if (fit_timestamp) model.provenance.emplace_back("timestamp", utc_timestamp());
    write_model(model, fit_out);
    std::cout << "n_v " << parsed.graph.num_nodes() << '\n'
              << "n_e " << parsed.graph.num_edges() << '\n'
              << "final_objective " << format_double(result.final_objective) << '\n'
              << "aic " << format_double(result.aic) << '\n'
              << "converged " << (result.converged ? "true" : "false") << '\n'
              << "iterations " << result.iterations_used << '\n';
    return 0;
  }

  if (sel_cmd->parsed()) {
    if (d_min < 1 || d_max < d_min) throw UsageError("need 1 <= --d-min <= --d-max");
    const ParseResult parsed = load_edges(sel_edges, sel_edge_flags.options());
    std::vector<int> candidates;
    for (int d = d_min; d <= d_max; ++d) candidates.push_back(d);
    FitOptions opts = sel_flags.options();
    opts.d = d_min;
    const DimensionSelection sel = select_dimension(parsed.graph, candidates, opts);
    Output out(sel_out);
    out.stream() << "schema_version,d,final_objective,aic,converged,selected,error\n";
    for (const auto& f : sel.fits) {
      out.stream() << kCsvSchemaVersion << ',' << f.d << ',';
      if (f.result) {
        out.stream() << format_double(f.result->final_objective) << ','
                     << format_double(f.result->aic) << ','
                     << (f.result->converged ? 1 : 0) << ',';
      } else {
        out.stream() << ",,,";
      }
      out.stream() << (f.d == sel.best_d ? 1 : 0) << ",\"" << f.error << "\"\n";
    }
    if (!sel_out.empty() && sel_out != "-") std::cout << "best_d " << sel.best_d << '\n';
    return 0;
  }

  if (sample_cmd->parsed()) {
    if (sample_n < 0) throw UsageError("--n must be nonnegative");
    const ModelFile model = read_model(sample_model);
    const KernelMatrix L = build_kernel(model.config);
    Rng rng(sample_seed);
    Output out(sample_out);
    for (int l = 0; l < sample_n; ++l) {
      const Subset e = sample_size ? sample_k(L, *sample_size, rng) : sample(L, rng);
      for (std::size_t a = 0; a < e.size(); ++a) {
        if (a > 0) out.stream() << ',';
        out.stream() << label_of(model, e[a]);
      }
      out.stream() << '\n';
    }
    return 0;
  }

  if (complete_cmd->parsed()) {
    if (complete_top < 1) throw UsageError("--top must be positive");
    const ModelFile model = read_model(complete_model);
    const Subset given = parse_labels(complete_given, model);
    const auto ranked = complete_edge(build_kernel(model.config), given, complete_top);
    Output out(complete_out);
    out.stream() << "schema_version,rank,node,log_prob\n";
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      out.stream() << kCsvSchemaVersion << ',' << r + 1 << ',' << label_of(model, ranked[r].node)
                   << ',' << format_double(ranked[r].log_prob) << '\n';
    }
    return 0;
  }

  if (probe_cmd->parsed()) {
    const ModelFile model = read_model(probe_model);
    const Subset e = parse_labels(probe_edge, model);
    const KernelMatrix L = build_kernel(model.config);
    const MarginalKernel K = marginal_kernel(L);
    const double lp = log_prob(L, e);
    nlohmann::ordered_json doc;
    doc["schema_version"] = kCsvSchemaVersion;
    doc["kind"] = "diph-probe";
    auto& labels = doc["edge"] = nlohmann::ordered_json::array();
    for (int i : e) labels.push_back(label_of(model, i));
    doc["log_prob"] = json_number(lp);
    doc["prob"] = std::exp(lp);
    auto& incl = doc["inclusion"] = nlohmann::ordered_json::object();
    for (int i : e) incl[label_of(model, i)] = K.inclusion(i);
    doc["joint_inclusion"] = principal_submatrix(K.K, e).determinant();
    doc["expected_size"] = expected_size(L);
    Output out(probe_out);
    out.stream() << doc.dump(2) << '\n';
    return 0;
  }

  if (cluster_cmd->parsed()) {
    const bool spectral = cluster_method != "line-kmeans";
    if (spectral && cluster_edges.empty()) {
      throw UsageError("--method " + cluster_method + " needs --edges");
    }
    if (!spectral && !cluster_edges.empty()) {
      throw UsageError("--edges conflicts with --method line-kmeans");
    }
    if (cluster_tau && cluster_method != "nsc") {
      throw UsageError("--tau only applies to --method nsc");
    }
    const ModelFile model = read_model(cluster_model);
    KMeansOptions km;
    km.seed = cluster_seed;
    ClusterResult res;
    if (!spectral) {
      res = line_kmeans(model.config.V, cluster_k, km);
    } else {
      // Edges are mapped onto the model's nodes; labels unknown to the model
      // (e.g. removed by the frequency filter at fit time) are dropped.
      const ParseResult parsed = load_edges(cluster_edges, cluster_edge_flags.options());
      const auto index = label_index(model);
      std::vector<int> remap(parsed.graph.num_nodes(), -1);
      int unknown = 0;
      for (int i = 0; i < parsed.graph.num_nodes(); ++i) {
        const auto it = index.find(parsed.graph.label(i));
        if (it == index.end()) {
          ++unknown;
        } else {
          remap[i] = it->second;
        }
      }
      if (unknown > 0) {
        std::cerr << "warning: " << unknown << " label(s) in --edges are not in the model\n";
      }
      std::vector<Subset> edges;
      for (const Subset& e : parsed.graph.edges()) {
        Subset mapped;
        for (int i : e) {
          if (remap[i] >= 0) mapped.push_back(remap[i]);
        }
        std::sort(mapped.begin(), mapped.end());
        edges.push_back(std::move(mapped));
      }
      const WeightedAdjacency A =
          clique_expansion(Hypergraph(model.config.num_nodes(), std::move(edges)));
      res = cluster_method == "nsc" ? nsc(A, cluster_k, cluster_tau.value_or(0.1), km)
                                    : score(A, cluster_k, km);
    }
    for (int i : res.fallback_nodes) {
      std::cerr << "warning: node '" << label_of(model, i)
                << "' has a zero spectral row; assigned to the nearest centroid\n";
    }
    Output out(cluster_out);
    out.stream() << "schema_version,node,label,cluster\n";
    for (int i = 0; i < model.config.num_nodes(); ++i) {
      out.stream() << kCsvSchemaVersion << ',' << i << ',' << label_of(model, i) << ','
                   << res.labels[i] << '\n';
    }
    return 0;
  }

  if (sim_cmd->parsed()) {
    const bool clustered = sim_design == "sim2";
    if (!clustered && (sim_kappa || sim_clusters)) {
      throw UsageError("--kappa and --clusters only apply to sim2");
    }
    grid.dims = parse_int_list(sim_dims, "--dims");
    grid.n_edges = parse_int_list(sim_edges, "--n-edges");
    grid.seed = sim_flags.seed;
    if (sim_kappa) grid.kappa = *sim_kappa;
    if (sim_clusters) grid.clusters = *sim_clusters;
    const FitOptions opts = sim_flags.options();
    const ProgressFn progress = [](const ReplicateRecord& r) {
      std::cerr << r.simulation << " d=" << r.d << " n_e=" << r.n_e << " rep=" << r.replicate
                << (r.fit_ok ? "" : " failed: " + r.error) << '\n';
    };
    const ExperimentReport report =
        clustered ? run_sim2(grid, opts, progress) : run_sim1(grid, opts, progress);
    {
      Output out(sim_out);
      write_report_csv(report, out.stream(), sim_timing);
    }
    if (!sim_json.empty()) {
      Output out(sim_json);
      write_report_json(report, out.stream(), sim_timing);
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    const ModelFile hat = read_model(eval_hat);
    const ModelFile star = read_model(eval_star);
    if (hat.config.num_nodes() != star.config.num_nodes() ||
        hat.config.dim() != star.config.dim()) {
      throw DataError("models differ in n_v or d");
    }
    const Matrix L_hat = build_kernel(hat.config).matrix();
    const Matrix L_star = build_kernel(star.config).matrix();
    const RelativeErrors rel = relative_errors(hat.config, star.config);
    nlohmann::ordered_json doc;
    doc["schema_version"] = kCsvSchemaVersion;
    doc["kind"] = "diph-eval";
    doc["loss"] = {{"V", loss_V(hat.config.V, star.config.V).loss},
                   {"beta", loss_beta(hat.config.beta, star.config.beta)},
                   {"alpha", loss_alpha(hat.config.alpha, star.config.alpha)},
                   {"L", loss_L(L_hat, L_star).loss}};
    doc["relative"] = {{"V", rel.V}, {"beta", rel.beta}, {"alpha", rel.alpha}, {"L", rel.L}};
    Output out(eval_out);
    out.stream() << doc.dump(2) << '\n';
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "diph: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const diph::ValidationError& e) {
    std::cerr << "diph: invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const diph::NumericalError& e) {
    std::cerr << "diph: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const diph::DataError& e) {
    std::cerr << "diph: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "diph: error: " << e.what() << '\n';
    return kExitData;
  }
}
