#include "cli.hpp"

#include "rolekit/coreview.hpp"
#include "rolekit/error.hpp"
#include "rolekit/glrd.hpp"
#include "rolekit/graphio.hpp"
#include "rolekit/model_io.hpp"
#include "rolekit/mrd.hpp"
#include "rolekit/refex.hpp"
#include "rolekit/synth.hpp"
#include "rolekit/tasks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace rolekit::cli {
namespace {

using io::format_double;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cli", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw InputError("cli", "cannot write '" + path + "'");
}

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream ss;
  w(ss);
  return ss.str();
}

LabeledMatrix load_matrix(const std::string& path) {
  std::istringstream in(read_text(path));
  return read_matrix_csv(in);
}

CooTensor load_tensor(const std::string& path) {
  std::istringstream in(read_text(path));
  return read_tensor_coo(in);
}

Model load_model(const std::string& path) { return read_model(read_text(path)); }

std::string matrix_csv(const Eigen::MatrixXd& values, std::vector<std::string> rows, std::vector<std::string> cols) {
  return render([&](std::ostream& o) { write_matrix_csv(o, LabeledMatrix{values, std::move(rows), std::move(cols)}); });
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto s = io::strip_cr(line);
    if (!s.empty() && s.front() != '#') out.emplace_back(s);
  }
  return out;
}

// Collects artifacts, then writes them together with a manifest naming the
// command line and the fully resolved option set.
class Run {
 public:
  Run(const std::vector<std::string>& args, const CLI::App& sub) : args_(args), sub_(sub) {}

  void add(const std::string& path, std::string content) { files_.emplace_back(path, std::move(content)); }

  void commit(const std::string& manifest_stem) {
    for (const auto& [path, content] : files_) write_text(path, content);
    nlohmann::json m;
    m["tool"] = "rolekit";
    m["version"] = kVersion;
    m["subcommand"] = sub_.get_name();
    m["args"] = args_;
    m["config"] = resolved_config();
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : files_) files.push_back(f.first);
    m["artifacts"] = files;
    write_text(manifest_stem + ".manifest.json", m.dump(2) + "\n");
  }

 private:
  // Every option with its effective value, as a --config file. Options left
  // unset are omitted.
  std::string resolved_config() const {
    std::istringstream in(sub_.config_to_str(true, false));
    std::string text = "[" + sub_.get_name() + "]\n", line;
    while (std::getline(in, line)) {
      if (line.size() < 3 || line.compare(line.size() - 3, 3, "=\"\"") != 0) text += line + "\n";
    }
    return text;
  }

  std::vector<std::string> args_;
  const CLI::App& sub_;
  std::vector<std::pair<std::string, std::string>> files_;
};

const std::map<std::string, tasks::Metric> kMetrics{{"euclidean", tasks::Metric::kEuclidean},
                                                    {"cosine", tasks::Metric::kCosine}};
const std::map<std::string, mrd::CoreSolver> kSolvers{{"explicit", mrd::CoreSolver::kExplicit},
                                                      {"structured", mrd::CoreSolver::kStructured}};
const std::map<std::string, coreview::GraphMode> kModes{{"clique", coreview::GraphMode::kClique},
                                                        {"tripartite", coreview::GraphMode::kTripartite}};
const std::map<std::string, coreview::StabilityOperator> kOperators{
    {"random-walk", coreview::StabilityOperator::kRandomWalk}, {"laplacian", coreview::StabilityOperator::kLaplacian}};

// ---------------------------------------------------------------------------

struct FeaturesArgs {
  std::string graph, out;
  bool directed = false, multi = false, log = false, no_sum = false, no_mean = false;
  int depth = 2;
  double prune = 0.95;
};

void add_features(CLI::App& app, FeaturesArgs& a) {
  app.add_option("--graph", a.graph, "edge list (src TAB dst [TAB weight]; with --multi: src TAB dst TAB relation [TAB weight])")
      ->required();
  app.add_option("--out", a.out, "feature CSV, or COO tensor with --multi")->required();
  app.add_flag("--directed", a.directed, "treat edges as directed");
  app.add_flag("--multi", a.multi, "multi-relational input; writes an entity x feature x relation tensor");
  app.add_option("--depth", a.depth, "recursion depth")->capture_default_str()->check(CLI::Range(0, 16));
  app.add_option("--prune", a.prune, "correlation threshold for pruning")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app.add_flag("--log", a.log, "log-scale features");
  app.add_flag("--no-sum", a.no_sum, "skip sum aggregates");
  app.add_flag("--no-mean", a.no_mean, "skip mean aggregates");
}

void run_features(const FeaturesArgs& a, Run& run) {
  refex::FeatureConfig cfg;
  cfg.max_depth = a.depth;
  cfg.prune_corr = a.prune;
  cfg.log_transform = a.log;
  cfg.use_sum = !a.no_sum;
  cfg.use_mean = !a.no_mean;
  cfg.validate();
  std::istringstream in(read_text(a.graph));
  if (a.multi) {
    const CooTensor t = refex::extract_tensor(load_multigraph(in, a.directed), cfg);
    run.add(a.out, render([&](std::ostream& o) { write_tensor_coo(o, t); }));
  } else {
    const LabeledMatrix v = refex::extract_features(load_edge_list(in, a.directed), cfg);
    run.add(a.out, render([&](std::ostream& o) { write_matrix_csv(o, v); }));
  }
}

// ---------------------------------------------------------------------------

struct GlrdArgs {
  std::string features, out, assignments_out, prior;
  Eigen::Index roles = 0;
  std::vector<std::uint64_t> seeds{0};
  int max_sweeps = 200;
  double tol = 1e-6;
  double sparsity_g = 0, sparsity_f = 0, diversity_g = 0, diversity_f = 0, alt_eps_g = 0, alt_eps_f = 0;
  CLI::Option *o_sparsity_g = nullptr, *o_sparsity_f = nullptr, *o_diversity_g = nullptr, *o_diversity_f = nullptr,
              *o_alt_g = nullptr, *o_alt_f = nullptr;
};

void add_glrd(CLI::App& app, GlrdArgs& a) {
  app.add_option("--features", a.features, "node x feature CSV")->required();
  app.add_option("--roles", a.roles, "number of roles")->required()->check(CLI::PositiveNumber);
  app.add_option("--out", a.out, "model document (JSON)")->required();
  app.add_option("--assignments-out", a.assignments_out, "role assignment matrix G as CSV");
  app.add_option("--seed", a.seeds, "seed(s); the best objective over all seeds is kept")->capture_default_str();
  app.add_option("--max-sweeps", a.max_sweeps)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--tol", a.tol, "stop when the relative objective decrease falls below this")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  a.o_sparsity_g = app.add_option("--sparsity-g", a.sparsity_g, "L1 bound on each G column")->check(CLI::NonNegativeNumber);
  a.o_sparsity_f = app.add_option("--sparsity-f", a.sparsity_f, "L1 bound on each F row")->check(CLI::NonNegativeNumber);
  a.o_diversity_g = app.add_option("--diversity-g", a.diversity_g, "bound on pairwise G column inner products")
                        ->check(CLI::NonNegativeNumber);
  a.o_diversity_f = app.add_option("--diversity-f", a.diversity_f, "bound on pairwise F row inner products")
                        ->check(CLI::NonNegativeNumber);
  app.add_option("--prior", a.prior, "prior role model for alternative discovery");
  a.o_alt_g = app.add_option("--alt-eps-g", a.alt_eps_g, "bound on inner products with prior G columns")
                  ->check(CLI::NonNegativeNumber)
                  ->needs("--prior");
  a.o_alt_f = app.add_option("--alt-eps-f", a.alt_eps_f, "bound on inner products with prior F rows")
                  ->check(CLI::NonNegativeNumber)
                  ->needs("--prior");
}

glrd::RoleModel as_role_model(Model m, const std::string& what) {
  if (auto* r = std::get_if<glrd::RoleModel>(&m)) return std::move(*r);
  throw InputError("cli", what + " is not a role model");
}

void run_glrd(const GlrdArgs& a, Run& run) {
  const LabeledMatrix v = load_matrix(a.features);
  glrd::FitOptions opts;
  opts.rank = a.roles;
  opts.max_sweeps = a.max_sweeps;
  opts.tol = a.tol;
  using glrd::ConstraintSpec;
  using glrd::Side;
  if (a.o_sparsity_g->count()) opts.g_constraints.push_back(ConstraintSpec::sparsity(Side::kG, a.sparsity_g));
  if (a.o_diversity_g->count()) opts.g_constraints.push_back(ConstraintSpec::diversity(Side::kG, a.diversity_g));
  if (a.o_sparsity_f->count()) opts.f_constraints.push_back(ConstraintSpec::sparsity(Side::kF, a.sparsity_f));
  if (a.o_diversity_f->count()) opts.f_constraints.push_back(ConstraintSpec::diversity(Side::kF, a.diversity_f));
  if (!a.prior.empty()) {
    if (!a.o_alt_g->count() && !a.o_alt_f->count()) throw ConfigError("cli", "--prior needs --alt-eps-g and/or --alt-eps-f");
    const glrd::RoleModel prior = as_role_model(load_model(a.prior), "prior");
    if (a.o_alt_g->count()) {
      if (prior.G.rows() != v.values.rows()) throw InputError("glrd", "prior G has a different node count");
      opts.g_constraints.push_back(ConstraintSpec::alternative(Side::kG, prior.G, a.alt_eps_g));
    }
    if (a.o_alt_f->count()) {
      if (prior.F.cols() != v.values.cols()) throw InputError("glrd", "prior F has a different feature count");
      opts.f_constraints.push_back(ConstraintSpec::alternative(Side::kF, prior.F, a.alt_eps_f));
    }
  }
  glrd::RoleModel m = glrd::fit_best(v.values, opts, a.seeds);
  m.row_labels = v.row_labels;
  m.feature_labels = v.col_labels;
  run.add(a.out, write_model(m));
  if (!a.assignments_out.empty()) run.add(a.assignments_out, matrix_csv(m.G, v.row_labels, numbered("role", m.rank())));
}

// ---------------------------------------------------------------------------

struct MrdArgs {
  std::string tensor, out;
  std::vector<Eigen::Index> dims;
  std::vector<std::uint64_t> seeds{0};
  double tol = 1e-6;
  int max_iters = 300;
  std::string solver = "explicit";
};

void add_tucker_options(CLI::App& app, std::vector<Eigen::Index>& dims, std::vector<std::uint64_t>& seeds, double& tol,
                        int& max_iters, std::string& solver, bool dims_required) {
  auto* d = app.add_option("--dims", dims, "core dimensions p q s")->expected(3)->check(CLI::PositiveNumber);
  if (dims_required) d->required();
  app.add_option("--seed", seeds, "seed(s); the best fit over all seeds is kept")->capture_default_str();
  app.add_option("--tol", tol)->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--max-iters", max_iters)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--core-solver", solver)->capture_default_str()->check(CLI::IsMember({"explicit", "structured"}));
}

void add_mrd(CLI::App& app, MrdArgs& a) {
  app.add_option("--tensor", a.tensor, "entity x feature x relation tensor (COO)")->required();
  app.add_option("--out", a.out, "model document (JSON)")->required();
  add_tucker_options(app, a.dims, a.seeds, a.tol, a.max_iters, a.solver, true);
}

mrd::TuckerConfig tucker_config(const std::vector<Eigen::Index>& dims, double tol, int max_iters, const std::string& solver) {
  mrd::TuckerConfig cfg;
  if (dims.size() == 3) {
    cfg.p = dims[0];
    cfg.q = dims[1];
    cfg.s = dims[2];
  }
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  cfg.core_solver = kSolvers.at(solver);
  return cfg;
}

mrd::TuckerModel fit_tucker(const CooTensor& coo, const mrd::TuckerConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  mrd::TuckerModel m = mrd::fit_best(to_dense(coo), cfg, seeds);
  m.entity_labels = coo.entity_labels;
  m.feature_labels = coo.feature_labels;
  m.relation_labels = coo.relation_labels;
  return m;
}

void run_mrd(const MrdArgs& a, Run& run) {
  const CooTensor t = load_tensor(a.tensor);
  run.add(a.out, write_model(fit_tucker(t, tucker_config(a.dims, a.tol, a.max_iters, a.solver), a.seeds)));
}

// ---------------------------------------------------------------------------

struct TransferArgs {
  std::string source, tensor, out;
  std::vector<std::string> tensors;
  std::vector<std::string> fix{"F"};
  bool heatmap = false;
  std::vector<Eigen::Index> dims;
  std::vector<std::uint64_t> seeds{0};
  double tol = 1e-6;
  int max_iters = 300;
  std::string solver = "explicit";
};

void add_transfer(CLI::App& app, TransferArgs& a) {
  auto* heat = app.add_flag("--heatmap", a.heatmap, "fit every tensor, transfer each learned model onto every tensor");
  auto* src = app.add_option("--source", a.source, "source Tucker model")->excludes(heat);
  app.add_option("--tensor", a.tensor, "target tensor (COO)")->excludes(heat)->needs(src);
  app.add_option("--tensors", a.tensors, "ordered tensor list for --heatmap")->needs(heat);
  app.add_option("--fix", a.fix, "factors held at the source values")
      ->capture_default_str()
      ->check(CLI::IsMember({"G", "F", "R"}));
  app.add_option("--out", a.out, "model document, or fit matrix CSV with --heatmap")->required();
  add_tucker_options(app, a.dims, a.seeds, a.tol, a.max_iters, a.solver, false);
}

std::vector<mrd::Factor> parse_factors(const std::vector<std::string>& names) {
  std::vector<mrd::Factor> out;
  for (const auto& n : names) {
    const auto f = mrd::parse_factor(n);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

void run_transfer(const TransferArgs& a, Run& run) {
  const auto fix = parse_factors(a.fix);
  mrd::TuckerConfig cfg = tucker_config(a.dims, a.tol, a.max_iters, a.solver);
  if (!a.heatmap) {
    if (a.source.empty() || a.tensor.empty()) throw ConfigError("cli", "transfer needs --source and --tensor (or --heatmap)");
    Model src = load_model(a.source);
    const auto* source = std::get_if<mrd::TuckerModel>(&src);
    if (!source) throw InputError("cli", "source model has no Tucker core");
    const CooTensor t = load_tensor(a.tensor);
    if (!source->feature_labels.empty() && !t.feature_labels.empty() && source->feature_labels != t.feature_labels) {
      throw TransferError("feature schema of the target differs from the source");
    }
    cfg.seed = a.seeds.front();
    mrd::TuckerModel m = mrd::transfer_fit(to_dense(t), *source, fix, cfg);
    if (!t.entity_labels.empty()) m.entity_labels = t.entity_labels;
    if (!t.relation_labels.empty()) m.relation_labels = t.relation_labels;
    run.add(a.out, write_model(m));
    return;
  }

  if (a.tensors.size() < 2) throw ConfigError("cli", "--heatmap needs at least two tensors");
  if (a.dims.size() != 3) throw ConfigError("cli", "--heatmap needs --dims p q s");
  std::vector<CooTensor> coo;
  for (const auto& p : a.tensors) coo.push_back(load_tensor(p));
  for (std::size_t i = 1; i < coo.size(); ++i) {
    const bool dims_differ = coo[i].dims[1] != coo[0].dims[1];
    const bool labels_differ = !coo[i].feature_labels.empty() && !coo[0].feature_labels.empty() &&
                               coo[i].feature_labels != coo[0].feature_labels;
    if (dims_differ || labels_differ) {
      throw TransferError("feature schema of '" + a.tensors[i] + "' differs from '" + a.tensors[0] + "'");
    }
  }
  std::vector<numkit::Tensor3> dense;
  std::vector<mrd::TuckerModel> models;
  for (const auto& c : coo) {
    dense.push_back(to_dense(c));
    models.push_back(mrd::fit_best(dense.back(), cfg, a.seeds));
  }
  const auto n = static_cast<Eigen::Index>(coo.size());
  Eigen::MatrixXd fits(n, n);
  cfg.seed = a.seeds.front();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) fits(i, j) = mrd::transfer_fit(dense[j], models[i], fix, cfg).fit;
  std::vector<std::string> names;
  for (const auto& p : a.tensors) names.push_back(stem(p));
  run.add(a.out, matrix_csv(fits, names, names));
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string model, metrics_out, graph_out, patterns_out, embedding_out;
  double threshold = 0.1;
  std::string mode = "clique", op = "random-walk";
  int clusters = 3;
  std::uint64_t seed = 0;
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
  app.add_option("--model", a.model, "Tucker model document")->required();
  app.add_option("--threshold", a.threshold, "keep core entries >= threshold x max")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--mode", a.mode, "interaction graph shape")->capture_default_str()->check(CLI::IsMember({"clique", "tripartite"}));
  app.add_option("--operator", a.op, "operator for the stability score")
      ->capture_default_str()
      ->check(CLI::IsMember({"random-walk", "laplacian"}));
  app.add_option("--clusters", a.clusters, "k-means clusters for the embedding")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--seed", a.seed)->capture_default_str();
  app.add_option("--metrics-out", a.metrics_out, "macro metrics CSV (default: stdout)");
  app.add_option("--graph-out", a.graph_out, "interaction graph as weighted edge list");
  app.add_option("--patterns-out", a.patterns_out, "tie pattern per E-group CSV");
  app.add_option("--embedding-out", a.embedding_out, "2-D embedding CSV (node,type,x,y,cluster)");
}

void run_analyze(const AnalyzeArgs& a, Run& run, std::ostream& out) {
  Model any = load_model(a.model);
  const auto* m = std::get_if<mrd::TuckerModel>(&any);
  if (!m) throw InputError("coreview", "model has no Tucker core");

  const auto g = coreview::build_interaction_graph(m->core, a.threshold, kModes.at(a.mode));
  const auto mm = coreview::macro_metrics(g, kOperators.at(a.op));
  std::ostringstream metrics;
  metrics << "metric,value\n"
          << "nodes," << mm.nodes << "\n"
          << "simplicity," << format_double(mm.simplicity) << "\n"
          << "sharing," << format_double(mm.sharing) << "\n"
          << "variability_degree," << format_double(mm.variability_degree) << "\n"
          << "variability_entropy," << format_double(mm.variability_entropy) << "\n"
          << "entropy_normalized," << format_double(mm.entropy_normalized) << "\n"
          << "stability," << format_double(mm.stability) << "\n";
  if (a.metrics_out.empty()) {
    out << metrics.str();
  } else {
    run.add(a.metrics_out, metrics.str());
  }

  if (!a.graph_out.empty()) {
    std::ostringstream edges;
    for (const auto& e : g.graph.edges) {
      edges << g.nodes[e.a].label() << '\t' << g.nodes[e.b].label() << '\t' << format_double(e.weight) << '\n';
    }
    run.add(a.graph_out, edges.str());
  }
  if (!a.patterns_out.empty()) {
    std::ostringstream pat;
    pat << "egroup,pattern\n";
    for (Eigen::Index i = 0; i < m->core.dim(0); ++i) {
      pat << "E" << i + 1 << ',' << coreview::to_string(coreview::classify_pattern(coreview::slice_core(*m, i), a.threshold))
          << '\n';
    }
    run.add(a.patterns_out, pat.str());
  }
  if (!a.embedding_out.empty()) {
    std::ostringstream emb;
    emb << "node,type,x,y,cluster\n";
    for (const auto& e : coreview::embed_core(m->core, a.threshold, a.clusters, a.seed)) {
      emb << e.node.label() << ',' << coreview::to_string(e.node.type) << ',' << format_double(e.x) << ','
          << format_double(e.y) << ',' << e.cluster << '\n';
    }
    run.add(a.embedding_out, emb.str());
  }
}

// ---------------------------------------------------------------------------

struct ResolveArgs {
  std::string model, source, target, shared, out;
  std::vector<int> ks{1, 2, 4, 8, 16};
  std::string metric = "euclidean";
  bool reverse = false;
};

void add_resolve(CLI::App& app, ResolveArgs& a) {
  app.add_option("--model", a.model, "role model whose F defines the role space")->required();
  app.add_option("--source", a.source, "source feature CSV")->required();
  app.add_option("--target", a.target, "target feature CSV")->required();
  app.add_option("--shared", a.shared, "ids present in both graphs, one per line")->required();
  app.add_option("--k", a.ks, "neighbourhood sizes")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--metric", a.metric)->capture_default_str()->check(CLI::IsMember({"euclidean", "cosine"}));
  app.add_flag("--reverse", a.reverse, "query target nodes against the source graph");
  app.add_option("--out", a.out, "recall CSV (k,matches,shared,recall)")->required();
}

void check_schema(const glrd::RoleModel& m, const LabeledMatrix& v, const std::string& what) {
  if (!m.feature_labels.empty() && !v.col_labels.empty() && m.feature_labels != v.col_labels) {
    throw InputError("tasks", "feature schema of " + what + " differs from the model");
  }
}

void run_resolve(const ResolveArgs& a, Run& run) {
  const glrd::RoleModel m = as_role_model(load_model(a.model), "model");
  LabeledMatrix src = load_matrix(a.source), tgt = load_matrix(a.target);
  check_schema(m, src, "source");
  check_schema(m, tgt, "target");
  if (a.reverse) std::swap(src, tgt);
  const Eigen::MatrixXd gs = tasks::assign_roles(src.values, m.F);
  const Eigen::MatrixXd gt = tasks::assign_roles(tgt.values, m.F);
  const auto shared = read_lines(a.shared);
  std::ostringstream csv;
  csv << "k,matches,shared,recall\n";
  for (int k : a.ks) {
    const auto r = tasks::resolve_identity(gs, src.row_labels, gt, tgt.row_labels, shared, k, kMetrics.at(a.metric));
    csv << r.k << ',' << r.matches << ',' << r.shared_count << ',' << format_double(r.recall) << '\n';
  }
  run.add(a.out, csv.str());
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string model_a, model_b, communities, out, stddev_out;
};

void add_compare(CLI::App& app, CompareArgs& a) {
  app.add_option("--model-a", a.model_a, "first model")->required();
  app.add_option("--model-b", a.model_b, "second model; enables the Jaccard distance matrix");
  app.add_option("--out", a.out, "Jaccard distance CSV (rows: roles of A, cols: roles of B)");
  app.add_option("--communities", a.communities, "node TAB community; enables role-proportion spread");
  app.add_option("--stddev-out", a.stddev_out, "per-role standard deviation of community proportions CSV");
}

struct Memberships {
  Eigen::MatrixXd g;
  std::vector<std::string> labels;
};

Memberships memberships(const Model& model) {
  return std::visit(
      [](const auto& m) -> Memberships {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, glrd::RoleModel>) {
          return {m.G, m.row_labels};
        } else {
          return {m.G, m.entity_labels};
        }
      },
      model);
}

// Reorders the rows of `b` to follow the labels of `a`.
Eigen::MatrixXd align_rows(const Memberships& a, const Memberships& b) {
  if (a.g.rows() != b.g.rows()) throw InputError("tasks", "models cover different node counts");
  if (a.labels.empty() || b.labels.empty()) return b.g;
  std::unordered_map<std::string, Eigen::Index> at;
  for (std::size_t i = 0; i < b.labels.size(); ++i) at.emplace(b.labels[i], static_cast<Eigen::Index>(i));
  Eigen::MatrixXd out(b.g.rows(), b.g.cols());
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const auto it = at.find(a.labels[i]);
    if (it == at.end()) throw InputError("tasks", "node '" + a.labels[i] + "' missing from the second model");
    out.row(static_cast<Eigen::Index>(i)) = b.g.row(it->second);
  }
  return out;
}

void run_compare(const CompareArgs& a, Run& run) {
  if (a.model_b.empty() && a.communities.empty()) throw ConfigError("cli", "compare needs --model-b and/or --communities");
  if (!a.model_b.empty() && a.out.empty()) throw ConfigError("cli", "--model-b needs --out");
  if (!a.communities.empty() && a.stddev_out.empty()) throw ConfigError("cli", "--communities needs --stddev-out");
  const Memberships ma = memberships(load_model(a.model_a));
  const tasks::Partition pa = tasks::dominant_partition(ma.g);
  if (!a.model_b.empty()) {
    const Memberships mb = memberships(load_model(a.model_b));
    const tasks::Partition pb = tasks::dominant_partition(align_rows(ma, mb));
    run.add(a.out, matrix_csv(tasks::jaccard_matrix(pa, pb), numbered("a", pa.roles), numbered("b", pb.roles)));
  }
  if (!a.communities.empty()) {
    std::unordered_map<std::string, std::string> community;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(a.communities)) {
      ++line_no;
      const auto f = io::split(line, '\t');
      if (f.size() != 2) throw ParseError(line_no, "expected node TAB community");
      community.emplace(std::string(f[0]), std::string(f[1]));
    }
    if (ma.labels.empty()) throw InputError("tasks", "model has no node labels to match communities against");
    std::vector<std::string> per_node;
    for (const auto& id : ma.labels) {
      const auto it = community.find(id);
      if (it == community.end()) throw InputError("tasks", "node '" + id + "' has no community");
      per_node.push_back(it->second);
    }
    const Eigen::VectorXd sd = tasks::role_proportion_stddev(pa, per_node);
    std::ostringstream csv;
    csv << "role,stddev\n";
    for (Eigen::Index j = 0; j < sd.size(); ++j) csv << "role" << j + 1 << ',' << format_double(sd(j)) << '\n';
    run.add(a.stddev_out, csv.str());
  }
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string kind = "nmf", out;
  std::uint64_t seed = 0;
  double noise = 0.0, drift = 0.3;
  Eigen::Index n = 30, f = 12, m = 6, r = 3, p = 3, q = 3, s = 2;
  int steps = 6;
  bool log = false;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  app.add_option("--kind", a.kind, "nmf | tucker | drift | twin")
      ->capture_default_str()
      ->check(CLI::IsMember({"nmf", "tucker", "drift", "twin"}));
  app.add_option("--out", a.out, "output file (drift, twin: path prefix)")->required();
  app.add_option("--seed", a.seed)->capture_default_str();
  app.add_option("--noise", a.noise, "multiplicative noise level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app.add_option("--drift", a.drift, "per-step role perturbation (drift)")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--n", a.n, "entities / nodes")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--f", a.f, "features")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--m", a.m, "relations")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--r", a.r, "planted rank (nmf)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--p", a.p, "core E-groups")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--q", a.q, "core roles")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--s", a.s, "core R-groups")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--steps", a.steps, "drift sequence length")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--log", a.log, "log-scale twin features");
}

std::string tensor_coo(const numkit::Tensor3& t) {
  return render([&](std::ostream& o) { write_tensor_coo(o, to_coo(t)); });
}

void run_synth(const SynthArgs& a, Run& run) {
  if (a.kind == "nmf") {
    const auto p = synth::planted_nmf(a.n, a.f, a.r, a.seed, a.noise);
    run.add(a.out, matrix_csv(p.V, numbered("n", a.n), numbered("x", a.f)));
  } else if (a.kind == "tucker") {
    run.add(a.out, tensor_coo(synth::planted_tucker(a.n, a.f, a.m, a.p, a.q, a.s, a.seed, a.noise).tensor));
  } else if (a.kind == "drift") {
    const auto seq = synth::drift_sequence(a.steps, a.n, a.f, a.m, a.p, a.q, a.s, a.drift, a.seed, a.noise);
    for (std::size_t t = 0; t < seq.tensors.size(); ++t) {
      run.add(a.out + "_" + std::to_string(t + 1) + ".coo", tensor_coo(seq.tensors[t]));
    }
  } else {
    refex::FeatureConfig cfg;
    cfg.log_transform = a.log;
    const auto tw = synth::twin_features(static_cast<std::size_t>(a.n), a.noise, a.seed, cfg);
    run.add(a.out + "_source.csv", render([&](std::ostream& o) { write_matrix_csv(o, tw.source); }));
    run.add(a.out + "_target.csv", render([&](std::ostream& o) { write_matrix_csv(o, tw.target); }));
    std::string ids;
    for (const auto& id : tw.shared_ids) ids += id + "\n";
    run.add(a.out + "_shared.txt", ids);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rolekit: guided and multi-relational role discovery", "rolekit"};
  app.set_config("--config", "", "TOML/INI file with one [subcommand] section; flags override it");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FeaturesArgs fa;
  GlrdArgs ga;
  MrdArgs ma;
  TransferArgs ta;
  AnalyzeArgs aa;
  ResolveArgs ra;
  CompareArgs ca;
  SynthArgs sa;
  auto* features = app.add_subcommand("features", "extract recursive structural features from an edge list");
  auto* glrd = app.add_subcommand("glrd", "guided role discovery by constrained NMF");
  auto* mrd = app.add_subcommand("mrd", "multi-relational role discovery by non-negative Tucker");
  auto* transfer = app.add_subcommand("transfer", "fit a tensor with factors held from a source model");
  auto* analyze = app.add_subcommand("analyze", "interaction graph, macro metrics and embedding of a Tucker core");
  auto* resolve = app.add_subcommand("resolve", "identity resolution in role space");
  auto* compare = app.add_subcommand("compare", "compare role partitions or community spread");
  auto* synth = app.add_subcommand("synth", "write planted synthetic instances");
  add_features(*features, fa);
  add_glrd(*glrd, ga);
  add_mrd(*mrd, ma);
  add_transfer(*transfer, ta);
  add_analyze(*analyze, aa);
  add_resolve(*resolve, ra);
  add_compare(*compare, ca);
  add_synth(*synth, sa);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error [cli]: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run r(args, *sub);
  try {
    std::string stem;
    if (sub == features) {
      run_features(fa, r);
      stem = fa.out;
    } else if (sub == glrd) {
      run_glrd(ga, r);
      stem = ga.out;
    } else if (sub == mrd) {
      run_mrd(ma, r);
      stem = ma.out;
    } else if (sub == transfer) {
      run_transfer(ta, r);
      stem = ta.out;
    } else if (sub == analyze) {
      run_analyze(aa, r, out);
      for (const auto* p : {&aa.metrics_out, &aa.graph_out, &aa.patterns_out, &aa.embedding_out}) {
        if (stem.empty()) stem = *p;
      }
    } else if (sub == resolve) {
      run_resolve(ra, r);
      stem = ra.out;
    } else if (sub == compare) {
      run_compare(ca, r);
      stem = ca.out.empty() ? ca.stddev_out : ca.out;
    } else {
      run_synth(sa, r);
      stem = sa.out;
    }
    if (!stem.empty()) r.commit(stem);
  } catch (const ConfigError& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error [cli]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rolekit::cli
