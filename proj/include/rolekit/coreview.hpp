#pragma once

// Reading a Tucker core: per-E-group slices, the interaction graph over
// E-groups / roles / R-groups, tie-pattern classification, macroscopic graph
// metrics and a 2-D hyper-edge embedding.

#include "rolekit/error.hpp"
#include "rolekit/mrd.hpp"
#include "rolekit/numkit/spectral.hpp"
#include "rolekit/numkit/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rolekit::coreview {

using numkit::Tensor3;

// core(i, ., .) laid out roles x R-groups.
struct CoreSlice {
  Eigen::Index egroup = 0;
  Eigen::MatrixXd values;
  // Magnitude the sparsification threshold is relative to; the max of the
  // whole core when produced by slice_core, 0 means "use this slice's max".
  double reference_max = 0.0;
};

inline CoreSlice slice_core(const Tensor3& core, Eigen::Index egroup) {
  if (egroup < 0 || egroup >= core.dim(0)) throw ConfigError("coreview", "E-group index out of range");
  CoreSlice s{egroup, Eigen::MatrixXd(core.dim(1), core.dim(2)), 0.0};
  for (Eigen::Index k = 0; k < core.dim(2); ++k)
    for (Eigen::Index j = 0; j < core.dim(1); ++j) s.values(j, k) = core(egroup, j, k);
  for (double v : core.values()) s.reference_max = std::max(s.reference_max, v);
  return s;
}

inline CoreSlice slice_core(const mrd::TuckerModel& m, Eigen::Index egroup) { return slice_core(m.core, egroup); }

inline double core_max(const Tensor3& core) {
  double mx = 0.0;
  for (double v : core.values()) mx = std::max(mx, v);
  return mx;
}

struct CoreEntry {
  Eigen::Index i = 0, j = 0, k = 0;
  double value = 0.0;
};

// Entries with h > 0 and h >= frac * max(core), ordered by (i, j, k).
inline std::vector<CoreEntry> kept_entries(const Tensor3& core, double threshold_frac) {
  if (!(threshold_frac >= 0.0 && threshold_frac <= 1.0)) {
    throw ConfigError("coreview", "threshold fraction must lie in [0,1]");
  }
  const double cut = threshold_frac * core_max(core);
  std::vector<CoreEntry> out;
  for (Eigen::Index i = 0; i < core.dim(0); ++i)
    for (Eigen::Index j = 0; j < core.dim(1); ++j)
      for (Eigen::Index k = 0; k < core.dim(2); ++k) {
        const double h = core(i, j, k);
        if (h > 0.0 && h >= cut) out.push_back({i, j, k, h});
      }
  return out;
}

// ---------------------------------------------------------------------------
// Weighted undirected graphs and their metrics
// ---------------------------------------------------------------------------

struct WeightedEdge {
  std::size_t a = 0, b = 0;
  double weight = 0.0;
};

struct WeightedGraph {
  std::size_t nodes = 0;
  std::vector<WeightedEdge> edges;

  Eigen::MatrixXd adjacency() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(nodes));
    for (const auto& e : edges) {
      const auto a = static_cast<Eigen::Index>(e.a), b = static_cast<Eigen::Index>(e.b);
      if (a == b) continue;
      w(a, b) += e.weight;
      w(b, a) += e.weight;
    }
    return w;
  }
};

enum class NodeType { kEGroup, kRole, kRGroup };

inline const char* to_string(NodeType t) {
  switch (t) {
    case NodeType::kEGroup: return "egroup";
    case NodeType::kRole: return "role";
    case NodeType::kRGroup: return "rgroup";
  }
  return "?";
}

struct TypedNode {
  NodeType type = NodeType::kEGroup;
  Eigen::Index index = 0;

  std::string label() const {
    switch (type) {
      case NodeType::kEGroup: return "E" + std::to_string(index + 1);
      case NodeType::kRole: return "Role" + std::to_string(index + 1);
      case NodeType::kRGroup: return "R" + std::to_string(index + 1);
    }
    return "?";
  }
  friend auto operator<=>(const TypedNode&, const TypedNode&) = default;
};

enum class GraphMode { kClique, kTripartite };

struct InteractionGraph {
  std::vector<TypedNode> nodes;  // only nodes touched by a kept entry
  WeightedGraph graph;
  GraphMode mode = GraphMode::kClique;
  double threshold_frac = 0.0;
  double threshold = 0.0;  // absolute cut actually applied

  std::size_t find(const TypedNode& n) const {
    const auto it = std::find(nodes.begin(), nodes.end(), n);
    if (it == nodes.end()) throw ConfigError("coreview", "node " + n.label() + " not in interaction graph");
    return static_cast<std::size_t>(it - nodes.begin());
  }
};

// Every kept core entry (i, j, k) contributes its value to the edges
// E-group i - role j and E-group i - R-group k, and in clique mode also to
// role j - R-group k.
inline InteractionGraph build_interaction_graph(const Tensor3& core, double threshold_frac,
                                                GraphMode mode = GraphMode::kClique) {
  const auto kept = kept_entries(core, threshold_frac);
  InteractionGraph g;
  g.mode = mode;
  g.threshold_frac = threshold_frac;
  g.threshold = threshold_frac * core_max(core);

  std::set<TypedNode> present;
  for (const auto& e : kept) {
    present.insert({NodeType::kEGroup, e.i});
    present.insert({NodeType::kRole, e.j});
    present.insert({NodeType::kRGroup, e.k});
  }
  g.nodes.assign(present.begin(), present.end());
  std::map<TypedNode, std::size_t> id;
  for (std::size_t n = 0; n < g.nodes.size(); ++n) id[g.nodes[n]] = n;

  std::map<std::pair<std::size_t, std::size_t>, double> weight;
  auto add = [&](std::size_t a, std::size_t b, double w) { weight[{std::min(a, b), std::max(a, b)}] += w; };
  for (const auto& e : kept) {
    const auto ei = id[{NodeType::kEGroup, e.i}];
    const auto rj = id[{NodeType::kRole, e.j}];
    const auto gk = id[{NodeType::kRGroup, e.k}];
    add(ei, rj, e.value);
    add(ei, gk, e.value);
    if (mode == GraphMode::kClique) add(rj, gk, e.value);
  }
  g.graph.nodes = g.nodes.size();
  for (const auto& [key, w] : weight) g.graph.edges.push_back({key.first, key.second, w});
  return g;
}

enum class TiePattern { kInactive, kNoTie, kRGroupTie, kRoleTie, kBowTie };

inline const char* to_string(TiePattern p) {
  switch (p) {
    case TiePattern::kInactive: return "inactive";
    case TiePattern::kNoTie: return "no_tie";
    case TiePattern::kRGroupTie: return "rgroup_tie";
    case TiePattern::kRoleTie: return "role_tie";
    case TiePattern::kBowTie: return "bow_tie";
  }
  return "?";
}

inline TiePattern classify_pattern(const CoreSlice& slice, double threshold_frac) {
  if (!(threshold_frac >= 0.0 && threshold_frac <= 1.0)) {
    throw ConfigError("coreview", "threshold fraction must lie in [0,1]");
  }
  const double ref = slice.reference_max > 0.0 ? slice.reference_max
                                               : (slice.values.size() ? slice.values.maxCoeff() : 0.0);
  const double cut = threshold_frac * ref;
  std::set<Eigen::Index> roles, rgroups;
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < slice.values.rows(); ++j)
    for (Eigen::Index k = 0; k < slice.values.cols(); ++k) {
      const double h = slice.values(j, k);
      if (h > 0.0 && h >= cut) {
        ++count;
        roles.insert(j);
        rgroups.insert(k);
      }
    }
  if (count == 0) return TiePattern::kInactive;
  if (count == 1) return TiePattern::kNoTie;
  if (roles.size() == 1) return TiePattern::kRGroupTie;
  if (rgroups.size() == 1) return TiePattern::kRoleTie;
  return TiePattern::kBowTie;
}

// Global minimum cut (Stoer-Wagner) on a dense symmetric weight matrix.
// Returns 0 for disconnected graphs and for fewer than two nodes.
inline double stoer_wagner_min_cut(Eigen::MatrixXd w) {
  const Eigen::Index n = w.rows();
  if (n < 2) return 0.0;
  std::vector<Eigen::Index> alive(static_cast<std::size_t>(n));
  std::iota(alive.begin(), alive.end(), Eigen::Index{0});
  double best = std::numeric_limits<double>::infinity();

  while (alive.size() > 1) {
    std::vector<double> attach(static_cast<std::size_t>(n), 0.0);
    std::vector<char> added(static_cast<std::size_t>(n), 0);
    Eigen::Index prev = -1, last = -1;
    for (std::size_t step = 0; step < alive.size(); ++step) {
      Eigen::Index pick = -1;
      for (auto v : alive) {
        if (!added[static_cast<std::size_t>(v)] && (pick < 0 || attach[static_cast<std::size_t>(v)] > attach[static_cast<std::size_t>(pick)])) pick = v;
      }
      if (pick < 0) break;
      added[static_cast<std::size_t>(pick)] = 1;
      prev = last;
      last = pick;
      if (step + 1 == alive.size()) best = std::min(best, attach[static_cast<std::size_t>(pick)]);
      for (auto v : alive) {
        if (!added[static_cast<std::size_t>(v)]) attach[static_cast<std::size_t>(v)] += w(pick, v);
      }
    }
    // Merge `last` into `prev`.
    for (auto v : alive) {
      w(prev, v) += w(last, v);
      w(v, prev) = w(prev, v);
    }
    w(prev, prev) = 0.0;
    alive.erase(std::find(alive.begin(), alive.end(), last));
  }
  return best;
}

// Weighted PageRank with uniform teleport; dangling nodes spread uniformly.
inline Eigen::VectorXd pagerank(const Eigen::MatrixXd& w, double damping = 0.85, double tol = 1e-12,
                                int max_iter = 100000) {
  const Eigen::Index n = w.rows();
  if (n == 0) return {};
  const Eigen::VectorXd out_weight = w.rowwise().sum();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0.0;
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (out_weight(i) > 0.0) {
        flow += (pi(i) / out_weight(i)) * w.row(i).transpose();
      } else {
        dangling += pi(i);
      }
    }
    Eigen::VectorXd next = damping * (flow.array() + dangling / static_cast<double>(n)).matrix();
    next.array() += (1.0 - damping) / static_cast<double>(n);
    next /= next.sum();
    const double change = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (change < tol) break;
  }
  return pi;
}

// Random-walk transition matrix, uniform rows for dangling nodes.
inline Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& w) {
  const Eigen::Index n = w.rows();
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = w.row(i).sum();
    if (s > 0.0) {
      p.row(i) = w.row(i) / s;
    } else {
      p.row(i).setConstant(1.0 / static_cast<double>(n));
    }
  }
  return p;
}

enum class StabilityOperator {
  kRandomWalk,  // 1 - |lambda_2| of the transition matrix
  kLaplacian,   // second-smallest eigenvalue of the normalized Laplacian
};

struct MacroMetrics {
  std::size_t nodes = 0;
  double simplicity = 0.0;            // mean unweighted degree
  double sharing = 0.0;               // global min cut weight
  double variability_degree = 0.0;    // population variance of unweighted degree
  double variability_entropy = 0.0;   // PageRank entropy, nats
  double entropy_normalized = 0.0;    // entropy / ln(N), 0 when N = 1
  double stability = 0.0;
};

inline double spectral_stability(const Eigen::MatrixXd& w, StabilityOperator op) {
  const Eigen::Index n = w.rows();
  const Eigen::VectorXd deg = w.rowwise().sum();
  const bool dangling = (deg.array() <= 0.0).any();
  if (op == StabilityOperator::kLaplacian) {
    if (n < 2) return 0.0;
    Eigen::VectorXd inv = deg.unaryExpr([](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0; });
    const Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) - inv.asDiagonal() * w * inv.asDiagonal();
    const auto eig = numkit::symmetric_eigen(lap);
    return eig.values(n - 2);
  }
  if (!dangling) {
    // D^-1 W is similar to the symmetric D^-1/2 W D^-1/2.
    const Eigen::VectorXd inv = deg.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd s = inv.asDiagonal() * w * inv.asDiagonal();
    return 1.0 - numkit::top_two_eigs(0.5 * (s + s.transpose())).second;
  }
  return 1.0 - numkit::top_two_eigs(transition_matrix(w)).second;
}

inline MacroMetrics macro_metrics(const WeightedGraph& g, StabilityOperator op = StabilityOperator::kRandomWalk) {
  if (g.nodes == 0) throw InputError("coreview", "macro metrics need a non-empty graph");
  const Eigen::MatrixXd w = g.adjacency();
  const auto n = static_cast<Eigen::Index>(g.nodes);
  MacroMetrics m;
  m.nodes = g.nodes;

  Eigen::VectorXd degree(n);
  for (Eigen::Index i = 0; i < n; ++i) degree(i) = static_cast<double>((w.row(i).array() > 0.0).count());
  m.simplicity = degree.mean();
  m.variability_degree = (degree.array() - m.simplicity).square().mean();
  m.sharing = stoer_wagner_min_cut(w);

  const Eigen::VectorXd pi = pagerank(w);
  double h = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pi(i) > 0.0) h -= pi(i) * std::log(pi(i));
  }
  m.variability_entropy = h;
  m.entropy_normalized = n > 1 ? h / std::log(static_cast<double>(n)) : 0.0;
  m.stability = spectral_stability(w, op);
  return m;
}

inline MacroMetrics macro_metrics(const InteractionGraph& g, StabilityOperator op = StabilityOperator::kRandomWalk) {
  return macro_metrics(g.graph, op);
}

// ---------------------------------------------------------------------------
// Hyper-edge embedding
// ---------------------------------------------------------------------------

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding, best inertia over `restarts`.
// Labels are renumbered by first appearance so equal partitions print equal.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 50) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw ConfigError("coreview", "cluster count must lie in [1, number of points]");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int run = 0; run < restarts; ++run) {
    Eigen::MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    Eigen::VectorXd d2(n);
    for (int c = 1; c < k; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (int e = 0; e < c; ++e) m = std::min(m, (points.row(i) - centers.row(e)).squaredNorm());
        d2(i) = m;
      }
      const double total = d2.sum();
      Eigen::Index chosen = 0;
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng), acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2(i);
          if (acc >= target) { chosen = i; break; }
        }
      } else {
        chosen = pick(rng);
      }
      centers.row(c) = points.row(chosen);
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (points.row(i) - centers.row(c)).squaredNorm();
          if (d < bd) { bd = d; arg = c; }
        }
        if (labels[static_cast<std::size_t>(i)] != arg) { labels[static_cast<std::size_t>(i)] = arg; changed = true; }
      }
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
      if (!changed) break;
    }
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) inertia += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    if (inertia < best.inertia) best = {labels, centers, inertia};
  }

  std::map<int, int> relabel;
  for (int& l : best.labels) {
    auto [it, inserted] = relabel.try_emplace(l, static_cast<int>(relabel.size()));
    l = it->second;
  }
  Eigen::MatrixXd centers = best.centers;
  for (const auto& [from, to] : relabel) centers.row(to) = best.centers.row(from);
  best.centers = centers;
  return best;
}

struct EmbeddedNode {
  TypedNode node;
  double x = 0.0, y = 0.0;
  int cluster = 0;
};

// Rows: all p + q + s nodes (E-groups, then roles, then R-groups); columns:
// kept core entries; 1 where the node belongs to that hyper-edge.
inline Eigen::MatrixXd incidence_matrix(const Tensor3& core, double threshold_frac) {
  const auto kept = kept_entries(core, threshold_frac);
  const Eigen::Index p = core.dim(0), q = core.dim(1), s = core.dim(2);
  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(p + q + s, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    inc(kept[c].i, col) = 1.0;
    inc(p + kept[c].j, col) = 1.0;
    inc(p + q + kept[c].k, col) = 1.0;
  }
  return inc;
}

// PCA of the incidence rows of participating nodes, then k-means in the
// plane. Nodes that touch no kept entry sit at the origin, which is the
// centroid of the participating nodes' scores.
inline std::vector<EmbeddedNode> embed_core(const Tensor3& core, double threshold_frac, int k_clusters,
                                            std::uint64_t seed = 0) {
  const Eigen::MatrixXd inc = incidence_matrix(core, threshold_frac);
  if (inc.cols() == 0) throw InputError("coreview", "no core entry survives the threshold");
  const Eigen::Index total = inc.rows();
  if (k_clusters < 1 || k_clusters > total) throw ConfigError("coreview", "cluster count must lie in [1, p+q+s]");

  std::vector<Eigen::Index> active;
  for (Eigen::Index r = 0; r < total; ++r) {
    if (inc.row(r).sum() > 0.0) active.push_back(r);
  }
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(active.size()), inc.cols());
  for (std::size_t a = 0; a < active.size(); ++a) sub.row(static_cast<Eigen::Index>(a)) = inc.row(active[a]);
  const Eigen::MatrixXd scores = numkit::pca_2d(sub);

  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(total, 2);
  for (std::size_t a = 0; a < active.size(); ++a) coords.row(active[a]) = scores.row(static_cast<Eigen::Index>(a));
  const KMeansResult km = kmeans(coords, k_clusters, seed);

  const Eigen::Index p = core.dim(0), q = core.dim(1);
  std::vector<EmbeddedNode> out;
  for (Eigen::Index r = 0; r < total; ++r) {
    TypedNode node = r < p ? TypedNode{NodeType::kEGroup, r}
                           : r < p + q ? TypedNode{NodeType::kRole, r - p} : TypedNode{NodeType::kRGroup, r - p - q};
    out.push_back({node, coords(r, 0), coords(r, 1), km.labels[static_cast<std::size_t>(r)]});
  }
  return out;
}

}  // namespace rolekit::coreview
