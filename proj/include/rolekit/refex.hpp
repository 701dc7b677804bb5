#pragma once

// Recursive structural node features: a small base set (degree, weighted
// degree, egonet edge counts, clustering) extended level by level with
// neighbor sums/means, with correlated columns pruned as they appear.

#include "rolekit/error.hpp"
#include "rolekit/graphio.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rolekit::refex {

struct FeatureConfig {
  int max_depth = 2;
  double prune_corr = 0.95;
  bool log_transform = false;
  bool use_sum = true;
  bool use_mean = true;

  void validate() const {
    if (max_depth < 0) throw ConfigError("refex", "max_depth must be >= 0");
    if (!(prune_corr >= 0.0 && prune_corr <= 1.0)) throw ConfigError("refex", "prune_corr must lie in [0,1]");
    if (max_depth > 0 && !use_sum && !use_mean) {
      throw ConfigError("refex", "recursion needs at least one aggregator");
    }
  }
};

inline const std::vector<std::string>& base_feature_names() {
  static const std::vector<std::string> names{"degree", "weighted_degree", "egonet_internal",
                                              "egonet_external", "clustering"};
  return names;
}

// Simple undirected view of a graph: sorted neighbor lists without
// self-loops, plus summed incident weight per node.
struct Adjacency {
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<double> strength;

  explicit Adjacency(const Graph& g)
      : neighbors(g.node_count()), strength(g.node_count(), 0.0) {
    for (const auto& e : g.edges) {
      if (e.src >= g.node_count() || e.dst >= g.node_count()) {
        throw InputError("refex", "edge endpoint out of range");
      }
      if (e.src == e.dst) continue;
      neighbors[e.src].push_back(e.dst);
      neighbors[e.dst].push_back(e.src);
      strength[e.src] += e.weight;
      strength[e.dst] += e.weight;
    }
    for (auto& nb : neighbors) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }

  std::size_t size() const noexcept { return neighbors.size(); }
};

inline LabeledMatrix base_features(const Graph& g) {
  const Adjacency adj(g);
  const std::size_t n = adj.size();
  LabeledMatrix out;
  out.row_labels = g.node_ids;
  out.col_labels = base_feature_names();
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 5);

  std::vector<char> in_ego(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& nb = adj.neighbors[v];
    const auto deg = static_cast<double>(nb.size());
    for (auto u : nb) in_ego[u] = 1;

    double links = 0.0;  // edges among neighbors
    double degree_sum = deg;
    for (auto u : nb) {
      degree_sum += static_cast<double>(adj.neighbors[u].size());
      for (auto w : adj.neighbors[u]) {
        if (w > u && in_ego[w]) links += 1.0;
      }
    }
    for (auto u : nb) in_ego[u] = 0;

    const double internal = deg + links;
    const auto r = static_cast<Eigen::Index>(v);
    out.values(r, 0) = deg;
    out.values(r, 1) = adj.strength[v];
    out.values(r, 2) = internal;
    out.values(r, 3) = degree_sum - 2.0 * internal;
    out.values(r, 4) = nb.size() < 2 ? 0.0 : links / (deg * (deg - 1.0) / 2.0);
  }
  return out;
}

inline Eigen::VectorXd aggregate_neighbors(const Adjacency& adj, const Eigen::VectorXd& column, bool mean) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(adj.size()));
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const auto& nb = adj.neighbors[v];
    if (nb.empty()) continue;
    double s = 0.0;
    for (auto u : nb) s += column(static_cast<Eigen::Index>(u));
    out(static_cast<Eigen::Index>(v)) = mean ? s / static_cast<double>(nb.size()) : s;
  }
  return out;
}

// Pearson correlation; a constant column correlates 0 with anything varying
// and 1 with another constant column.
inline double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double na = ca.norm(), nb = cb.norm();
  const double scale_a = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double scale_b = std::max(1.0, b.cwiseAbs().maxCoeff());
  const bool const_a = na <= 1e-12 * scale_a;
  const bool const_b = nb <= 1e-12 * scale_b;
  if (const_a && const_b) return 1.0;
  if (const_a || const_b) return 0.0;
  return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

// Indices of the columns kept when scanning left to right: column c is
// dropped if |corr| with any kept column exceeds `threshold`. Columns before
// `first_candidate` are always kept.
inline std::vector<std::size_t> prune_order(const Eigen::MatrixXd& m, double threshold,
                                            std::size_t first_candidate = 0) {
  std::vector<std::size_t> kept;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const auto col = static_cast<std::size_t>(c);
    bool keep = true;
    if (col >= first_candidate) {
      for (auto k : kept) {
        if (std::abs(correlation(m.col(c), m.col(static_cast<Eigen::Index>(k)))) > threshold) {
          keep = false;
          break;
        }
      }
    }
    if (keep) kept.push_back(col);
  }
  return kept;
}

inline LabeledMatrix select_columns(const LabeledMatrix& m, const std::vector<std::size_t>& cols) {
  LabeledMatrix out;
  out.row_labels = m.row_labels;
  out.values.resize(m.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.values.col(static_cast<Eigen::Index>(c)) = m.values.col(static_cast<Eigen::Index>(cols[c]));
    if (cols[c] < m.col_labels.size()) out.col_labels.push_back(m.col_labels[cols[c]]);
  }
  return out;
}

inline LabeledMatrix prune_correlated(const LabeledMatrix& m, double threshold) {
  return select_columns(m, prune_order(m.values, threshold));
}

// x -> log(1 + x), then each column rescaled to [0, 1] (constant -> 0).
inline void log_minmax(Eigen::MatrixXd& m) {
  m = m.array().log1p().matrix();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double lo = m.col(c).minCoeff(), hi = m.col(c).maxCoeff();
    if (hi > lo) {
      m.col(c) = (m.col(c).array() - lo) / (hi - lo);
    } else {
      m.col(c).setZero();
    }
  }
}

inline LabeledMatrix recurse_features(const Graph& g, const LabeledMatrix& base, const FeatureConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(base.values.rows()) != g.node_count()) {
    throw InputError("refex", "base feature rows do not match node count");
  }
  const Adjacency adj(g);
  LabeledMatrix out = base;
  if (out.col_labels.size() != static_cast<std::size_t>(out.values.cols())) {
    out.col_labels.clear();
    for (Eigen::Index c = 0; c < out.values.cols(); ++c) out.col_labels.push_back("f" + std::to_string(c));
  }

  out = select_columns(out, prune_order(out.values, config.prune_corr));

  // Each level aggregates the columns introduced by the previous level.
  std::size_t frontier_begin = 0;
  for (int level = 0; level < config.max_depth; ++level) {
    const std::size_t frontier_end = out.col_labels.size();
    if (frontier_begin == frontier_end) break;

    LabeledMatrix grown;
    grown.row_labels = out.row_labels;
    grown.col_labels = out.col_labels;
    std::vector<Eigen::VectorXd> cols;
    for (std::size_t c = frontier_begin; c < frontier_end; ++c) {
      const Eigen::VectorXd src = out.values.col(static_cast<Eigen::Index>(c));
      if (config.use_sum) {
        cols.push_back(aggregate_neighbors(adj, src, false));
        grown.col_labels.push_back("sum(" + out.col_labels[c] + ")");
      }
      if (config.use_mean) {
        cols.push_back(aggregate_neighbors(adj, src, true));
        grown.col_labels.push_back("mean(" + out.col_labels[c] + ")");
      }
    }
    grown.values.resize(out.values.rows(), out.values.cols() + static_cast<Eigen::Index>(cols.size()));
    grown.values.leftCols(out.values.cols()) = out.values;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      grown.values.col(out.values.cols() + static_cast<Eigen::Index>(c)) = cols[c];
    }
    out = select_columns(grown, prune_order(grown.values, config.prune_corr, frontier_end));
    frontier_begin = frontier_end;
  }
  if (config.log_transform) log_minmax(out.values);
  return out;
}

inline LabeledMatrix extract_features(const Graph& g, const FeatureConfig& config) {
  return recurse_features(g, base_features(g), config);
}

// ---------------------------------------------------------------------------
// Schemas: column labels double as derivation paths ("mean(sum(degree))").
// ---------------------------------------------------------------------------

namespace detail {

class SchemaEvaluator {
 public:
  explicit SchemaEvaluator(const Graph& g) : adj_(g), base_(base_features(g)) {}

  Eigen::VectorXd eval(std::string_view label) {
    if (auto it = memo_.find(std::string(label)); it != memo_.end()) return it->second;
    Eigen::VectorXd result;
    const auto& names = base_feature_names();
    if (auto it = std::find(names.begin(), names.end(), label); it != names.end()) {
      result = base_.values.col(static_cast<Eigen::Index>(it - names.begin()));
    } else if (label.starts_with("sum(") && label.ends_with(")")) {
      result = aggregate_neighbors(adj_, eval(label.substr(4, label.size() - 5)), false);
    } else if (label.starts_with("mean(") && label.ends_with(")")) {
      result = aggregate_neighbors(adj_, eval(label.substr(5, label.size() - 6)), true);
    } else {
      throw InputError("refex", "unknown feature '" + std::string(label) + "'");
    }
    memo_.emplace(std::string(label), result);
    return result;
  }

 private:
  Adjacency adj_;
  LabeledMatrix base_;
  std::map<std::string, Eigen::VectorXd, std::less<>> memo_;
};

}  // namespace detail

// Evaluates a fixed feature schema on `g` without any pruning, so matrices
// from different graphs share one column space.
inline LabeledMatrix evaluate_schema(const Graph& g, const std::vector<std::string>& schema,
                                     bool log_transform = false) {
  detail::SchemaEvaluator ev(g);
  LabeledMatrix out;
  out.row_labels = g.node_ids;
  out.col_labels = schema;
  out.values.resize(static_cast<Eigen::Index>(g.node_count()), static_cast<Eigen::Index>(schema.size()));
  for (std::size_t c = 0; c < schema.size(); ++c) out.values.col(static_cast<Eigen::Index>(c)) = ev.eval(schema[c]);
  if (log_transform) log_minmax(out.values);
  return out;
}

// One slice per relation, all sharing the schema learned on the
// relation-aggregated graph. Only log(1+x) is applied to the slices (no
// per-slice rescaling), so an empty relation stays an all-zero slice.
inline CooTensor extract_tensor(const MultiGraph& mg, const FeatureConfig& config) {
  config.validate();
  FeatureConfig raw = config;
  raw.log_transform = false;
  const LabeledMatrix reference = extract_features(aggregate(mg), raw);
  const auto& schema = reference.col_labels;

  numkit::Tensor3 dense(static_cast<Eigen::Index>(mg.node_count()), static_cast<Eigen::Index>(schema.size()),
                        static_cast<Eigen::Index>(mg.relation_count()));
  for (std::size_t k = 0; k < mg.relation_count(); ++k) {
    LabeledMatrix slice = evaluate_schema(relation_slice(mg, k), schema);
    if (config.log_transform) slice.values = slice.values.array().log1p().matrix();
    for (Eigen::Index j = 0; j < slice.values.cols(); ++j)
      for (Eigen::Index i = 0; i < slice.values.rows(); ++i)
        dense(i, j, static_cast<Eigen::Index>(k)) = slice.values(i, j);
  }
  CooTensor t = to_coo(dense);
  t.entity_labels = mg.node_ids;
  t.feature_labels = schema;
  t.relation_labels = mg.relation_ids;
  return t;
}

}  // namespace rolekit::refex
