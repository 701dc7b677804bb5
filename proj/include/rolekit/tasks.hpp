#pragma once

#include "rolekit/error.hpp"
#include "rolekit/numkit/nnls.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rolekit::tasks {

// Role memberships for a new feature matrix under fixed role definitions:
// row i of the result solves min ||V(i,:) - g F|| s.t. g >= 0.
inline Eigen::MatrixXd assign_roles(const Eigen::MatrixXd& v, const Eigen::MatrixXd& f) {
  if (v.cols() != f.cols()) {
    throw InputError("tasks", "feature schema mismatch: V has " + std::to_string(v.cols()) + " columns, F has " +
                                  std::to_string(f.cols()));
  }
  const Eigen::MatrixXd gram = f * f.transpose();
  const Eigen::MatrixXd rhs = f * v.transpose();
  Eigen::MatrixXd g(v.rows(), f.rows());
  for (Eigen::Index i = 0; i < v.rows(); ++i) g.row(i) = numkit::nnls_gram(gram, rhs.col(i)).transpose();
  return g;
}

enum class Metric { kEuclidean, kCosine };

struct ResolutionResult {
  int k = 0;
  std::size_t matches = 0;
  std::size_t shared_count = 0;
  double recall = 0.0;
};

inline double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Metric metric) {
  if (metric == Metric::kEuclidean) return (a - b).norm();
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
  return 1.0 - a.dot(b) / (na * nb);
}

// Rank (0-based) of target row `truth` among all target rows ordered by
// distance to `query`, ties broken toward the lower row index.
inline std::size_t rank_of(const Eigen::VectorXd& query, const Eigen::MatrixXd& targets, Eigen::Index truth,
                           Metric metric) {
  const double d_truth = distance(query, targets.row(truth).transpose(), metric);
  std::size_t rank = 0;
  for (Eigen::Index r = 0; r < targets.rows(); ++r) {
    if (r == truth) continue;
    const double d = distance(query, targets.row(r).transpose(), metric);
    if (d < d_truth || (d == d_truth && r < truth)) ++rank;
  }
  return rank;
}

// For each shared id, queries its source row against every target row and
// counts a match when the same id lands in the top k.
inline ResolutionResult resolve_identity(const Eigen::MatrixXd& g_src, const std::vector<std::string>& src_ids,
                                         const Eigen::MatrixXd& g_tgt, const std::vector<std::string>& tgt_ids,
                                         const std::vector<std::string>& shared_ids, int k,
                                         Metric metric = Metric::kEuclidean) {
  if (k < 1) throw ConfigError("tasks", "k must be >= 1");
  if (shared_ids.empty()) throw InputError("tasks", "shared id set is empty");
  if (g_src.cols() != g_tgt.cols()) throw InputError("tasks", "source and target role spaces differ");
  if (static_cast<std::size_t>(g_src.rows()) != src_ids.size() || static_cast<std::size_t>(g_tgt.rows()) != tgt_ids.size()) {
    throw InputError("tasks", "id lists do not match matrix rows");
  }
  std::unordered_map<std::string, Eigen::Index> src_index, tgt_index;
  for (std::size_t i = 0; i < src_ids.size(); ++i) src_index.emplace(src_ids[i], static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < tgt_ids.size(); ++i) tgt_index.emplace(tgt_ids[i], static_cast<Eigen::Index>(i));

  ResolutionResult res;
  res.k = k;
  res.shared_count = shared_ids.size();
  for (const auto& id : shared_ids) {
    const auto s = src_index.find(id);
    const auto t = tgt_index.find(id);
    if (s == src_index.end() || t == tgt_index.end()) throw InputError("tasks", "shared id '" + id + "' missing");
    if (rank_of(g_src.row(s->second).transpose(), g_tgt, t->second, metric) < static_cast<std::size_t>(k)) ++res.matches;
  }
  res.recall = static_cast<double>(res.matches) / static_cast<double>(res.shared_count);
  return res;
}

// Role index per node, std::nullopt for nodes with no membership at all.
struct Partition {
  std::vector<std::optional<int>> assignment;
  int roles = 0;
};

inline Partition dominant_partition(const Eigen::MatrixXd& g) {
  Partition p;
  p.roles = static_cast<int>(g.cols());
  p.assignment.resize(static_cast<std::size_t>(g.rows()));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    Eigen::Index arg = -1;
    double best = 0.0;
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      if (g(i, c) > best) {
        best = g(i, c);
        arg = c;
      }
    }
    if (arg >= 0) p.assignment[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return p;
}

// Entry (a, b) = 1 - |S_a n T_b| / |S_a u T_b|, 0 when both sets are empty.
inline Eigen::MatrixXd jaccard_matrix(const Partition& p1, const Partition& p2) {
  if (p1.assignment.size() != p2.assignment.size()) throw InputError("tasks", "partitions cover different node sets");
  Eigen::MatrixXd inter = Eigen::MatrixXd::Zero(p1.roles, p2.roles);
  Eigen::VectorXd size1 = Eigen::VectorXd::Zero(p1.roles), size2 = Eigen::VectorXd::Zero(p2.roles);
  for (std::size_t v = 0; v < p1.assignment.size(); ++v) {
    const auto& a = p1.assignment[v];
    const auto& b = p2.assignment[v];
    if (a) size1(*a) += 1.0;
    if (b) size2(*b) += 1.0;
    if (a && b) inter(*a, *b) += 1.0;
  }
  Eigen::MatrixXd out(p1.roles, p2.roles);
  for (int a = 0; a < p1.roles; ++a)
    for (int b = 0; b < p2.roles; ++b) {
      const double uni = size1(a) + size2(b) - inter(a, b);
      out(a, b) = uni > 0.0 ? 1.0 - inter(a, b) / uni : 0.0;
    }
  return out;
}

// Population standard deviation, over communities, of the share of each
// community's members whose dominant role is j.
inline Eigen::VectorXd role_proportion_stddev(const Partition& p, const std::vector<std::string>& community) {
  if (community.size() != p.assignment.size()) throw InputError("tasks", "community list does not match node count");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t v = 0; v < community.size(); ++v) members[community[v]].push_back(v);
  if (members.empty()) return Eigen::VectorXd::Zero(p.roles);

  Eigen::MatrixXd share(static_cast<Eigen::Index>(members.size()), p.roles);
  Eigen::Index row = 0;
  for (const auto& [name, nodes] : members) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(p.roles);
    for (auto v : nodes) {
      if (p.assignment[v]) counts(*p.assignment[v]) += 1.0;
    }
    share.row(row++) = counts.transpose() / static_cast<double>(nodes.size());
  }
  const Eigen::RowVectorXd mean = share.colwise().mean();
  return ((share.rowwise() - mean).array().square().colwise().mean()).sqrt().transpose();
}

}  // namespace rolekit::tasks
