#include "rolekit/refex.hpp"
#include "rolekit/synth.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace rolekit;

namespace {

// Dense view of a graph: binary adjacency without self-loops plus summed
// symmetric weights.
struct Dense {
  Eigen::MatrixXd a, w;
};

Dense dense(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Dense d{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (const auto& e : g.edges) {
    if (e.src == e.dst) continue;
    const auto s = static_cast<Eigen::Index>(e.src), t = static_cast<Eigen::Index>(e.dst);
    d.a(s, t) = d.a(t, s) = 1.0;
    d.w(s, t) += e.weight;
    d.w(t, s) += e.weight;
  }
  return d;
}

Eigen::MatrixXd base_oracle(const Dense& d) {
  const auto n = d.a.rows();
  const Eigen::VectorXd deg = d.a.rowwise().sum();
  const Eigen::VectorXd closed = (d.a * d.a * d.a).diagonal() / 2.0;  // triangles through v
  Eigen::MatrixXd out(n, 5);
  for (Eigen::Index v = 0; v < n; ++v) {
    const double internal = deg(v) + closed(v);
    out(v, 0) = deg(v);
    out(v, 1) = d.w.row(v).sum();
    out(v, 2) = internal;
    out(v, 3) = d.a.row(v).dot(deg) + deg(v) - 2.0 * internal;
    out(v, 4) = deg(v) < 2 ? 0.0 : 2.0 * closed(v) / (deg(v) * (deg(v) - 1.0));
  }
  return out;
}

Eigen::VectorXd eval_label(const Dense& d, const std::string& label) {
  static const std::map<std::string, int> base{{"degree", 0},          {"weighted_degree", 1}, {"egonet_internal", 2},
                                               {"egonet_external", 3}, {"clustering", 4}};
  if (auto it = base.find(label); it != base.end()) return base_oracle(d).col(it->second);
  const bool sum = label.rfind("sum(", 0) == 0;
  const std::string inner = label.substr(sum ? 4 : 5, label.size() - (sum ? 5 : 6));
  Eigen::VectorXd s = d.a * eval_label(d, inner);
  if (!sum) {
    const Eigen::VectorXd deg = d.a.rowwise().sum();
    for (Eigen::Index v = 0; v < s.size(); ++v) s(v) = deg(v) > 0 ? s(v) / deg(v) : 0.0;
  }
  return s;
}

Graph random_graph(std::mt19937_64& rng, int max_nodes) {
  Graph g;
  const int n = oracle::uniform_int(rng, 1, max_nodes);
  const double p = oracle::uniform_vec(1, rng, 0.1, 0.7)(0);
  for (int i = 0; i < n; ++i) g.node_ids.push_back("n" + std::to_string(i));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (u(rng) < (i == j ? 0.1 : p)) g.edges.push_back({std::size_t(i), std::size_t(j), 0.5 + 2.0 * u(rng)});
  return g;
}

Graph triangle() { return load_edge_list("a\tb\nb\tc\na\tc\n"); }
Graph path3() { return load_edge_list("a\tb\nb\tc\n"); }

}  // namespace

TEST(BaseFeatures, Triangle) {
  const auto m = refex::base_features(triangle());
  for (Eigen::Index v = 0; v < 3; ++v) {
    EXPECT_EQ(m.values(v, 0), 2.0);
    EXPECT_EQ(m.values(v, 1), 2.0);
    EXPECT_EQ(m.values(v, 2), 3.0);
    EXPECT_EQ(m.values(v, 3), 0.0);
    EXPECT_EQ(m.values(v, 4), 1.0);
  }
}

TEST(BaseFeatures, PathMiddle) {
  const auto m = refex::base_features(path3());
  ASSERT_EQ(m.row_labels[1], "b");
  EXPECT_EQ(m.values(1, 0), 2.0);
  EXPECT_EQ(m.values(1, 2), 2.0);
  EXPECT_EQ(m.values(1, 3), 0.0);
  EXPECT_EQ(m.values(1, 4), 0.0);
}

TEST(BaseFeatures, IsolatedNodeIsZero) {
  Graph g = path3();
  g.node_ids.push_back("lonely");
  const auto m = refex::base_features(g);
  EXPECT_EQ(m.values.row(3).norm(), 0.0);
}

TEST(BaseFeatures, MatchesDenseOracle) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 60; ++t) {
    const Graph g = random_graph(rng, 14);
    const auto m = refex::base_features(g);
    EXPECT_LE((m.values - base_oracle(dense(g))).cwiseAbs().maxCoeff(), 1e-12) << "graph " << t;
  }
}

TEST(RecurseFeatures, PathNeighborSumAndMean) {
  LabeledMatrix base;
  base.values = Eigen::Vector3d(1, 2, 1);
  base.col_labels = {"degree"};
  refex::FeatureConfig sum_only{.max_depth = 1, .prune_corr = 1.0, .use_sum = true, .use_mean = false};
  const auto s = refex::recurse_features(path3(), base, sum_only);
  ASSERT_EQ(s.col_labels, (std::vector<std::string>{"degree", "sum(degree)"}));
  EXPECT_EQ(s.values.col(1), Eigen::Vector3d(2, 2, 2));

  refex::FeatureConfig mean_only{.max_depth = 1, .prune_corr = 1.0, .use_sum = false, .use_mean = true};
  const auto m = refex::recurse_features(path3(), base, mean_only);
  ASSERT_EQ(m.col_labels, (std::vector<std::string>{"degree", "mean(degree)"}));
  EXPECT_EQ(m.values.col(1), Eigen::Vector3d(2, 1, 2));
}

TEST(RecurseFeatures, FullThresholdKeepsExactDuplicates) {
  Eigen::MatrixXd m(4, 3);
  m << 1, 1, 2, 2, 2, 4, 3, 3, 6, 5, 5, 10;
  EXPECT_EQ(refex::prune_order(m, 1.0).size(), 3u);
  EXPECT_EQ(refex::prune_order(m, 0.99), (std::vector<std::size_t>{0}));
}

TEST(RecurseFeatures, ColumnsFollowTheirDerivationPaths) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 25; ++t) {
    const Graph g = random_graph(rng, 12);
    const auto m = refex::extract_features(g, {.max_depth = 3, .prune_corr = 0.9});
    const Dense d = dense(g);
    for (std::size_t c = 0; c < m.col_labels.size(); ++c) {
      const Eigen::VectorXd want = eval_label(d, m.col_labels[c]);
      EXPECT_LE((m.values.col(static_cast<Eigen::Index>(c)) - want).cwiseAbs().maxCoeff(),
                1e-9 * std::max(1.0, want.cwiseAbs().maxCoeff()))
          << m.col_labels[c];
    }
  }
}

TEST(RecurseFeatures, RetainedColumnsBelowThreshold) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 25; ++t) {
    const Graph g = random_graph(rng, 15);
    const double thr = oracle::uniform_vec(1, rng, 0.5, 0.99)(0);
    const auto m = refex::extract_features(g, {.max_depth = 2, .prune_corr = thr});
    for (Eigen::Index a = 0; a < m.values.cols(); ++a) {
      EXPECT_GE(m.values.col(a).minCoeff(), 0.0);
      for (Eigen::Index b = a + 1; b < m.values.cols(); ++b)
        EXPECT_LE(std::abs(refex::correlation(m.values.col(a), m.values.col(b))), thr);
    }
  }
}

TEST(RecurseFeatures, NodeOrderDoesNotMatter) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 10; ++t) {
    const Graph g = synth::preferential_attachment(40, 2, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> perm(g.node_count());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Graph h = synth::relabel(g, perm);
    const auto a = refex::extract_features(g, {});
    const auto b = refex::extract_features(h, {});
    ASSERT_EQ(a.col_labels, b.col_labels);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      ASSERT_EQ(b.row_labels[perm[v]], a.row_labels[v]);
      EXPECT_LE((a.values.row(static_cast<Eigen::Index>(v)) - b.values.row(static_cast<Eigen::Index>(perm[v])))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-9);
    }
  }
}

TEST(RecurseFeatures, PruningIsIdempotent) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 20; ++t) {
    LabeledMatrix m;
    m.values = oracle::uniform(12, 8, rng);
    m.values.col(3) = 2.0 * m.values.col(1) + 0.01 * m.values.col(5);
    m.values.col(6) = m.values.col(0);
    for (int c = 0; c < 8; ++c) m.col_labels.push_back("c" + std::to_string(c));
    const auto once = refex::prune_correlated(m, 0.8);
    const auto twice = refex::prune_correlated(once, 0.8);
    EXPECT_EQ(once.col_labels, twice.col_labels);
    EXPECT_EQ(once.values, twice.values);
  }
}

TEST(RecurseFeatures, LogTransformKeepsColumnOrder) {
  const Graph g = synth::preferential_attachment(60, 2, 7);
  const auto raw = refex::extract_features(g, {});
  const auto logged = refex::extract_features(g, {.log_transform = true});
  ASSERT_EQ(raw.col_labels, logged.col_labels);
  for (Eigen::Index c = 0; c < raw.values.cols(); ++c) {
    EXPECT_GE(logged.values.col(c).minCoeff(), 0.0);
    EXPECT_LE(logged.values.col(c).maxCoeff(), 1.0);
    for (Eigen::Index a = 0; a < raw.values.rows(); ++a)
      for (Eigen::Index b = 0; b < raw.values.rows(); ++b)
        if (raw.values(a, c) < raw.values(b, c)) EXPECT_LE(logged.values(a, c), logged.values(b, c));
  }
}

TEST(RecurseFeatures, ConfigErrors) {
  const Graph g = path3();
  EXPECT_THROW(refex::extract_features(g, {.max_depth = -1}), ConfigError);
  EXPECT_THROW(refex::extract_features(g, {.prune_corr = 1.5}), ConfigError);
  EXPECT_THROW(refex::extract_features(g, {.max_depth = 1, .use_sum = false, .use_mean = false}), ConfigError);
  EXPECT_NO_THROW(refex::extract_features(g, {.max_depth = 0, .use_sum = false, .use_mean = false}));
  LabeledMatrix bad;
  bad.values = Eigen::MatrixXd::Zero(2, 1);
  EXPECT_THROW(refex::recurse_features(g, bad, {}), InputError);
}

TEST(Schema, UnknownLabelRejected) {
  EXPECT_THROW(refex::evaluate_schema(path3(), {"sum(colour)"}), InputError);
}

TEST(ExtractTensor, IdenticalRelationsGiveIdenticalSlices) {
  const MultiGraph mg = load_multigraph("a\tb\tx\nb\tc\tx\nc\td\tx\na\tb\ty\nb\tc\ty\nc\td\ty\n");
  const auto t = to_dense(refex::extract_tensor(mg, {}));
  ASSERT_EQ(t.dim(2), 2);
  for (Eigen::Index j = 0; j < t.dim(1); ++j)
    for (Eigen::Index i = 0; i < t.dim(0); ++i) EXPECT_EQ(t(i, j, 0), t(i, j, 1));
}

TEST(ExtractTensor, EmptyRelationGivesZeroSlice) {
  MultiGraph mg = load_multigraph("a\tb\tx\nb\tc\tx\na\tc\tx\n");
  mg.relation_ids.push_back("silent");
  const auto t = to_dense(refex::extract_tensor(mg, {.log_transform = true}));
  ASSERT_EQ(t.dim(2), 2);
  double slice0 = 0.0, slice1 = 0.0;
  for (Eigen::Index j = 0; j < t.dim(1); ++j)
    for (Eigen::Index i = 0; i < t.dim(0); ++i) {
      slice0 += t(i, j, 0);
      slice1 += std::abs(t(i, j, 1));
    }
  EXPECT_GT(slice0, 0.0);
  EXPECT_EQ(slice1, 0.0);
}

TEST(ExtractTensor, SlicesMatchPerRelationOracle) {
  std::mt19937_64 rng(36);
  for (int t = 0; t < 10; ++t) {
    MultiGraph mg;
    const int n = oracle::uniform_int(rng, 3, 10);
    for (int i = 0; i < n; ++i) mg.node_ids.push_back("n" + std::to_string(i));
    mg.relation_ids = {"r0", "r1"};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (std::size_t r = 0; r < 2; ++r)
          if (u(rng) < 0.35) mg.edges.push_back({std::size_t(i), std::size_t(j), r, 1.0 + u(rng)});
    for (const bool log : {false, true}) {
      const CooTensor coo = refex::extract_tensor(mg, {.max_depth = 2, .log_transform = log});
      const auto x = to_dense(coo);
      for (std::size_t r = 0; r < 2; ++r) {
        Graph slice;
        slice.node_ids = mg.node_ids;
        for (const auto& e : mg.edges)
          if (e.relation == r) slice.edges.push_back({e.src, e.dst, e.weight});
        const Dense d = dense(slice);
        for (std::size_t c = 0; c < coo.feature_labels.size(); ++c) {
          Eigen::VectorXd want = eval_label(d, coo.feature_labels[c]);
          if (log) want = want.array().log1p().matrix();
          for (Eigen::Index i = 0; i < n; ++i)
            EXPECT_NEAR(x(i, static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)), want(i),
                        1e-9 * std::max(1.0, std::abs(want(i))));
        }
      }
    }
  }
}
