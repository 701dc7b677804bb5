#pragma once

// Planted instances with known ground truth.

#include "rolekit/graphio.hpp"
#include "rolekit/mrd.hpp"
#include "rolekit/numkit/tensor.hpp"
#include "rolekit/refex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rolekit::synth {

// Generator streams are salted so a planted instance never shares its random
// stream with a solver started from the same seed.
inline std::mt19937_64 generator(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x73796e74u};
  return std::mt19937_64(seq);
}

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

// Multiplies every entry by (1 + level * u), u ~ U(-1, 1).
inline void multiplicative_noise(Eigen::MatrixXd& m, double level, std::mt19937_64& rng) {
  if (level <= 0.0) return;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) *= 1.0 + level * u(rng);
}

inline void multiplicative_noise(numkit::Tensor3& t, double level, std::mt19937_64& rng) {
  if (level <= 0.0) return;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : t.values()) v *= 1.0 + level * u(rng);
}

struct PlantedNmf {
  Eigen::MatrixXd V, G, F;
};

inline PlantedNmf planted_nmf(Eigen::Index n, Eigen::Index f, Eigen::Index r, std::uint64_t seed, double noise = 0.0) {
  auto rng = generator(seed);
  PlantedNmf p;
  p.G = uniform_matrix(n, r, rng);
  p.F = uniform_matrix(r, f, rng);
  p.V = p.G * p.F;
  multiplicative_noise(p.V, noise, rng);
  return p;
}

struct PlantedTucker {
  numkit::Tensor3 tensor;
  mrd::TuckerModel truth;
};

inline PlantedTucker planted_tucker(Eigen::Index n, Eigen::Index f, Eigen::Index m, Eigen::Index p, Eigen::Index q,
                                    Eigen::Index s, std::uint64_t seed, double noise = 0.0) {
  auto rng = generator(seed);
  PlantedTucker out;
  out.truth.G = uniform_matrix(n, p, rng);
  out.truth.F = uniform_matrix(f, q, rng);
  out.truth.R = uniform_matrix(m, s, rng);
  out.truth.core = numkit::fold(uniform_matrix(p, q * s, rng), 1, p, q, s);
  out.tensor = mrd::reconstruct(out.truth);
  multiplicative_noise(out.tensor, noise, rng);
  return out;
}

// Tensors sharing entity groups, relation groups and core, whose role
// matrix F takes a non-negative random walk: F_t = |F_{t-1} + drift * N(0,1)|.
struct DriftSequence {
  std::vector<numkit::Tensor3> tensors;
  std::vector<Eigen::MatrixXd> roles;
};

inline DriftSequence drift_sequence(int steps, Eigen::Index n, Eigen::Index f, Eigen::Index m, Eigen::Index p,
                                    Eigen::Index q, Eigen::Index s, double drift, std::uint64_t seed,
                                    double noise = 0.0) {
  auto rng = generator(seed);
  mrd::TuckerModel base;
  base.G = uniform_matrix(n, p, rng);
  base.F = uniform_matrix(f, q, rng);
  base.R = uniform_matrix(m, s, rng);
  base.core = numkit::fold(uniform_matrix(p, q * s, rng), 1, p, q, s);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DriftSequence seq;
  for (int t = 0; t < steps; ++t) {
    if (t > 0) {
      for (Eigen::Index c = 0; c < base.F.cols(); ++c)
        for (Eigen::Index r = 0; r < base.F.rows(); ++r) base.F(r, c) = std::abs(base.F(r, c) + drift * gauss(rng));
    }
    numkit::Tensor3 x = mrd::reconstruct(base);
    multiplicative_noise(x, noise, rng);
    seq.tensors.push_back(std::move(x));
    seq.roles.push_back(base.F);
  }
  return seq;
}

// Preferential-attachment graph: each new node links to `links` distinct
// earlier nodes chosen proportionally to degree.
inline Graph preferential_attachment(std::size_t n, std::size_t links, std::uint64_t seed, const std::string& prefix = "v") {
  auto rng = generator(seed);
  Graph g;
  for (std::size_t i = 0; i < n; ++i) g.node_ids.push_back(prefix + std::to_string(i));
  std::vector<std::size_t> ends;
  const std::size_t core = std::min(n, links + 1);
  for (std::size_t a = 0; a < core; ++a)
    for (std::size_t b = a + 1; b < core; ++b) {
      g.edges.push_back({a, b, 1.0});
      ends.push_back(a);
      ends.push_back(b);
    }
  for (std::size_t v = core; v < n; ++v) {
    std::set<std::size_t> targets;
    while (targets.size() < std::min(links, v)) {
      std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
      targets.insert(ends[pick(rng)]);
    }
    for (auto t : targets) {
      g.edges.push_back({t, v, 1.0});
      ends.push_back(t);
      ends.push_back(v);
    }
  }
  return g;
}

inline Graph relabel(const Graph& g, const std::vector<std::size_t>& perm) {
  // perm[old] = new position
  Graph out;
  out.directed = g.directed;
  out.node_ids.resize(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) out.node_ids[perm[v]] = g.node_ids[v];
  for (const auto& e : g.edges) {
    std::size_t a = perm[e.src], b = perm[e.dst];
    if (!g.directed && b < a) std::swap(a, b);
    out.edges.push_back({a, b, e.weight});
  }
  return out;
}

// Two views of one graph for identity resolution: the target has its nodes
// shuffled and its raw features perturbed by multiplicative noise. Both use
// the feature schema learned on the source.
struct TwinFeatures {
  LabeledMatrix source;
  LabeledMatrix target;
  std::vector<std::string> shared_ids;
};

inline TwinFeatures twin_features(std::size_t n, double noise, std::uint64_t seed, refex::FeatureConfig config = {}) {
  const Graph g = preferential_attachment(n, 2, seed);
  auto rng = generator(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const Graph twin = relabel(g, perm);

  const bool log = config.log_transform;
  config.log_transform = false;
  TwinFeatures out;
  out.source = refex::extract_features(g, config);
  out.target = refex::evaluate_schema(twin, out.source.col_labels);
  multiplicative_noise(out.target.values, noise, rng);
  if (log) {
    refex::log_minmax(out.source.values);
    refex::log_minmax(out.target.values);
  }
  out.shared_ids = g.node_ids;
  return out;
}

}  // namespace rolekit::synth
