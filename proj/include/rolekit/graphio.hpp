#pragma once

#include "rolekit/error.hpp"
#include "rolekit/numkit/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rolekit {

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Weighted graph over labeled nodes. Parallel edges are merged by summing
// their weights; undirected graphs store each edge once as (min, max).
struct Graph {
  std::vector<std::string> node_ids;
  std::vector<Edge> edges;
  bool directed = false;

  std::size_t node_count() const noexcept { return node_ids.size(); }
};

struct MultiEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::size_t relation = 0;
  double weight = 1.0;

  friend bool operator==(const MultiEdge&, const MultiEdge&) = default;
};

struct MultiGraph {
  std::vector<std::string> node_ids;
  std::vector<std::string> relation_ids;
  std::vector<MultiEdge> edges;
  bool directed = false;

  std::size_t node_count() const noexcept { return node_ids.size(); }
  std::size_t relation_count() const noexcept { return relation_ids.size(); }
};

// Matrix with optional row/column labels (node ids, feature names).
struct LabeledMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

struct CooEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  double value = 0.0;

  friend bool operator==(const CooEntry&, const CooEntry&) = default;
};

// Sparse coordinate tensor (entities x features x relations) with optional
// labels per mode.
struct CooTensor {
  std::array<std::size_t, 3> dims{0, 0, 0};
  std::vector<CooEntry> entries;
  std::vector<std::string> entity_labels;
  std::vector<std::string> feature_labels;
  std::vector<std::string> relation_labels;
};

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

namespace io {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string_view strip_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  // from_chars rejects a leading '+', accept it for hand-written files.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, "not a finite number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::size_t parse_index(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(line, "not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

inline double parse_weight(std::string_view s, std::size_t line) {
  const double w = parse_double(s, line);
  if (w < 0.0) throw ParseError(line, "negative weight " + std::string(s));
  return w;
}

// Assigns indices to labels in first-seen order.
class Interner {
 public:
  std::size_t intern(std::string_view label) {
    auto [it, inserted] = index_.try_emplace(std::string(label), labels_.size());
    if (inserted) labels_.emplace_back(label);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(labels_); }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> labels_;
};

}  // namespace io

// ---------------------------------------------------------------------------
// Graph loaders
// ---------------------------------------------------------------------------

// Lines "src<TAB>dst[<TAB>weight]"; '#' starts a comment line.
inline Graph load_edge_list(std::istream& in, bool directed = false) {
  io::Interner nodes;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
  Graph g;
  g.directed = directed;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = io::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(line_no, "expected src<TAB>dst[<TAB>weight]");
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, "empty node label");
    const double w = fields.size() == 3 ? io::parse_weight(fields[2], line_no) : 1.0;
    std::size_t s = nodes.intern(fields[0]);
    std::size_t d = nodes.intern(fields[1]);
    if (!directed && d < s) std::swap(s, d);
    auto [it, inserted] = slot.try_emplace({s, d}, g.edges.size());
    if (inserted) {
      g.edges.push_back({s, d, w});
    } else {
      g.edges[it->second].weight += w;
    }
  }
  g.node_ids = nodes.take();
  return g;
}

inline Graph load_edge_list(std::string_view text, bool directed = false) {
  std::istringstream in{std::string(text)};
  return load_edge_list(in, directed);
}

// Lines "src<TAB>dst<TAB>relation[<TAB>weight]".
inline MultiGraph load_multigraph(std::istream& in, bool directed = false) {
  io::Interner nodes;
  io::Interner relations;
  std::map<std::array<std::size_t, 3>, std::size_t> slot;
  MultiGraph g;
  g.directed = directed;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = io::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(line_no, "expected src<TAB>dst<TAB>relation[<TAB>weight]");
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError(line_no, "empty label");
    }
    const double w = fields.size() == 4 ? io::parse_weight(fields[3], line_no) : 1.0;
    std::size_t s = nodes.intern(fields[0]);
    std::size_t d = nodes.intern(fields[1]);
    const std::size_t r = relations.intern(fields[2]);
    if (!directed && d < s) std::swap(s, d);
    auto [it, inserted] = slot.try_emplace({s, d, r}, g.edges.size());
    if (inserted) {
      g.edges.push_back({s, d, r, w});
    } else {
      g.edges[it->second].weight += w;
    }
  }
  g.node_ids = nodes.take();
  g.relation_ids = relations.take();
  return g;
}

inline MultiGraph load_multigraph(std::string_view text, bool directed = false) {
  std::istringstream in{std::string(text)};
  return load_multigraph(in, directed);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  for (const auto& e : g.edges) {
    out << g.node_ids[e.src] << '\t' << g.node_ids[e.dst] << '\t' << io::format_double(e.weight) << '\n';
  }
}

// Subgraph of one relation over the full shared node set.
inline Graph relation_slice(const MultiGraph& mg, std::size_t relation) {
  if (relation >= mg.relation_count()) throw ConfigError("graphio", "relation index out of range");
  Graph g{mg.node_ids, {}, mg.directed};
  for (const auto& e : mg.edges) {
    if (e.relation == relation) g.edges.push_back({e.src, e.dst, e.weight});
  }
  return g;
}

// All relations collapsed into one graph, parallel edges summed.
inline Graph aggregate(const MultiGraph& mg) {
  Graph g{mg.node_ids, {}, mg.directed};
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
  for (const auto& e : mg.edges) {
    auto [it, inserted] = slot.try_emplace({e.src, e.dst}, g.edges.size());
    if (inserted) {
      g.edges.push_back({e.src, e.dst, e.weight});
    } else {
      g.edges[it->second].weight += e.weight;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Matrix CSV: header "id,<col>,...", then "<row label>,<v>,..."
// ---------------------------------------------------------------------------

inline LabeledMatrix read_matrix_csv(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = io::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    for (auto f : io::split(line, ',')) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw ParseError(line_no, "missing CSV header");
  LabeledMatrix m;
  m.col_labels.assign(header.begin() + 1, header.end());
  const std::size_t cols = m.col_labels.size();

  std::vector<double> values;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = io::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = io::split(line, ',');
    if (fields.size() != cols + 1) {
      throw ParseError(line_no, "expected " + std::to_string(cols + 1) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    m.row_labels.emplace_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) values.push_back(io::parse_double(fields[c], line_no));
  }
  const auto rows = static_cast<Eigen::Index>(m.row_labels.size());
  m.values.resize(rows, static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(cols); ++c)
      m.values(r, c) = values[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
  return m;
}

inline void write_matrix_csv(std::ostream& out, const LabeledMatrix& m) {
  out << "id";
  for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
    out << ',' << (static_cast<std::size_t>(c) < m.col_labels.size() ? m.col_labels[static_cast<std::size_t>(c)]
                                                                      : "c" + std::to_string(c));
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    out << (static_cast<std::size_t>(r) < m.row_labels.size() ? m.row_labels[static_cast<std::size_t>(r)]
                                                               : std::to_string(r));
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) out << ',' << io::format_double(m.values(r, c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Tensor COO text:
//   optional "@entities|@features|@relations<TAB>label<TAB>..." lines,
//   one "n f m" dimension line, then "i j k value" lines (0-based).
// ---------------------------------------------------------------------------

inline CooTensor read_tensor_coo(std::istream& in) {
  CooTensor t;
  bool have_dims = false;
  std::map<std::array<std::size_t, 3>, std::size_t> slot;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = io::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '@') {
      auto fields = io::split(line, '\t');
      std::vector<std::string> labels(fields.begin() + 1, fields.end());
      if (fields[0] == "@entities") t.entity_labels = std::move(labels);
      else if (fields[0] == "@features") t.feature_labels = std::move(labels);
      else if (fields[0] == "@relations") t.relation_labels = std::move(labels);
      else throw ParseError(line_no, "unknown directive " + std::string(fields[0]));
      continue;
    }
    const auto fields = io::split_ws(line);
    if (!have_dims) {
      if (fields.size() != 3) throw ParseError(line_no, "expected dimension line 'n f m'");
      for (std::size_t d = 0; d < 3; ++d) t.dims[d] = io::parse_index(fields[d], line_no);
      have_dims = true;
      continue;
    }
    if (fields.size() != 4) throw ParseError(line_no, "expected 'i j k value'");
    CooEntry e{io::parse_index(fields[0], line_no), io::parse_index(fields[1], line_no),
               io::parse_index(fields[2], line_no), io::parse_double(fields[3], line_no)};
    if (e.i >= t.dims[0] || e.j >= t.dims[1] || e.k >= t.dims[2]) {
      throw ParseError(line_no, "index out of range");
    }
    auto [it, inserted] = slot.try_emplace({e.i, e.j, e.k}, t.entries.size());
    if (inserted) {
      t.entries.push_back(e);
    } else {
      t.entries[it->second].value += e.value;
    }
  }
  if (!have_dims) throw ParseError(line_no, "missing dimension line");
  auto check_labels = [&](const std::vector<std::string>& labels, std::size_t d, const char* what) {
    if (!labels.empty() && labels.size() != t.dims[d]) {
      throw FormatError(std::string(what) + " label count does not match dimension");
    }
  };
  check_labels(t.entity_labels, 0, "entity");
  check_labels(t.feature_labels, 1, "feature");
  check_labels(t.relation_labels, 2, "relation");
  return t;
}

inline void write_tensor_coo(std::ostream& out, const CooTensor& t) {
  auto labels = [&](const char* tag, const std::vector<std::string>& l) {
    if (l.empty()) return;
    out << tag;
    for (const auto& s : l) out << '\t' << s;
    out << '\n';
  };
  labels("@entities", t.entity_labels);
  labels("@features", t.feature_labels);
  labels("@relations", t.relation_labels);
  out << t.dims[0] << ' ' << t.dims[1] << ' ' << t.dims[2] << '\n';
  for (const auto& e : t.entries) {
    out << e.i << ' ' << e.j << ' ' << e.k << ' ' << io::format_double(e.value) << '\n';
  }
}

inline numkit::Tensor3 to_dense(const CooTensor& t) {
  numkit::Tensor3 d(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]),
                    static_cast<Eigen::Index>(t.dims[2]));
  for (const auto& e : t.entries) {
    d(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.k)) += e.value;
  }
  return d;
}

// Nonzero entries in storage order (i fastest, then j, then k).
inline CooTensor to_coo(const numkit::Tensor3& d) {
  CooTensor t;
  t.dims = {static_cast<std::size_t>(d.dim(0)), static_cast<std::size_t>(d.dim(1)),
            static_cast<std::size_t>(d.dim(2))};
  for (Eigen::Index k = 0; k < d.dim(2); ++k)
    for (Eigen::Index j = 0; j < d.dim(1); ++j)
      for (Eigen::Index i = 0; i < d.dim(0); ++i)
        if (d(i, j, k) != 0.0) {
          t.entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                               static_cast<std::size_t>(k), d(i, j, k)});
        }
  return t;
}

}  // namespace rolekit
