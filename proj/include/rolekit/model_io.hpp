#pragma once

// Model documents: one JSON object per model. Doubles are written in
// shortest round-trip form so read(write(m)) reproduces every bit. Tucker
// cores are stored sparsely (nonzero entries only).

#include "rolekit/error.hpp"
#include "rolekit/glrd.hpp"
#include "rolekit/mrd.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace rolekit {

using Model = std::variant<glrd::RoleModel, mrd::TuckerModel>;

namespace model_io {

using nlohmann::json;

inline constexpr const char* kFormat = "rolekit-model";
inline constexpr int kVersion = 1;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json values = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& values = j.at("values");
  if (rows < 0 || cols < 0 || !values.is_array() || static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw FormatError(what + " declares " + std::to_string(rows) + "x" + std::to_string(cols) + " but holds " +
                      std::to_string(values.size()) + " values");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[idx++].get<double>();
  return m;
}

inline json constraint_to_json(const glrd::ConstraintSpec& c) {
  json j{{"kind", glrd::to_string(c.kind)}, {"target", glrd::to_string(c.target)}, {"eps", c.eps}};
  j["reference"] = c.reference.size() > 0 ? matrix_to_json(c.reference) : json(nullptr);
  return j;
}

inline glrd::ConstraintSpec constraint_from_json(const json& j) {
  glrd::ConstraintSpec c;
  c.kind = glrd::parse_kind(j.at("kind").get<std::string>());
  const auto target = j.at("target").get<std::string>();
  if (target != "G" && target != "F") throw FormatError("constraint target must be G or F");
  c.target = target == "G" ? glrd::Side::kG : glrd::Side::kF;
  c.eps = j.at("eps").get<double>();
  if (j.contains("reference") && !j["reference"].is_null()) c.reference = matrix_from_json(j["reference"], "constraint reference");
  return c;
}

inline json to_json(const glrd::RoleModel& m) {
  json j{{"format", kFormat},
         {"version", kVersion},
         {"type", "role_model"},
         {"dims", {{"n", m.G.rows()}, {"r", m.G.cols()}, {"f", m.F.cols()}}},
         {"row_labels", m.row_labels},
         {"feature_labels", m.feature_labels},
         {"G", matrix_to_json(m.G)},
         {"F", matrix_to_json(m.F)},
         {"seed", m.seed},
         {"objective", m.objective},
         {"relative_error", m.relative_error},
         {"iterations", m.iterations},
         {"warnings", m.warnings}};
  json g = json::array(), f = json::array();
  for (const auto& c : m.g_constraints) g.push_back(constraint_to_json(c));
  for (const auto& c : m.f_constraints) f.push_back(constraint_to_json(c));
  j["constraints"] = {{"G", g}, {"F", f}};
  return j;
}

inline glrd::RoleModel role_model_from_json(const json& j) {
  glrd::RoleModel m;
  const auto& dims = j.at("dims");
  const auto n = dims.at("n").get<Eigen::Index>(), r = dims.at("r").get<Eigen::Index>(),
             f = dims.at("f").get<Eigen::Index>();
  m.G = matrix_from_json(j.at("G"), "G");
  m.F = matrix_from_json(j.at("F"), "F");
  if (m.G.rows() != n || m.G.cols() != r) throw FormatError("G shape disagrees with dims");
  if (m.F.rows() != r || m.F.cols() != f) throw FormatError("F shape disagrees with dims");
  m.row_labels = j.value("row_labels", std::vector<std::string>{});
  m.feature_labels = j.value("feature_labels", std::vector<std::string>{});
  if (!m.row_labels.empty() && static_cast<Eigen::Index>(m.row_labels.size()) != n) throw FormatError("row label count disagrees with dims");
  if (!m.feature_labels.empty() && static_cast<Eigen::Index>(m.feature_labels.size()) != f) throw FormatError("feature label count disagrees with dims");
  m.seed = j.at("seed").get<std::uint64_t>();
  m.objective = j.at("objective").get<double>();
  m.relative_error = j.at("relative_error").get<double>();
  m.iterations = j.at("iterations").get<int>();
  m.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("constraints")) {
    for (const auto& c : j["constraints"].value("G", json::array())) m.g_constraints.push_back(constraint_from_json(c));
    for (const auto& c : j["constraints"].value("F", json::array())) m.f_constraints.push_back(constraint_from_json(c));
  }
  return m;
}

inline json to_json(const mrd::TuckerModel& m) {
  json entries = json::array();
  const auto& core = m.core;
  for (Eigen::Index k = 0; k < core.dim(2); ++k)
    for (Eigen::Index jj = 0; jj < core.dim(1); ++jj)
      for (Eigen::Index i = 0; i < core.dim(0); ++i)
        if (core(i, jj, k) != 0.0) entries.push_back({i, jj, k, core(i, jj, k)});
  json fixed = json::array();
  for (auto f : {mrd::Factor::kG, mrd::Factor::kF, mrd::Factor::kR}) {
    if (m.fixed[static_cast<std::size_t>(f)]) fixed.push_back(mrd::to_string(f));
  }
  return {{"format", kFormat},
          {"version", kVersion},
          {"type", "tucker_model"},
          {"dims",
           {{"n", m.G.rows()}, {"f", m.F.rows()}, {"m", m.R.rows()}, {"p", m.G.cols()}, {"q", m.F.cols()}, {"s", m.R.cols()}}},
          {"entity_labels", m.entity_labels},
          {"feature_labels", m.feature_labels},
          {"relation_labels", m.relation_labels},
          {"G", matrix_to_json(m.G)},
          {"F", matrix_to_json(m.F)},
          {"R", matrix_to_json(m.R)},
          {"core", {{"dims", {core.dim(0), core.dim(1), core.dim(2)}}, {"entries", std::move(entries)}}},
          {"seed", m.seed},
          {"objective", m.objective},
          {"fit", m.fit},
          {"iterations", m.iterations},
          {"fixed", std::move(fixed)},
          {"warnings", m.warnings}};
}

inline mrd::TuckerModel tucker_model_from_json(const json& j) {
  mrd::TuckerModel m;
  const auto& dims = j.at("dims");
  auto dim = [&](const char* key) { return dims.at(key).get<Eigen::Index>(); };
  m.G = matrix_from_json(j.at("G"), "G");
  m.F = matrix_from_json(j.at("F"), "F");
  m.R = matrix_from_json(j.at("R"), "R");
  if (m.G.rows() != dim("n") || m.G.cols() != dim("p")) throw FormatError("G shape disagrees with dims");
  if (m.F.rows() != dim("f") || m.F.cols() != dim("q")) throw FormatError("F shape disagrees with dims");
  if (m.R.rows() != dim("m") || m.R.cols() != dim("s")) throw FormatError("R shape disagrees with dims");

  const auto& core = j.at("core");
  const auto cd = core.at("dims").get<std::vector<Eigen::Index>>();
  if (cd.size() != 3 || cd[0] != dim("p") || cd[1] != dim("q") || cd[2] != dim("s")) {
    throw FormatError("core dims disagree with factor dims");
  }
  m.core = numkit::Tensor3(cd[0], cd[1], cd[2]);
  for (const auto& e : core.at("entries")) {
    if (!e.is_array() || e.size() != 4) throw FormatError("core entry must be [i, j, k, value]");
    const auto i = e[0].get<Eigen::Index>(), jj = e[1].get<Eigen::Index>(), k = e[2].get<Eigen::Index>();
    if (i < 0 || jj < 0 || k < 0 || i >= cd[0] || jj >= cd[1] || k >= cd[2]) throw FormatError("core entry index out of range");
    m.core(i, jj, k) = e[3].get<double>();
  }
  m.entity_labels = j.value("entity_labels", std::vector<std::string>{});
  m.feature_labels = j.value("feature_labels", std::vector<std::string>{});
  m.relation_labels = j.value("relation_labels", std::vector<std::string>{});
  m.seed = j.at("seed").get<std::uint64_t>();
  m.objective = j.at("objective").get<double>();
  m.fit = j.at("fit").get<double>();
  m.iterations = j.at("iterations").get<int>();
  for (const auto& f : j.value("fixed", json::array())) m.fixed[static_cast<std::size_t>(mrd::parse_factor(f.get<std::string>()))] = true;
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

}  // namespace model_io

inline std::string write_model(const Model& model) {
  const auto j = std::visit([](const auto& m) { return model_io::to_json(m); }, model);
  return j.dump(2) + "\n";
}

inline void write_model(std::ostream& out, const Model& model) { out << write_model(model); }

inline Model read_model(std::istream& in) {
  try {
    const auto j = model_io::json::parse(in);
    if (j.value("format", std::string{}) != model_io::kFormat) throw FormatError("not a rolekit model document");
    const auto type = j.at("type").get<std::string>();
    if (type == "role_model") return model_io::role_model_from_json(j);
    if (type == "tucker_model") return model_io::tucker_model_from_json(j);
    throw FormatError("unknown model type '" + type + "'");
  } catch (const model_io::json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  }
}

inline Model read_model(const std::string& text) {
  std::istringstream in(text);
  return read_model(in);
}

}  // namespace rolekit
