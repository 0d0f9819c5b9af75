#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "effortprop/core.hpp"
#include "effortprop/relation.hpp"
#include "json.hpp"

namespace effortprop {

inline constexpr int kOpinionScaleMax = 6;

/// One expert's pairwise influence judgements on the integer 0..6 scale.
struct OpinionMatrix {
  std::string expert_id;
  Matrix entries;
};

namespace detail {

inline bool is_integral(double v) { return std::nearbyint(v) == v; }

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && issp(s[start])) ++start;
  return s.substr(start);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

inline void check_opinion_scale(const OpinionMatrix& opinion) {
  for (double v : opinion.entries.data()) {
    if (!detail::is_integral(v) || v < 0.0 || v > kOpinionScaleMax)
      throw ValidationError("opinion entry " + detail::format_double(v, 3) +
                            " from expert '" + opinion.expert_id +
                            "' is not an integer on the 0.." +
                            std::to_string(kOpinionScaleMax) + " scale");
  }
}

/// Applied to each opinion matrix after the scale check and before the
/// weighted mean; identity when empty.
using OpinionTransform = std::function<Matrix(const OpinionMatrix&)>;

/// Weighted arithmetic mean of expert opinion matrices (equal weights by
/// default) producing the direct influence matrix.
inline Matrix aggregate_opinions(const std::vector<OpinionMatrix>& opinions,
                                 const std::vector<double>* expert_weights = nullptr,
                                 const OpinionTransform& pre_aggregate = {}) {
  if (opinions.empty()) throw Error("no opinion matrices to aggregate");
  const std::size_t rows = opinions.front().entries.rows();
  const std::size_t cols = opinions.front().entries.cols();
  if (expert_weights && expert_weights->size() != opinions.size())
    throw Error("expected " + std::to_string(opinions.size()) +
                " expert weights, got " +
                std::to_string(expert_weights->size()));

  Matrix acc(rows, cols);
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < opinions.size(); ++k) {
    const OpinionMatrix& op = opinions[k];
    if (op.entries.rows() != rows || op.entries.cols() != cols)
      throw Error("opinion matrix dimension mismatch for expert '" +
                  op.expert_id + "'");
    check_opinion_scale(op);
    const double w = expert_weights ? (*expert_weights)[k] : 1.0;
    if (w < 0.0)
      throw Error("negative weight for expert '" + op.expert_id + "'");
    Matrix m = pre_aggregate ? pre_aggregate(op) : op.entries;
    if (m.rows() != rows || m.cols() != cols)
      throw Error("pre-aggregation transform changed the matrix shape");
    m *= w;
    acc += m;
    weight_sum += w;
  }
  if (weight_sum <= 0.0) throw Error("expert weights sum to zero");
  acc *= 1.0 / weight_sum;
  if (!acc.nonnegative())
    throw Error("aggregated influence matrix has negative entries");
  return acc;
}

/// Row normalization of a nonnegative direct influence matrix: each row sums
/// to 1 afterwards; all-zero rows stay all-zero.
inline Matrix normalize_rows(const Matrix& dim) {
  if (!dim.nonnegative())
    throw Error("cannot normalize a matrix with negative entries");
  Matrix out(dim.rows(), dim.cols());
  for (std::size_t i = 0; i < dim.rows(); ++i) {
    const double s = dim.row_sum(i);
    if (s <= 0.0) continue;
    for (std::size_t j = 0; j < dim.cols(); ++j) out(i, j) = dim(i, j) / s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Project files

struct ProjectOptions {
  std::optional<std::vector<double>> expert_weights;
  ThresholdRule threshold_rule = ThresholdRule::MeanPlusHalfStd;
  TrmScale trm_scale = TrmScale::MaxRowSum;
  bool peap_gating = false;
  bool within_block_propagation = false;
};

/// Fully loaded analysis input: roster, significance, influence, options.
/// `ndim` is the row-normalized matrix the engines consume; `dim` is kept
/// when the project supplied (or aggregated) raw influence.
struct Project {
  std::string name;
  FactorSystem system;
  SignificanceVector nsig;
  Matrix ndim;
  std::optional<Matrix> dim;
  ProjectOptions options;
};

/// Opinion CSV: header `factor,<id>,...` naming every factor once, then one
/// row per source factor with integer 0..6 cells.
inline OpinionMatrix load_opinion_csv(const std::filesystem::path& path,
                                      const FactorSystem& system) {
  const std::string text = detail::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> table;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    table.push_back(detail::split_csv_line(line));
  }
  const std::size_t n = system.size();
  if (table.size() != n + 1)
    throw ParseError("'" + path.string() + "': expected " +
                     std::to_string(n + 1) + " rows (header + one per factor)");

  const auto& header = table.front();
  if (header.size() != n + 1 || detail::trim(header[0]) != "factor")
    throw ParseError("'" + path.string() +
                     "': header must be 'factor,<id>,...' covering every factor");
  std::vector<std::size_t> col_index(n);
  std::vector<char> seen(n, 0);
  for (std::size_t c = 1; c < header.size(); ++c) {
    const Factor* f = system.find(header[c]);
    if (!f || seen[system.index_of(header[c])])
      throw ParseError("'" + path.string() + "': header column '" + header[c] +
                       "' is not a unique factor id");
    seen[system.index_of(header[c])] = 1;
    col_index[c - 1] = system.index_of(header[c]);
  }

  OpinionMatrix out;
  out.expert_id = path.stem().string();
  out.entries = Matrix(n, n);
  std::vector<char> row_seen(n, 0);
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    if (cells.size() != n + 1)
      throw ParseError("'" + path.string() + "': row " + std::to_string(r + 1) +
                       " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(n + 1));
    const Factor* f = system.find(cells[0]);
    if (!f || row_seen[system.index_of(cells[0])])
      throw ParseError("'" + path.string() + "': row label '" + cells[0] +
                       "' is not a unique factor id");
    const std::size_t ri = system.index_of(cells[0]);
    row_seen[ri] = 1;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      std::size_t used = 0;
      long value = 0;
      try {
        value = std::stol(cells[c], &used);
      } catch (const std::exception&) {
        throw ParseError("'" + path.string() + "': cell '" + cells[c] +
                         "' is not an integer");
      }
      if (used != cells[c].size())
        throw ParseError("'" + path.string() + "': cell '" + cells[c] +
                         "' is not an integer");
      out.entries(ri, col_index[c - 1]) = static_cast<double>(value);
    }
  }
  check_opinion_scale(out);
  return out;
}

/// Headerless CSV of doubles; all rows must have the same width.
inline Matrix load_numeric_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : detail::split_csv_line(line)) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("'" + path.string() + "': cell '" + cell +
                         "' is not a number");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("'" + path.string() + "': ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("'" + path.string() + "': empty matrix");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  return out;
}

namespace detail {

inline Matrix matrix_from_json(const nlohmann::json& node, const std::string& what) {
  if (!node.is_array() || node.empty() || !node.front().is_array())
    throw ParseError(what + " must be an array of numeric rows");
  const std::size_t rows = node.size();
  const std::size_t cols = node.front().size();
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = node[i];
    if (!row.is_array() || row.size() != cols)
      throw ParseError(what + " has ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!row[j].is_number())
        throw ParseError(what + " has a non-numeric entry");
      out(i, j) = row[j].get<double>();
    }
  }
  return out;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Level level_from_json(const nlohmann::json& node, const std::string& id) {
  if (node.is_string()) return parse_level_label(node.get<std::string>());
  if (node.is_object()) {
    Level out;
    if (!node.contains("block") || !node["block"].is_number_integer())
      throw ParseError("factor '" + id + "': level needs an integer 'block'");
    out.block = node["block"].get<int>();
    if (node.contains("sublevel")) {
      if (!node["sublevel"].is_number_integer())
        throw ParseError("factor '" + id + "': sublevel must be an integer");
      out.sublevel = node["sublevel"].get<int>();
    }
    for (const auto& [key, value] : node.items()) {
      (void)value;
      if (key != "block" && key != "sublevel")
        throw ParseError("factor '" + id + "': unknown level key '" + key + "'");
    }
    return out;
  }
  throw ParseError("factor '" + id +
                   "': level must be a label string or {block, sublevel}");
}

inline std::map<std::string, double> number_map_from_json(
    const nlohmann::json& node, const std::string& what) {
  if (!node.is_object()) throw ParseError(what + " must be an object");
  std::map<std::string, double> out;
  for (const auto& [key, value] : node.items()) {
    if (!value.is_number())
      throw ParseError(what + " entry '" + key + "' is not a number");
    out[key] = value.get<double>();
  }
  return out;
}

}  // namespace detail

inline ProjectOptions options_from_json(const nlohmann::json& node) {
  ProjectOptions out;
  if (node.is_null()) return out;
  if (!node.is_object()) throw ParseError("'options' must be an object");
  for (const auto& [key, value] : node.items()) {
    if (key == "expert_weights") {
      if (!value.is_array()) throw ParseError("'expert_weights' must be an array");
      std::vector<double> weights;
      for (const auto& w : value) {
        if (!w.is_number()) throw ParseError("'expert_weights' entries must be numbers");
        weights.push_back(w.get<double>());
      }
      out.expert_weights = std::move(weights);
    } else if (key == "threshold_rule") {
      if (!value.is_string()) throw ParseError("'threshold_rule' must be a string");
      out.threshold_rule = parse_threshold_rule(value.get<std::string>());
    } else if (key == "trm_scale") {
      if (!value.is_string()) throw ParseError("'trm_scale' must be a string");
      out.trm_scale = parse_trm_scale(value.get<std::string>());
    } else if (key == "peap_gating") {
      if (!value.is_boolean()) throw ParseError("'peap_gating' must be a boolean");
      out.peap_gating = value.get<bool>();
    } else if (key == "within_block_propagation") {
      if (!value.is_boolean())
        throw ParseError("'within_block_propagation' must be a boolean");
      out.within_block_propagation = value.get<bool>();
    } else {
      throw ParseError("unknown option '" + key + "'");
    }
  }
  return out;
}

inline nlohmann::json options_to_json(const ProjectOptions& options) {
  nlohmann::json out;
  if (options.expert_weights) out["expert_weights"] = *options.expert_weights;
  out["threshold_rule"] = std::string(label(options.threshold_rule));
  out["trm_scale"] = std::string(label(options.trm_scale));
  out["peap_gating"] = options.peap_gating;
  out["within_block_propagation"] = options.within_block_propagation;
  return out;
}

/// Builds a project from a parsed JSON document. `base_dir` anchors relative
/// opinion CSV paths; `default_name` is used when the document has no name.
inline Project project_from_json(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir,
                                 const std::string& default_name = "project") {
  if (!doc.is_object()) throw ParseError("project file must be a JSON object");
  static const char* known_keys[] = {"name", "goal",     "factors", "nsig",
                                     "sig",  "opinions", "dim",     "ndim",
                                     "options"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known_keys) ok = ok || key == k;
    if (!ok) throw ParseError("unknown project key '" + key + "'");
  }

  Project project;
  project.name = doc.value("name", default_name);
  std::string goal = doc.value("goal", std::string("Goal"));

  if (!doc.contains("factors") || !doc["factors"].is_array() ||
      doc["factors"].empty())
    throw ParseError("project file needs a nonempty 'factors' array");
  std::vector<Factor> factors;
  for (const auto& node : doc["factors"]) {
    if (!node.is_object() || !node.contains("id") || !node["id"].is_string())
      throw ParseError("every factor needs a string 'id'");
    Factor f;
    f.id = node["id"].get<std::string>();
    f.name = node.value("name", f.id);
    if (node.contains("accessible")) {
      if (!node["accessible"].is_boolean())
        throw ParseError("factor '" + f.id + "': 'accessible' must be a boolean");
      f.accessible = node["accessible"].get<bool>();
    }
    if (node.contains("excluded")) {
      if (!node["excluded"].is_boolean())
        throw ParseError("factor '" + f.id + "': 'excluded' must be a boolean");
      f.excluded = node["excluded"].get<bool>();
    }
    if (node.contains("level")) f.level = detail::level_from_json(node["level"], f.id);
    for (const auto& [key, value] : node.items()) {
      (void)value;
      if (key != "id" && key != "name" && key != "accessible" &&
          key != "excluded" && key != "level")
        throw ParseError("factor '" + f.id + "': unknown key '" + key + "'");
    }
    factors.push_back(std::move(f));
  }
  project.system = FactorSystem(std::move(factors), std::move(goal));

  if (!doc.contains("nsig"))
    throw ParseError("project file missing required 'nsig'");
  project.nsig.values = detail::number_map_from_json(doc["nsig"], "'nsig'");
  if (doc.contains("sig"))
    project.nsig.raw = detail::number_map_from_json(doc["sig"], "'sig'");

  project.options = options_from_json(doc.contains("options") ? doc["options"]
                                                              : nlohmann::json());

  const int sources = int(doc.contains("opinions")) + int(doc.contains("dim")) +
                      int(doc.contains("ndim"));
  if (sources != 1)
    throw ParseError(
        "project file must provide exactly one influence source: "
        "'opinions', 'dim', or 'ndim'");

  if (doc.contains("ndim")) {
    project.ndim = detail::matrix_from_json(doc["ndim"], "'ndim'");
  } else if (doc.contains("dim")) {
    project.dim = detail::matrix_from_json(doc["dim"], "'dim'");
    project.ndim = normalize_rows(*project.dim);
  } else {
    const auto& node = doc["opinions"];
    if (!node.is_array() || node.empty())
      throw ParseError("'opinions' must be a nonempty array");
    std::vector<OpinionMatrix> opinions;
    int inline_count = 0;
    for (const auto& entry : node) {
      if (entry.is_string()) {
        opinions.push_back(
            load_opinion_csv(base_dir / entry.get<std::string>(), project.system));
      } else if (entry.is_array()) {
        OpinionMatrix op;
        op.expert_id = "expert-" + std::to_string(++inline_count);
        op.entries = detail::matrix_from_json(entry, "inline opinion matrix");
        opinions.push_back(std::move(op));
      } else if (entry.is_object()) {
        if (!entry.contains("matrix"))
          throw ParseError("inline opinion object needs a 'matrix'");
        OpinionMatrix op;
        ++inline_count;
        op.expert_id = entry.value("expert", "expert-" + std::to_string(inline_count));
        op.entries = detail::matrix_from_json(entry["matrix"], "inline opinion matrix");
        opinions.push_back(std::move(op));
      } else {
        throw ParseError("'opinions' entries must be CSV paths or matrices");
      }
    }
    const std::vector<double>* weights =
        project.options.expert_weights ? &*project.options.expert_weights : nullptr;
    project.dim = aggregate_opinions(opinions, weights);
    project.ndim = normalize_rows(*project.dim);
  }

  auto issues = validate_system(project.system, project.nsig, project.ndim);
  if (!issues.empty()) {
    std::string joined = "invalid project:";
    for (const auto& issue : issues) joined += "\n  - " + issue;
    throw ValidationError(joined);
  }
  return project;
}

inline Project load_project(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
  return project_from_json(doc, path.parent_path(), path.stem().string());
}

/// Serializes a project. Opinion lists are not retained: a project built from
/// opinions is saved with its aggregated 'dim' (reloading is bit-exact since
/// row normalization is deterministic).
inline nlohmann::json project_to_json(const Project& project) {
  nlohmann::json doc;
  doc["name"] = project.name;
  doc["goal"] = project.system.goal_name();
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : project.system.factors()) {
    nlohmann::json node;
    node["id"] = f.id;
    node["name"] = f.name;
    node["accessible"] = f.accessible;
    node["level"] = {{"block", f.level.block}, {"sublevel", f.level.sublevel}};
    if (f.excluded) node["excluded"] = true;
    factors.push_back(std::move(node));
  }
  doc["factors"] = std::move(factors);
  doc["nsig"] = project.nsig.values;
  if (project.nsig.raw) doc["sig"] = *project.nsig.raw;
  if (project.dim)
    doc["dim"] = detail::matrix_to_json(*project.dim);
  else
    doc["ndim"] = detail::matrix_to_json(project.ndim);
  doc["options"] = options_to_json(project.options);
  return doc;
}

inline void save_project(const Project& project,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << project_to_json(project).dump(2) << '\n';
}

}  // namespace effortprop
