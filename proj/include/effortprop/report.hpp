#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effortprop/core.hpp"
#include "effortprop/heap.hpp"
#include "effortprop/ingest.hpp"
#include "effortprop/peap.hpp"
#include "effortprop/relation.hpp"
#include "json.hpp"

namespace effortprop {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Human renderings print 6 decimals; machine renderings (JSON/CSV) keep full
/// precision via the shortest round-trip representation.
inline std::string format_fixed(double value, int decimals = 6) {
  return detail::format_double(value, decimals);
}

inline std::string format_full(double value) {
  return nlohmann::json(value).dump();
}

inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Block label with the sublevel letter only where the system distinguishes
/// sublevels inside that block ("I-B" vs plain "III").
inline std::string level_label(const FactorSystem& system, const Level& level) {
  bool multi = false;
  for (const auto& f : system.factors())
    if (f.level.block == level.block && f.level.sublevel != level.sublevel) {
      multi = true;
      break;
    }
  return format_level_label(level, multi);
}

// ---------------------------------------------------------------------------
// Strategy comparison

struct ReportRow {
  StrategyTag tag;
  double total_epi = 0.0;
  bool best = false;
};

struct ComparisonReport {
  std::string project_name;
  nlohmann::json options_echo;
  std::vector<ReportRow> rows;
};

struct CompareFilter {
  bool include_upeap = true;
  bool include_wpeap = true;
  bool include_heap = true;
  std::optional<BlockHeuristic> block;
  std::optional<UnitHeuristic> unit;
  std::optional<int> path;
};

/// The matrix relation mining starts from: the raw influence when the
/// project has one, otherwise the normalized matrix.
inline const Matrix& closure_input(const Project& project) {
  return project.dim ? *project.dim : project.ndim;
}

/// Evaluates every requested strategy in a fixed order: U-PEAP, W-PEAP, then
/// the hierarchical grid by block heuristic, unit heuristic, path index.
/// Exactly one row is flagged best (first argmax, deterministic).
inline ComparisonReport run_comparison(const Project& project,
                                       const CompareFilter& filter = {}) {
  ComparisonReport report;
  report.project_name = project.name;
  report.options_echo = options_to_json(project.options);

  EdgeMask mask_storage;
  const EdgeMask* mask = nullptr;
  if (project.options.peap_gating &&
      (filter.include_upeap || filter.include_wpeap)) {
    mask_storage = mine_relations(closure_input(project),
                                  project.options.trm_scale,
                                  project.options.threshold_rule)
                       .significant;
    mask = &mask_storage;
  }
  const PeapConfig peap_config{project.options.peap_gating, 1.0};
  for (UnitHeuristic weighting : {UnitHeuristic::Uni, UnitHeuristic::NSig}) {
    if (weighting == UnitHeuristic::Uni ? !filter.include_upeap
                                        : !filter.include_wpeap)
      continue;
    auto result = evaluate_peap(project.system, project.nsig, project.ndim,
                                weighting, peap_config, mask);
    report.rows.push_back({result.tag, result.total_epi, false});
  }

  if (filter.include_heap) {
    const auto paths = enumerate_paths(project.system);
    const HeapConfig heap_config{project.options.within_block_propagation, 1.0};
    for (BlockHeuristic block :
         {BlockHeuristic::Uni, BlockHeuristic::Bsr, BlockHeuristic::Bepr}) {
      if (filter.block && *filter.block != block) continue;
      for (UnitHeuristic unit :
           {UnitHeuristic::Uni, UnitHeuristic::NSig, UnitHeuristic::Uepf}) {
        if (filter.unit && *filter.unit != unit) continue;
        for (const auto& path : paths) {
          if (filter.path && *filter.path != path.index) continue;
          auto result = evaluate_heap(project.system, project.nsig,
                                      project.ndim, path, {block, unit},
                                      heap_config);
          report.rows.push_back({result.tag, result.total_epi, false});
        }
      }
    }
  }

  if (!report.rows.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
      if (report.rows[i].total_epi > report.rows[best].total_epi) best = i;
    report.rows[best].best = true;
  }
  return report;
}

inline nlohmann::json report_to_json(const ComparisonReport& report) {
  nlohmann::json doc;
  doc["metadata"] = {{"project", report.project_name},
                     {"tool_version", std::string(kToolVersion)},
                     {"options", report.options_echo}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json node;
    node["strategy"] = row.tag.text();
    node["family"] = std::string(label(row.tag.family));
    node["heuristics"] = row.tag.heuristics_text();
    if (row.tag.path)
      node["path"] = *row.tag.path;
    else
      node["path"] = nullptr;
    node["total_epi"] = row.total_epi;
    node["best"] = row.best;
    rows.push_back(std::move(node));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

inline std::string report_to_csv(const ComparisonReport& report) {
  std::string out = "strategy,heuristics,path,total_epi,best\n";
  for (const auto& row : report.rows) {
    out += csv_field(row.tag.text()) + ',';
    out += csv_field(row.tag.heuristics_text()) + ',';
    out += row.tag.path ? std::to_string(*row.tag.path) : "";
    out += ',' + format_full(row.total_epi) + ',';
    out += row.best ? "*" : "";
    out += '\n';
  }
  return out;
}

inline std::string report_to_markdown(const ComparisonReport& report) {
  std::string out = "# Strategy comparison: " + report.project_name + "\n\n";
  out += "| Strategy | Heuristics | Path | TotalEPI | Best |\n";
  out += "| --- | --- | --- | ---: | :-: |\n";
  for (const auto& row : report.rows) {
    out += "| " + row.tag.text() + " | " + row.tag.heuristics_text() + " | ";
    out += row.tag.path ? std::to_string(*row.tag.path) : "";
    out += " | " + format_fixed(row.total_epi) + " | ";
    out += row.best ? "*" : "";
    out += " |\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single strategy result

inline nlohmann::json result_to_json(const StrategyResult& result) {
  nlohmann::json doc;
  nlohmann::json strategy;
  strategy["family"] = std::string(label(result.tag.family));
  strategy["label"] = result.tag.text();
  if (result.tag.block)
    strategy["block"] = std::string(label(*result.tag.block));
  else
    strategy["block"] = nullptr;
  strategy["unit"] = std::string(label(result.tag.unit));
  if (result.tag.path)
    strategy["path"] = *result.tag.path;
  else
    strategy["path"] = nullptr;
  doc["strategy"] = std::move(strategy);
  doc["total_effort"] = result.assignment.total;
  doc["efforts"] = result.assignment.efforts;
  if (result.tag.family == StrategyFamily::Peap)
    doc["latent_inflows"] = result.latent_inflows;
  if (result.uepf) doc["uepf"] = *result.uepf;
  doc["total_epi"] = result.total_epi;
  return doc;
}

inline std::string result_title(const StrategyResult& result) {
  std::string title = result.tag.text();
  if (result.tag.family == StrategyFamily::Heap) {
    title += " " + result.tag.heuristics_text();
    if (result.tag.path) title += ", path " + std::to_string(*result.tag.path);
  }
  return title;
}

inline std::string result_to_csv(const StrategyResult& result) {
  std::string out = "quantity,factor,value\n";
  out += "strategy,," + csv_field(result_title(result)) + '\n';
  out += "total_effort,," + format_full(result.assignment.total) + '\n';
  for (const auto& [id, effort] : result.assignment.efforts)
    out += "effort," + csv_field(id) + ',' + format_full(effort) + '\n';
  for (const auto& [id, inflow] : result.latent_inflows)
    out += "latent_inflow," + csv_field(id) + ',' + format_full(inflow) + '\n';
  if (result.uepf)
    for (const auto& [id, value] : *result.uepf)
      out += "uepf," + csv_field(id) + ',' + format_full(value) + '\n';
  out += "total_epi,," + format_full(result.total_epi) + '\n';
  return out;
}

inline std::string result_to_markdown(const StrategyResult& result) {
  std::string out = "# " + result_title(result) + "\n\n";
  out += "TotalEPI: " + format_fixed(result.total_epi) + "\n\n";
  out += "| Factor | Effort |\n| --- | ---: |\n";
  for (const auto& [id, effort] : result.assignment.efforts)
    out += "| " + id + " | " + format_fixed(effort) + " |\n";
  if (!result.latent_inflows.empty()) {
    out += "\n| Latent factor | Inflow |\n| --- | ---: |\n";
    for (const auto& [id, inflow] : result.latent_inflows)
      out += "| " + id + " | " + format_fixed(inflow) + " |\n";
  }
  if (result.uepf && !result.uepf->empty()) {
    out += "\n| Factor | UEPF |\n| --- | ---: |\n";
    for (const auto& [id, value] : *result.uepf)
      out += "| " + id + " | " + format_fixed(value) + " |\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeled matrices (normalize / trm payloads)

inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i + 1));
  return out;
}

inline nlohmann::json matrix_payload_json(const std::vector<std::string>& labels,
                                          const Matrix& m,
                                          const std::string& key) {
  nlohmann::json doc;
  doc["factors"] = labels;
  doc[key] = detail::matrix_to_json(m);
  return doc;
}

inline std::string matrix_to_csv(const std::vector<std::string>& labels,
                                 const Matrix& m) {
  std::string out = "factor";
  for (const auto& l : labels) out += ',' + csv_field(l);
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += csv_field(labels[i]);
    for (std::size_t j = 0; j < m.cols(); ++j) out += ',' + format_full(m(i, j));
    out += '\n';
  }
  return out;
}

inline std::string matrix_to_markdown(const std::vector<std::string>& labels,
                                      const Matrix& m) {
  std::string out = "| Factor |";
  for (const auto& l : labels) out += ' ' + l + " |";
  out += "\n| --- |";
  for (std::size_t j = 0; j < m.cols(); ++j) out += " ---: |";
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += "| " + labels[i] + " |";
    for (std::size_t j = 0; j < m.cols(); ++j)
      out += ' ' + format_fixed(m(i, j)) + " |";
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relation mining payload

inline nlohmann::json trm_to_json(const std::vector<std::string>& labels,
                                  const TotalRelation& relation) {
  nlohmann::json doc = matrix_payload_json(labels, relation.entries, "trm");
  doc["tau"] = relation.tau;
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < relation.entries.rows(); ++i)
    for (std::size_t j = 0; j < relation.entries.cols(); ++j)
      if (relation.significant.at(i, j))
        edges.push_back({{"from", labels[i]},
                         {"to", labels[j]},
                         {"value", relation.entries(i, j)}});
  doc["edges"] = std::move(edges);
  return doc;
}

inline std::string trm_to_csv(const std::vector<std::string>& labels,
                              const TotalRelation& relation) {
  std::string out = matrix_to_csv(labels, relation.entries);
  out += "\ntau," + format_full(relation.tau) + "\n\nfrom,to,value\n";
  for (std::size_t i = 0; i < relation.entries.rows(); ++i)
    for (std::size_t j = 0; j < relation.entries.cols(); ++j)
      if (relation.significant.at(i, j))
        out += csv_field(labels[i]) + ',' + csv_field(labels[j]) + ',' +
               format_full(relation.entries(i, j)) + '\n';
  return out;
}

inline std::string trm_to_markdown(const std::vector<std::string>& labels,
                                   const TotalRelation& relation) {
  std::string out = "# Total relation\n\n";
  out += matrix_to_markdown(labels, relation.entries);
  out += "\nThreshold tau = " + format_fixed(relation.tau) + "\n\n";
  out += "| From | To | Value |\n| --- | --- | ---: |\n";
  for (std::size_t i = 0; i < relation.entries.rows(); ++i)
    for (std::size_t j = 0; j < relation.entries.cols(); ++j)
      if (relation.significant.at(i, j))
        out += "| " + labels[i] + " | " + labels[j] + " | " +
               format_fixed(relation.entries(i, j)) + " |\n";
  return out;
}

// ---------------------------------------------------------------------------
// Classification payload

inline nlohmann::json classification_to_json(const Classification& split) {
  return {{"daf", split.daf}, {"ndaf", split.ndaf}};
}

inline std::string classification_to_csv(const FactorSystem& system,
                                         const Classification& split) {
  std::string out = "factor,role,level\n";
  for (const auto& id : split.daf)
    out += csv_field(id) + ",accessible," +
           csv_field(level_label(system, system.at(id).level)) + '\n';
  for (const auto& id : split.ndaf)
    out += csv_field(id) + ",latent," +
           csv_field(level_label(system, system.at(id).level)) + '\n';
  return out;
}

inline std::string classification_to_markdown(const FactorSystem& system,
                                              const Classification& split) {
  std::string out = "# Factor classification\n\n| Factor | Role | Level |\n";
  out += "| --- | --- | --- |\n";
  for (const auto& id : split.daf)
    out += "| " + id + " | accessible | " +
           level_label(system, system.at(id).level) + " |\n";
  for (const auto& id : split.ndaf)
    out += "| " + id + " | latent | " +
           level_label(system, system.at(id).level) + " |\n";
  return out;
}

// ---------------------------------------------------------------------------
// Strategic path payload

inline nlohmann::json paths_to_json(const FactorSystem& system,
                                    const std::vector<StrategicPath>& paths) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& path : paths) {
    nlohmann::json node;
    node["index"] = path.index;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : path.blocks) {
      const bool effective =
          std::find(path.effective_blocks.begin(), path.effective_blocks.end(),
                    block.block) != path.effective_blocks.end();
      blocks.push_back({{"block", to_roman(block.block)},
                        {"members", block.members},
                        {"effective", effective}});
    }
    node["blocks"] = std::move(blocks);
    nlohmann::json effective = nlohmann::json::array();
    for (int b : path.effective_blocks) effective.push_back(to_roman(b));
    node["effective_blocks"] = std::move(effective);
    out.push_back(std::move(node));
  }
  (void)system;
  return out;
}

inline std::string join_members(const std::vector<std::string>& members) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out += "; ";
    out += members[i];
  }
  return out;
}

inline std::string paths_to_csv(const FactorSystem& system,
                                const std::vector<StrategicPath>& paths) {
  (void)system;
  std::string out = "path,block,effective,members\n";
  for (const auto& path : paths)
    for (const auto& block : path.blocks) {
      const bool effective =
          std::find(path.effective_blocks.begin(), path.effective_blocks.end(),
                    block.block) != path.effective_blocks.end();
      out += std::to_string(path.index) + ',' + to_roman(block.block) + ',' +
             (effective ? "yes" : "no") + ',' +
             csv_field(join_members(block.members)) + '\n';
    }
  return out;
}

inline std::string paths_to_markdown(const FactorSystem& system,
                                     const std::vector<StrategicPath>& paths) {
  (void)system;
  std::string out = "# Strategic paths\n";
  for (const auto& path : paths) {
    out += "\n## Path " + std::to_string(path.index) + "\n\n";
    out += "| Block | Members | Effective |\n| --- | --- | :-: |\n";
    for (const auto& block : path.blocks) {
      const bool effective =
          std::find(path.effective_blocks.begin(), path.effective_blocks.end(),
                    block.block) != path.effective_blocks.end();
      out += "| " + to_roman(block.block) + " | " + join_members(block.members) +
             " | " + (effective ? "yes" : "no") + " |\n";
    }
  }
  return out;
}

}  // namespace effortprop
