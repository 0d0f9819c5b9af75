// Command line front end: loads a project, runs the requested analysis, and
// prints one payload in the requested format. Exit codes: 0 success, 1
// validation or analysis failure, 2 parse or IO failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "effortprop/effortprop.hpp"

namespace {

using namespace effortprop;

struct CommonArgs {
  std::string project;
  std::string matrix;
  std::string format = "md";
  std::string out;
};

std::vector<std::string> factor_labels(const FactorSystem& system) {
  std::vector<std::string> labels;
  for (const auto& f : system.factors()) labels.push_back(f.id);
  return labels;
}

void emit(const CommonArgs& args, const std::string& payload) {
  if (args.out.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream file(args.out);
  if (!file) throw ParseError("cannot write '" + args.out + "'");
  file << payload;
}

std::string pick(const CommonArgs& args, const nlohmann::json& json_payload,
                 const std::string& csv_payload, const std::string& md_payload) {
  if (args.format == "json") return json_payload.dump(2) + "\n";
  if (args.format == "csv") return csv_payload;
  return md_payload;
}

BlockHeuristic parse_block(const std::string& text) {
  if (text == "uni") return BlockHeuristic::Uni;
  if (text == "bsr") return BlockHeuristic::Bsr;
  if (text == "bepr") return BlockHeuristic::Bepr;
  throw ParseError("unknown block heuristic '" + text + "'");
}

UnitHeuristic parse_unit(const std::string& text) {
  if (text == "uni") return UnitHeuristic::Uni;
  if (text == "nsig") return UnitHeuristic::NSig;
  if (text == "uepf") return UnitHeuristic::Uepf;
  throw ParseError("unknown unit heuristic '" + text + "'");
}

/// Applies --gating / --within-block overrides on top of project options.
void apply_overrides(Project& project, const std::string& gating,
                     const std::string& within_block) {
  if (!gating.empty()) project.options.peap_gating = gating == "on";
  if (!within_block.empty())
    project.options.within_block_propagation = within_block == "on";
}

int run_normalize(const CommonArgs& args) {
  if (!args.project.empty()) {
    Project project = load_project(args.project);
    const auto labels = factor_labels(project.system);
    emit(args, pick(args, matrix_payload_json(labels, project.ndim, "ndim"),
                    matrix_to_csv(labels, project.ndim),
                    "# Normalized influence: " + project.name + "\n\n" +
                        matrix_to_markdown(labels, project.ndim)));
    return 0;
  }
  Matrix dim = load_numeric_csv(args.matrix);
  Matrix ndim = normalize_rows(dim);
  const auto labels = default_labels(ndim.rows());
  emit(args, pick(args, matrix_payload_json(labels, ndim, "ndim"),
                  matrix_to_csv(labels, ndim),
                  "# Normalized influence\n\n" + matrix_to_markdown(labels, ndim)));
  return 0;
}

int run_trm(const CommonArgs& args, const std::string& scale_text,
            const std::string& rule_text) {
  Matrix input;
  std::vector<std::string> labels;
  TrmScale scale = TrmScale::MaxRowSum;
  ThresholdRule rule = ThresholdRule::MeanPlusHalfStd;
  if (!args.project.empty()) {
    Project project = load_project(args.project);
    input = closure_input(project);
    labels = factor_labels(project.system);
    scale = project.options.trm_scale;
    rule = project.options.threshold_rule;
  } else {
    input = load_numeric_csv(args.matrix);
    if (!input.square())
      throw ValidationError("relation mining needs a square matrix");
    labels = default_labels(input.rows());
  }
  if (!scale_text.empty()) scale = parse_trm_scale(scale_text);
  if (!rule_text.empty()) rule = parse_threshold_rule(rule_text);
  TotalRelation relation = mine_relations(input, scale, rule);
  emit(args, pick(args, trm_to_json(labels, relation),
                  trm_to_csv(labels, relation), trm_to_markdown(labels, relation)));
  return 0;
}

int run_classify(const CommonArgs& args) {
  Project project = load_project(args.project);
  const Classification split = classify_factors(project.system);
  emit(args, pick(args, classification_to_json(split),
                  classification_to_csv(project.system, split),
                  classification_to_markdown(project.system, split)));
  return 0;
}

int run_paths(const CommonArgs& args) {
  Project project = load_project(args.project);
  const auto paths = enumerate_paths(project.system);
  emit(args, pick(args, paths_to_json(project.system, paths),
                  paths_to_csv(project.system, paths),
                  paths_to_markdown(project.system, paths)));
  return 0;
}

int run_evaluate(const CommonArgs& args, const std::string& strategy,
                 const std::string& block, const std::string& unit, int path_index,
                 const std::string& gating, const std::string& within_block) {
  Project project = load_project(args.project);
  apply_overrides(project, gating, within_block);

  StrategyResult result;
  if (strategy == "u-peap" || strategy == "w-peap") {
    EdgeMask mask_storage;
    const EdgeMask* mask = nullptr;
    if (project.options.peap_gating) {
      mask_storage = mine_relations(closure_input(project),
                                    project.options.trm_scale,
                                    project.options.threshold_rule)
                         .significant;
      mask = &mask_storage;
    }
    const PeapConfig config{project.options.peap_gating, 1.0};
    result = evaluate_peap(project.system, project.nsig, project.ndim,
                           strategy == "w-peap" ? UnitHeuristic::NSig
                                                : UnitHeuristic::Uni,
                           config, mask);
  } else {
    const auto paths = enumerate_paths(project.system);
    if (path_index < 1 || path_index > static_cast<int>(paths.size()))
      throw ValidationError("path index " + std::to_string(path_index) +
                            " out of range: project has " +
                            std::to_string(paths.size()) + " strategic paths");
    const HeapConfig config{project.options.within_block_propagation, 1.0};
    result = evaluate_heap(project.system, project.nsig, project.ndim,
                           paths[static_cast<std::size_t>(path_index - 1)],
                           {parse_block(block), parse_unit(unit)}, config);
  }
  emit(args, pick(args, result_to_json(result), result_to_csv(result),
                  result_to_markdown(result)));
  return 0;
}

int run_compare(const CommonArgs& args, const std::string& strategy,
                const std::string& block, const std::string& unit, int path_index,
                const std::string& gating, const std::string& within_block) {
  Project project = load_project(args.project);
  apply_overrides(project, gating, within_block);

  CompareFilter filter;
  if (strategy == "u-peap") {
    filter.include_wpeap = filter.include_heap = false;
  } else if (strategy == "w-peap") {
    filter.include_upeap = filter.include_heap = false;
  } else if (strategy == "peap") {
    filter.include_heap = false;
  } else if (strategy == "heap") {
    filter.include_upeap = filter.include_wpeap = false;
  } else if (strategy != "all") {
    throw ParseError("unknown strategy filter '" + strategy + "'");
  }
  if (!block.empty()) filter.block = parse_block(block);
  if (!unit.empty()) filter.unit = parse_unit(unit);
  if (path_index > 0) filter.path = path_index;

  const ComparisonReport report = run_comparison(project, filter);
  emit(args, pick(args, report_to_json(report), report_to_csv(report),
                  report_to_markdown(report)));
  return 0;
}

int run_verify(const CommonArgs& args, unsigned seed, int cases) {
  const auto results = run_self_checks(seed, cases);
  std::string out;
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    out += std::string(r.pass ? "[PASS] " : "[FAIL] ") + r.name + " (" +
           r.detail + ")\n";
  }
  out += all_pass ? "all checks passed\n" : "some checks FAILED\n";
  emit(args, out);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effort assignment and propagation strategy analyzer"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string strategy = "all";
  std::string block;
  std::string unit;
  int path_index = 0;
  std::string gating;
  std::string within_block;
  std::string scale_text;
  std::string rule_text;
  unsigned seed = 20240901u;
  int cases = 200;

  auto add_common = [&](CLI::App* cmd, bool needs_project) {
    auto* project_opt =
        cmd->add_option("-p,--project", args.project, "project JSON file");
    if (needs_project) project_opt->required();
    cmd->add_option("-f,--format", args.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "md"}))
        ->capture_default_str();
    cmd->add_option("-o,--out", args.out, "write output to a file");
    return project_opt;
  };

  auto* normalize = app.add_subcommand(
      "normalize", "row-normalize a direct influence matrix");
  add_common(normalize, false);
  normalize->add_option("-m,--matrix", args.matrix, "headerless CSV matrix");

  auto* trm = app.add_subcommand(
      "trm", "total relation closure, threshold, and significant edges");
  add_common(trm, false);
  trm->add_option("-m,--matrix", args.matrix, "headerless CSV matrix");
  trm->add_option("--scale", scale_text, "closure input scaling")
      ->check(CLI::IsMember({"max_row_sum", "none"}));
  trm->add_option("--rule", rule_text, "threshold rule")
      ->check(CLI::IsMember({"mean_plus_half_std", "mean", "mean_plus_std"}));

  auto* classify =
      app.add_subcommand("classify", "split factors into accessible and latent");
  add_common(classify, true);

  auto* paths = app.add_subcommand("paths", "enumerate strategic paths");
  add_common(paths, true);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate one strategy");
  add_common(evaluate, true);
  evaluate->add_option("-s,--strategy", strategy, "strategy to run")
      ->required()
      ->check(CLI::IsMember({"u-peap", "w-peap", "heap"}));
  evaluate->add_option("--block", block, "block heuristic (heap)")
      ->check(CLI::IsMember({"uni", "bsr", "bepr"}));
  evaluate->add_option("--unit", unit, "unit heuristic (heap)")
      ->check(CLI::IsMember({"uni", "nsig", "uepf"}));
  evaluate->add_option("--path", path_index, "1-based strategic path (heap)");
  evaluate->add_option("--gating", gating, "override significant-edge gating")
      ->check(CLI::IsMember({"on", "off"}));
  evaluate
      ->add_option("--within-block", within_block,
                   "override within-block propagation")
      ->check(CLI::IsMember({"on", "off"}));

  auto* compare =
      app.add_subcommand("compare", "evaluate and rank all strategies");
  add_common(compare, true);
  compare->add_option("-s,--strategy", strategy, "strategy family filter")
      ->check(CLI::IsMember({"all", "peap", "u-peap", "w-peap", "heap"}));
  compare->add_option("--block", block, "block heuristic filter")
      ->check(CLI::IsMember({"uni", "bsr", "bepr"}));
  compare->add_option("--unit", unit, "unit heuristic filter")
      ->check(CLI::IsMember({"uni", "nsig", "uepf"}));
  compare->add_option("--path", path_index, "1-based strategic path filter");
  compare->add_option("--gating", gating, "override significant-edge gating")
      ->check(CLI::IsMember({"on", "off"}));
  compare
      ->add_option("--within-block", within_block,
                   "override within-block propagation")
      ->check(CLI::IsMember({"on", "off"}));

  auto* verify =
      app.add_subcommand("verify", "run the randomized self-checks");
  verify->add_option("-f,--format", args.format, "ignored; output is text");
  verify->add_option("-o,--out", args.out, "write output to a file");
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--cases", cases, "cases per check")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(normalize)) {
      if (args.project.empty() == args.matrix.empty())
        throw ParseError("normalize needs exactly one of --project or --matrix");
      return run_normalize(args);
    }
    if (app.got_subcommand(trm)) {
      if (args.project.empty() == args.matrix.empty())
        throw ParseError("trm needs exactly one of --project or --matrix");
      return run_trm(args, scale_text, rule_text);
    }
    if (app.got_subcommand(classify)) return run_classify(args);
    if (app.got_subcommand(paths)) return run_paths(args);
    if (app.got_subcommand(evaluate)) {
      if (block.empty()) block = "uni";
      if (unit.empty()) unit = "uni";
      if (path_index == 0) path_index = 1;
      return run_evaluate(args, strategy, block, unit, path_index, gating,
                          within_block);
    }
    if (app.got_subcommand(compare))
      return run_compare(args, strategy, block, unit, path_index, gating,
                         within_block);
    if (app.got_subcommand(verify)) return run_verify(args, seed, cases);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
