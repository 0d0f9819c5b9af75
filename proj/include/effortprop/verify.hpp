#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "effortprop/core.hpp"
#include "effortprop/heap.hpp"
#include "effortprop/oracle.hpp"
#include "effortprop/peap.hpp"
#include "effortprop/relation.hpp"

namespace effortprop {

/// Shape controls for randomized test systems.
struct SampleOptions {
  int min_factors = 3;
  int max_factors = 8;
  // One factor per sublevel, so the system has exactly one strategic path.
  bool singleton_sublevels = false;
  // Force exactly this many accessible factors (combine with
  // singleton_sublevels so the single path still holds them all).
  std::optional<int> accessible_count;
  double latent_probability = 0.3;
  double min_row_sum = 0.05;
  double max_row_sum = 0.9;
};

struct SystemSample {
  FactorSystem system;
  SignificanceVector nsig;
  Matrix ndim;
};

/// Random factor system with positive normalized significance and an
/// influence matrix whose rows sum below 1 (closure always converges).
/// The first factor always sits alone in the bottom sublevel and is
/// accessible, so every strategic path contains an actionable factor.
inline SystemSample sample_system(std::mt19937& rng,
                                  const SampleOptions& opts = {}) {
  std::uniform_int_distribution<int> count_dist(opts.min_factors,
                                                opts.max_factors);
  const int n = count_dist(rng);
  std::uniform_int_distribution<int> block_dist(1, std::min(4, n));
  const int nblocks = block_dist(rng);
  std::vector<int> sizes(static_cast<std::size_t>(nblocks), 1);
  {
    std::uniform_int_distribution<int> pick(0, nblocks - 1);
    for (int extra = n - nblocks; extra > 0; --extra)
      ++sizes[static_cast<std::size_t>(pick(rng))];
  }

  std::bernoulli_distribution accessible_dist(1.0 - opts.latent_probability);
  std::bernoulli_distribution pair_dist(0.45);
  std::vector<Factor> factors;
  int fid = 0;
  for (int b = 1; b <= nblocks; ++b) {
    int sublevel = 0;
    int open_members = 0;
    for (int k = 0; k < sizes[static_cast<std::size_t>(b - 1)]; ++k) {
      // Sublevels hold one or two factors; the very first factor never gets
      // a roommate so it lands on every enumerated path.
      const bool join = !opts.singleton_sublevels && open_members == 1 &&
                        !(b == 1 && sublevel == 1 && fid == 1) && pair_dist(rng);
      if (join) {
        ++open_members;
      } else {
        ++sublevel;
        open_members = 1;
      }
      ++fid;
      Factor f;
      f.id = "F" + std::to_string(fid);
      f.name = f.id;
      f.level = {b, sublevel};
      f.accessible = accessible_dist(rng);
      factors.push_back(std::move(f));
    }
  }
  factors.front().accessible = true;
  if (opts.accessible_count) {
    for (auto& f : factors) f.accessible = false;
    std::vector<std::size_t> order(factors.size());
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    const int want = std::min<int>(*opts.accessible_count,
                                   static_cast<int>(factors.size()));
    for (int i = 0; i < want; ++i) factors[order[static_cast<std::size_t>(i)]]
        .accessible = true;
  }

  SystemSample sample;
  sample.system = FactorSystem(std::move(factors));

  std::uniform_real_distribution<double> sig_dist(0.02, 1.0);
  double sig_sum = 0.0;
  std::vector<double> sig(static_cast<std::size_t>(n));
  for (auto& s : sig) {
    s = sig_dist(rng);
    sig_sum += s;
  }
  for (int i = 0; i < n; ++i)
    sample.nsig.values[sample.system.factors()[static_cast<std::size_t>(i)].id] =
        sig[static_cast<std::size_t>(i)] / sig_sum;

  std::uniform_real_distribution<double> entry_dist(0.0, 1.0);
  std::uniform_real_distribution<double> row_target(opts.min_row_sum,
                                                    opts.max_row_sum);
  sample.ndim = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < sample.ndim.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < sample.ndim.cols(); ++j) {
      sample.ndim(i, j) = entry_dist(rng);
      sum += sample.ndim(i, j);
    }
    if (sum <= 0.0) continue;
    const double scale = row_target(rng) / sum;
    for (std::size_t j = 0; j < sample.ndim.cols(); ++j)
      sample.ndim(i, j) *= scale;
  }
  return sample;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CheckResult deviation_check(const std::string& name, double worst,
                                   double tol, int cases) {
  CheckResult r;
  r.name = name;
  r.pass = worst <= tol;
  r.detail = std::to_string(cases) + " cases, max deviation " +
             format_double(worst, 15) + ", tolerance " + format_double(tol, 15);
  return r;
}

}  // namespace detail

/// Fixed-seed randomized cross-checks of the engines against the brute-force
/// verifiers. Returns one result per check; all must pass on a healthy build.
inline std::vector<CheckResult> run_self_checks(unsigned seed = 20240901u,
                                                int cases = 200) {
  std::vector<CheckResult> results;
  const HeapHeuristic all_heuristics[] = {
      {BlockHeuristic::Uni, UnitHeuristic::Uni},
      {BlockHeuristic::Uni, UnitHeuristic::NSig},
      {BlockHeuristic::Uni, UnitHeuristic::Uepf},
      {BlockHeuristic::Bsr, UnitHeuristic::Uni},
      {BlockHeuristic::Bsr, UnitHeuristic::NSig},
      {BlockHeuristic::Bsr, UnitHeuristic::Uepf},
      {BlockHeuristic::Bepr, UnitHeuristic::Uni},
      {BlockHeuristic::Bepr, UnitHeuristic::NSig},
      {BlockHeuristic::Bepr, UnitHeuristic::Uepf}};

  {
    std::mt19937 rng(seed);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
      auto sample = sample_system(rng, {.max_factors = 7});
      auto paths = enumerate_paths(sample.system);
      const auto& path = paths[static_cast<std::size_t>(c) % paths.size()];
      auto influence = ascending_influence(sample.system, path, sample.ndim);
      for (const auto& [pair, value] : influence.values) {
        const double expect = oracle::chain_sum_dprime(
            sample.system, pair.first, pair.second, path, sample.ndim);
        worst = std::max(worst, std::abs(value - expect));
      }
    }
    results.push_back(detail::deviation_check(
        "ascending-influence-vs-chain-enumeration", worst, 1e-12, cases));
  }

  {
    std::mt19937 rng(seed + 1);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
      auto sample = sample_system(rng);
      auto paths = enumerate_paths(sample.system);
      const auto& path = paths[static_cast<std::size_t>(c) % paths.size()];
      const bool within = c % 3 == 0;
      const HeapConfig config{within, 1.0};
      auto influence = ascending_influence(sample.system, path, sample.ndim);
      auto factors = uepf(sample.system, path, influence, sample.nsig, config);
      for (const auto& heuristic : all_heuristics) {
        auto assignment = heap_assignment(sample.system, path, heuristic,
                                          sample.nsig, &factors);
        const double engine =
            heap_total_epi(sample.system, path, assignment, factors);
        const double simulated =
            oracle::simulate_heap(sample.system, path, assignment, sample.ndim,
                                  sample.nsig, within)
                .goal;
        worst = std::max(worst, std::abs(engine - simulated));
      }
    }
    results.push_back(detail::deviation_check("hierarchical-index-vs-simulation",
                                              worst, 1e-12, cases));
  }

  {
    std::mt19937 rng(seed + 2);
    double worst_matrix = 0.0;
    double worst_sim = 0.0;
    for (int c = 0; c < cases; ++c) {
      auto sample = sample_system(rng);
      const auto split = classify_factors(sample.system);
      for (UnitHeuristic weighting : {UnitHeuristic::Uni, UnitHeuristic::NSig}) {
        auto result = evaluate_peap(sample.system, sample.nsig, sample.ndim,
                                    weighting);
        const double matrix_form = peap_total_epi_matrix(
            sample.system, result.assignment, sample.ndim, split, sample.nsig);
        const double simulated =
            oracle::simulate_peap(sample.system, result.assignment, sample.ndim,
                                  sample.nsig)
                .goal;
        worst_matrix = std::max(worst_matrix,
                                std::abs(result.total_epi - matrix_form));
        worst_sim = std::max(worst_sim, std::abs(result.total_epi - simulated));
      }
    }
    results.push_back(detail::deviation_check("parallel-index-scalar-vs-matrix",
                                              worst_matrix, 1e-12, cases));
    results.push_back(detail::deviation_check("parallel-index-vs-simulation",
                                              worst_sim, 1e-12, cases));
  }

  {
    std::mt19937 rng(seed + 3);
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
      auto sample = sample_system(rng);
      const auto split = classify_factors(sample.system);
      worst = std::max(worst,
                       std::abs(uniform_assignment(split.daf).sum() - 1.0));
      worst = std::max(
          worst,
          std::abs(weighted_assignment(split.daf, sample.nsig).sum() - 1.0));
      auto paths = enumerate_paths(sample.system);
      const auto& path = paths[static_cast<std::size_t>(c) % paths.size()];
      auto influence = ascending_influence(sample.system, path, sample.ndim);
      auto factors = uepf(sample.system, path, influence, sample.nsig);
      for (const auto& heuristic : all_heuristics) {
        auto assignment = heap_assignment(sample.system, path, heuristic,
                                          sample.nsig, &factors);
        worst = std::max(worst, std::abs(assignment.sum() - 1.0));
        double share_sum = 0.0;
        for (const auto& [block, share] :
             block_shares(sample.system, path, heuristic.block, sample.nsig,
                          &factors))
          share_sum += share;
        worst = std::max(worst, std::abs(share_sum - 1.0));
      }
    }
    results.push_back(
        detail::deviation_check("effort-conservation", worst, 1e-9, cases));
  }

  {
    std::mt19937 rng(seed + 4);
    double worst = 0.0;
    std::uniform_int_distribution<int> size_dist(1, 10);
    std::uniform_real_distribution<double> entry_dist(0.0, 1.0);
    std::uniform_real_distribution<double> target_dist(0.05, 0.6);
    for (int c = 0; c < cases; ++c) {
      const std::size_t n = static_cast<std::size_t>(size_dist(rng));
      Matrix m(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          m(i, j) = entry_dist(rng);
          sum += m(i, j);
        }
        const double scale = sum > 0.0 ? target_dist(rng) / sum : 0.0;
        for (std::size_t j = 0; j < n; ++j) m(i, j) *= scale;
      }
      const Matrix closed = total_relation_matrix(m);
      const Matrix series = oracle::truncated_closure(m, 60);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          worst = std::max(worst, std::abs(closed(i, j) - series(i, j)));
    }
    results.push_back(
        detail::deviation_check("closure-vs-power-series", worst, 1e-10, cases));
  }

  {
    std::mt19937 rng(seed + 5);
    const int grid_cases = std::max(3, cases / 20);
    int violations = 0;
    double worst_excess = 0.0;
    for (int c = 0; c < grid_cases; ++c) {
      auto sample = sample_system(
          rng, {.max_factors = 6, .singleton_sublevels = true,
                .accessible_count = 3});
      auto paths = enumerate_paths(sample.system);
      const auto& path = paths.front();
      auto influence = ascending_influence(sample.system, path, sample.ndim);
      auto factors = uepf(sample.system, path, influence, sample.nsig);
      const auto grid = oracle::grid_search_heap(sample.system, path,
                                                 sample.ndim, sample.nsig, 0.05);
      double bound = 0.0;
      for (const auto& [id, value] : oracle::unit_goal_values_heap(
               sample.system, path, sample.ndim, sample.nsig))
        bound = std::max(bound, value);
      if (grid.total_epi > bound + 1e-9) {
        ++violations;
        worst_excess = std::max(worst_excess, grid.total_epi - bound);
      }
      for (const auto& heuristic : all_heuristics) {
        auto assignment = heap_assignment(sample.system, path, heuristic,
                                          sample.nsig, &factors);
        const double epi =
            heap_total_epi(sample.system, path, assignment, factors);
        if (epi > grid.total_epi + 1e-9) {
          ++violations;
          worst_excess = std::max(worst_excess, epi - grid.total_epi);
        }
      }
      const auto peap_grid = oracle::grid_search_peap(sample.system, sample.ndim,
                                                      sample.nsig, 0.05);
      for (UnitHeuristic weighting : {UnitHeuristic::Uni, UnitHeuristic::NSig}) {
        const double epi =
            evaluate_peap(sample.system, sample.nsig, sample.ndim, weighting)
                .total_epi;
        if (epi > peap_grid.total_epi + 1e-9) {
          ++violations;
          worst_excess = std::max(worst_excess, epi - peap_grid.total_epi);
        }
      }
    }
    CheckResult r;
    r.name = "grid-optimum-bounds-strategies";
    r.pass = violations == 0;
    r.detail = std::to_string(grid_cases) + " cases, " +
               std::to_string(violations) + " violations, worst excess " +
               detail::format_double(worst_excess, 15);
    results.push_back(std::move(r));
  }

  return results;
}

}  // namespace effortprop
