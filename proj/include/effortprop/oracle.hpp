#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "effortprop/core.hpp"
#include "effortprop/heap.hpp"
#include "effortprop/relation.hpp"

// Brute-force reference implementations used to check the engines. They
// recompute everything from the definitions alone: no ascending-influence
// tables, no UEPF recursion, no engine propagation code is called here.
namespace effortprop::oracle {

/// Ascending influence by explicit chain enumeration: the sum over every
/// strictly block-ascending chain from `from` to `to` of the product of its
/// direct entries. Same-block pairs have exactly one chain, the direct edge.
/// Exponential on purpose; refuses paths with more than 12 factors.
inline double chain_sum_dprime(const FactorSystem& system,
                               const std::string& from, const std::string& to,
                               const StrategicPath& path, const Matrix& ndim) {
  const auto members = detail::path_members(system, path);
  if (members.size() > 12)
    throw Error("path too large for exhaustive chain enumeration");
  std::size_t a = members.size(), b = members.size();
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].id == from) a = i;
    if (members[i].id == to) b = i;
  }
  if (a >= members.size() || b >= members.size())
    throw Error("factor not on the path");
  if (!(members[a].level < members[b].level))
    throw Error("'" + to + "' is not above '" + from + "' on the path");
  if (members[a].level.block == members[b].level.block)
    return ndim(members[a].sys_index, members[b].sys_index);

  double total = 0.0;
  const int top_block = members[b].level.block;
  std::function<void(std::size_t, double)> walk = [&](std::size_t cur,
                                                      double product) {
    for (std::size_t next = 0; next < members.size(); ++next) {
      if (members[next].level.block <= members[cur].level.block) continue;
      if (next == b)
        total += product * ndim(members[cur].sys_index, members[b].sys_index);
      else if (members[next].level.block < top_block)
        walk(next,
             product * ndim(members[cur].sys_index, members[next].sys_index));
    }
  };
  walk(a, 1.0);
  return total;
}

/// What one forward run of a strategy leaves behind.
struct SimulationTrace {
  std::vector<std::map<std::string, double>> arrivals;  // per timestep
  std::vector<double> goal_by_step;                     // cumulative
  double goal = 0.0;
};

/// Timestep simulation of the hierarchical strategy, blocks bottom-up.
/// Every unit of effort arriving at a factor (assigned or propagated) counts
/// toward the goal once, weighted by the factor's significance, and then
/// propagates. Propagated effort plays two roles at once: it restarts from
/// its landing factor, feeding every eligible outgoing edge, and it also
/// continues the multi-hop chain it rode in on, which runs over cross-block
/// edges only. Cross-block arrivals therefore forward at twice their weight
/// on cross-block edges, while same-block arrivals (single-edge chains,
/// present only when within-block propagation is on) forward at weight one.
inline SimulationTrace simulate_heap(const FactorSystem& system,
                                     const StrategicPath& path,
                                     const EffortAssignment& assignment,
                                     const Matrix& ndim,
                                     const SignificanceVector& nsig,
                                     bool within_block = false) {
  const auto members = detail::path_members(system, path);
  const std::size_t p = members.size();
  std::vector<double> cross_in(p, 0.0), same_in(p, 0.0);
  SimulationTrace trace;
  std::size_t s = 0;
  while (s < p) {
    const int block = members[s].level.block;
    std::size_t e = s;
    while (e < p && members[e].level.block == block) ++e;
    std::map<std::string, double> arrivals;
    for (std::size_t f = s; f < e; ++f) {  // sublevels ascending
      const double assigned = assignment.at(members[f].id);
      const double fresh = assigned + same_in[f] + cross_in[f];
      const double continuing = cross_in[f];
      arrivals[members[f].id] = fresh;
      trace.goal += fresh * nsig.at(members[f].id);
      for (std::size_t t = f + 1; t < p; ++t) {
        if (members[t].level.block > block) {
          cross_in[t] += (fresh + continuing) *
                         ndim(members[f].sys_index, members[t].sys_index);
        } else if (within_block &&
                   members[t].level.sublevel > members[f].level.sublevel) {
          same_in[t] +=
              fresh * ndim(members[f].sys_index, members[t].sys_index);
        }
      }
    }
    trace.arrivals.push_back(std::move(arrivals));
    trace.goal_by_step.push_back(trace.goal);
    s = e;
  }
  return trace;
}

/// Two-step simulation of the parallel strategy: every assigned factor is
/// worked at once, each forwards effort * d(i->j) to every latent factor
/// (through the significant-edge mask when one is given), and nothing
/// propagates past a latent factor.
inline SimulationTrace simulate_peap(const FactorSystem& system,
                                     const EffortAssignment& assignment,
                                     const Matrix& ndim,
                                     const SignificanceVector& nsig,
                                     const EdgeMask* significant = nullptr) {
  SimulationTrace trace;
  std::map<std::string, double> first;
  for (const auto& [id, effort] : assignment.efforts) {
    first[id] = effort;
    trace.goal += effort * nsig.at(id);
  }
  trace.arrivals.push_back(std::move(first));
  trace.goal_by_step.push_back(trace.goal);

  std::map<std::string, double> second;
  for (const auto& f : system.factors()) {
    if (f.excluded || f.accessible) continue;
    const std::size_t cj = system.index_of(f.id);
    double inflow = 0.0;
    for (const auto& [id, effort] : assignment.efforts) {
      const std::size_t ci = system.index_of(id);
      if (significant && !significant->at(ci, cj)) continue;
      inflow += effort * ndim(ci, cj);
    }
    second[f.id] = inflow;
    trace.goal += inflow * nsig.at(f.id);
  }
  trace.arrivals.push_back(std::move(second));
  trace.goal_by_step.push_back(trace.goal);
  return trace;
}

/// Goal value of placing the whole unit budget on each accessible path
/// member alone. The max over these is a bound for any simplex point,
/// because the goal is linear in the assignment.
inline std::map<std::string, double> unit_goal_values_heap(
    const FactorSystem& system, const StrategicPath& path, const Matrix& ndim,
    const SignificanceVector& nsig, bool within_block = false) {
  std::map<std::string, double> out;
  for (const auto& member : detail::path_members(system, path)) {
    if (!member.accessible) continue;
    EffortAssignment unit;
    unit.total = 1.0;
    unit.efforts[member.id] = 1.0;
    out[member.id] =
        simulate_heap(system, path, unit, ndim, nsig, within_block).goal;
  }
  return out;
}

inline std::map<std::string, double> unit_goal_values_peap(
    const FactorSystem& system, const Matrix& ndim,
    const SignificanceVector& nsig) {
  std::map<std::string, double> out;
  for (const auto& f : system.factors()) {
    if (f.excluded || !f.accessible) continue;
    EffortAssignment unit;
    unit.total = 1.0;
    unit.efforts[f.id] = 1.0;
    out[f.id] = simulate_peap(system, unit, ndim, nsig).goal;
  }
  return out;
}

/// Truncated closure sum N + N^2 + ... + N^terms, built from plain matrix
/// products. Reference for the solver-based closure; usable whenever the
/// tail bound (max row sum)^(terms+1) / (1 - max row sum) is negligible.
inline Matrix truncated_closure(const Matrix& n, int terms) {
  Matrix acc(n.rows(), n.cols());
  Matrix power = n;
  for (int k = 1; k <= terms; ++k) {
    acc += power;
    power = power * n;
  }
  return acc;
}

struct GridSearchResult {
  EffortAssignment assignment;
  double total_epi = 0.0;
};

namespace grid_detail {

inline void check_grid_bounds(std::size_t daf_count, double resolution) {
  if (daf_count == 0) throw Error("grid search needs at least one actionable factor");
  if (daf_count > 4)
    throw Error("grid search supports at most 4 actionable factors");
  if (resolution > 0.05 + 1e-12 || resolution < 0.005 - 1e-12)
    throw Error("grid resolution must lie in [0.005, 0.05]");
}

/// Enumerates every split of `ticks` budget units over `parts` factors, in
/// lexicographic order, and hands each to `visit`.
inline void compositions(int parts, int ticks,
                         const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> current(static_cast<std::size_t>(parts), 0);
  std::function<void(int, int)> recurse = [&](int slot, int remaining) {
    if (slot == parts - 1) {
      current[static_cast<std::size_t>(slot)] = remaining;
      visit(current);
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      current[static_cast<std::size_t>(slot)] = take;
      recurse(slot + 1, remaining - take);
    }
  };
  recurse(0, ticks);
}

}  // namespace grid_detail

/// Exhaustive simplex grid over the path's accessible members: every effort
/// split with granularity `resolution` is simulated and the best kept (first
/// argmax on ties, so the result is deterministic).
inline GridSearchResult grid_search_heap(const FactorSystem& system,
                                         const StrategicPath& path,
                                         const Matrix& ndim,
                                         const SignificanceVector& nsig,
                                         double resolution,
                                         bool within_block = false) {
  std::vector<std::string> daf;
  for (const auto& member : detail::path_members(system, path))
    if (member.accessible) daf.push_back(member.id);
  grid_detail::check_grid_bounds(daf.size(), resolution);
  const int ticks = static_cast<int>(std::lround(1.0 / resolution));
  GridSearchResult best;
  best.total_epi = -1.0;
  grid_detail::compositions(
      static_cast<int>(daf.size()), ticks, [&](const std::vector<int>& split) {
        EffortAssignment candidate;
        candidate.total = 1.0;
        for (std::size_t i = 0; i < daf.size(); ++i)
          candidate.efforts[daf[i]] =
              static_cast<double>(split[i]) / static_cast<double>(ticks);
        const double goal =
            simulate_heap(system, path, candidate, ndim, nsig, within_block).goal;
        if (goal > best.total_epi) {
          best.total_epi = goal;
          best.assignment = std::move(candidate);
        }
      });
  return best;
}

inline GridSearchResult grid_search_peap(const FactorSystem& system,
                                         const Matrix& ndim,
                                         const SignificanceVector& nsig,
                                         double resolution) {
  std::vector<std::string> daf;
  for (const auto& f : system.factors())
    if (!f.excluded && f.accessible) daf.push_back(f.id);
  grid_detail::check_grid_bounds(daf.size(), resolution);
  const int ticks = static_cast<int>(std::lround(1.0 / resolution));
  GridSearchResult best;
  best.total_epi = -1.0;
  grid_detail::compositions(
      static_cast<int>(daf.size()), ticks, [&](const std::vector<int>& split) {
        EffortAssignment candidate;
        candidate.total = 1.0;
        for (std::size_t i = 0; i < daf.size(); ++i)
          candidate.efforts[daf[i]] =
              static_cast<double>(split[i]) / static_cast<double>(ticks);
        const double goal = simulate_peap(system, candidate, ndim, nsig).goal;
        if (goal > best.total_epi) {
          best.total_epi = goal;
          best.assignment = std::move(candidate);
        }
      });
  return best;
}

}  // namespace effortprop::oracle
