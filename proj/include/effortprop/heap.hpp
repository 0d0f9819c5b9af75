#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "effortprop/core.hpp"

namespace effortprop {

/// Hierarchical strategy knobs. `within_block_propagation` widens a factor's
/// upper set to include later sublevels of its own block; it never changes
/// the ascending influence values themselves, which close over strictly
/// block-ascending chains only.
struct HeapConfig {
  bool within_block_propagation = false;
  double total_effort = 1.0;
};

struct PathBlock {
  int block = 1;
  std::vector<std::string> members;  // (sublevel, declaration) order
};

/// One strategic path: a nonempty choice of factors from every populated
/// sublevel. Blocks are ascending; effective blocks are those holding at
/// least one accessible member.
struct StrategicPath {
  int index = 0;  // 1-based enumeration order
  std::map<Level, std::vector<std::string>> selection;
  std::vector<PathBlock> blocks;
  std::vector<int> effective_blocks;

  bool contains(const std::string& id) const {
    for (const auto& block : blocks)
      for (const auto& member : block.members)
        if (member == id) return true;
    return false;
  }
};

namespace detail {

struct PathMember {
  std::string id;
  Level level;
  bool accessible = true;
  std::size_t sys_index = 0;
};

/// Path members sorted ascending by (block, sublevel, declaration index).
inline std::vector<PathMember> path_members(const FactorSystem& system,
                                            const StrategicPath& path) {
  std::vector<PathMember> out;
  for (const auto& block : path.blocks)
    for (const auto& id : block.members) {
      const Factor& f = system.at(id);
      out.push_back({id, f.level, f.accessible, system.index_of(id)});
    }
  std::sort(out.begin(), out.end(),
            [](const PathMember& a, const PathMember& b) {
              if (a.level != b.level) return a.level < b.level;
              return a.sys_index < b.sys_index;
            });
  return out;
}

inline std::vector<int> accessible_blocks(const std::vector<PathBlock>& blocks,
                                          const FactorSystem& system) {
  std::vector<int> out;
  for (const auto& block : blocks)
    for (const auto& id : block.members)
      if (system.at(id).accessible) {
        out.push_back(block.block);
        break;
      }
  return out;
}

}  // namespace detail

/// Enumerates every strategic path: the cartesian product of the nonempty
/// subsets of each populated sublevel (excluded factors never appear; a
/// sublevel left empty by exclusions contributes no choice). Paths come out
/// in a fixed order: subsets as ascending bitmasks over declaration order,
/// bottom sublevel most significant. Refuses to build more than `max_paths`.
inline std::vector<StrategicPath> enumerate_paths(const FactorSystem& system,
                                                  std::size_t max_paths = 100000) {
  std::map<Level, std::vector<std::string>> levels;
  for (const auto& f : system.factors())
    if (!f.excluded) levels[f.level].push_back(f.id);
  if (levels.empty()) return {};

  std::vector<std::pair<Level, std::vector<std::string>>> slots(levels.begin(),
                                                                levels.end());
  unsigned long long count = 1;
  for (const auto& [level, members] : slots) {
    (void)level;
    if (members.size() > 20)
      throw Error("sublevel with " + std::to_string(members.size()) +
                  " factors is too large to enumerate");
    const unsigned long long choices = (1ull << members.size()) - 1;
    if (count > max_paths / choices + 1) count = max_paths + 1;
    else count *= choices;
    if (count > max_paths)
      throw Error("too many strategic paths to enumerate (limit " +
                  std::to_string(max_paths) + ")");
  }

  std::vector<StrategicPath> paths;
  paths.reserve(static_cast<std::size_t>(count));
  std::vector<std::uint64_t> mask(slots.size(), 1);
  while (true) {
    StrategicPath path;
    path.index = static_cast<int>(paths.size()) + 1;
    std::map<int, std::vector<std::string>> grouped;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      std::vector<std::string> chosen;
      for (std::size_t bit = 0; bit < slots[s].second.size(); ++bit)
        if (mask[s] & (1ull << bit)) chosen.push_back(slots[s].second[bit]);
      auto& bucket = grouped[slots[s].first.block];
      bucket.insert(bucket.end(), chosen.begin(), chosen.end());
      path.selection[slots[s].first] = std::move(chosen);
    }
    for (auto& [block, members] : grouped)
      path.blocks.push_back({block, std::move(members)});
    path.effective_blocks = detail::accessible_blocks(path.blocks, system);
    paths.push_back(std::move(path));

    // odometer increment, last sublevel fastest
    std::size_t pos = slots.size();
    while (pos-- > 0) {
      const std::uint64_t limit = (1ull << slots[pos].second.size()) - 1;
      if (mask[pos] < limit) {
        ++mask[pos];
        break;
      }
      mask[pos] = 1;
      if (pos == 0) return paths;
    }
  }
}

/// Ascending influence values d'(i->j) for the ordered factor pairs of one
/// path, where j sits above i (a later block, or a later sublevel of the
/// same block). d' closes over strictly block-ascending chains:
///   d'(i->j) = d(i->j) + sum over path members k with
///              block(i) < block(k) < block(j) of d(i->k) * d'(k->j)
/// so same-block pairs and adjacent blocks reduce to the direct entry.
struct AscendingInfluence {
  std::map<std::pair<std::string, std::string>, double> values;

  bool contains(const std::string& from, const std::string& to) const {
    return values.count({from, to}) != 0;
  }
  double at(const std::string& from, const std::string& to) const {
    auto it = values.find({from, to});
    if (it == values.end())
      throw Error("no ascending influence from '" + from + "' to '" + to + "'");
    return it->second;
  }
};

inline AscendingInfluence ascending_influence(const FactorSystem& system,
                                              const StrategicPath& path,
                                              const Matrix& ndim) {
  if (ndim.rows() != system.size() || ndim.cols() != system.size())
    throw Error("influence matrix does not match the factor roster");
  const auto members = detail::path_members(system, path);
  const std::size_t p = members.size();
  std::vector<std::vector<double>> dp(p, std::vector<double>(p, 0.0));
  AscendingInfluence out;
  for (std::size_t s = p; s-- > 0;) {
    for (std::size_t t = s + 1; t < p; ++t) {
      if (!(members[s].level < members[t].level)) continue;  // equal sublevel
      double value = ndim(members[s].sys_index, members[t].sys_index);
      for (std::size_t k = s + 1; k < t; ++k)
        if (members[k].level.block > members[s].level.block &&
            members[k].level.block < members[t].level.block)
          value += ndim(members[s].sys_index, members[k].sys_index) * dp[k][t];
      dp[s][t] = value;
      out.values[{members[s].id, members[t].id}] = value;
    }
  }
  return out;
}

/// Unit effort propagation factors, top-down:
///   UEPF(i) = nSig(i) + sum over j in Upper(i) of d'(i->j) * UEPF(j)
/// Upper(i) is every path member in a later block, plus later sublevels of
/// i's own block when within-block propagation is on. The indirect part
/// alone (UEPF - nSig) is the IDEPF; the topmost factor's is zero.
inline std::map<std::string, double> uepf(const FactorSystem& system,
                                          const StrategicPath& path,
                                          const AscendingInfluence& influence,
                                          const SignificanceVector& nsig,
                                          const HeapConfig& config = {}) {
  const auto members = detail::path_members(system, path);
  const std::size_t p = members.size();
  std::vector<double> value(p, 0.0);
  std::map<std::string, double> out;
  for (std::size_t s = p; s-- > 0;) {
    double u = nsig.at(members[s].id);
    for (std::size_t t = s + 1; t < p; ++t) {
      const bool later_block = members[t].level.block > members[s].level.block;
      const bool later_sublevel =
          config.within_block_propagation &&
          members[t].level.block == members[s].level.block &&
          members[t].level.sublevel > members[s].level.sublevel;
      if (!later_block && !later_sublevel) continue;
      u += influence.at(members[s].id, members[t].id) * value[t];
    }
    value[s] = u;
    out[members[s].id] = u;
  }
  return out;
}

/// Blocks of the path holding at least one accessible member, ascending.
/// Errors when there are none, because no effort could be placed anywhere.
inline std::vector<int> effective_blocks(const FactorSystem& system,
                                         const StrategicPath& path) {
  auto blocks = detail::accessible_blocks(path.blocks, system);
  if (blocks.empty())
    throw Error("no effective blocks: every factor in the path is latent");
  return blocks;
}

/// Share of the budget each effective block receives.
///   Uni:  equal over effective blocks
///   BSR:  proportional to the block's accessible-member significance sum
///   BEPR: proportional to the block's mean UEPF over accessible members
inline std::map<int, double> block_shares(
    const FactorSystem& system, const StrategicPath& path,
    BlockHeuristic heuristic, const SignificanceVector& nsig,
    const std::map<std::string, double>* uepf_values = nullptr) {
  const auto effective = effective_blocks(system, path);
  std::map<int, double> shares;
  if (heuristic == BlockHeuristic::Uni) {
    const double share = 1.0 / static_cast<double>(effective.size());
    for (int b : effective) shares[b] = share;
    return shares;
  }
  if (heuristic == BlockHeuristic::Bepr && !uepf_values)
    throw Error("block heuristic BEPR requires unit effort propagation factors");
  double denom = 0.0;
  for (const auto& block : path.blocks) {
    double weight = 0.0;
    std::size_t accessible = 0;
    for (const auto& id : block.members) {
      if (!system.at(id).accessible) continue;
      ++accessible;
      if (heuristic == BlockHeuristic::Bsr) {
        weight += nsig.at(id);
      } else {
        auto it = uepf_values->find(id);
        if (it == uepf_values->end())
          throw Error("no unit propagation factor for '" + id + "'");
        weight += it->second;
      }
    }
    if (accessible == 0) continue;
    if (heuristic == BlockHeuristic::Bepr)
      weight /= static_cast<double>(accessible);
    shares[block.block] = weight;
    denom += weight;
  }
  if (denom <= 0.0)
    throw Error("block weights sum to zero: cannot form block shares");
  for (auto& [block, share] : shares) share /= denom;
  return shares;
}

/// Splits the budget into block shares, then unit shares inside each block:
///   Uni:  equal over the block's accessible members
///   nSig: proportional to significance
///   UEPF: proportional to the unit propagation factor
inline EffortAssignment heap_assignment(
    const FactorSystem& system, const StrategicPath& path,
    HeapHeuristic heuristic, const SignificanceVector& nsig,
    const std::map<std::string, double>* uepf_values = nullptr,
    double total = 1.0) {
  if (total <= 0.0) throw Error("total effort must be positive");
  if ((heuristic.unit == UnitHeuristic::Uepf ||
       heuristic.block == BlockHeuristic::Bepr) &&
      !uepf_values)
    throw Error("heuristic " + heuristic.text() +
                " requires unit effort propagation factors");
  const auto shares = block_shares(system, path, heuristic.block, nsig,
                                   uepf_values);
  EffortAssignment out;
  out.total = total;
  for (const auto& block : path.blocks) {
    auto share_it = shares.find(block.block);
    if (share_it == shares.end()) continue;  // latent-only block
    std::vector<std::string> accessible;
    for (const auto& id : block.members)
      if (system.at(id).accessible) accessible.push_back(id);
    std::vector<double> weights(accessible.size(), 1.0);
    if (heuristic.unit != UnitHeuristic::Uni) {
      for (std::size_t i = 0; i < accessible.size(); ++i) {
        if (heuristic.unit == UnitHeuristic::NSig) {
          weights[i] = nsig.at(accessible[i]);
        } else {
          auto it = uepf_values->find(accessible[i]);
          if (it == uepf_values->end())
            throw Error("no unit propagation factor for '" + accessible[i] + "'");
          weights[i] = it->second;
        }
      }
    }
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;
    if (weight_sum <= 0.0)
      throw Error("unit weights in block " + to_roman(block.block) +
                  " sum to zero");
    for (std::size_t i = 0; i < accessible.size(); ++i)
      out.efforts[accessible[i]] =
          total * share_it->second * weights[i] / weight_sum;
  }
  return out;
}

/// Block effort propagation: BEP(b) = sum over the block's members of
/// effort * UEPF. Latent-only blocks carry zero.
inline std::map<int, double> block_effort_propagation(
    const FactorSystem& system, const StrategicPath& path,
    const EffortAssignment& assignment,
    const std::map<std::string, double>& uepf_values) {
  (void)system;
  std::map<int, double> bep;
  for (const auto& block : path.blocks) {
    double s = 0.0;
    for (const auto& id : block.members) {
      const double effort = assignment.at(id);
      if (effort == 0.0) continue;
      auto it = uepf_values.find(id);
      if (it == uepf_values.end())
        throw Error("no unit propagation factor for '" + id + "'");
      s += effort * it->second;
    }
    bep[block.block] = s;
  }
  return bep;
}

/// TotalEPI of a path strategy: the sum of its block effort propagations,
/// i.e. sum over assigned factors of effort * UEPF.
inline double heap_total_epi(const FactorSystem& system,
                             const StrategicPath& path,
                             const EffortAssignment& assignment,
                             const std::map<std::string, double>& uepf_values) {
  double total = 0.0;
  for (const auto& [block, bep] :
       block_effort_propagation(system, path, assignment, uepf_values))
    total += bep;
  return total;
}

/// Full hierarchical evaluation of one path under one heuristic pair.
inline StrategyResult evaluate_heap(const FactorSystem& system,
                                    const SignificanceVector& nsig,
                                    const Matrix& ndim,
                                    const StrategicPath& path,
                                    HeapHeuristic heuristic,
                                    const HeapConfig& config = {}) {
  const auto influence = ascending_influence(system, path, ndim);
  auto factors = uepf(system, path, influence, nsig, config);
  StrategyResult result;
  result.assignment = heap_assignment(system, path, heuristic, nsig, &factors,
                                      config.total_effort);
  result.total_epi = heap_total_epi(system, path, result.assignment, factors);
  result.uepf = std::move(factors);
  result.tag.family = StrategyFamily::Heap;
  result.tag.block = heuristic.block;
  result.tag.unit = heuristic.unit;
  result.tag.path = path.index;
  return result;
}

}  // namespace effortprop
