#pragma once

#include <map>
#include <string>
#include <vector>

#include "effortprop/core.hpp"
#include "effortprop/relation.hpp"

namespace effortprop {

/// Parallel strategy knobs. Gating restricts the single-hop transfer to
/// edges flagged significant by relation mining; off by default because the
/// reference index sums over every accessible factor's edge.
struct PeapConfig {
  bool gating = false;
  double total_effort = 1.0;
};

/// Equal split of the budget over the accessible factors.
inline EffortAssignment uniform_assignment(const std::vector<std::string>& daf,
                                           double total = 1.0) {
  if (daf.empty()) throw Error("no actionable factors: cannot assign effort");
  if (total <= 0.0) throw Error("total effort must be positive");
  EffortAssignment out;
  out.total = total;
  const double share = total / static_cast<double>(daf.size());
  for (const auto& id : daf) out.efforts[id] = share;
  return out;
}

/// Significance-proportional split: effort(i) = total * nSig(i) / sum over
/// the accessible factors.
inline EffortAssignment weighted_assignment(const std::vector<std::string>& daf,
                                            const SignificanceVector& nsig,
                                            double total = 1.0) {
  if (daf.empty()) throw Error("no actionable factors: cannot assign effort");
  if (total <= 0.0) throw Error("total effort must be positive");
  double denom = 0.0;
  for (const auto& id : daf) denom += nsig.at(id);
  if (denom <= 0.0)
    throw Error("significance over the actionable factors sums to zero");
  EffortAssignment out;
  out.total = total;
  for (const auto& id : daf) out.efforts[id] = total * nsig.at(id) / denom;
  return out;
}

/// Single-hop transfer: inflow(j) = sum over assigned factors i of
/// effort(i) * d(i->j), for each latent factor j. Nothing propagates past a
/// latent factor in the parallel strategy.
inline std::map<std::string, double> propagate_to_latent(
    const FactorSystem& system, const EffortAssignment& assignment,
    const Matrix& ndim, const std::vector<std::string>& ndaf,
    const PeapConfig& config = {}, const EdgeMask* significant = nullptr) {
  if (config.gating && !significant)
    throw Error("gating enabled but no significant-edge mask provided");
  if (ndim.rows() != system.size() || ndim.cols() != system.size())
    throw Error("influence matrix does not match the factor roster");
  std::map<std::string, double> inflow;
  for (const auto& target : ndaf) {
    const std::size_t cj = system.index_of(target);
    double s = 0.0;
    for (const auto& [id, effort] : assignment.efforts) {
      const std::size_t ci = system.index_of(id);
      if (config.gating && !significant->at(ci, cj)) continue;
      s += effort * ndim(ci, cj);
    }
    inflow[target] = s;
  }
  return inflow;
}

/// TotalEPI = sum effort(i) * nSig(i) + sum inflow(j) * nSig(j).
inline double peap_total_epi(const EffortAssignment& assignment,
                             const std::map<std::string, double>& latent_inflows,
                             const SignificanceVector& nsig) {
  double direct = 0.0;
  for (const auto& [id, effort] : assignment.efforts)
    direct += effort * nsig.at(id);
  double indirect = 0.0;
  for (const auto& [id, inflow] : latent_inflows)
    indirect += inflow * nsig.at(id);
  return direct + indirect;
}

/// Same index by the matrix route: E^T (nSig_acc + P nSig_latent) where P is
/// the accessible-to-latent slice of the influence matrix. Kept as a second,
/// independently coded path for cross-checking the scalar form.
inline double peap_total_epi_matrix(const FactorSystem& system,
                                    const EffortAssignment& assignment,
                                    const Matrix& ndim,
                                    const Classification& split,
                                    const SignificanceVector& nsig) {
  const std::size_t m = split.daf.size();
  const std::size_t latent = split.ndaf.size();
  Matrix effort_row(1, m);
  Matrix coupled(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    effort_row(0, i) = assignment.at(split.daf[i]);
    coupled(i, 0) = nsig.at(split.daf[i]);
  }
  if (latent > 0) {
    Matrix transfer(m, latent);
    Matrix sig_latent(latent, 1);
    for (std::size_t j = 0; j < latent; ++j)
      sig_latent(j, 0) = nsig.at(split.ndaf[j]);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < latent; ++j)
        transfer(i, j) = ndim(system.index_of(split.daf[i]),
                              system.index_of(split.ndaf[j]));
    coupled += transfer * sig_latent;
  }
  return (effort_row * coupled)(0, 0);
}

/// Full parallel evaluation. `weighting` picks the assignment rule: Uni for
/// the uniform split, NSig for the significance-proportional one.
inline StrategyResult evaluate_peap(const FactorSystem& system,
                                    const SignificanceVector& nsig,
                                    const Matrix& ndim, UnitHeuristic weighting,
                                    const PeapConfig& config = {},
                                    const EdgeMask* significant = nullptr) {
  if (weighting == UnitHeuristic::Uepf)
    throw Error("parallel strategy supports uniform or significance weighting");
  const Classification split = classify_factors(system);
  StrategyResult result;
  result.assignment = weighting == UnitHeuristic::NSig
                          ? weighted_assignment(split.daf, nsig, config.total_effort)
                          : uniform_assignment(split.daf, config.total_effort);
  result.latent_inflows = propagate_to_latent(system, result.assignment, ndim,
                                              split.ndaf, config, significant);
  result.total_epi = peap_total_epi(result.assignment, result.latent_inflows, nsig);
  result.tag.family = StrategyFamily::Peap;
  result.tag.unit = weighting;
  return result;
}

}  // namespace effortprop
