#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "effortprop/matrix.hpp"

namespace effortprop {

/// Base error for every failure the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be read or decoded. The CLI maps this to exit code 2.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input decoded fine but violates a consistency rule. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string format_double(double value, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hierarchy positions and factor descriptions

/// Position in the hierarchy: a major block and an ordered sublevel inside it.
/// Block 1 is the bottom of the hierarchy; influence only flows upward.
struct Level {
  int block = 1;
  int sublevel = 1;
  friend auto operator<=>(const Level&, const Level&) = default;
};

struct Factor {
  std::string id;
  std::string name;
  bool accessible = true;  // directly workable, as opposed to latent
  Level level;
  bool excluded = false;  // dropped from the analysis but kept in the roster
};

/// Immutable roster of factors with id lookup. Duplicate ids are rejected at
/// construction; every other consistency rule is reported by validate_system.
class FactorSystem {
 public:
  FactorSystem() = default;
  explicit FactorSystem(std::vector<Factor> factors,
                        std::string goal_name = "Goal")
      : factors_(std::move(factors)), goal_name_(std::move(goal_name)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      auto [it, inserted] = index_.emplace(factors_[i].id, i);
      (void)it;
      if (!inserted)
        throw ValidationError("duplicate factor id '" + factors_[i].id + "'");
    }
  }

  const std::vector<Factor>& factors() const { return factors_; }
  const std::string& goal_name() const { return goal_name_; }
  std::size_t size() const { return factors_.size(); }

  const Factor* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &factors_[it->second];
  }

  const Factor& at(const std::string& id) const {
    const Factor* f = find(id);
    if (!f) throw Error("unknown factor id '" + id + "'");
    return *f;
  }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown factor id '" + id + "'");
    return it->second;
  }

  int max_block() const {
    int best = 0;
    for (const auto& f : factors_) best = std::max(best, f.level.block);
    return best;
  }

 private:
  std::vector<Factor> factors_;
  std::string goal_name_ = "Goal";
  std::map<std::string, std::size_t> index_;
};

/// Normalized significance per factor, optionally keeping the raw scores it
/// was derived from.
struct SignificanceVector {
  std::map<std::string, double> values;
  std::optional<std::map<std::string, double>> raw;

  double at(const std::string& id) const {
    auto it = values.find(id);
    if (it == values.end())
      throw Error("no significance value for factor '" + id + "'");
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// Level labels ("II-A" style)

inline std::string to_roman(int value) {
  if (value < 1 || value > 3999)
    throw Error("roman numeral out of range: " + std::to_string(value));
  static constexpr std::pair<int, const char*> steps[] = {
      {1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"}, {100, "C"},
      {90, "XC"},  {50, "L"},   {40, "XL"}, {10, "X"},   {9, "IX"},
      {5, "V"},    {4, "IV"},   {1, "I"}};
  std::string out;
  for (auto [step, text] : steps)
    while (value >= step) {
      out += text;
      value -= step;
    }
  return out;
}

/// Strict parse: only canonical numerals round-trip (no "IIII").
inline std::optional<int> parse_roman(std::string_view text) {
  if (text.empty()) return std::nullopt;
  auto digit = [](char c) -> int {
    switch (c) {
      case 'I': return 1;
      case 'V': return 5;
      case 'X': return 10;
      case 'L': return 50;
      case 'C': return 100;
      case 'D': return 500;
      case 'M': return 1000;
      default: return 0;
    }
  };
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  int total = 0;
  for (std::size_t i = 0; i < upper.size(); ++i) {
    int v = digit(upper[i]);
    if (v == 0) return std::nullopt;
    int next = i + 1 < upper.size() ? digit(upper[i + 1]) : 0;
    total += v < next ? -v : v;
  }
  if (total < 1 || total > 3999 || to_roman(total) != upper)
    return std::nullopt;
  return total;
}

/// Parses "II-A" into {2, 1}; a bare numeral means sublevel 1.
inline Level parse_level_label(std::string_view label) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.remove_suffix(1);
    return s;
  };
  std::string_view text = trim(label);
  std::string_view roman = text;
  std::string_view suffix;
  bool has_suffix = false;
  if (auto dash = text.find('-'); dash != std::string_view::npos) {
    roman = trim(text.substr(0, dash));
    suffix = trim(text.substr(dash + 1));
    has_suffix = true;
  }
  auto block = parse_roman(roman);
  if (!block)
    throw ParseError("bad hierarchy level label '" + std::string(label) + "'");
  Level out{*block, 1};
  if (has_suffix) {
    if (suffix.size() == 1 && std::isalpha(static_cast<unsigned char>(suffix[0])))
      out.sublevel = std::toupper(static_cast<unsigned char>(suffix[0])) - 'A' + 1;
    else
      throw ParseError("bad sublevel suffix in level label '" +
                       std::string(label) + "'");
  }
  return out;
}

inline std::string format_level_label(const Level& level, bool with_sublevel) {
  std::string out = to_roman(level.block);
  if (with_sublevel || level.sublevel != 1) {
    out += '-';
    if (level.sublevel >= 1 && level.sublevel <= 26)
      out += static_cast<char>('A' + level.sublevel - 1);
    else
      out += std::to_string(level.sublevel);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification and validation

/// Split of the non-excluded factors into directly accessible (DAF) and
/// latent (NDAF) groups, both in declaration order.
struct Classification {
  std::vector<std::string> daf;
  std::vector<std::string> ndaf;
};

inline Classification classify_factors(const FactorSystem& system) {
  Classification out;
  for (const auto& f : system.factors()) {
    if (f.excluded) continue;
    (f.accessible ? out.daf : out.ndaf).push_back(f.id);
  }
  if (out.daf.empty())
    throw Error("no actionable factors: every non-excluded factor is latent");
  return out;
}

/// Cross-checks the system, its significance vector, and its influence
/// matrix. Returns human-readable violations; empty means consistent.
inline std::vector<std::string> validate_system(const FactorSystem& system,
                                                const SignificanceVector& nsig,
                                                const Matrix& influence) {
  std::vector<std::string> issues;
  const auto& factors = system.factors();
  const std::size_t n = factors.size();
  if (n == 0) issues.push_back("system declares no factors");

  if (influence.rows() != n || influence.cols() != n) {
    issues.push_back("influence matrix is " + std::to_string(influence.rows()) +
                     "x" + std::to_string(influence.cols()) + ", expected " +
                     std::to_string(n) + "x" + std::to_string(n));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (influence(i, j) < 0.0)
          issues.push_back("negative influence from '" + factors[i].id +
                           "' to '" + factors[j].id + "'");
        else if (influence(i, j) > 1.0 + 1e-9)
          issues.push_back("influence from '" + factors[i].id + "' to '" +
                           factors[j].id + "' exceeds 1");
      }
  }

  bool missing_sig = false;
  double sum = 0.0;
  for (const auto& f : factors) {
    auto it = nsig.values.find(f.id);
    if (it == nsig.values.end()) {
      issues.push_back("missing significance for factor '" + f.id + "'");
      missing_sig = true;
    } else if (it->second < 0.0) {
      issues.push_back("negative significance for factor '" + f.id + "'");
    } else {
      sum += it->second;
    }
  }
  for (const auto& [id, value] : nsig.values) {
    (void)value;
    if (!system.find(id))
      issues.push_back("significance for unknown factor '" + id + "'");
  }
  if (!missing_sig && n > 0 && std::abs(sum - 1.0) > 1e-6)
    issues.push_back("significance not normalized: sum = " +
                     detail::format_double(sum));

  std::vector<char> block_seen(static_cast<std::size_t>(system.max_block()) + 1,
                               0);
  for (const auto& f : factors) {
    if (f.level.block < 1 || f.level.sublevel < 1)
      issues.push_back("block and sublevel must be >= 1 for factor '" + f.id +
                       "'");
    else
      block_seen[static_cast<std::size_t>(f.level.block)] = 1;
  }
  for (int b = 1; b <= system.max_block(); ++b)
    if (!block_seen[static_cast<std::size_t>(b)])
      issues.push_back("missing hierarchy block " + to_roman(b) +
                       ": block indices must be contiguous");

  bool any_actionable = std::any_of(
      factors.begin(), factors.end(),
      [](const Factor& f) { return f.accessible && !f.excluded; });
  if (n > 0 && !any_actionable)
    issues.push_back("no actionable factors: every non-excluded factor is latent");

  return issues;
}

// ---------------------------------------------------------------------------
// Effort assignments and strategy results

/// Effort split over the actionable factors. Efforts are nonnegative and sum
/// to `total` (the project's effort budget, 1.0 unless stated otherwise).
struct EffortAssignment {
  std::map<std::string, double> efforts;
  double total = 1.0;

  double at(const std::string& id) const {
    auto it = efforts.find(id);
    return it == efforts.end() ? 0.0 : it->second;
  }

  double sum() const {
    double s = 0.0;
    for (const auto& [id, e] : efforts) {
      (void)id;
      s += e;
    }
    return s;
  }
};

inline void check_assignment(const FactorSystem& system,
                             const EffortAssignment& assignment,
                             double tol = 1e-9) {
  for (const auto& [id, effort] : assignment.efforts) {
    const Factor* f = system.find(id);
    if (!f) throw ValidationError("effort assigned to unknown factor '" + id + "'");
    if (f->excluded || !f->accessible)
      throw ValidationError("effort assigned to non-actionable factor '" + id +
                            "'");
    if (effort < 0.0)
      throw ValidationError("negative effort for factor '" + id + "'");
  }
  if (std::abs(assignment.sum() - assignment.total) > tol)
    throw ValidationError("efforts sum to " +
                          detail::format_double(assignment.sum(), 9) +
                          ", expected " +
                          detail::format_double(assignment.total, 9));
}

enum class StrategyFamily { Peap, Heap };
enum class BlockHeuristic { Uni, Bsr, Bepr };
enum class UnitHeuristic { Uni, NSig, Uepf };

inline std::string_view label(StrategyFamily f) {
  return f == StrategyFamily::Peap ? "PEAP" : "HEAP";
}
inline std::string_view label(BlockHeuristic h) {
  switch (h) {
    case BlockHeuristic::Uni: return "Uni";
    case BlockHeuristic::Bsr: return "BSR";
    case BlockHeuristic::Bepr: return "BEPR";
  }
  return "Uni";
}
inline std::string_view label(UnitHeuristic h) {
  switch (h) {
    case UnitHeuristic::Uni: return "Uni";
    case UnitHeuristic::NSig: return "nSig";
    case UnitHeuristic::Uepf: return "UEPF";
  }
  return "Uni";
}

/// Block and unit rule pair for the hierarchical strategy grid.
struct HeapHeuristic {
  BlockHeuristic block = BlockHeuristic::Uni;
  UnitHeuristic unit = UnitHeuristic::Uni;

  std::string text() const {
    return "(" + std::string(label(block)) + ", " + std::string(label(unit)) +
           ")";
  }
};

/// Names one evaluated strategy. For the parallel family `unit` records the
/// assignment weighting (Uni or nSig); block and path stay empty.
struct StrategyTag {
  StrategyFamily family = StrategyFamily::Peap;
  std::optional<BlockHeuristic> block;
  UnitHeuristic unit = UnitHeuristic::Uni;
  std::optional<int> path;  // 1-based enumeration index

  std::string text() const {
    if (family == StrategyFamily::Peap)
      return unit == UnitHeuristic::NSig ? "W-PEAP" : "U-PEAP";
    return "HEAP";
  }

  std::string heuristics_text() const {
    if (family == StrategyFamily::Peap || !block) return "";
    return HeapHeuristic{*block, unit}.text();
  }
};

struct StrategyResult {
  StrategyTag tag;
  EffortAssignment assignment;
  std::map<std::string, double> latent_inflows;            // parallel family
  std::optional<std::map<std::string, double>> uepf;       // hierarchical family
  double total_epi = 0.0;
};

}  // namespace effortprop
