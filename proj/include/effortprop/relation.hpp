#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "effortprop/core.hpp"
#include "effortprop/matrix.hpp"

namespace effortprop {

enum class ThresholdRule { MeanPlusHalfStd, Mean, MeanPlusStd };
enum class TrmScale { MaxRowSum, None };

/// Square boolean mask aligned with the factor ordering of its source matrix.
class EdgeMask {
 public:
  EdgeMask() = default;
  explicit EdgeMask(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool at(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool value) {
    bits_[i * n_ + j] = value ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (char b : bits_) c += b != 0;
    return c;
  }
  friend bool operator==(const EdgeMask&, const EdgeMask&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<char> bits_;
};

/// Constructive convergence test for the geometric series N + N^2 + ...
/// Repeated squaring drives max|entry| of N^(2^k) to 0 exactly when the
/// spectral radius is below 1, with no eigenvalue solve needed.
inline bool closure_converges(const Matrix& n) {
  if (!n.square() || n.empty())
    throw Error("closure requires a nonempty square matrix");
  if (n.max_row_sum() < 1.0 - 1e-12) return true;
  Matrix power = n;
  for (int iter = 0; iter < 64; ++iter) {
    const double m = power.max_abs();
    if (m < 1e-150) return true;
    if (m > 1e150) return false;
    power = power * power;
  }
  return power.max_abs() < 1e-150;
}

/// Total relation closure T = N + N^2 + ... = (I - N)^{-1} N.
/// Throws when the series diverges (spectral radius >= 1).
inline Matrix total_relation_matrix(const Matrix& n) {
  if (!closure_converges(n))
    throw Error(
        "closure diverges: influence matrix has spectral radius >= 1 "
        "(rescale the input or fix the matrix)");
  Matrix lhs = Matrix::identity(n.rows());
  lhs -= n;
  return solve_linear(lhs, n);
}

/// Significance cut over all entries of T. The default rule is
/// mean + 0.5 * population standard deviation.
inline double significance_threshold(const Matrix& t,
                                     ThresholdRule rule = ThresholdRule::MeanPlusHalfStd) {
  if (t.empty()) throw Error("significance threshold needs a nonempty matrix");
  const auto& xs = t.data();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  const double sd = std::sqrt(var);
  switch (rule) {
    case ThresholdRule::Mean: return mean;
    case ThresholdRule::MeanPlusHalfStd: return mean + 0.5 * sd;
    case ThresholdRule::MeanPlusStd: return mean + sd;
  }
  return mean + 0.5 * sd;
}

/// Edges whose total relation strictly exceeds the threshold.
inline EdgeMask significant_edges(const Matrix& t, double tau) {
  if (!t.square()) throw Error("significant_edges needs a square matrix");
  EdgeMask mask(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j)
      mask.set(i, j, t(i, j) > tau);
  return mask;
}

struct TotalRelation {
  Matrix entries;
  double tau = 0.0;
  EdgeMask significant;
};

/// One-stop mining: optional rescale, closure, threshold, edge mask.
/// MaxRowSum scaling divides the input by its largest row sum, the usual way
/// to make a raw opinion-derived matrix closable.
inline TotalRelation mine_relations(const Matrix& influence,
                                    TrmScale scale = TrmScale::MaxRowSum,
                                    ThresholdRule rule = ThresholdRule::MeanPlusHalfStd) {
  Matrix input = influence;
  if (scale == TrmScale::MaxRowSum) {
    const double m = influence.max_row_sum();
    if (m > 0.0) input *= 1.0 / m;
  }
  TotalRelation out;
  out.entries = total_relation_matrix(input);
  out.tau = significance_threshold(out.entries, rule);
  out.significant = significant_edges(out.entries, out.tau);
  return out;
}

inline std::string_view label(ThresholdRule rule) {
  switch (rule) {
    case ThresholdRule::MeanPlusHalfStd: return "mean_plus_half_std";
    case ThresholdRule::Mean: return "mean";
    case ThresholdRule::MeanPlusStd: return "mean_plus_std";
  }
  return "mean_plus_half_std";
}

inline std::string_view label(TrmScale scale) {
  return scale == TrmScale::MaxRowSum ? "max_row_sum" : "none";
}

inline ThresholdRule parse_threshold_rule(std::string_view text) {
  if (text == "mean_plus_half_std") return ThresholdRule::MeanPlusHalfStd;
  if (text == "mean") return ThresholdRule::Mean;
  if (text == "mean_plus_std") return ThresholdRule::MeanPlusStd;
  throw ParseError("unknown threshold rule '" + std::string(text) + "'");
}

inline TrmScale parse_trm_scale(std::string_view text) {
  if (text == "max_row_sum") return TrmScale::MaxRowSum;
  if (text == "none") return TrmScale::None;
  throw ParseError("unknown relation scale '" + std::string(text) + "'");
}

}  // namespace effortprop
