#pragma once

// Small frequentist helpers for the Monte Carlo checks.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgw/simulator.hpp"

namespace dgw {

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  /// Pooled categories as (first key, last key) per bin.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> bins;
};

/// Two-sample chi-square homogeneity test on count maps over a common ordered support.
/// Adjacent categories are pooled until both expected counts reach min_expected.
[[nodiscard]] ChiSquareResult two_sample_chi_square(const Counts& a, const Counts& b, double min_expected = 5.0);

/// Goodness of fit of observed counts against probabilities p_j (j = key), same pooling rule.
/// The leftover mass outside the listed keys forms one more bin when it carries enough expectation.
[[nodiscard]] ChiSquareResult chi_square_gof(const Counts& observed, const std::vector<double>& probs,
                                             double min_expected = 5.0);

/// sqrt(p (1 - p) / n).
[[nodiscard]] double binomial_se(double p, std::uint64_t n);

/// |estimate - truth| / se, with se = 0 treated as exact agreement only when estimate == truth.
[[nodiscard]] double z_score(double estimate, double truth, double se);

}  // namespace dgw
