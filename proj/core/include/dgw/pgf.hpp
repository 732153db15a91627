#pragma once

// Defective offspring laws with finite support, their iterates f(t, s), and the
// absorption / survival quantities of the chain on {0, 1, ...} u {Delta}.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dgw/series.hpp"

namespace dgw {

/// Finite-support offspring law (p_0, ..., p_D) with total mass 1 - eps, 0 <= eps < 1.
///
/// Trailing zeros are stripped at construction; a constant generating function
/// (D = 0) is rejected. eps = 0 is accepted as the classical case and flagged by
/// is_proper().
class DefectivePGF {
 public:
  explicit DefectivePGF(std::vector<double> pmf);

  [[nodiscard]] std::span<const double> pmf() const noexcept { return pmf_; }
  [[nodiscard]] double p(std::size_t k) const noexcept { return k < pmf_.size() ? pmf_[k] : 0.0; }
  [[nodiscard]] std::size_t max_offspring() const noexcept { return pmf_.size() - 1; }
  /// Smallest k with p_k > 0.
  [[nodiscard]] std::size_t min_offspring() const noexcept { return min_offspring_; }
  [[nodiscard]] double mass() const noexcept { return mass_; }
  [[nodiscard]] double defect() const noexcept { return defect_; }
  [[nodiscard]] bool is_proper() const noexcept { return defect_ == 0.0; }

  /// f(s) for s in [0, 1]; DomainError otherwise.
  [[nodiscard]] double operator()(double s) const;
  /// f(s) for any s >= 0 (used by the extension s > 1).
  [[nodiscard]] double evaluate(double s) const noexcept;
  [[nodiscard]] double derivative(double s) const noexcept;
  [[nodiscard]] double second_derivative(double s) const noexcept;

  /// (f(x) - f(y)) / (x - y) as a sum of nonnegative terms; equals f'(x) when x == y.
  [[nodiscard]] double divided_difference(double x, double y) const noexcept;

  /// x f'(x) / f(x) and x^2 f''(x) / f(x), evaluated without underflow as x -> 0.
  [[nodiscard]] double elasticity(double x) const noexcept;
  [[nodiscard]] double second_elasticity(double x) const noexcept;

  /// ln f(e^log_x), stable for arbitrarily negative log_x. Requires p_0 = 0 or finite result.
  [[nodiscard]] double log_evaluate(double log_x) const noexcept;

  [[nodiscard]] TruncatedSeries as_series(std::size_t degree) const;

  [[nodiscard]] std::string to_json() const;
  static DefectivePGF from_json(const std::string& text);

 private:
  std::vector<double> pmf_;
  std::size_t min_offspring_ = 0;
  double mass_ = 0.0;
  double defect_ = 0.0;
};

/// Per-law quantities: extinction probability q, gamma = f'(q), l, m = f'(1) and pi_t.
struct DerivedParams {
  double q = 0.0;
  double gamma = 0.0;
  std::size_t l = 0;
  double p_l = 0.0;
  double m = 0.0;
  /// Set for eps = 0 laws with m <= 1, where the smallest fixed point is q = 1.
  bool degenerate = false;

  /// ln pi_t: t ln gamma when l <= 1, a_t ln p_l when l >= 2.
  [[nodiscard]] double log_pi(std::size_t t) const;
  /// a_t = (l^t - 1) / (l - 1); only meaningful for l >= 2. Returned as double since it grows like l^t.
  [[nodiscard]] double a(std::size_t t) const;
};

inline constexpr double kDefaultRootTolerance = 1e-14;

/// f(s); DomainError for s outside [0, 1].
[[nodiscard]] double eval_point(const DefectivePGF& f, double s);

/// f(t, s) by t-fold composition; f(0, s) = s.
[[nodiscard]] double iterate_point(const DefectivePGF& f, std::size_t t, double s);

/// Coefficients of f(t, .) modulo s^(N+1); coefficient j is P(Z(t) = j).
[[nodiscard]] TruncatedSeries iterate_series(const DefectivePGF& f, std::size_t t, std::size_t degree);

/// Smallest root q of f(s) = s in [0, 1) and the quantities derived from it.
[[nodiscard]] DerivedParams extinction_prob(const DefectivePGF& f, double tol = kDefaultRootTolerance);

[[nodiscard]] double log_pi(const DerivedParams& params, std::size_t t);

/// f(t, s) - q, iterated in the shifted coordinate so that the result keeps full
/// relative precision as f(t, s) -> q.
[[nodiscard]] double iterate_offset(const DefectivePGF& f, const DerivedParams& params, std::size_t t, double s);

/// ln f(t, e^log_s). Requires p_0 = 0 (then q = 0 and iterates decay without bound).
[[nodiscard]] double log_iterate(const DefectivePGF& f, std::size_t t, double log_s);

/// Value and first two derivatives of f(t, .) at s.
struct IterateDerivatives {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};
[[nodiscard]] IterateDerivatives iterate_with_derivatives(const DefectivePGF& f, std::size_t t, double s);

/// s f'(t,s) / f(t,s) and s^2 f''(t,s) / f(t,s) by the chain rule on elasticities.
struct IterateElasticities {
  double first = 1.0;
  double second = 0.0;
};
[[nodiscard]] IterateElasticities iterate_elasticities(const DefectivePGF& f, std::size_t t, double s);

/// The pair f(t, 1), f(t, 0) together with an accurate difference.
///
/// Logs are kept so that doubly-exponential decay (l >= 2) never underflows.
struct IteratePair {
  double log_upper = 0.0;  ///< ln f(t, 1)
  double log_lower = 0.0;  ///< ln f(t, 0); -inf when f(t, 0) = 0
  double log_gap = 0.0;    ///< ln (f(t, 1) - f(t, 0)) = ln P(T > t)
  double upper_offset = 0.0;  ///< f(t, 1) - q
  double lower_offset = 0.0;  ///< f(t, 0) - q
};
[[nodiscard]] IteratePair iterate_pair(const DefectivePGF& f, const DerivedParams& params, std::size_t t);

/// ln (a^n - b^n) for the pair (a, b) = (f(t,1), f(t,0)), without cancellation.
[[nodiscard]] double log_power_difference(const IteratePair& pair, std::size_t n);

struct SurvivalProbabilities {
  double alive = 0.0;          ///< P(T > t) = f(t,1) - f(t,0)
  double extinct_later = 0.0;  ///< P(t < T_0 < inf) = q - f(t,0)
  double killed_later = 0.0;   ///< P(t < T_Delta < inf) = f(t,1) - q
};
[[nodiscard]] SurvivalProbabilities survival_prob(const DefectivePGF& f, std::size_t t);
[[nodiscard]] SurvivalProbabilities survival_prob(const DefectivePGF& f, const DerivedParams& params, std::size_t t);

/// E(s^{Z(k)} | T > t) for 0 <= k <= t.
[[nodiscard]] double conditional_pgf(const DefectivePGF& f, std::size_t k, std::size_t t, double s);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};
/// Conditional mean and variance of Z(k) given T > t, from derivatives of the iterates.
[[nodiscard]] MeanVar conditional_mean_var(const DefectivePGF& f, std::size_t k, std::size_t t);

/// Row i of the one-step transition matrix: probs[j] = P(Z(t+1) = j | Z(t) = i).
struct TransitionRow {
  std::size_t i = 1;
  std::vector<double> probs;  ///< j = 0..min(i D, N)
  double defect_mass = 0.0;   ///< P(Z(t+1) = Delta | Z(t) = i) = 1 - (1 - eps)^i
};
[[nodiscard]] TransitionRow transition_row(const DefectivePGF& f, std::size_t i, std::size_t degree);
/// Full row without truncation (degree i D).
[[nodiscard]] TransitionRow transition_row(const DefectivePGF& f, std::size_t i);

}  // namespace dgw
