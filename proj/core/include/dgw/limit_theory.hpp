#pragma once

// Limit objects of the fixed-law theory: the products H (gamma > 0) and R
// (gamma = 0), tail asymptotics, the limit laws q_j and q_{k,j}, the backward
// kernel Q^(k) with its Q-process limit, and the drift profile c(k).

#include <cstddef>
#include <vector>

#include "dgw/pgf.hpp"
#include "dgw/series.hpp"

namespace dgw {

struct ProductOptions {
  double tol = 1e-15;
  std::size_t max_terms = 10000;
};

/// h(s) = (f(s) - q) / ((s - q) gamma); h(q) = 1. RegimeError when gamma = 0.
[[nodiscard]] double h_factor(const DefectivePGF& f, const DerivedParams& params, double s);

/// H(s) = prod_{j>=0} h(f(j, s)), gamma > 0.
class HFunction {
 public:
  HFunction(DefectivePGF f, DerivedParams params, ProductOptions opts = {});
  explicit HFunction(const DefectivePGF& f) : HFunction(f, extinction_prob(f)) {}

  [[nodiscard]] const DefectivePGF& law() const noexcept { return f_; }
  [[nodiscard]] const DerivedParams& params() const noexcept { return params_; }

  [[nodiscard]] double h(double s) const { return h_factor(f_, params_, s); }
  [[nodiscard]] double operator()(double s) const;
  [[nodiscard]] double log_value(double s) const;
  /// H_t(s): the first t factors.
  [[nodiscard]] double partial(double s, std::size_t t) const;
  /// Number of factors needed at s = 1 (the slowest point) for the configured tolerance.
  [[nodiscard]] std::size_t terms_used() const noexcept { return terms_at_one_; }

  /// H as a power series modulo s^(N+1); the factors beyond terms_used() are replaced by 1.
  [[nodiscard]] TruncatedSeries series(std::size_t degree) const;

 private:
  std::size_t count_terms(double s, double* log_out) const;

  DefectivePGF f_;
  DerivedParams params_;
  ProductOptions opts_;
  std::size_t terms_at_one_ = 0;
  double h0_ = 0.0;
  double h1_ = 0.0;
};

[[nodiscard]] double eval_H(const HFunction& H, double s);

/// R(s) = prod_{j>=0} b(f(j, s))^(l^{-j-1}) with b(s) = f(s) / (p_l s^l), gamma = 0.
class RFunction {
 public:
  RFunction(DefectivePGF f, DerivedParams params, ProductOptions opts = {});
  explicit RFunction(const DefectivePGF& f) : RFunction(f, extinction_prob(f)) {}

  [[nodiscard]] const DefectivePGF& law() const noexcept { return f_; }
  [[nodiscard]] const DerivedParams& params() const noexcept { return params_; }

  /// b(s) and its logarithmic derivative b'(s) / b(s).
  [[nodiscard]] double b(double s) const;
  [[nodiscard]] double b_log_derivative(double s) const;

  [[nodiscard]] double operator()(double s) const;
  [[nodiscard]] double log_value(double s) const;
  [[nodiscard]] double partial(double s, std::size_t t) const;

  /// Rbar(s) = R'(s) / R(s) and its truncation Rbar_t over j < t.
  [[nodiscard]] double log_derivative(double s) const;
  [[nodiscard]] double log_derivative_partial(double s, std::size_t t) const;
  /// Derivative of Rbar_t at s.
  [[nodiscard]] double slope_partial(double s, std::size_t t) const;

  /// rho = p_l^{1/(l-1)} R(1), in (0, 1).
  [[nodiscard]] double rho() const;
  [[nodiscard]] double log_rho() const;

 private:
  double log_derivative_sum(double s, std::size_t t, bool adaptive) const;

  DefectivePGF f_;
  DerivedParams params_;
  ProductOptions opts_;
  double log_r1_ = 0.0;
};

[[nodiscard]] double eval_R(const RFunction& R, double s);

struct TailAsymptotics {
  double log_exact = 0.0;   ///< ln P(T > t)
  double log_approx = 0.0;  ///< ln of the regime's asymptotic form
  [[nodiscard]] double ratio() const;
};
/// Exact tail against gamma^t [qH(0) + (1-q)H(1)] (gamma > 0) or p_l^{-1/(l-1)} rho^{l^t} (gamma = 0).
[[nodiscard]] TailAsymptotics tail_asymptotics(const DefectivePGF& f, const DerivedParams& params, std::size_t t);

/// A probability vector indexed by j = 0..N with the mass not represented.
struct Distribution {
  std::vector<double> probs;
  double tail_mass = 0.0;
  [[nodiscard]] double mean() const;
};

inline constexpr double kDefaultTailTolerance = 1e-8;

/// q_j from (s - q)H(s) + qH(0), normalized by (1 - q)H(1) + qH(0). probs[0] = 0.
/// ConvergenceError when the unrepresented mass exceeds tail_tol.
[[nodiscard]] Distribution limit_distribution_qj(const DefectivePGF& f, const DerivedParams& params,
                                                 std::size_t degree, double tail_tol = kDefaultTailTolerance);
[[nodiscard]] Distribution limit_distribution_qj(const HFunction& H, std::size_t degree,
                                                 double tail_tol = kDefaultTailTolerance);

/// q_{k,j} = q_j gamma^{-k} (f(k,1)^j - f(k,0)^j).
[[nodiscard]] Distribution qkj_distribution(const DefectivePGF& f, const DerivedParams& params, std::size_t k,
                                            std::size_t degree, double tail_tol = kDefaultTailTolerance);
[[nodiscard]] Distribution qkj_distribution(const DefectivePGF& f, const DerivedParams& params,
                                            const Distribution& qj, std::size_t k);

/// Row i of Q^(k): Q_ij = P_ij [f(k-1,1)^j - f(k-1,0)^j] / [f(k,1)^i - f(k,0)^i], j = 0..min(iD, N).
[[nodiscard]] std::vector<double> kernel_Q(const DefectivePGF& f, const DerivedParams& params, std::size_t k,
                                           std::size_t i, std::size_t degree);
[[nodiscard]] std::vector<double> kernel_Q(const DefectivePGF& f, const DerivedParams& params, std::size_t k,
                                           std::size_t i);

/// Q-process kernel P_ij j q^{j-i} / (gamma i); requires 0 < q < 1.
[[nodiscard]] double qprocess_kernel(const DefectivePGF& f, const DerivedParams& params, std::size_t i,
                                     std::size_t j);
[[nodiscard]] std::vector<double> qprocess_row(const DefectivePGF& f, const DerivedParams& params, std::size_t i);

/// c(k) = 1 + f(k,1) Rbar(f(k,1)).
[[nodiscard]] double drift_profile_c(const RFunction& R, std::size_t k);
/// ln (c(k) - 1), which stays resolvable after c(k) rounds to 1.
[[nodiscard]] double drift_log_excess(const RFunction& R, std::size_t k);

/// delta_t = sum_{j>=t} gamma_0 ... gamma_{j-1} with gamma_i = f'(f(i,1)).
[[nodiscard]] double ld1_delta(const DefectivePGF& f, const DerivedParams& params, std::size_t t);
/// f'(1) delta_t / p_l, an upper bound for Rbar(s) - Rbar_t(s).
[[nodiscard]] double ld1_error_bound(const DefectivePGF& f, const DerivedParams& params, std::size_t t);

}  // namespace dgw
