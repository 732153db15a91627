#pragma once

// Truncated formal power series in one variable, kept modulo s^(N+1).
//
// These are the coefficient-level oracles for the generating-function code:
// composition realizes f(t+1, s) = f(f(t, s)) exactly up to degree N whenever
// the outer series is a polynomial of degree <= N.

#include <cstddef>
#include <span>
#include <vector>

namespace dgw {

inline constexpr std::size_t kDefaultSeriesDegree = 64;

class TruncatedSeries {
 public:
  /// Zero series of the given truncation degree.
  explicit TruncatedSeries(std::size_t degree = kDefaultSeriesDegree);

  /// Takes coeffs[j] as the coefficient of s^j; the degree is coeffs.size() - 1.
  explicit TruncatedSeries(std::vector<double> coeffs);

  /// Embeds `coeffs` into a series of degree `degree`, dropping or zero-padding.
  TruncatedSeries(std::span<const double> coeffs, std::size_t degree);

  static TruncatedSeries constant(double c, std::size_t degree);
  static TruncatedSeries identity(std::size_t degree);

  [[nodiscard]] std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  [[nodiscard]] double operator[](std::size_t j) const noexcept { return coeffs_[j]; }
  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }

  /// Horner evaluation of the truncated polynomial.
  [[nodiscard]] double evaluate(double s) const noexcept;

  /// Sum of all retained coefficients (value at s = 1).
  [[nodiscard]] double total() const noexcept;

  /// Estimate of the discarded tail sum_{j>N} c_j s^j, assuming coefficients beyond N
  /// are dominated by |c_N|. Infinite for s >= 1.
  [[nodiscard]] double tail_bound(double s) const noexcept;

  [[nodiscard]] TruncatedSeries with_degree(std::size_t degree) const;

 private:
  std::vector<double> coeffs_;
};

[[nodiscard]] TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b);
[[nodiscard]] TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b);
[[nodiscard]] TruncatedSeries series_scale(const TruncatedSeries& a, double c);

/// outer(inner(s)) mod s^(N+1), by Horner's scheme. Requires |inner[0]| < 1.
[[nodiscard]] TruncatedSeries series_compose(const TruncatedSeries& outer, const TruncatedSeries& inner);

/// Termwise derivative; the top coefficient becomes zero.
[[nodiscard]] TruncatedSeries series_derivative(const TruncatedSeries& a);

/// a^n by repeated squaring.
[[nodiscard]] TruncatedSeries series_pow(const TruncatedSeries& a, unsigned n);

inline TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) { return series_add(a, b); }
inline TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) { return series_mul(a, b); }

}  // namespace dgw
