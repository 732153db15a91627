#include "dgw/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dgw/errors.hpp"

namespace dgw {

namespace {

void require_same_degree(const TruncatedSeries& a, const TruncatedSeries& b, const char* op) {
  if (a.degree() != b.degree()) {
    throw std::invalid_argument(std::string(op) + ": truncation degrees differ (" +
                                std::to_string(a.degree()) + " vs " + std::to_string(b.degree()) + ")");
  }
}

}  // namespace

TruncatedSeries::TruncatedSeries(std::size_t degree) : coeffs_(degree + 1, 0.0) {}

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("TruncatedSeries: empty coefficient vector");
}

TruncatedSeries::TruncatedSeries(std::span<const double> coeffs, std::size_t degree) : coeffs_(degree + 1, 0.0) {
  const std::size_t n = std::min(coeffs.size(), coeffs_.size());
  std::copy_n(coeffs.begin(), n, coeffs_.begin());
}

TruncatedSeries TruncatedSeries::constant(double c, std::size_t degree) {
  TruncatedSeries out(degree);
  out.coeffs_[0] = c;
  return out;
}

TruncatedSeries TruncatedSeries::identity(std::size_t degree) {
  TruncatedSeries out(degree);
  if (degree >= 1) out.coeffs_[1] = 1.0;
  return out;
}

double TruncatedSeries::evaluate(double s) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double TruncatedSeries::total() const noexcept {
  double sum = 0.0;
  double comp = 0.0;
  for (double c : coeffs_) {
    const double y = c - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double TruncatedSeries::tail_bound(double s) const noexcept {
  if (s >= 1.0) return std::numeric_limits<double>::infinity();
  if (s <= 0.0) return 0.0;
  const double last = std::abs(coeffs_.back());
  return last * std::pow(s, static_cast<double>(degree() + 1)) / (1.0 - s);
}

TruncatedSeries TruncatedSeries::with_degree(std::size_t degree) const {
  return TruncatedSeries(std::span<const double>(coeffs_), degree);
}

TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b) {
  require_same_degree(a, b, "series_add");
  std::vector<double> out(a.degree() + 1);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j] + b[j];
  return TruncatedSeries(std::move(out));
}

TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  require_same_degree(a, b, "series_mul");
  const std::size_t n = a.degree();
  std::vector<double> out(n + 1, 0.0);
  // Skip the zero prefix of each factor; iterates of laws with l >= 2 are sparse at the bottom.
  std::size_t a0 = 0;
  while (a0 <= n && a[a0] == 0.0) ++a0;
  std::size_t b0 = 0;
  while (b0 <= n && b[b0] == 0.0) ++b0;
  for (std::size_t i = a0; i <= n; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (std::size_t j = b0; i + j <= n; ++j) out[i + j] += ai * b[j];
  }
  return TruncatedSeries(std::move(out));
}

TruncatedSeries series_scale(const TruncatedSeries& a, double c) {
  std::vector<double> out(a.coeffs().begin(), a.coeffs().end());
  for (double& v : out) v *= c;
  return TruncatedSeries(std::move(out));
}

TruncatedSeries series_compose(const TruncatedSeries& outer, const TruncatedSeries& inner) {
  require_same_degree(outer, inner, "series_compose");
  if (!(std::abs(inner[0]) < 1.0)) {
    throw DomainError("series_compose: inner constant term must lie in (-1, 1)");
  }
  const std::size_t n = outer.degree();
  // Highest nonzero outer coefficient bounds the Horner loop.
  std::size_t top = n;
  while (top > 0 && outer[top] == 0.0) --top;
  TruncatedSeries acc = TruncatedSeries::constant(outer[top], n);
  for (std::size_t k = top; k-- > 0;) {
    acc = series_mul(acc, inner);
    std::vector<double> c(acc.coeffs().begin(), acc.coeffs().end());
    c[0] += outer[k];
    acc = TruncatedSeries(std::move(c));
  }
  return acc;
}

TruncatedSeries series_derivative(const TruncatedSeries& a) {
  const std::size_t n = a.degree();
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) out[j - 1] = static_cast<double>(j) * a[j];
  return TruncatedSeries(std::move(out));
}

TruncatedSeries series_pow(const TruncatedSeries& a, unsigned n) {
  TruncatedSeries result = TruncatedSeries::constant(1.0, a.degree());
  TruncatedSeries base = a;
  while (n > 0) {
    if (n & 1u) result = series_mul(result, base);
    n >>= 1u;
    if (n > 0) base = series_mul(base, base);
  }
  return result;
}

}  // namespace dgw
