#include "dgw/pgf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dgw/errors.hpp"
#include "json.hpp"

namespace dgw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier compensated sum of 1 - sum(pmf); eps near 0 is the interesting regime.
double compensated_defect(const std::vector<double>& pmf) {
  double sum = 1.0;
  double comp = 0.0;
  for (double p : pmf) {
    const double term = -p;
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

void require_unit_interval(double s, const char* op) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError(std::string(op) + ": argument must lie in [0, 1], got " + std::to_string(s));
  }
}

// Offset recursion u -> f(q + u) - q, written as u * (f(q+u) - f(q)) / u.
double advance_offset(const DefectivePGF& f, double q, std::size_t t, double u) {
  for (std::size_t i = 0; i < t && u != 0.0; ++i) u *= f.divided_difference(q + u, q);
  return u;
}

}  // namespace

DefectivePGF::DefectivePGF(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  for (double p : pmf_) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("DefectivePGF: probabilities must be finite and >= 0");
  }
  while (!pmf_.empty() && pmf_.back() == 0.0) pmf_.pop_back();
  if (pmf_.size() < 2) {
    throw std::invalid_argument("DefectivePGF: law must put mass on some k >= 1 (constant f is not a process)");
  }
  double defect = compensated_defect(pmf_);
  if (defect < -1e-12) throw std::invalid_argument("DefectivePGF: total mass exceeds 1");
  if (defect < 0.0) defect = 0.0;
  if (!(defect < 1.0)) throw std::invalid_argument("DefectivePGF: defect must be < 1");
  defect_ = defect;
  mass_ = 1.0 - defect;
  while (pmf_[min_offspring_] == 0.0) ++min_offspring_;
}

double DefectivePGF::operator()(double s) const {
  require_unit_interval(s, "DefectivePGF");
  return evaluate(s);
}

double DefectivePGF::evaluate(double s) const noexcept {
  double acc = 0.0;
  for (auto it = pmf_.rbegin(); it != pmf_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double DefectivePGF::derivative(double s) const noexcept {
  double acc = 0.0;
  for (std::size_t k = pmf_.size() - 1; k >= 1; --k) acc = acc * s + static_cast<double>(k) * pmf_[k];
  return acc;
}

double DefectivePGF::second_derivative(double s) const noexcept {
  double acc = 0.0;
  for (std::size_t k = pmf_.size() - 1; k >= 2; --k) {
    acc = acc * s + static_cast<double>(k) * static_cast<double>(k - 1) * pmf_[k];
  }
  return acc;
}

double DefectivePGF::divided_difference(double x, double y) const noexcept {
  // S_1 = 1, S_{k+1} = y S_k + x^k, so that S_k = sum_{i<k} x^i y^{k-1-i}.
  double sum = 0.0;
  double s_k = 1.0;
  double x_pow = 1.0;
  for (std::size_t k = 1; k < pmf_.size(); ++k) {
    sum += pmf_[k] * s_k;
    x_pow *= x;
    s_k = y * s_k + x_pow;
  }
  return sum;
}

double DefectivePGF::elasticity(double x) const noexcept {
  double num = 0.0;
  double den = 0.0;
  double x_pow = 1.0;
  for (std::size_t k = min_offspring_; k < pmf_.size(); ++k) {
    num += static_cast<double>(k) * pmf_[k] * x_pow;
    den += pmf_[k] * x_pow;
    x_pow *= x;
  }
  return num / den;
}

double DefectivePGF::second_elasticity(double x) const noexcept {
  double num = 0.0;
  double den = 0.0;
  double x_pow = 1.0;
  for (std::size_t k = min_offspring_; k < pmf_.size(); ++k) {
    num += static_cast<double>(k) * (static_cast<double>(k) - 1.0) * pmf_[k] * x_pow;
    den += pmf_[k] * x_pow;
    x_pow *= x;
  }
  return num / den;
}

double DefectivePGF::log_evaluate(double log_x) const noexcept {
  const double x = std::exp(log_x);
  const double p_l = pmf_[min_offspring_];
  double tail = 0.0;
  for (std::size_t k = pmf_.size() - 1; k > min_offspring_; --k) tail = (tail + pmf_[k] / p_l) * x;
  const double lead = min_offspring_ == 0 ? 0.0 : static_cast<double>(min_offspring_) * log_x;
  return std::log(p_l) + lead + std::log1p(tail);
}

TruncatedSeries DefectivePGF::as_series(std::size_t degree) const {
  return TruncatedSeries(std::span<const double>(pmf_), degree);
}

std::string DefectivePGF::to_json() const {
  nlohmann::json j;
  j["pmf"] = pmf_;
  return j.dump();
}

DefectivePGF DefectivePGF::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("pmf") || !j["pmf"].is_array()) throw std::invalid_argument("DefectivePGF JSON: missing \"pmf\" array");
  return DefectivePGF(j["pmf"].get<std::vector<double>>());
}

double DerivedParams::log_pi(std::size_t t) const {
  if (t == 0) return 0.0;
  if (l <= 1) {
    if (gamma <= 0.0) throw RegimeError("log_pi: gamma = 0 with l <= 1 violates the law invariants");
    return static_cast<double>(t) * std::log(gamma);
  }
  return a(t) * std::log(p_l);
}

double DerivedParams::a(std::size_t t) const {
  double sum = 0.0;
  double power = 1.0;
  for (std::size_t k = 0; k < t; ++k) {
    sum += power;
    power *= static_cast<double>(l);
  }
  return sum;
}

double eval_point(const DefectivePGF& f, double s) { return f(s); }

double iterate_point(const DefectivePGF& f, std::size_t t, double s) {
  require_unit_interval(s, "iterate_point");
  for (std::size_t i = 0; i < t; ++i) s = f.evaluate(s);
  return s;
}

TruncatedSeries iterate_series(const DefectivePGF& f, std::size_t t, std::size_t degree) {
  if (degree < f.max_offspring()) {
    throw std::invalid_argument("iterate_series: truncation degree must be at least the maximal offspring count");
  }
  const TruncatedSeries law = f.as_series(degree);
  TruncatedSeries current = TruncatedSeries::identity(degree);
  for (std::size_t i = 0; i < t; ++i) current = series_compose(law, current);
  return current;
}

DerivedParams extinction_prob(const DefectivePGF& f, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("extinction_prob: tolerance must be positive");
  DerivedParams params;
  params.l = f.min_offspring();
  params.p_l = f.p(params.l);
  params.m = f.derivative(1.0);

  auto excess = [&f](double s) { return f.evaluate(s) - s; };

  if (f.p(0) == 0.0) {
    params.q = 0.0;
  } else if (f.is_proper() && params.m <= 1.0) {
    params.q = 1.0;
    params.degenerate = true;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    if (f.is_proper()) {
      // Supercritical proper law: f(s) < s just below 1.
      hi = 0.5;
      for (int k = 1; k <= 60 && excess(hi) >= 0.0; ++k) hi = 1.0 - std::ldexp(1.0, -k);
      if (excess(hi) >= 0.0) throw ConvergenceError("extinction_prob: could not bracket the root below 1");
    }
    for (int iter = 0; iter < 200 && hi - lo > 0.25 * tol; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (excess(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double q = 0.5 * (lo + hi);
    for (int iter = 0; iter < 3; ++iter) {
      const double slope = f.derivative(q) - 1.0;
      if (slope >= 0.0) break;
      const double next = q - excess(q) / slope;
      if (!(next >= lo - tol && next <= hi + tol) || std::abs(excess(next)) > std::abs(excess(q))) break;
      q = next;
    }
    if (std::abs(excess(q)) > tol) throw ConvergenceError("extinction_prob: |f(q) - q| above tolerance");
    params.q = q;
  }
  params.gamma = f.derivative(params.q);
  return params;
}

double log_pi(const DerivedParams& params, std::size_t t) { return params.log_pi(t); }

double iterate_offset(const DefectivePGF& f, const DerivedParams& params, std::size_t t, double s) {
  require_unit_interval(s, "iterate_offset");
  return advance_offset(f, params.q, t, s - params.q);
}

double log_iterate(const DefectivePGF& f, std::size_t t, double log_s) {
  if (f.p(0) != 0.0) throw RegimeError("log_iterate: requires p_0 = 0");
  if (log_s > 0.0) throw DomainError("log_iterate: argument must lie in [0, 1]");
  for (std::size_t i = 0; i < t && log_s != kNegInf; ++i) log_s = f.log_evaluate(log_s);
  return log_s;
}

IterateDerivatives iterate_with_derivatives(const DefectivePGF& f, std::size_t t, double s) {
  IterateDerivatives d{s, 1.0, 0.0};
  for (std::size_t i = 0; i < t; ++i) {
    const double f1 = f.derivative(d.value);
    const double f2 = f.second_derivative(d.value);
    d.second = f2 * d.first * d.first + f1 * d.second;
    d.first *= f1;
    d.value = f.evaluate(d.value);
  }
  return d;
}

IterateElasticities iterate_elasticities(const DefectivePGF& f, std::size_t t, double s) {
  IterateElasticities e;
  double y = s;
  for (std::size_t i = 0; i < t; ++i) {
    const double e1 = f.elasticity(y);
    const double e2 = f.second_elasticity(y);
    e.second = e2 * e.first * e.first + e1 * e.second;
    e.first *= e1;
    y = f.evaluate(y);
  }
  return e;
}

IteratePair iterate_pair(const DefectivePGF& f, const DerivedParams& params, std::size_t t) {
  IteratePair pair;
  if (f.p(0) == 0.0) {
    pair.log_upper = log_iterate(f, t, 0.0);
    pair.log_lower = kNegInf;
    pair.log_gap = pair.log_upper;
    pair.upper_offset = std::exp(pair.log_upper);
    pair.lower_offset = 0.0;
    return pair;
  }
  const double q = params.q;
  pair.upper_offset = advance_offset(f, q, t, 1.0 - q);
  pair.lower_offset = advance_offset(f, q, t, -q);
  const double lower = q + pair.lower_offset;
  pair.log_upper = std::log(q + pair.upper_offset);
  pair.log_lower = lower > 0.0 ? std::log(lower) : kNegInf;
  pair.log_gap = std::log(pair.upper_offset - pair.lower_offset);
  return pair;
}

double log_power_difference(const IteratePair& pair, std::size_t n) {
  if (n == 0) return kNegInf;
  if (pair.log_lower == kNegInf) return static_cast<double>(n) * pair.log_upper;
  // a^n - b^n = (a - b) a^(n-1) sum_{m<n} rho^m with rho = b / a.
  const double one_minus_rho = std::exp(pair.log_gap - pair.log_upper);
  const double nd = static_cast<double>(n);
  const double geom = one_minus_rho > 0.0 ? -std::expm1(nd * std::log1p(-one_minus_rho)) / one_minus_rho : nd;
  return pair.log_gap + (nd - 1.0) * pair.log_upper + std::log(geom);
}

SurvivalProbabilities survival_prob(const DefectivePGF& f, std::size_t t) {
  return survival_prob(f, extinction_prob(f), t);
}

SurvivalProbabilities survival_prob(const DefectivePGF& f, const DerivedParams& params, std::size_t t) {
  const IteratePair pair = iterate_pair(f, params, t);
  SurvivalProbabilities out;
  out.alive = std::exp(pair.log_gap);
  out.extinct_later = -pair.lower_offset;
  out.killed_later = pair.upper_offset;
  return out;
}

double conditional_pgf(const DefectivePGF& f, std::size_t k, std::size_t t, double s) {
  if (k > t) throw std::invalid_argument("conditional_pgf: requires k <= t");
  require_unit_interval(s, "conditional_pgf");
  const DerivedParams params = extinction_prob(f);
  const IteratePair denom = iterate_pair(f, params, t);
  if (!std::isfinite(denom.log_gap)) {
    throw ConditioningError("conditional_pgf: conditioning event has vanishing probability");
  }
  if (f.p(0) == 0.0) {
    // f(t-k, 0) = 0, so only the upper term survives; work in logs throughout.
    const IteratePair inner = iterate_pair(f, params, t - k);
    const double log_num = log_iterate(f, k, std::log(s) + inner.log_upper);
    return std::exp(log_num - denom.log_gap);
  }
  const double q = params.q;
  const IteratePair inner = iterate_pair(f, params, t - k);
  const double u_hi = s * inner.upper_offset + (s - 1.0) * q;
  const double u_lo = s * inner.lower_offset + (s - 1.0) * q;
  const double num = advance_offset(f, q, k, u_hi) - advance_offset(f, q, k, u_lo);
  return num / std::exp(denom.log_gap);
}

MeanVar conditional_mean_var(const DefectivePGF& f, std::size_t k, std::size_t t) {
  if (k > t) throw std::invalid_argument("conditional_mean_var: requires k <= t");
  const DerivedParams params = extinction_prob(f);
  const IteratePair denom = iterate_pair(f, params, t);
  if (!std::isfinite(denom.log_gap)) {
    throw ConditioningError("conditional_mean_var: conditioning event has vanishing probability");
  }
  if (k == 0) return {1.0, 0.0};
  const IteratePair inner = iterate_pair(f, params, t - k);
  if (f.p(0) == 0.0) {
    // E(s^Z(k) | T > t) = f(k, s a) / f(k, a): moments are elasticities of f(k, .) at a.
    const IterateElasticities e = iterate_elasticities(f, k, std::exp(inner.log_upper));
    return {e.first, e.second + e.first - e.first * e.first};
  }
  const double a = params.q + inner.upper_offset;
  const double b = params.q + inner.lower_offset;
  const IterateDerivatives da = iterate_with_derivatives(f, k, a);
  const IterateDerivatives db = iterate_with_derivatives(f, k, b);
  const double p = std::exp(denom.log_gap);
  const double g1 = (a * da.first - b * db.first) / p;
  const double g2 = (a * a * da.second - b * b * db.second) / p;
  return {g1, g2 + g1 - g1 * g1};
}

TransitionRow transition_row(const DefectivePGF& f, std::size_t i, std::size_t degree) {
  if (i == 0) throw std::invalid_argument("transition_row: source state must be >= 1");
  const std::size_t full = i * f.max_offspring();
  const std::size_t n = std::min(full, degree);
  const TruncatedSeries row = series_pow(f.as_series(n), static_cast<unsigned>(i));
  TransitionRow out;
  out.i = i;
  out.probs.assign(row.coeffs().begin(), row.coeffs().end());
  out.defect_mass = -std::expm1(static_cast<double>(i) * std::log1p(-f.defect()));
  return out;
}

TransitionRow transition_row(const DefectivePGF& f, std::size_t i) {
  return transition_row(f, i, i * f.max_offspring());
}

}  // namespace dgw
