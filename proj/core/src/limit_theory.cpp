#include "dgw/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dgw/errors.hpp"

namespace dgw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_gamma_positive(const DerivedParams& params, const char* op) {
  if (!(params.gamma > 0.0)) throw RegimeError(std::string(op) + ": requires gamma = f'(q) > 0");
}

void require_gamma_zero(const DerivedParams& params, const char* op) {
  if (params.gamma != 0.0 || params.l < 2) throw RegimeError(std::string(op) + ": requires gamma = 0 (l >= 2)");
}

void require_unit(double s, const char* op) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError(std::string(op) + ": argument must lie in [0, 1]");
}

double kahan_total(const std::vector<double>& v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

double h_factor(const DefectivePGF& f, const DerivedParams& params, double s) {
  require_gamma_positive(params, "h_factor");
  require_unit(s, "h_factor");
  return f.divided_difference(s, params.q) / params.gamma;
}

// ---------------------------------------------------------------- H

HFunction::HFunction(DefectivePGF f, DerivedParams params, ProductOptions opts)
    : f_(std::move(f)), params_(params), opts_(opts) {
  require_gamma_positive(params_, "HFunction");
  const std::size_t n1 = count_terms(1.0, &h1_);
  const std::size_t n0 = count_terms(0.0, &h0_);
  terms_at_one_ = std::max(n0, n1);
}

std::size_t HFunction::count_terms(double s, double* log_out) const {
  const double q = params_.q;
  double u = s - q;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < opts_.max_terms; ++j) {
    const double d = f_.divided_difference(q + u, q);
    const double term = std::log(d / params_.gamma);
    sum += term;
    u *= d;
    const double mag = std::abs(term);
    if (mag == 0.0 || u == 0.0) {
      *log_out = sum;
      return j + 1;
    }
    const double ratio = mag / prev;
    if (j >= 1 && ratio < 1.0 && mag * ratio / (1.0 - ratio) < opts_.tol) {
      *log_out = sum;
      return j + 1;
    }
    prev = mag;
  }
  throw ConvergenceError("HFunction: product did not converge within max_terms");
}

double HFunction::log_value(double s) const {
  require_unit(s, "HFunction");
  if (s == 1.0) return h1_;
  if (s == 0.0) return h0_;
  double out = 0.0;
  count_terms(s, &out);
  return out;
}

double HFunction::operator()(double s) const { return std::exp(log_value(s)); }

double HFunction::partial(double s, std::size_t t) const {
  require_unit(s, "HFunction::partial");
  const double q = params_.q;
  double u = s - q;
  double sum = 0.0;
  for (std::size_t j = 0; j < t; ++j) {
    const double d = f_.divided_difference(q + u, q);
    sum += std::log(d / params_.gamma);
    u *= d;
  }
  return std::exp(sum);
}

TruncatedSeries HFunction::series(std::size_t degree) const {
  if (degree < f_.max_offspring()) throw std::invalid_argument("HFunction::series: degree below max offspring");
  // h(s) = (1/gamma) sum_i s^i sum_{k>i} p_k q^{k-1-i}
  const std::size_t D = f_.max_offspring();
  std::vector<double> hc(degree + 1, 0.0);
  for (std::size_t i = 0; i < D; ++i) {
    double acc = 0.0;
    for (std::size_t k = D; k > i; --k) acc = acc * params_.q + f_.p(k);
    hc[i] = acc / params_.gamma;
  }
  const TruncatedSeries hpoly(std::move(hc));
  const TruncatedSeries law = f_.as_series(degree);
  TruncatedSeries inner = TruncatedSeries::identity(degree);
  TruncatedSeries product = TruncatedSeries::constant(1.0, degree);
  for (std::size_t j = 0; j < terms_at_one_; ++j) {
    product = series_mul(product, series_compose(hpoly, inner));
    inner = series_compose(law, inner);
  }
  return product;
}

double eval_H(const HFunction& H, double s) { return H(s); }

// ---------------------------------------------------------------- R

namespace {

struct BValues {
  double b = 1.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

BValues b_values(const DefectivePGF& f, std::size_t l, double s) {
  // b(s) = sum_e c_e s^e with c_e = p_{l+e} / p_l; Horner for b, b', b''.
  const double p_l = f.p(l);
  BValues v{0.0, 0.0, 0.0};
  for (std::size_t e = f.max_offspring() - l + 1; e-- > 0;) {
    const double c = f.p(l + e) / p_l;
    const double de = static_cast<double>(e);
    v.b = v.b * s + c;
    if (e >= 1) v.d1 = v.d1 * s + de * c;
    if (e >= 2) v.d2 = v.d2 * s + de * (de - 1.0) * c;
  }
  return v;
}

}  // namespace

RFunction::RFunction(DefectivePGF f, DerivedParams params, ProductOptions opts)
    : f_(std::move(f)), params_(params), opts_(opts) {
  require_gamma_zero(params_, "RFunction");
  log_r1_ = log_value(1.0);
}

double RFunction::b(double s) const { return b_values(f_, params_.l, s).b; }

double RFunction::b_log_derivative(double s) const {
  const BValues v = b_values(f_, params_.l, s);
  return v.d1 / v.b;
}

double RFunction::log_value(double s) const {
  require_unit(s, "RFunction");
  const double l = static_cast<double>(params_.l);
  double y = s;
  double w = 1.0 / l;
  double sum = 0.0;
  for (std::size_t j = 0; j < opts_.max_terms; ++j) {
    const double term = w * std::log(b(y));
    sum += term;
    // y_j decreases, so the remaining terms are dominated by term * (1/l + 1/l^2 + ...).
    if (term / (l - 1.0) < opts_.tol) return sum;
    y = f_.evaluate(y);
    w /= l;
  }
  throw ConvergenceError("RFunction: product did not converge within max_terms");
}

double RFunction::operator()(double s) const { return std::exp(log_value(s)); }

double RFunction::partial(double s, std::size_t t) const {
  require_unit(s, "RFunction::partial");
  const double l = static_cast<double>(params_.l);
  double y = s;
  double w = 1.0 / l;
  double sum = 0.0;
  for (std::size_t j = 0; j < t; ++j) {
    sum += w * std::log(b(y));
    y = f_.evaluate(y);
    w /= l;
  }
  return std::exp(sum);
}

double RFunction::log_derivative_sum(double s, std::size_t t, bool adaptive) const {
  require_unit(s, "RFunction::log_derivative");
  const double l = static_cast<double>(params_.l);
  double y = s;
  double dy = 1.0;
  double w = 1.0 / l;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  const std::size_t limit = adaptive ? opts_.max_terms : t;
  for (std::size_t j = 0; j < limit; ++j) {
    const double term = w * b_log_derivative(y) * dy;
    sum += term;
    if (adaptive) {
      if (term == 0.0) return sum;
      const double ratio = term / prev;
      if (j >= 1 && ratio < 1.0 && term * ratio / (1.0 - ratio) < opts_.tol * sum) return sum;
      prev = term;
    }
    dy *= f_.derivative(y);
    y = f_.evaluate(y);
    w /= l;
  }
  if (adaptive) throw ConvergenceError("RFunction: log-derivative series did not converge");
  return sum;
}

double RFunction::log_derivative(double s) const { return log_derivative_sum(s, 0, true); }

double RFunction::log_derivative_partial(double s, std::size_t t) const { return log_derivative_sum(s, t, false); }

double RFunction::slope_partial(double s, std::size_t t) const {
  require_unit(s, "RFunction::slope_partial");
  const double l = static_cast<double>(params_.l);
  double y = s;
  double dy = 1.0;
  double d2y = 0.0;
  double w = 1.0 / l;
  double sum = 0.0;
  for (std::size_t j = 0; j < t; ++j) {
    const BValues v = b_values(f_, params_.l, y);
    const double g = v.d1 / v.b;
    const double g_prime = v.d2 / v.b - g * g;
    sum += w * (g_prime * dy * dy + g * d2y);
    const double f1 = f_.derivative(y);
    d2y = f_.second_derivative(y) * dy * dy + f1 * d2y;
    dy *= f1;
    y = f_.evaluate(y);
    w /= l;
  }
  return sum;
}

double RFunction::log_rho() const {
  return std::log(params_.p_l) / (static_cast<double>(params_.l) - 1.0) + log_r1_;
}

double RFunction::rho() const { return std::exp(log_rho()); }

double eval_R(const RFunction& R, double s) { return R(s); }

// ---------------------------------------------------------------- tails

double TailAsymptotics::ratio() const { return std::exp(log_exact - log_approx); }

TailAsymptotics tail_asymptotics(const DefectivePGF& f, const DerivedParams& params, std::size_t t) {
  if (t < 1) throw std::invalid_argument("tail_asymptotics: requires t >= 1");
  TailAsymptotics out;
  out.log_exact = iterate_pair(f, params, t).log_gap;
  if (params.gamma > 0.0) {
    const HFunction H(f, params);
    const double c = params.q * H(0.0) + (1.0 - params.q) * H(1.0);
    out.log_approx = static_cast<double>(t) * std::log(params.gamma) + std::log(c);
  } else {
    const RFunction R(f, params);
    const double l = static_cast<double>(params.l);
    out.log_approx = std::pow(l, static_cast<double>(t)) * R.log_rho() - std::log(params.p_l) / (l - 1.0);
  }
  return out;
}

// ---------------------------------------------------------------- q_j, q_{k,j}

double Distribution::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) m += static_cast<double>(j) * probs[j];
  return m;
}

Distribution limit_distribution_qj(const HFunction& H, std::size_t degree, double tail_tol) {
  const double q = H.params().q;
  const TruncatedSeries hs = H.series(degree);
  const double norm = (1.0 - q) * H(1.0) + q * H(0.0);
  Distribution out;
  out.probs.assign(degree + 1, 0.0);
  for (std::size_t j = 1; j <= degree; ++j) out.probs[j] = (hs[j - 1] - q * hs[j]) / norm;
  out.tail_mass = 1.0 - kahan_total(out.probs);
  if (std::abs(out.tail_mass) > tail_tol) {
    throw ConvergenceError("limit_distribution_qj: unrepresented mass " + std::to_string(out.tail_mass) +
                           " exceeds tolerance; increase N");
  }
  return out;
}

Distribution limit_distribution_qj(const DefectivePGF& f, const DerivedParams& params, std::size_t degree,
                                   double tail_tol) {
  require_gamma_positive(params, "limit_distribution_qj");
  return limit_distribution_qj(HFunction(f, params), degree, tail_tol);
}

Distribution qkj_distribution(const DefectivePGF& f, const DerivedParams& params, const Distribution& qj,
                              std::size_t k) {
  require_gamma_positive(params, "qkj_distribution");
  Distribution out;
  out.probs.assign(qj.probs.size(), 0.0);
  if (k == 0) {
    out = qj;
    return out;
  }
  const IteratePair pair = iterate_pair(f, params, k);
  const double shift = -static_cast<double>(k) * std::log(params.gamma);
  for (std::size_t j = 1; j < qj.probs.size(); ++j) {
    if (qj.probs[j] <= 0.0) continue;
    out.probs[j] = std::exp(std::log(qj.probs[j]) + log_power_difference(pair, j) + shift);
  }
  out.tail_mass = 1.0 - kahan_total(out.probs);
  return out;
}

Distribution qkj_distribution(const DefectivePGF& f, const DerivedParams& params, std::size_t k, std::size_t degree,
                              double tail_tol) {
  const Distribution qj = limit_distribution_qj(f, params, degree, tail_tol);
  Distribution out = qkj_distribution(f, params, qj, k);
  if (std::abs(out.tail_mass) > tail_tol) {
    throw ConvergenceError("qkj_distribution: unrepresented mass exceeds tolerance; increase N");
  }
  return out;
}

// ---------------------------------------------------------------- kernels

std::vector<double> kernel_Q(const DefectivePGF& f, const DerivedParams& params, std::size_t k, std::size_t i,
                             std::size_t degree) {
  if (k < 1 || i < 1) throw std::invalid_argument("kernel_Q: requires k >= 1 and i >= 1");
  const TransitionRow row = transition_row(f, i, degree);
  const IteratePair prev = iterate_pair(f, params, k - 1);
  const IteratePair cur = iterate_pair(f, params, k);
  const double log_den = log_power_difference(cur, i);
  if (!std::isfinite(log_den)) throw ConditioningError("kernel_Q: denominator f(k,1)^i - f(k,0)^i underflows");
  std::vector<double> out(row.probs.size(), 0.0);
  for (std::size_t j = 1; j < row.probs.size(); ++j) {
    if (row.probs[j] == 0.0) continue;
    out[j] = row.probs[j] * std::exp(log_power_difference(prev, j) - log_den);
  }
  return out;
}

std::vector<double> kernel_Q(const DefectivePGF& f, const DerivedParams& params, std::size_t k, std::size_t i) {
  return kernel_Q(f, params, k, i, i * f.max_offspring());
}

double qprocess_kernel(const DefectivePGF& f, const DerivedParams& params, std::size_t i, std::size_t j) {
  if (!(params.q > 0.0 && params.q < 1.0)) throw RegimeError("qprocess_kernel: requires 0 < q < 1");
  if (i < 1) throw std::invalid_argument("qprocess_kernel: requires i >= 1");
  const TransitionRow row = transition_row(f, i);
  if (j >= row.probs.size() || j == 0) return 0.0;
  const double di = static_cast<double>(i);
  const double dj = static_cast<double>(j);
  return row.probs[j] * dj * std::pow(params.q, dj - di) / (params.gamma * di);
}

std::vector<double> qprocess_row(const DefectivePGF& f, const DerivedParams& params, std::size_t i) {
  if (!(params.q > 0.0 && params.q < 1.0)) throw RegimeError("qprocess_row: requires 0 < q < 1");
  const TransitionRow row = transition_row(f, i);
  std::vector<double> out(row.probs.size(), 0.0);
  for (std::size_t j = 1; j < out.size(); ++j) out[j] = qprocess_kernel(f, params, i, j);
  return out;
}

// ---------------------------------------------------------------- drift

double drift_log_excess(const RFunction& R, std::size_t k) {
  const double log_y = log_iterate(R.law(), k, 0.0);
  const double y = std::exp(log_y);
  return log_y + std::log(R.log_derivative(y));
}

double drift_profile_c(const RFunction& R, std::size_t k) {
  const double y = iterate_point(R.law(), k, 1.0);
  return 1.0 + y * R.log_derivative(y);
}

double ld1_delta(const DefectivePGF& f, const DerivedParams& params, std::size_t t) {
  require_gamma_zero(params, "ld1_delta");
  double y = 1.0;
  double prod = 1.0;  // gamma_0 ... gamma_{j-1}
  double sum = 0.0;
  for (std::size_t j = 0; j < 100000; ++j) {
    const double g = f.derivative(y);
    if (j >= t) {
      sum += prod;
      // gamma_i decreases along the orbit, so the remainder is at most prod * g / (1 - g).
      if (g < 1.0 && (prod * g / (1.0 - g) <= 1e-17 * sum || prod == 0.0)) return sum;
    }
    prod *= g;
    y = f.evaluate(y);
  }
  throw ConvergenceError("ld1_delta: series did not converge");
}

double ld1_error_bound(const DefectivePGF& f, const DerivedParams& params, std::size_t t) {
  return params.m * ld1_delta(f, params, t) / params.p_l;
}

}  // namespace dgw
