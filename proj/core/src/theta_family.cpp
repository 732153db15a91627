#include "dgw/theta_family.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "dgw/errors.hpp"
#include "json.hpp"

namespace dgw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lse(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a == kInf || b == kInf) return kInf;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// ln(1 - e^{-x}) given ln x.
double log1mexp_of_log(double log_x) {
  const double x = std::exp(log_x);
  if (x == 0.0) return log_x;
  return std::log(-std::expm1(-x));
}

// U - exp(log_gap_value), keeping the part U - 1 = exp(law.log_gap) separate.
// Iterates never leave [0, U]; the clamp removes rounding below 0.
double value_from_gap(const ThetaLaw& law, double log_gap_value) {
  const double g = std::exp(log_gap_value);
  if (law.form == ThetaForm::SQRT_EXAMPLE || law.log_gap == -kInf) return std::max(0.0, 1.0 - g);
  return std::max(0.0, (1.0 - g) + std::exp(law.log_gap));
}

// ln U.
double log_upper(const ThetaLaw& law) {
  if (law.form == ThetaForm::SQRT_EXAMPLE) return 0.0;
  return law.log_gap == -kInf ? 0.0 : std::log1p(std::exp(law.log_gap));
}

// ln(U - s) for s in [0, U].
double log_distance(const ThetaLaw& law, double s) {
  if (s <= 1.0) {
    const double below = s == 1.0 ? -kInf : std::log1p(-s);
    if (law.form == ThetaForm::SQRT_EXAMPLE) return below;
    return lse(law.log_gap, below);
  }
  return std::log(law.upper() - s);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError("ThetaLaw: " + what);
}

}  // namespace

std::string to_string(ThetaForm form) {
  switch (form) {
    case ThetaForm::POSITIVE_THETA: return "POSITIVE_THETA";
    case ThetaForm::GAMMA_POWER: return "GAMMA_POWER";
    case ThetaForm::NEGATIVE_THETA: return "NEGATIVE_THETA";
    case ThetaForm::SQRT_EXAMPLE: return "SQRT_EXAMPLE";
  }
  return "?";
}

ThetaForm theta_form_from_string(const std::string& name) {
  if (name == "POSITIVE_THETA") return ThetaForm::POSITIVE_THETA;
  if (name == "GAMMA_POWER") return ThetaForm::GAMMA_POWER;
  if (name == "NEGATIVE_THETA") return ThetaForm::NEGATIVE_THETA;
  if (name == "SQRT_EXAMPLE") return ThetaForm::SQRT_EXAMPLE;
  throw std::invalid_argument("unknown theta form: " + name);
}

// ---------------------------------------------------------------- ThetaLaw

ThetaLaw ThetaLaw::positive(double theta, double q, double gamma, double r) {
  return positive_log_gap(theta, q, gamma, r == 1.0 ? -kInf : std::log(r - 1.0));
}

ThetaLaw ThetaLaw::positive_log_gap(double theta, double q, double gamma, double log_gap) {
  ThetaLaw law{ThetaForm::POSITIVE_THETA, theta, q, gamma, log_gap};
  law.validate();
  return law;
}

ThetaLaw ThetaLaw::gamma_power(double q, double gamma, double r) {
  return gamma_power_log_gap(q, gamma, r == 1.0 ? -kInf : std::log(r - 1.0));
}

ThetaLaw ThetaLaw::gamma_power_log_gap(double q, double gamma, double log_gap) {
  ThetaLaw law{ThetaForm::GAMMA_POWER, 0.0, q, gamma, log_gap};
  law.validate();
  return law;
}

ThetaLaw ThetaLaw::negative(double theta, double q, double gamma, double A) {
  return negative_log_gap(theta, q, gamma, A == 1.0 ? -kInf : std::log(A - 1.0));
}

ThetaLaw ThetaLaw::negative_log_gap(double theta, double q, double gamma, double log_gap) {
  ThetaLaw law{ThetaForm::NEGATIVE_THETA, theta, q, gamma, log_gap};
  law.validate();
  return law;
}

ThetaLaw ThetaLaw::sqrt_example(double p1) {
  ThetaLaw law{ThetaForm::SQRT_EXAMPLE, -0.5, 0.0, p1, -kInf};
  law.validate();
  return law;
}

void ThetaLaw::validate() const {
  require(q >= 0.0 && q < 1.0, "q must lie in [0, 1)");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(!std::isnan(log_gap) && log_gap < kInf, "scale must be finite and >= 1");
  switch (form) {
    case ThetaForm::POSITIVE_THETA:
      require(theta > 0.0 && theta <= 1.0, "POSITIVE_THETA requires theta in (0, 1]");
      break;
    case ThetaForm::GAMMA_POWER:
      break;
    case ThetaForm::NEGATIVE_THETA:
      require(theta > -1.0 && theta < 0.0, "NEGATIVE_THETA requires theta in (-1, 0)");
      break;
    case ThetaForm::SQRT_EXAMPLE:
      require(q == 0.0 && theta == -0.5 && log_gap == -kInf, "SQRT_EXAMPLE is determined by p1 alone");
      break;
  }
}

double ThetaLaw::scale() const {
  if (form == ThetaForm::SQRT_EXAMPLE) return gamma;
  return upper();
}

double ThetaLaw::upper() const {
  if (form == ThetaForm::SQRT_EXAMPLE) return 1.0;
  return 1.0 + std::exp(log_gap);
}

double ThetaLaw::log_dq() const {
  if (form == ThetaForm::SQRT_EXAMPLE) return 0.0;
  return lse(std::log1p(-q), log_gap);
}

double ThetaLaw::mean_at_upper() const {
  switch (form) {
    case ThetaForm::POSITIVE_THETA: return std::pow(gamma, -1.0 / theta);
    case ThetaForm::GAMMA_POWER: return kInf;
    default: throw RegimeError("mean_at_upper: defined for POSITIVE_THETA and GAMMA_POWER only");
  }
}

std::string ThetaLaw::to_json() const {
  nlohmann::json j;
  j["form"] = to_string(form);
  j["theta"] = theta;
  j["q"] = q;
  j["gamma"] = gamma;
  j["scale"] = scale();
  if (form != ThetaForm::SQRT_EXAMPLE) {
    if (log_gap == -kInf) {
      j["log_scale_gap"] = "-inf";
    } else {
      j["log_scale_gap"] = log_gap;
    }
  }
  return j.dump();
}

ThetaLaw ThetaLaw::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const ThetaForm form = theta_form_from_string(j.at("form").get<std::string>());
  if (form == ThetaForm::SQRT_EXAMPLE) return sqrt_example(j.at("scale").get<double>());
  const double theta = j.value("theta", 0.0);
  const double q = j.at("q").get<double>();
  const double gamma = j.at("gamma").get<double>();
  double log_gap = 0.0;
  if (j.contains("log_scale_gap")) {
    const auto& v = j["log_scale_gap"];
    log_gap = v.is_string() ? (v.get<std::string>() == "-inf" ? -kInf : std::stod(v.get<std::string>()))
                            : v.get<double>();
  } else {
    const double scale = j.at("scale").get<double>();
    if (!(scale >= 1.0)) throw DomainError("ThetaLaw: scale must be >= 1");
    log_gap = scale == 1.0 ? -kInf : std::log(scale - 1.0);
  }
  switch (form) {
    case ThetaForm::POSITIVE_THETA: return positive_log_gap(theta, q, gamma, log_gap);
    case ThetaForm::GAMMA_POWER: return gamma_power_log_gap(q, gamma, log_gap);
    default: return negative_log_gap(theta, q, gamma, log_gap);
  }
}

// ---------------------------------------------------------------- iterates

double theta_log_gap_iterate(const ThetaLaw& law, std::size_t t, double log_d) {
  if (t == 0) return log_d;
  const double tl = static_cast<double>(t) * std::log(law.gamma);
  const double rest = std::log(-std::expm1(tl));  // ln(1 - gamma^t)
  const double ldq = law.log_dq();
  switch (law.form) {
    case ThetaForm::POSITIVE_THETA: {
      const double th = law.theta;
      return -lse(tl - th * log_d, rest - th * ldq) / th;
    }
    case ThetaForm::GAMMA_POWER: {
      if (log_d == -kInf) return -kInf;
      const double gt = std::exp(tl);
      return -std::expm1(tl) * ldq + gt * log_d;
    }
    case ThetaForm::NEGATIVE_THETA: {
      const double th = -law.theta;
      return lse(tl + th * log_d, rest + th * ldq) / th;
    }
    case ThetaForm::SQRT_EXAMPLE:
      return 2.0 * lse(tl + 0.5 * log_d, rest);
  }
  return log_d;
}

double theta_iterate(const ThetaLaw& law, std::size_t t, double s) {
  const double U = law.upper();
  const bool open_end = law.form == ThetaForm::GAMMA_POWER && law.log_gap != -kInf;
  if (!(s >= 0.0 && (open_end ? s < U : s <= U))) {
    throw DomainError("theta_iterate: s outside the domain of " + to_string(law.form));
  }
  if (t == 0) return s;
  return value_from_gap(law, theta_log_gap_iterate(law, t, log_distance(law, s)));
}

double theta_defect(const ThetaLaw& law) {
  const double lg1 = theta_log_gap_iterate(law, 1, log_distance(law, 1.0));
  if (law.form == ThetaForm::SQRT_EXAMPLE || law.log_gap == -kInf) return std::exp(lg1);
  // gap(U - 1) - (U - 1), without cancellation.
  return std::exp(law.log_gap) * std::expm1(lg1 - law.log_gap);
}

std::vector<double> theta_coefficients(const ThetaLaw& law, std::size_t degree, double radius, std::size_t nodes) {
  if (!(radius > 0.0 && radius < law.upper())) throw DomainError("theta_coefficients: radius must lie in (0, U)");
  if (nodes <= 2 * degree) throw std::invalid_argument("theta_coefficients: need more nodes than 2N");
  using C = std::complex<double>;
  const double U = law.upper();
  const double g = law.gamma;
  const double dq = U - law.q;
  auto f = [&](C s) -> C {
    switch (law.form) {
      case ThetaForm::POSITIVE_THETA: {
        const double th = law.theta;
        return U - std::pow(g * std::pow(U - s, -th) + (1.0 - g) * std::pow(dq, -th), -1.0 / th);
      }
      case ThetaForm::GAMMA_POWER:
        return U - std::pow(dq, 1.0 - g) * std::pow(U - s, g);
      case ThetaForm::NEGATIVE_THETA: {
        const double th = -law.theta;
        return U - std::pow(g * std::pow(U - s, th) + (1.0 - g) * std::pow(dq, th), 1.0 / th);
      }
      case ThetaForm::SQRT_EXAMPLE: {
        const C w = g * std::sqrt(1.0 - s) + (1.0 - g);
        return 1.0 - w * w;
      }
    }
    return s;
  };
  std::vector<C> values(nodes);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(nodes);
  for (std::size_t m = 0; m < nodes; ++m) values[m] = f(std::polar(radius, step * static_cast<double>(m)));
  std::vector<double> out(degree + 1);
  for (std::size_t j = 0; j <= degree; ++j) {
    C acc = 0.0;
    for (std::size_t m = 0; m < nodes; ++m) {
      acc += values[m] * std::polar(1.0, -step * static_cast<double>(j * m % nodes));
    }
    out[j] = acc.real() / static_cast<double>(nodes) / std::pow(radius, static_cast<double>(j));
  }
  return out;
}

double theta_survival(const ThetaLaw& law, std::size_t t) {
  const double at_zero = theta_log_gap_iterate(law, t, log_upper(law));
  const double at_one = theta_log_gap_iterate(law, t, log_distance(law, 1.0));
  return std::exp(at_zero) - std::exp(at_one);
}

double theta_conditional_laplace(const ThetaLaw& law, std::size_t t, std::size_t k, double log_mu) {
  if (k > t) throw std::invalid_argument("theta_conditional_laplace: requires k <= t");
  const double den = theta_survival(law, t);
  if (!(den > 0.0)) throw ConditioningError("theta_conditional_laplace: conditioning event has vanishing probability");
  const double lg1 = theta_log_gap_iterate(law, k, log_distance(law, 1.0));
  const double lg0 = theta_log_gap_iterate(law, k, log_upper(law));
  const double fk1 = value_from_gap(law, lg1);
  const double fk0 = value_from_gap(law, lg0);
  const double l1m = log_mu == -kInf ? -kInf : log1mexp_of_log(log_mu);
  // U - e^{-mu} f(k, .) = (U - f(k, .)) + f(k, .)(1 - e^{-mu})
  const double d1 = fk1 > 0.0 ? lse(lg1, std::log(fk1) + l1m) : lg1;
  const double d0 = fk0 > 0.0 ? lse(lg0, std::log(fk0) + l1m) : lg0;
  const double num = std::exp(theta_log_gap_iterate(law, t - k, d0)) - std::exp(theta_log_gap_iterate(law, t - k, d1));
  return num / den;
}

// ---------------------------------------------------------------- limit laws

double psi_laplace(double theta, double q, double lam) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("psi_laplace: theta must lie in (0, 1]");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("psi_laplace: q must lie in [0, 1)");
  if (!(lam >= 0.0)) throw DomainError("psi_laplace: lambda must be >= 0");
  if (lam == 0.0) return 1.0;
  if (lam == kInf) return 0.0;
  const double inner = std::exp(theta * (std::log1p(-q) - std::log(lam)));
  return -std::expm1(-std::log1p(inner) / theta);
}

double uhat(double x, double u) {
  if (!(x > 0.0) || !(u >= 0.0 && u < x)) throw DomainError("uhat: requires 0 <= u < x");
  return -x * std::log1p(-u / x);
}

double LimitLaw::cdf_range() const {
  if (kind == LimitKind::UHAT_CDF) return x_or_y * -std::expm1(-a);
  return x_or_y;
}

double LimitLaw::operator()(double arg) const {
  switch (kind) {
    case LimitKind::LAPLACE_PSI:
      return psi_laplace(theta, q, arg);
    case LimitKind::EXP_CDF:
      if (!(arg >= 0.0 && arg <= x_or_y)) throw DomainError("limit CDF: u outside [0, y]");
      return std::expm1(-arg) / std::expm1(-x_or_y);
    case LimitKind::UHAT_CDF: {
      const double range = cdf_range();
      if (!(arg >= 0.0 && arg < range)) throw DomainError("limit CDF: u outside [0, y(1 - e^{-a}))");
      return std::expm1(-arg) / std::expm1(-range);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------- schedules

double ThetaSchedule::condition_error(std::size_t n) const {
  const ScheduleTerm st = term(n);
  const double tt = static_cast<double>(st.t);
  const ThetaLaw& law = st.law;
  switch (kind) {
    case ScheduleKind::PROP41: {
      const double log_m = -std::log(law.gamma) / law.theta;
      return std::abs(law.log_gap + tt * log_m - std::log(x_or_y));
    }
    case ScheduleKind::PROP42:
      return std::abs(std::pow(law.gamma, tt) * -law.log_gap - x_or_y) / x_or_y;
    case ScheduleKind::PROP43: {
      const double th = -law.theta;
      const double ey = std::abs(std::pow(law.gamma, tt) / th - x_or_y) / x_or_y;
      double ea = 0.0;
      if (a == kInf) {
        ea = law.log_gap == -kInf ? 0.0 : 1.0 / (th * -law.log_gap);
      } else {
        ea = std::abs(th * -law.log_gap - a) / a;
      }
      return std::max(ey, ea);
    }
  }
  return kInf;
}

ThetaSchedule prop41_schedule(double theta, double q, double gamma, double x) {
  if (!(x > 0.0)) throw DomainError("prop41_schedule: x must be positive");
  ThetaSchedule s{ScheduleKind::PROP41, theta, q, gamma, x, kInf, {}};
  const double log_m = -std::log(gamma) / theta;
  s.term = [=](std::size_t n) {
    const double nd = static_cast<double>(n);
    return ScheduleTerm{ThetaLaw::positive_log_gap(theta, q, gamma, std::log(x) - nd * log_m), n};
  };
  return s;
}

ThetaSchedule prop42_schedule(double q, double gamma, double y) {
  if (!(y > 0.0)) throw DomainError("prop42_schedule: y must be positive");
  ThetaSchedule s{ScheduleKind::PROP42, 0.0, q, gamma, y, kInf, {}};
  s.term = [=](std::size_t n) {
    const double nd = static_cast<double>(n);
    return ScheduleTerm{ThetaLaw::gamma_power_log_gap(q, gamma, -y * std::pow(gamma, -nd)), n};
  };
  return s;
}

ThetaSchedule prop43_schedule(double q, double gamma, double y, double a) {
  if (!(y > 0.0) || !(a > 0.0)) throw DomainError("prop43_schedule: y and a must be positive");
  ThetaSchedule s{ScheduleKind::PROP43, 0.0, q, gamma, y, a, {}};
  s.term = [=](std::size_t n) {
    const double th = std::pow(gamma, static_cast<double>(n)) / y;
    if (!(th < 1.0)) throw DomainError("prop43_schedule: |theta_n| = gamma^n / y must be below 1");
    const double log_gap = a == kInf ? -kInf : -a / th;
    return ScheduleTerm{ThetaLaw::negative_log_gap(-th, q, gamma, log_gap), n};
  };
  return s;
}

namespace {

ConvergenceCheck summarize(std::vector<ConvergencePoint> points, double tol) {
  ConvergenceCheck c;
  c.tol = tol;
  c.monotone = true;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].error > points[i - 1].error && points[i].error > 1e-14) c.monotone = false;
  }
  c.within_tol = !points.empty() && points.back().error <= tol;
  c.points = std::move(points);
  return c;
}

void check_schedule(const ThetaSchedule& schedule, ScheduleKind kind, const std::vector<std::size_t>& ns,
                    std::size_t k) {
  if (schedule.kind != kind || !schedule.term) throw DomainError("schedule kind does not match the proposition");
  if (ns.empty()) throw std::invalid_argument("empty list of n");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw std::invalid_argument("list of n must be increasing");
  }
  for (std::size_t n : ns) {
    if (schedule.term(n).t < k) throw DomainError("schedule: t_n must be at least k");
  }
  const double err = schedule.condition_error(ns.back());
  if (!(err <= kScheduleConditionTolerance)) {
    throw DomainError("schedule violates its declared limit condition (deviation " + std::to_string(err) + ")");
  }
}

// Shared driver for the CDF-type propositions: threshold w for gamma^{t-k} ln Z(t-k).
PropositionLimits cdf_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns, double w,
                             double cdf_limit, std::size_t k, double tol) {
  PropositionLimits out;
  std::vector<ConvergencePoint> surv;
  std::vector<ConvergencePoint> cdf;
  for (std::size_t n : ns) {
    const ScheduleTerm st = schedule.term(n);
    const double tk = static_cast<double>(st.t) - static_cast<double>(k);
    const double sv = theta_survival(st.law, st.t);
    surv.push_back({n, st.t, sv, 0.0, 0.0});
    // P(Z <= e^{w gamma^{k-t}}) through the Laplace functional at mu = e^{-w gamma^{k-t}}.
    const double log_mu = w == 0.0 ? 0.0 : -w * std::exp(-tk * std::log(st.law.gamma));
    const double v = theta_conditional_laplace(st.law, st.t, k, log_mu);
    cdf.push_back({n, st.t, v, cdf_limit, std::abs(v - cdf_limit)});
  }
  out.survival.points = std::move(surv);
  out.conditional = summarize(std::move(cdf), tol);
  return out;
}

}  // namespace

PropositionLimits prop41_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns, double lambda,
                                std::size_t k, double tol) {
  check_schedule(schedule, ScheduleKind::PROP41, ns, k);
  if (!(lambda >= 0.0)) throw DomainError("prop41_limits: lambda must be >= 0");
  const double x = schedule.x_or_y;
  PropositionLimits out;
  out.law = LimitLaw{LimitKind::LAPLACE_PSI, schedule.theta, schedule.q, schedule.gamma, x, kInf};
  out.survival_limit = (1.0 - schedule.q) * out.law(x);
  const double lap_limit = out.law(x + lambda) / out.law(x);
  std::vector<ConvergencePoint> surv;
  std::vector<ConvergencePoint> lap;
  for (std::size_t n : ns) {
    const ScheduleTerm st = schedule.term(n);
    const double sv = theta_survival(st.law, st.t);
    surv.push_back({n, st.t, sv, out.survival_limit, std::abs(sv - out.survival_limit)});
    const double log_m = -std::log(st.law.gamma) / st.law.theta;
    const double log_mu =
        lambda == 0.0 ? -kInf : std::log(lambda) + (static_cast<double>(k) - static_cast<double>(st.t)) * log_m;
    const double v = theta_conditional_laplace(st.law, st.t, k, log_mu);
    lap.push_back({n, st.t, v, lap_limit, std::abs(v - lap_limit)});
  }
  out.survival = summarize(std::move(surv), tol);
  out.conditional = summarize(std::move(lap), tol);
  return out;
}

PropositionLimits prop42_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns, double u,
                                std::size_t k, double tol) {
  check_schedule(schedule, ScheduleKind::PROP42, ns, k);
  const double y = schedule.x_or_y;
  const LimitLaw law{LimitKind::EXP_CDF, 0.0, schedule.q, schedule.gamma, y, kInf};
  const double cdf_limit = law(u);
  PropositionLimits out = cdf_limits(schedule, ns, u, cdf_limit, k, tol);
  out.law = law;
  out.survival_limit = (1.0 - schedule.q) * -std::expm1(-y);
  for (auto& p : out.survival.points) {
    p.limit = out.survival_limit;
    p.error = std::abs(p.value - p.limit);
  }
  out.survival = summarize(std::move(out.survival.points), tol);
  return out;
}

PropositionLimits prop43_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns, double u,
                                std::size_t k, bool use_uhat, double tol) {
  check_schedule(schedule, ScheduleKind::PROP43, ns, k);
  const double y = schedule.x_or_y;
  const LimitLaw law{LimitKind::UHAT_CDF, 0.0, schedule.q, schedule.gamma, y, schedule.a};
  const double cdf_limit = law(u);  // throws outside [0, y(1 - e^{-a}))
  const double w = use_uhat ? uhat(y * std::pow(schedule.gamma, -static_cast<double>(k)), u) : u;
  PropositionLimits out = cdf_limits(schedule, ns, w, cdf_limit, k, tol);
  out.law = law;
  out.survival_limit = (1.0 - schedule.q) * -std::expm1(-law.cdf_range());
  for (auto& p : out.survival.points) {
    p.limit = out.survival_limit;
    p.error = std::abs(p.value - p.limit);
  }
  out.survival = summarize(std::move(out.survival.points), tol);
  return out;
}

double stem_log_cdf(double q, double gamma, std::size_t t, double u) {
  const ThetaLaw stem = ThetaLaw::gamma_power_log_gap(q, gamma, -kInf);
  const double log_mu = -u * std::pow(gamma, -static_cast<double>(t));
  return theta_conditional_laplace(stem, t, 0, log_mu);
}

// ---------------------------------------------------------------- extension

double ExtendedLaw::total() const {
  double s = 0.0;
  for (double p : pmf) s += p;
  return s;
}

double upper_fixed_point(const DefectivePGF& f) {
  auto g = [&f](double s) { return f.evaluate(s) - s; };
  double lo = 1.0;
  double hi = 2.0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw DomainError("upper_fixed_point: law has no fixed point above 1");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double r = 0.5 * (lo + hi);
  const double slope = f.derivative(r) - 1.0;
  if (slope > 0.0) {
    const double next = r - g(r) / slope;
    if (std::abs(g(next)) < std::abs(g(r))) r = next;
  }
  if (!(r > 1.0 + 1e-12)) throw DomainError("upper_fixed_point: law has no fixed point above 1");
  return r;
}

ExtendedLaw extend_transform(const DefectivePGF& f, double r, double tol) {
  if (!(r > 1.0)) throw DomainError("extend_transform: r must exceed 1");
  if (std::abs(f.evaluate(r) - r) > tol * r) throw DomainError("extend_transform: not the upper fixed point");
  ExtendedLaw out;
  out.r = r;
  const auto pmf = f.pmf();
  out.pmf.resize(pmf.size());
  double power = 1.0 / r;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    out.pmf[k] = power * pmf[k];
    power *= r;
  }
  out.m_hat = f.derivative(r);
  out.q_hat = extinction_prob(f).q / r;
  return out;
}

ExtendedTheta extend_transform(const ThetaLaw& law) {
  switch (law.form) {
    case ThetaForm::POSITIVE_THETA:
    case ThetaForm::GAMMA_POWER:
      return ExtendedTheta{law.upper(), law.mean_at_upper(), law.q / law.upper()};
    default:
      throw DomainError("extend_transform: not the upper fixed point (the law has no fixed point at its upper end)");
  }
}

}  // namespace dgw
