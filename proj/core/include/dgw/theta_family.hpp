#pragma once

// Explicit defective theta-branching laws with closed-form iterates, their
// limit laws, parameter schedules for the small-defect limits, and the
// extendable transform f^(s) = f(rs) / r.
//
// Closed forms are evaluated in the gap coordinate d = U - s, where U is the
// upper end of the domain (r, A or 1). The scale is stored as ln(U - 1) so that
// U - 1 far below machine epsilon (the small-defect schedules) stays exact.

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dgw/pgf.hpp"

namespace dgw {

enum class ThetaForm { POSITIVE_THETA, GAMMA_POWER, NEGATIVE_THETA, SQRT_EXAMPLE };

[[nodiscard]] std::string to_string(ThetaForm form);
[[nodiscard]] ThetaForm theta_form_from_string(const std::string& name);

struct ThetaLaw {
  ThetaForm form = ThetaForm::POSITIVE_THETA;
  double theta = 1.0;
  double q = 0.0;
  double gamma = 0.5;
  /// ln(U - 1); -inf means U = 1 (the proper stem law for the first two forms).
  double log_gap = 0.0;

  static ThetaLaw positive(double theta, double q, double gamma, double r);
  static ThetaLaw positive_log_gap(double theta, double q, double gamma, double log_gap);
  static ThetaLaw gamma_power(double q, double gamma, double r);
  static ThetaLaw gamma_power_log_gap(double q, double gamma, double log_gap);
  static ThetaLaw negative(double theta, double q, double gamma, double A);
  static ThetaLaw negative_log_gap(double theta, double q, double gamma, double log_gap);
  static ThetaLaw sqrt_example(double p1);

  /// r, A, or p_1 for the square-root example.
  [[nodiscard]] double scale() const;
  /// U = r, A, or 1.
  [[nodiscard]] double upper() const;
  /// ln(U - q).
  [[nodiscard]] double log_dq() const;
  /// m = f'(U^-) = gamma^{-1/theta}; +inf for GAMMA_POWER. Only meaningful for the first two forms.
  [[nodiscard]] double mean_at_upper() const;

  /// Throws DomainError describing the first violated constraint.
  void validate() const;

  [[nodiscard]] std::string to_json() const;
  static ThetaLaw from_json(const std::string& text);
};

/// ln(U - f(t, U - d)) given ln d. Exact semigroup in t.
[[nodiscard]] double theta_log_gap_iterate(const ThetaLaw& law, std::size_t t, double log_d);

/// f(t, s) in closed form; DomainError outside the form's domain.
[[nodiscard]] double theta_iterate(const ThetaLaw& law, std::size_t t, double s);

/// eps = 1 - f(1).
[[nodiscard]] double theta_defect(const ThetaLaw& law);

/// Maclaurin coefficients of f(1, .) for j = 0..N, by a discrete Cauchy integral on |s| = radius < U.
/// Rounding is amplified by radius^{-j}.
[[nodiscard]] std::vector<double> theta_coefficients(const ThetaLaw& law, std::size_t degree, double radius = 0.5,
                                                     std::size_t nodes = 512);

/// P(T > t) = f(t,1) - f(t,0).
[[nodiscard]] double theta_survival(const ThetaLaw& law, std::size_t t);

/// E(exp(-mu Z(t-k)) | T > t) from the closed forms, with mu = exp(log_mu).
[[nodiscard]] double theta_conditional_laplace(const ThetaLaw& law, std::size_t t, std::size_t k, double log_mu);

/// Psi(lambda) = 1 - [1 + (1-q)^theta lambda^{-theta}]^{-1/theta}.
[[nodiscard]] double psi_laplace(double theta, double q, double lam);

/// u^(x) = -x ln(1 - u/x), for 0 <= u < x.
[[nodiscard]] double uhat(double x, double u);

enum class LimitKind { LAPLACE_PSI, EXP_CDF, UHAT_CDF };

struct LimitLaw {
  LimitKind kind = LimitKind::LAPLACE_PSI;
  double theta = 1.0;
  double q = 0.0;
  double gamma = 0.5;
  double x_or_y = 1.0;
  double a = std::numeric_limits<double>::infinity();

  /// Psi(arg), or the limiting CDF at u = arg.
  [[nodiscard]] double operator()(double arg) const;
  /// Upper end of the CDF range: y, or y(1 - e^{-a}).
  [[nodiscard]] double cdf_range() const;
};

enum class ScheduleKind { PROP41, PROP42, PROP43 };

struct ScheduleTerm {
  ThetaLaw law;
  std::size_t t = 0;
};

/// A law sequence n -> (f_n, t_n) with the declared limit parameters.
struct ThetaSchedule {
  ScheduleKind kind = ScheduleKind::PROP41;
  double theta = 1.0;
  double q = 0.0;
  double gamma = 0.5;
  double x_or_y = 1.0;
  double a = std::numeric_limits<double>::infinity();
  std::function<ScheduleTerm(std::size_t)> term;

  /// Deviation of the declared limit condition at n (e.g. |ln((r_n-1) m_n^{t_n}) - ln x|).
  [[nodiscard]] double condition_error(std::size_t n) const;
};

/// t_n = n and r_n - 1 = x m^{-n}, m = gamma^{-1/theta}.
[[nodiscard]] ThetaSchedule prop41_schedule(double theta, double q, double gamma, double x);
/// t_n = n and ln(r_n - 1) = -y gamma^{-n}.
[[nodiscard]] ThetaSchedule prop42_schedule(double q, double gamma, double y);
/// t_n = n, |theta_n| = gamma^n / y and ln(A_n - 1) = -a / |theta_n| (A_n = 1 when a = inf).
[[nodiscard]] ThetaSchedule prop43_schedule(double q, double gamma, double y, double a);

struct ConvergencePoint {
  std::size_t n = 0;
  std::size_t t = 0;
  double value = 0.0;
  double limit = 0.0;
  double error = 0.0;
};

struct ConvergenceCheck {
  std::vector<ConvergencePoint> points;
  double tol = 0.0;
  bool monotone = false;
  bool within_tol = false;
  [[nodiscard]] bool passed() const noexcept { return monotone && within_tol; }
};

struct PropositionLimits {
  double survival_limit = 0.0;
  LimitLaw law;
  ConvergenceCheck survival;
  /// Conditional Laplace transform (4.1) or conditional CDF (4.2, 4.3).
  ConvergenceCheck conditional;
};

/// Maximal deviation of the declared schedule condition at the largest n.
inline constexpr double kScheduleConditionTolerance = 1e-2;

/// Survival and conditional Laplace at lambda for Z(t_n - k), over the increasing list ns.
[[nodiscard]] PropositionLimits prop41_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns,
                                              double lambda, std::size_t k, double tol);
/// Survival and the CDF of gamma^{t_n-k} ln Z(t_n - k) at u in [0, y].
[[nodiscard]] PropositionLimits prop42_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns,
                                              double u, std::size_t k, double tol);
/// As prop42_limits; the fixed-k form (use_uhat) compares at threshold u^(y gamma^{-k}).
[[nodiscard]] PropositionLimits prop43_limits(const ThetaSchedule& schedule, const std::vector<std::size_t>& ns,
                                              double u, std::size_t k, bool use_uhat, double tol);

/// P(gamma^t ln Z(t) <= u | T_0 > t) for the proper stem 1 - (1-q)^{1-gamma}(1-s)^gamma.
[[nodiscard]] double stem_log_cdf(double q, double gamma, std::size_t t, double u);

struct ExtendedLaw {
  double r = 1.0;
  std::vector<double> pmf;  ///< p^_k = r^{k-1} p_k
  double m_hat = 0.0;       ///< f'(r)
  double q_hat = 0.0;       ///< q / r
  [[nodiscard]] double total() const;
};

/// Smallest fixed point r > 1 of f; DomainError when none exists.
[[nodiscard]] double upper_fixed_point(const DefectivePGF& f);
/// f^(s) = f(rs)/r; DomainError("not the upper fixed point") when |f(r) - r| > tol r.
[[nodiscard]] ExtendedLaw extend_transform(const DefectivePGF& f, double r, double tol = 1e-10);

struct ExtendedTheta {
  double r = 1.0;
  double m_hat = 0.0;
  double q_hat = 0.0;
};
/// The theta-law counterpart: m^ = gamma^{-1/theta} (POSITIVE_THETA) or +inf (GAMMA_POWER).
[[nodiscard]] ExtendedTheta extend_transform(const ThetaLaw& law);

}  // namespace dgw
