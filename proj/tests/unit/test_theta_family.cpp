#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "dgw/errors.hpp"
#include "dgw/theta_family.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using dgw::ThetaLaw;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ThetaLaw> sample_laws() {
  return {ThetaLaw::positive(1.0, 0.0, 0.25, 1.5),     ThetaLaw::positive(0.5, 0.2, 0.6, 1.1),
          ThetaLaw::gamma_power(0.1, 0.5, 1.3),        ThetaLaw::gamma_power(0.0, 0.3, 1.0),
          ThetaLaw::negative(-0.5, 0.0, 0.5, 2.0),     ThetaLaw::negative(-0.3, 0.3, 0.7, 1.0),
          ThetaLaw::sqrt_example(0.5),                 ThetaLaw::sqrt_example(0.8)};
}

}  // namespace

TEST_CASE("square root example", "[theta]") {
  const auto law = ThetaLaw::sqrt_example(0.5);
  CHECK_THAT(dgw::theta_iterate(law, 2, 0.75), WithinAbs(0.234375, 1e-15));
  CHECK_THAT(dgw::theta_defect(law), WithinAbs(0.25, 1e-15));
  for (double p1 : {0.3, 0.5, 0.8}) {
    CHECK_THAT(dgw::theta_defect(ThetaLaw::sqrt_example(p1)), WithinAbs(1.0 - p1 * (2.0 - p1), 1e-15));
  }
  CHECK(dgw::theta_iterate(law, 0, 0.3) == 0.3);
  CHECK_THROWS_AS(ThetaLaw::sqrt_example(1.0), dgw::DomainError);
  CHECK_THROWS_AS(dgw::theta_iterate(law, 1, 1.5), dgw::DomainError);
}

TEST_CASE("closed forms compose exactly", "[theta][property]") {
  for (const auto& law : sample_laws()) {
    for (std::size_t a = 0; a <= 6; ++a) {
      for (std::size_t b = 0; b <= 6; ++b) {
        for (double s = 0.0; s <= 1.0; s += 0.125) {
          const double lhs = dgw::theta_iterate(law, a + b, s);
          const double rhs = dgw::theta_iterate(law, b, dgw::theta_iterate(law, a, s));
          REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-12));
        }
      }
    }
  }
}

TEST_CASE("iterates are monotone and fix q", "[theta][property]") {
  for (const auto& law : sample_laws()) {
    CHECK_THAT(dgw::theta_iterate(law, 5, law.q), WithinAbs(law.q, 1e-14));
    double prev = -1.0;
    for (double s = 0.0; s <= 1.0; s += 0.05) {
      const double v = dgw::theta_iterate(law, 3, s);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("one-step laws are defective pgfs", "[theta]") {
  SECTION("theta = 1") {
    const auto law = ThetaLaw::positive(1.0, 0.0, 0.25, 1.5);
    const auto c = dgw::theta_coefficients(law, 40, 1.0, 1024);
    double total = 0.0;
    for (double v : c) {
      CHECK(v >= -1e-12);
      total += v;
    }
    // geometric tail beyond degree 40 with ratio 2/3
    CHECK_THAT(total, WithinAbs(1.0 - dgw::theta_defect(law), 1e-6));
  }
  SECTION("square root") {
    const auto law = ThetaLaw::sqrt_example(0.5);
    const auto c = dgw::theta_coefficients(law, 6, 0.5, 512);
    for (double v : c) CHECK(v >= -1e-12);
    CHECK(std::abs(c[0]) < 1e-14);
    CHECK_THAT(c[1], WithinAbs(0.5, 1e-12));
    // f(1) is approached slowly; compare the closed form at s = 0.5 instead
    double at_half = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) at_half += c[j] * std::pow(0.5, double(j));
    CHECK_THAT(at_half, WithinAbs(dgw::theta_iterate(law, 1, 0.5), 1e-3));
  }
  CHECK_THROWS_AS(dgw::theta_coefficients(ThetaLaw::sqrt_example(0.5), 4, 1.5), dgw::DomainError);
}

TEST_CASE("defect of small-gap positive laws", "[theta]") {
  const double theta = 0.5;
  const double gamma = 0.25;
  const double m = std::pow(gamma, -1.0 / theta);
  for (int e : {4, 8, 12, 16, 30}) {
    const double log_gap = -e * std::numbers::ln10;
    const auto law = ThetaLaw::positive_log_gap(theta, 0.0, gamma, log_gap);
    const double ratio = dgw::theta_defect(law) / ((m - 1.0) * std::exp(log_gap));
    // relative error of order (r - 1)^theta
    CHECK_THAT(ratio, WithinAbs(1.0, 10.0 * std::exp(theta * log_gap) + 1e-12));
  }
}

TEST_CASE("Psi", "[theta]") {
  CHECK_THAT(dgw::psi_laplace(1.0, 0.0, 1.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(dgw::psi_laplace(1.0, 0.0, 1e-12), WithinAbs(1.0, 1e-11));
  for (double lam : {0.1, 1.0, 3.0}) CHECK_THAT(dgw::psi_laplace(1.0, 0.0, lam), WithinAbs(1.0 / (1.0 + lam), 1e-15));
  CHECK_THAT(dgw::psi_laplace(1.0, 0.0, 2.0) / dgw::psi_laplace(1.0, 0.0, 1.0), WithinAbs(2.0 / 3.0, 1e-15));
  double prev = 1.0;
  for (double lam = 0.1; lam < 20.0; lam *= 1.5) {
    const double v = dgw::psi_laplace(0.4, 0.3, lam);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
  CHECK_THROWS_AS(dgw::psi_laplace(1.0, 0.0, -1.0), dgw::DomainError);
}

TEST_CASE("u hat", "[theta]") {
  CHECK(dgw::uhat(2.0, 0.0) == 0.0);
  CHECK_THAT(dgw::uhat(1e8, 0.3), WithinAbs(0.3, 1e-8));
  CHECK(dgw::uhat(1.0, 0.5) > 0.5);
  CHECK_THROWS_AS(dgw::uhat(1.0, 1.0), dgw::DomainError);
}

TEST_CASE("limit laws", "[theta]") {
  const dgw::LimitLaw exp_law{dgw::LimitKind::EXP_CDF, 0.0, 0.0, 0.5, 1.0, kInf};
  CHECK_THAT(exp_law(1.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(exp_law(0.5), WithinAbs(std::expm1(-0.5) / std::expm1(-1.0), 1e-15));
  CHECK_THROWS_AS(exp_law(1.5), dgw::DomainError);
  const dgw::LimitLaw capped{dgw::LimitKind::UHAT_CDF, 0.0, 0.0, 0.5, 1.0, std::numbers::ln2};
  CHECK_THAT(capped.cdf_range(), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(capped(0.5), dgw::DomainError);
}

TEST_CASE("first schedule", "[theta][schedule]") {
  const auto sched = dgw::prop41_schedule(1.0, 0.0, 0.25, 1.0);
  CHECK(sched.condition_error(20) < 1e-12);
  const auto res = dgw::prop41_limits(sched, {10, 15, 20}, 1.0, 0, 1e-3);
  CHECK_THAT(res.survival_limit, WithinAbs(0.5, 1e-15));
  CHECK(res.survival.passed());
  CHECK(res.conditional.passed());
  CHECK(std::abs(res.survival.points.back().value - 0.5) < 1e-3);

  const auto lam0 = dgw::prop41_limits(sched, {10, 15, 20}, 0.0, 0, 1e-3);
  for (const auto& p : lam0.conditional.points) CHECK_THAT(p.value, WithinAbs(1.0, 1e-12));

  const auto k2 = dgw::prop41_limits(sched, {10, 15, 20}, 1.0, 2, 1e-3);
  CHECK_THAT(k2.conditional.points.back().limit, WithinAbs(res.conditional.points.back().limit, 1e-15));
  CHECK(k2.conditional.passed());
  CHECK_THROWS_AS(dgw::prop41_limits(sched, {15, 10}, 1.0, 0, 1e-3), std::invalid_argument);
}

TEST_CASE("second schedule", "[theta][schedule]") {
  const auto sched = dgw::prop42_schedule(0.0, 0.5, 1.0);
  const auto res = dgw::prop42_limits(sched, {10, 15, 20, 25}, 0.5, 0, 1e-2);
  CHECK_THAT(res.survival_limit, WithinAbs(0.6321206, 1e-7));
  CHECK(res.survival.passed());
  CHECK(res.conditional.passed());
  CHECK_THAT(res.conditional.points.back().limit, WithinAbs(std::expm1(-0.5) / std::expm1(-1.0), 1e-15));
}

TEST_CASE("third schedule", "[theta][schedule]") {
  const auto capped = dgw::prop43_schedule(0.0, 0.5, 1.0, std::numbers::ln2);
  const auto res = dgw::prop43_limits(capped, {10, 15, 20}, 0.25, 0, true, 1e-2);
  CHECK_THAT(res.survival_limit, WithinAbs(0.3934693, 1e-7));
  CHECK(res.survival.passed());
  CHECK(res.conditional.passed());
  CHECK_THROWS_AS(dgw::prop43_limits(capped, {10, 15, 20}, 0.5, 0, true, 1e-2), dgw::DomainError);

  const auto open = dgw::prop43_schedule(0.0, 0.5, 1.0, kInf);
  const auto r2 = dgw::prop43_limits(open, {10, 15, 20}, 0.25, 0, true, 1e-2);
  CHECK_THAT(r2.survival_limit, WithinAbs(-std::expm1(-1.0), 1e-15));
}

TEST_CASE("stem log cdf", "[theta]") {
  // gamma^t ln Z(t) given survival of the proper stem is exponential on [0, inf) in the limit
  const double v = dgw::stem_log_cdf(0.0, 0.5, 40, 1.0);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(dgw::stem_log_cdf(0.0, 0.5, 40, 2.0) > v);
}

TEST_CASE("extendable transform", "[theta]") {
  const dgw::DefectivePGF f({0.25, 0, 0.25});
  const double r = dgw::upper_fixed_point(f);
  CHECK_THAT(r, WithinRel(2.0 + std::sqrt(3.0), 1e-14));
  const auto ext = dgw::extend_transform(f, r);
  CHECK_THAT(ext.total(), WithinAbs(1.0, 1e-12));
  CHECK(ext.m_hat > 1.0);
  CHECK_THAT(ext.q_hat, WithinAbs((2.0 - std::sqrt(3.0)) / r, 1e-14));
  CHECK_THROWS_AS(dgw::extend_transform(f, 3.0), dgw::DomainError);

  const auto law = ThetaLaw::positive(0.5, 0.2, 0.25, 1.4);
  const auto et = dgw::extend_transform(law);
  CHECK_THAT(et.r, WithinAbs(1.4, 1e-15));
  CHECK_THAT(et.m_hat, WithinAbs(16.0, 1e-12));
  CHECK_THROWS_AS(dgw::extend_transform(ThetaLaw::sqrt_example(0.5)), dgw::DomainError);
}

TEST_CASE("theta law json", "[theta]") {
  for (const auto& law : sample_laws()) {
    const auto back = ThetaLaw::from_json(law.to_json());
    CHECK(back.form == law.form);
    CHECK(back.theta == law.theta);
    CHECK(back.q == law.q);
    CHECK(back.gamma == law.gamma);
    CHECK_THAT(back.scale(), WithinRel(law.scale(), 1e-15));
  }
  CHECK_THROWS(ThetaLaw::from_json("{\"form\":\"nope\"}"));
}
