#include <catch_amalgamated.hpp>

#include <cmath>

#include "dgw/errors.hpp"
#include "dgw/limit_theory.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using dgw::DefectivePGF;

namespace {

const DefectivePGF kFig({0, 0, 0.7, 0.2});
const DefectivePGF kEven({0.25, 0, 0.25});
const DefectivePGF kThree({0.1, 0.6, 0.2});

}  // namespace

TEST_CASE("h factor", "[limit][H]") {
  const auto p = dgw::extinction_prob(kEven);
  CHECK_THAT(dgw::h_factor(kEven, p, p.q), WithinAbs(1.0, 1e-15));
  CHECK_THAT(dgw::h_factor(kEven, p, 1.0), WithinAbs(2.3660254, 1e-7));
  CHECK_THAT(dgw::h_factor(kEven, p, 0.0), WithinAbs((0.25 - p.q) / (-p.q * p.gamma), 1e-13));
  const auto pf = dgw::extinction_prob(kFig);
  CHECK_THROWS_AS(dgw::h_factor(kFig, pf, 0.5), dgw::RegimeError);
  CHECK_THROWS_AS(dgw::HFunction(kFig, pf), dgw::RegimeError);
}

TEST_CASE("H product", "[limit][H]") {
  const dgw::HFunction H(kEven);
  const double q = H.params().q;
  CHECK_THAT(H(q), WithinAbs(1.0, 1e-15));
  CHECK_THAT(H(1.0), WithinRel(3.7237, 1e-4));
  CHECK_THAT(dgw::eval_H(H, 0.0), WithinRel(0.4808, 1e-3));
  CHECK(H.terms_used() < 100);
  for (double s = 0.0; s <= 1.0; s += 0.05) {
    if (s < q) CHECK(H(s) < 1.0);
    if (s > q) CHECK(H(s) > 1.0);
  }
  // partial products approach H from the side given by the sign of s - q
  for (std::size_t t = 1; t < 10; ++t) {
    CHECK(H.partial(0.0, t + 1) < H.partial(0.0, t));
    CHECK(H.partial(1.0, t + 1) > H.partial(1.0, t));
  }
}

TEST_CASE("H functional equation", "[limit][H][property]") {
  for (const auto& f : {kEven, kThree, DefectivePGF({0.05, 0.15, 0.3, 0.2, 0.1})}) {
    const dgw::HFunction H(f);
    const auto& p = H.params();
    for (int i = 0; i <= 20; ++i) {
      const double s = i / 20.0;
      const double fs = f(s);
      REQUIRE_THAT((fs - p.q) * H(fs), WithinAbs(p.gamma * (s - p.q) * H(s), 1e-10));
    }
  }
}

TEST_CASE("R product", "[limit][R]") {
  const dgw::RFunction R(kFig);
  CHECK(R(0.0) == 1.0);
  CHECK_THAT(R(1.0), WithinAbs(1.239338151956312, 1e-12));
  CHECK_THAT(R.b(1.0), WithinAbs(1.0 + 2.0 / 7.0, 1e-15));
  CHECK_THAT(R.b(0.5), WithinAbs(1.0 + 1.0 / 7.0, 1e-15));
  CHECK(R(1.0) < 1.0 / 0.7);
  CHECK_THAT(R.rho(), WithinAbs(0.867536706369, 1e-11));
  CHECK(R.rho() > 0.0);
  CHECK(R.rho() < 1.0);
  // truncation stability
  CHECK_THAT(R.partial(1.0, 40), WithinAbs(R.partial(1.0, 60), 1e-12));
  double prev = 0.0;
  for (double s = 0.0; s <= 1.0; s += 0.1) {
    CHECK(R(s) >= prev);
    prev = R(s);
  }
  CHECK_THROWS_AS(dgw::RFunction(kEven), dgw::RegimeError);
}

TEST_CASE("R functional equation", "[limit][R][property]") {
  for (const auto& f : {kFig, DefectivePGF({0, 0, 0.5, 0.1, 0.3}), DefectivePGF({0, 0, 0, 0.8, 0.1})}) {
    const dgw::RFunction R(f);
    const auto& p = R.params();
    for (int i = 0; i <= 20; ++i) {
      const double s = i / 20.0;
      const double lhs = f(s) * R(f(s));
      const double rhs = p.p_l * std::pow(s * R(s), double(p.l));
      REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-10));
    }
  }
}

TEST_CASE("iterates against pi_t (sR(s))^{l^t}", "[limit][R]") {
  const dgw::RFunction R(kFig);
  const auto& p = R.params();
  for (double s : {0.2, 0.6, 1.0}) {
    const double lhs = dgw::log_iterate(kFig, 7, std::log(s));
    const double rhs = dgw::log_pi(p, 7) + 128.0 * std::log(s * R(s));
    CHECK(std::abs(lhs - rhs) < 1e-6);
  }
}

TEST_CASE("tail asymptotics", "[limit]") {
  const auto pe = dgw::extinction_prob(kEven);
  CHECK_THAT(dgw::tail_asymptotics(kEven, pe, 30).ratio(), WithinAbs(1.0, 1e-6));
  const auto pf = dgw::extinction_prob(kFig);
  CHECK_THAT(dgw::tail_asymptotics(kFig, pf, 7).ratio(), WithinAbs(1.0, 1e-3));
  CHECK_THROWS_AS(dgw::tail_asymptotics(kFig, pf, 0), std::invalid_argument);
}

TEST_CASE("limit law q_j", "[limit][qj]") {
  const auto p = dgw::extinction_prob(kEven);
  const auto qj = dgw::limit_distribution_qj(kEven, p, 64);
  CHECK(qj.probs[0] == 0.0);
  CHECK(std::abs(qj.tail_mass) < 1e-8);
  double total = 0.0;
  for (double v : qj.probs) {
    CHECK(v >= -1e-16);
    total += v;
  }
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));
  // odd sizes never occur for this law
  CHECK(std::abs(qj.probs[1]) < 1e-15);

  // independent oracle: P(Z(t) = j | T > t) from the series at t = 25
  const auto law = dgw::iterate_series(kEven, 25, 64);
  const double alive = dgw::survival_prob(kEven, p, 25).alive;
  CHECK_THAT(law[2] / alive, WithinAbs(qj.probs[2], 1e-6));
  CHECK_THAT(law[4] / alive, WithinAbs(qj.probs[4], 1e-6));
  CHECK_THAT(qj.mean(), WithinAbs(dgw::conditional_mean_var(kEven, 30, 30).mean, 1e-8));

  // q = 0: q_j proportional to the coefficients of s H(s)
  const DefectivePGF f({0, 0.3, 0.5});
  const dgw::HFunction H(f);
  const auto qz = dgw::limit_distribution_qj(H, 200);
  const auto sH = H.series(200);
  for (std::size_t j = 1; j <= 10; ++j) CHECK_THAT(qz.probs[j], WithinRel(sH[j - 1] / H(1.0), 1e-10));

  CHECK_THROWS_AS(dgw::limit_distribution_qj(kEven, p, 4), dgw::ConvergenceError);
}

TEST_CASE("q_{k,j}", "[limit][qj]") {
  const auto p = dgw::extinction_prob(kEven);
  const auto qj = dgw::limit_distribution_qj(kEven, p, 64);
  const auto q0 = dgw::qkj_distribution(kEven, p, qj, 0);
  for (std::size_t j = 0; j < qj.probs.size(); ++j) CHECK_THAT(q0.probs[j], WithinAbs(qj.probs[j], 1e-16));
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto d = dgw::qkj_distribution(kEven, p, k, 64);
    double total = 0.0;
    for (double v : d.probs) {
      CHECK(v >= -1e-16);
      total += v;
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-8));
  }
  // limit of P(Z(t-1) = j | T > t)
  const auto q1 = dgw::qkj_distribution(kEven, p, qj, 1);
  const std::size_t t = 25;
  const auto zt1 = dgw::iterate_series(kEven, t - 1, 64);
  const double alive = dgw::survival_prob(kEven, p, t).alive;
  const double a = dgw::iterate_point(kEven, 1, 1.0);
  const double b = dgw::iterate_point(kEven, 1, 0.0);
  for (std::size_t j = 1; j <= 6; ++j) {
    const double exact = zt1[j] * (std::pow(a, double(j)) - std::pow(b, double(j))) / alive;
    CHECK_THAT(q1.probs[j], WithinAbs(exact, 1e-8));
  }
}

TEST_CASE("kernel Q^(k)", "[limit][Q]") {
  for (const auto& f : {kEven, kThree, kFig}) {
    const auto p = dgw::extinction_prob(f);
    for (std::size_t k = 1; k <= 5; ++k) {
      for (std::size_t i = 1; i <= 5; ++i) {
        double total = 0.0;
        for (double v : dgw::kernel_Q(f, p, k, i)) total += v;
        REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
      }
    }
  }
  // p_0 = 0, k = 1: Q_ij = P_ij / f(1)^i
  const auto pf = dgw::extinction_prob(kFig);
  for (std::size_t i = 1; i <= 3; ++i) {
    const auto row = dgw::kernel_Q(kFig, pf, 1, i);
    const auto P = dgw::transition_row(kFig, i);
    for (std::size_t j = 1; j < row.size(); ++j) CHECK_THAT(row[j], WithinAbs(P.probs[j] / std::pow(0.9, double(i)), 1e-14));
  }
  // pgf identity
  const auto pe = dgw::extinction_prob(kThree);
  const std::size_t k = 3;
  const double a1 = dgw::iterate_point(kThree, k - 1, 1.0);
  const double a0 = dgw::iterate_point(kThree, k - 1, 0.0);
  const double d = std::pow(dgw::iterate_point(kThree, k, 1.0), 2) - std::pow(dgw::iterate_point(kThree, k, 0.0), 2);
  const auto row = dgw::kernel_Q(kThree, pe, k, 2);
  for (double s : {0.2, 0.7}) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) lhs += row[j] * std::pow(s, double(j));
    const double rhs = (std::pow(kThree(s * a1), 2) - std::pow(kThree(s * a0), 2)) / d;
    CHECK_THAT(lhs, WithinAbs(rhs, 1e-14));
  }
}

TEST_CASE("Q-process kernel", "[limit][Q]") {
  const auto p = dgw::extinction_prob(kEven);
  for (std::size_t i = 1; i <= 6; ++i) {
    const auto row = dgw::qprocess_row(kEven, p, i);
    double total = 0.0;
    for (double v : row) total += v;
    CHECK_THAT(total, WithinAbs(1.0, 1e-13));
    const auto qk = dgw::kernel_Q(kEven, p, 25, i);
    for (std::size_t j = 0; j <= 6 && j < qk.size(); ++j) {
      CHECK_THAT(qk[j], WithinAbs(dgw::qprocess_kernel(kEven, p, i, j), 1e-8));
    }
  }
  for (std::size_t j = 0; j <= 2; ++j) {
    const double want = kEven.p(j) * j * std::pow(p.q, double(j) - 1.0) / p.gamma;
    CHECK_THAT(dgw::qprocess_kernel(kEven, p, 1, j), WithinAbs(want, 1e-14));
  }
  const auto pf = dgw::extinction_prob(kFig);
  CHECK_THROWS_AS(dgw::qprocess_kernel(kFig, pf, 1, 2), dgw::RegimeError);
}

TEST_CASE("drift profile c(k)", "[limit][c]") {
  const dgw::RFunction R(kFig);
  const double want[] = {1.4315, 1.2884, 1.1688, 1.0777, 1.0220, 1.00217, 1.0000229};
  for (std::size_t k = 0; k < 7; ++k) CHECK_THAT(dgw::drift_profile_c(R, k), WithinAbs(want[k], 1e-4));
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(dgw::drift_log_excess(R, k + 1) < dgw::drift_log_excess(R, k));
    CHECK(std::isfinite(dgw::drift_log_excess(R, k)));
  }
  // c(k) rounds to 1 in double precision from k = 8 on
  for (std::size_t k = 0; k < 8; ++k) CHECK(dgw::drift_profile_c(R, k) > 1.0);
  CHECK(dgw::drift_profile_c(R, 12) - 1.0 < 1e-6);

  // E(Y(k)|T>t) lies below c(t-k) by at most the truncation bound
  const auto& p = R.params();
  const std::size_t t = 7;
  for (std::size_t k = 0; k <= t; ++k) {
    const double mean = dgw::conditional_mean_var(kFig, k, t).mean / std::pow(2.0, double(k));
    const double gap = dgw::drift_profile_c(R, t - k) - mean;
    CHECK(gap >= -1e-13);
    CHECK(gap <= dgw::ld1_error_bound(kFig, p, k));
  }
}

TEST_CASE("truncation bound for Rbar", "[limit][c]") {
  const dgw::RFunction R(kFig);
  const auto& p = R.params();
  double prev = INFINITY;
  for (std::size_t t = 0; t <= 10; ++t) {
    const double d = dgw::ld1_delta(kFig, p, t);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-10);
  for (std::size_t t = 1; t <= 6; ++t) {
    const double bound = dgw::ld1_error_bound(kFig, p, t);
    for (double s = 0.0; s <= 1.0; s += 0.1) {
      const double diff = R.log_derivative(s) - R.log_derivative_partial(s, t);
      CHECK(diff >= -1e-15);
      CHECK(diff <= bound);
    }
  }
}
