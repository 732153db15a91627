#include <catch_amalgamated.hpp>

#include <cmath>

#include "dgw/errors.hpp"
#include "dgw/limit_theory.hpp"
#include "dgw/simulator.hpp"
#include "dgw/stats.hpp"

using Catch::Matchers::WithinAbs;
using dgw::DefectivePGF;
using dgw::Sampler;

namespace {

const DefectivePGF kFig({0, 0, 0.7, 0.2});
const DefectivePGF kThree({0.1, 0.6, 0.2});

dgw::SimulationOptions opts(Sampler s, std::size_t threads = 1, bool marginals = false) {
  dgw::SimulationOptions o;
  o.sampler = s;
  o.threads = threads;
  o.record_marginals = marginals;
  return o;
}

}  // namespace

TEST_CASE("sampler names", "[sim]") {
  for (auto s : {Sampler::DIRECT, Sampler::CONTROLLED, Sampler::CONDITIONED}) {
    CHECK(dgw::sampler_from_string(dgw::to_string(s)) == s);
  }
  CHECK(dgw::sampler_from_string("Rejection") == Sampler::DIRECT);
  CHECK_THROWS(dgw::sampler_from_string("bogus"));
}

TEST_CASE("alias table", "[sim]") {
  const dgw::AliasTable table({0.5, 0.0, 1.5});
  std::mt19937_64 rng(9);
  std::uint64_t hits[3] = {0, 0, 0};
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++hits[table.sample(dgw::uniform01(rng))];
  CHECK(hits[1] == 0);
  const double p = double(hits[0]) / n;
  CHECK(dgw::z_score(p, 0.25, dgw::binomial_se(0.25, n)) < 4.0);
}

TEST_CASE("single trajectories", "[sim]") {
  const auto path = dgw::sample_trajectory(kFig, 7, 4);
  CHECK(path.states.front() == 1);
  if (path.absorption == dgw::Absorption::ALIVE) {
    CHECK(path.states.size() == 8);
    CHECK(path.states.back() >= 128);
  } else {
    CHECK(path.absorption == dgw::Absorption::KILLED);
    CHECK(path.states.back() == dgw::kDelta);
    CHECK(*path.absorption_time == path.states.size() - 1);
  }
  const auto again = dgw::sample_trajectory(kFig, 7, 4);
  CHECK(again.states == path.states);
}

TEST_CASE("tiny defect law kills every path", "[sim]") {
  const DefectivePGF f({0.0, 1e-9});
  const auto stats = dgw::simulate_paths(f, 1, 1000, 3, opts(Sampler::DIRECT));
  CHECK(stats.n_survived == 0);
  CHECK(stats.killed_at[1] == 1000);
  CHECK_THROWS_AS(dgw::mean_estimate(stats, 0, 1.0), dgw::ConditioningError);
  CHECK_THROWS_AS(dgw::estimate_conditional(f, 1, 0, dgw::Statistic::MEAN_Y, 1000, 3, opts(Sampler::DIRECT)),
                  dgw::ConditioningError);
}

TEST_CASE("every path is absorbed or survives", "[sim]") {
  const auto stats = dgw::simulate_paths(kThree, 6, 20000, 5, opts(Sampler::DIRECT));
  std::uint64_t absorbed = 0;
  for (auto c : stats.extinct_at) absorbed += c;
  for (auto c : stats.killed_at) absorbed += c;
  CHECK(absorbed + stats.n_survived == stats.n_total);
  CHECK(stats.extinct_at[0] == 0);
  CHECK(stats.killed_at[0] == 0);
}

TEST_CASE("determinism and thread invariance", "[sim]") {
  const auto a = dgw::simulate_paths(kThree, 8, 30000, 42, opts(Sampler::DIRECT, 1, true));
  const auto b = dgw::simulate_paths(kThree, 8, 30000, 42, opts(Sampler::DIRECT, 1, true));
  const auto c = dgw::simulate_paths(kThree, 8, 30000, 42, opts(Sampler::DIRECT, 3, true));
  CHECK(a == b);
  CHECK(a == c);
  const auto d = dgw::simulate_paths(kThree, 8, 30000, 43, opts(Sampler::DIRECT, 1, true));
  CHECK_FALSE(a == d);
}

TEST_CASE("block merge equals whole run", "[sim]") {
  const auto o = opts(Sampler::CONTROLLED);
  auto left = dgw::simulate_block(kFig, 5, 0, 700, 8, o);
  const auto right = dgw::simulate_block(kFig, 5, 700, 2000, 8, o);
  left.merge(right);
  CHECK(left == dgw::simulate_paths(kFig, 5, 2000, 8, o));
}

TEST_CASE("survival frequency matches P(T > t)", "[sim]") {
  const std::uint64_t n = 200000;
  for (auto s : {Sampler::DIRECT, Sampler::CONTROLLED}) {
    const auto stats = dgw::simulate_paths(kThree, 5, n, 17, opts(s));
    const double p = dgw::survival_prob(kThree, 5).alive;
    const double est = double(stats.n_survived) / double(n);
    CHECK(dgw::z_score(est, p, dgw::binomial_se(p, n)) < 4.0);
  }
}

TEST_CASE("controlled sampler kills a generation of size k with 1-(1-eps)^k", "[sim]") {
  // Z(1) is 1, 2, or 3 given survival of the first step; the second step kills with the stated chance
  const std::uint64_t n = 200000;
  const auto stats = dgw::simulate_paths(kFig, 2, n, 23, opts(Sampler::CONTROLLED, 1, true));
  const auto& m1 = stats.marginal[1];
  const auto& m2 = stats.marginal[2];
  const double z2 = double(m1.at(2));
  const double z3 = double(m1.at(3));
  const double eps = kFig.defect();
  const double expect_killed = z2 * (1.0 - std::pow(1.0 - eps, 2)) + z3 * (1.0 - std::pow(1.0 - eps, 3));
  const double killed = double(m2.at(dgw::kDelta)) - double(m1.at(dgw::kDelta));
  const double var = z2 * (1.0 - std::pow(0.9, 2)) * std::pow(0.9, 2) + z3 * (1.0 - std::pow(0.9, 3)) * std::pow(0.9, 3);
  CHECK(std::abs(killed - expect_killed) < 4.0 * std::sqrt(var));
}

TEST_CASE("direct and controlled agree in law", "[sim]") {
  const auto a = dgw::simulate_paths(kThree, 4, 50000, 1, opts(Sampler::DIRECT, 1, true));
  const auto b = dgw::simulate_paths(kThree, 4, 50000, 2, opts(Sampler::CONTROLLED, 1, true));
  CHECK(dgw::two_sample_chi_square(a.marginal[3], b.marginal[3]).p_value > 1e-3);
}

TEST_CASE("conditional mean estimate", "[sim]") {
  const std::size_t t = 6;
  const auto res = dgw::estimate_conditional(kThree, t, 3, dgw::Statistic::MEAN_Y, 400000, 31, opts(Sampler::DIRECT));
  const auto exact = dgw::conditional_mean_var(kThree, 3, t);
  REQUIRE(res.estimates.size() == 1);
  const auto& e = res.estimates[0];
  CHECK(e.n_survived > 1000);
  CHECK(dgw::z_score(e.value, exact.mean, e.std_error) < 4.0);

  const auto var = dgw::estimate_conditional(kThree, t, 3, dgw::Statistic::VAR_Y, 400000, 31, opts(Sampler::DIRECT));
  CHECK(dgw::z_score(var.estimates[0].value, exact.var, var.estimates[0].std_error) < 4.0);

  const auto k0 = dgw::estimate_conditional(kThree, t, 0, dgw::Statistic::MEAN_Y, 100000, 31, opts(Sampler::DIRECT));
  CHECK(k0.estimates[0].value == 1.0);
  CHECK(k0.estimates[0].std_error == 0.0);
}

TEST_CASE("standard error shrinks like n^{-1/2}", "[sim]") {
  const auto small = dgw::estimate_conditional(kThree, 4, 4, dgw::Statistic::MEAN_Y, 20000, 5, opts(Sampler::DIRECT));
  const auto large = dgw::estimate_conditional(kThree, 4, 4, dgw::Statistic::MEAN_Y, 320000, 5, opts(Sampler::DIRECT));
  const double ratio = small.estimates[0].std_error / large.estimates[0].std_error;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.3);
}

TEST_CASE("conditioned sampler reproduces the conditional law", "[sim]") {
  const std::size_t t = 7;
  const auto o = opts(Sampler::CONDITIONED);
  const auto stats = dgw::simulate_paths(kFig, t, 20000, 99, o);
  CHECK(stats.n_survived == stats.n_total);
  const dgw::RFunction R(kFig);
  for (std::size_t k : {1u, 3u, 5u}) {
    const auto est = dgw::mean_estimate(stats, k, dgw::y_scale(kFig, k));
    const double exact = dgw::conditional_mean_var(kFig, k, t).mean / std::pow(2.0, double(k));
    CHECK(dgw::z_score(est.value, exact, est.std_error) < 4.0);
  }
  // Z(1) given T > 7
  const auto law = dgw::iterate_series(kFig, 1, 3);
  dgw::Counts obs = stats.survivor_hist[1];
  std::vector<double> probs(4, 0.0);
  const double a = dgw::iterate_point(kFig, t - 1, 1.0);
  double norm = 0.0;
  for (std::size_t j = 2; j <= 3; ++j) {
    probs[j] = law[j] * std::pow(a, double(j));
    norm += probs[j];
  }
  for (auto& p : probs) p /= norm;
  CHECK(dgw::chi_square_gof(obs, probs).p_value > 1e-3);

  CHECK_THROWS_AS(dgw::simulate_paths(kThree, 3, 10, 1, o), dgw::RegimeError);
}

TEST_CASE("population cap", "[sim]") {
  const DefectivePGF big({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.99});
  auto o = opts(Sampler::DIRECT);
  o.population_cap = 1000;
  CHECK_THROWS_AS(dgw::simulate_paths(big, 5, 10, 1, o), dgw::PopulationOverflow);
}
