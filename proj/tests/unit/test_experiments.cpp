#include <catch_amalgamated.hpp>

#include <string>

#include "dgw/errors.hpp"
#include "dgw/experiments.hpp"

namespace {

bool has_field(const std::vector<dgw::FieldError>& errs, const std::string& field) {
  for (const auto& e : errs) {
    if (e.field.find(field) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("experiment names round trip", "[config]") {
  for (const auto& info : dgw::experiment_catalog()) {
    CHECK(dgw::experiment_from_string(dgw::to_string(info.id)) == info.id);
  }
  CHECK(dgw::experiment_catalog().size() == 11);
  CHECK_THROWS(dgw::experiment_from_string("FIG9"));
}

TEST_CASE("parse a full config", "[config]") {
  const auto c = dgw::parse_config(R"({
    "experiment": "FIG1", "law": {"pmf": [0, 0, 0.7, 0.2]}, "horizon": 7, "n_paths": 1000,
    "seed": 5, "N": 128, "tolerances": {"analytic": 1e-9, "mc_se": 4, "asymptotic": 1e-2},
    "output_path": "x", "sampler": "controlled", "threads": 2})");
  CHECK(c.experiment == dgw::Experiment::FIG1);
  REQUIRE(c.pmf);
  CHECK(c.pmf->size() == 4);
  CHECK(c.n_paths == 1000);
  CHECK(c.seed == 5);
  CHECK(c.N == 128);
  CHECK(c.tolerances.mc_se == 4.0);
  CHECK(c.sampler == dgw::Sampler::CONTROLLED);
  CHECK(c.threads == 2);
  CHECK(dgw::validate(c).empty());
  // echo parses back to the same thing
  const auto back = dgw::parse_config(dgw::config_to_json(c));
  CHECK(dgw::config_to_json(back) == dgw::config_to_json(c));
}

TEST_CASE("parse errors name the field", "[config]") {
  try {
    (void)dgw::parse_config(R"({"experiment": "FIG1", "horizon": "seven", "bogus": 1})");
    FAIL("expected ConfigError");
  } catch (const dgw::ConfigError& e) {
    CHECK(has_field(e.errors(), "horizon"));
    CHECK(has_field(e.errors(), "bogus"));
  }
  CHECK_THROWS_AS(dgw::parse_config("{not json"), dgw::ConfigError);
  CHECK_THROWS_AS(dgw::load_config("/nonexistent/cfg.json"), dgw::ConfigError);
}

TEST_CASE("validation", "[config]") {
  auto base = dgw::parse_config(R"({"experiment": "FIG1", "law": {"pmf": [0, 0, 0.7, 0.2]}})");
  CHECK(dgw::validate(base).empty());

  auto neg = base;
  neg.pmf = std::vector<double>{0.5, -0.1, 0.3};
  CHECK(has_field(dgw::validate(neg), "law"));

  auto over = base;
  over.pmf = std::vector<double>{0.5, 0.3, 0.3};
  CHECK(has_field(dgw::validate(over), "law"));

  auto regime = dgw::parse_config(R"({"experiment": "THM23", "law": {"pmf": [0.25, 0, 0.25]}})");
  CHECK_FALSE(dgw::validate(regime).empty());
  CHECK_THROWS_AS(dgw::run_experiment(regime), dgw::ConfigError);

  auto tol = base;
  tol.tolerances.analytic = 0.0;
  CHECK(has_field(dgw::validate(tol), "tolerances"));

  auto cond = dgw::parse_config(R"({"experiment": "FIG1", "law": {"pmf": [0.1, 0.6, 0.2]}, "sampler": "conditioned"})");
  CHECK_FALSE(dgw::validate(cond).empty());
}

TEST_CASE("analytic experiments pass and are deterministic", "[experiments]") {
  const auto c = dgw::parse_config(R"({"experiment": "PROP1B", "law": {"pmf": [0, 0, 0.7, 0.2]}, "horizon": 7})");
  const auto a = dgw::run_experiment(c);
  const auto b = dgw::run_experiment(c);
  CHECK(a.passed());
  CHECK_FALSE(a.assertions.empty());
  CHECK(a.files == b.files);
  CHECK(a.files.count("prop1b_summary.json") == 1);
}

TEST_CASE("Monte Carlo experiment is reproducible", "[experiments]") {
  const auto c = dgw::parse_config(
      R"({"experiment": "SAMPLER_EQUIV", "law": {"pmf": [0.1, 0.6, 0.2]}, "horizon": 4, "n_paths": 5000, "seed": 3})");
  auto one = c;
  one.threads = 1;
  auto two = c;
  two.threads = 2;
  auto a = dgw::run_experiment(one);
  auto b = dgw::run_experiment(two);
  // the summary echoes the thread count
  a.files.erase("sampler_equiv_summary.json");
  b.files.erase("sampler_equiv_summary.json");
  CHECK_FALSE(a.files.empty());
  CHECK(a.files == b.files);
}

TEST_CASE("too few paths surfaces as a conditioning failure", "[experiments]") {
  const auto c = dgw::parse_config(
      R"({"experiment": "FIG1", "law": {"pmf": [0, 0, 0.7, 0.2]}, "horizon": 7, "n_paths": 1000, "seed": 1})");
  CHECK_THROWS_AS(dgw::run_experiment(c), dgw::ConditioningError);
}
