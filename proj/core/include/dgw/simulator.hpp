#pragma once

// Monte Carlo for the defective chain on {0, 1, ...} u {Delta}.
//
// Three samplers share one interface: the direct per-particle scheme (each
// particle triggers Delta with probability eps), the phi-controlled scheme
// (Delta with probability 1 - (1-eps)^k for the whole generation, offspring
// from f / f(1)), and an exact sampler of the law conditioned on T > horizon
// (p_0 = 0 only; offspring tilted by a^j with a = f(horizon - g - 1, 1)).
//
// Every path draws from its own generator seeded by (seed, path index), so the
// statistics do not depend on how paths are split across threads.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dgw/pgf.hpp"

namespace dgw {

/// Marker for the graveyard state in state sequences.
inline constexpr std::uint64_t kDelta = std::numeric_limits<std::uint64_t>::max();
inline constexpr std::uint64_t kDefaultPopulationCap = 1'000'000'000ULL;

enum class Absorption { EXTINCT, KILLED, ALIVE };

struct Trajectory {
  std::vector<std::uint64_t> states;  ///< states[0] = 1; kDelta marks the graveyard
  Absorption absorption = Absorption::ALIVE;
  std::optional<std::size_t> absorption_time;
};

enum class Sampler { DIRECT, CONTROLLED, CONDITIONED };

[[nodiscard]] const char* to_string(Sampler s);
[[nodiscard]] Sampler sampler_from_string(const std::string& name);

/// Walker/Vose alias table over weights (need not be normalized).
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);

  [[nodiscard]] std::size_t size() const noexcept { return prob_.size(); }
  /// Sample from one uniform in [0, 1).
  [[nodiscard]] std::size_t sample(double u) const noexcept;

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

/// Per-path generator: mt19937_64 seeded from splitmix64(seed, index).
[[nodiscard]] std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index);
[[nodiscard]] inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// One-generation transition kernels for a fixed law and horizon.
class BranchingSampler {
 public:
  BranchingSampler(const DefectivePGF& f, Sampler kind, std::size_t horizon,
                   std::uint64_t population_cap = kDefaultPopulationCap);

  [[nodiscard]] Sampler kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }

  /// Z(g+1) given Z(g) = z (z >= 1). Throws PopulationOverflow above the cap.
  [[nodiscard]] std::uint64_t step(std::uint64_t z, std::size_t generation, std::mt19937_64& rng) const;

  /// Path from Z(0) = 1 up to the horizon or absorption.
  [[nodiscard]] Trajectory run(std::mt19937_64& rng) const;

 private:
  Sampler kind_;
  std::size_t horizon_;
  std::uint64_t cap_;
  double log_survive_ = 0.0;  // ln(1 - eps)
  AliasTable with_delta_;     // outcomes 0..D, then Delta
  AliasTable proper_;         // outcomes 0..D from f / f(1)
  std::vector<AliasTable> tilted_;  // per generation, conditioned sampler
};

[[nodiscard]] Trajectory sample_trajectory(const DefectivePGF& f, std::size_t horizon, std::uint64_t seed);
[[nodiscard]] Trajectory sample_trajectory_controlled(const DefectivePGF& f, std::size_t horizon, std::uint64_t seed);

using Counts = std::map<std::uint64_t, std::uint64_t>;

struct SimulationOptions {
  Sampler sampler = Sampler::DIRECT;
  /// 0: DGW_THREADS or hardware concurrency.
  std::size_t threads = 0;
  std::uint64_t population_cap = kDefaultPopulationCap;
  /// Keep the law of Z(k) over all paths (0 and Delta included), not only survivors.
  bool record_marginals = false;
};

[[nodiscard]] std::size_t resolve_threads(std::size_t requested);

__extension__ typedef unsigned __int128 uint128;

/// Mergeable sufficient statistics of a batch of paths.
struct PathStatistics {
  std::size_t horizon = 0;
  std::uint64_t n_total = 0;
  std::uint64_t n_survived = 0;  ///< paths with T > horizon
  std::vector<std::uint64_t> sum;    ///< per k, sum of Z(k) over survivors
  std::vector<uint128> sum_sq;       ///< per k, sum of Z(k)^2 over survivors
  std::vector<Counts> survivor_hist; ///< per k, law of Z(k) over survivors
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> joint_last;  ///< (Z(t-1), Z(t)) over survivors
  std::vector<Counts> marginal;      ///< per k, over all paths (when recorded)
  std::vector<std::uint64_t> extinct_at;  ///< T_0 = k
  std::vector<std::uint64_t> killed_at;   ///< T_Delta = k

  explicit PathStatistics(std::size_t horizon = 0, bool marginals = false);
  void add(const Trajectory& path);
  void merge(const PathStatistics& other);
  bool operator==(const PathStatistics& other) const = default;
};

[[nodiscard]] PathStatistics simulate_paths(const DefectivePGF& f, std::size_t horizon, std::uint64_t n_paths,
                                            std::uint64_t seed, const SimulationOptions& options = {});
/// Paths with indices [first, last); simulate_paths merges such blocks.
[[nodiscard]] PathStatistics simulate_block(const DefectivePGF& f, std::size_t horizon, std::uint64_t first,
                                            std::uint64_t last, std::uint64_t seed, const SimulationOptions& options);

struct ConditionalEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_total = 0;
  std::uint64_t n_survived = 0;
};

enum class Statistic { MEAN_Y, VAR_Y, DIST_Z, TRAJ_PROFILE };

/// Normalized histogram with binomial standard errors.
struct Histogram {
  Counts counts;
  std::uint64_t total = 0;
  [[nodiscard]] double frequency(std::uint64_t j) const;
  [[nodiscard]] double std_error(std::uint64_t j) const;
};

struct ConditionalResult {
  Statistic statistic = Statistic::MEAN_Y;
  std::vector<ConditionalEstimate> estimates;  ///< one entry, or k = 0..t for TRAJ_PROFILE
  Histogram histogram;                         ///< DIST_Z only: law of Z(t - k)
};

/// Y(k) = l^{-k} Z(k) when gamma = 0, Z(k) otherwise.
[[nodiscard]] double y_scale(const DefectivePGF& f, std::size_t k);

/// Mean or variance of Y(k) over survivors; SE of the mean is sd / sqrt(n), of the variance var sqrt(2/(n-1)).
[[nodiscard]] ConditionalEstimate mean_estimate(const PathStatistics& stats, std::size_t k, double scale);
[[nodiscard]] ConditionalEstimate var_estimate(const PathStatistics& stats, std::size_t k, double scale);

/// Estimates given T > t. Throws ConditioningError when no path survives.
[[nodiscard]] ConditionalResult estimate_conditional(const DefectivePGF& f, std::size_t t, std::size_t k,
                                                     Statistic statistic, std::uint64_t n_paths, std::uint64_t seed,
                                                     const SimulationOptions& options = {});

}  // namespace dgw
