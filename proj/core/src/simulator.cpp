#include "dgw/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "dgw/errors.hpp"

namespace dgw {

const char* to_string(Sampler s) {
  switch (s) {
    case Sampler::DIRECT: return "direct";
    case Sampler::CONTROLLED: return "controlled";
    case Sampler::CONDITIONED: return "conditioned";
  }
  return "?";
}

Sampler sampler_from_string(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "direct" || lower == "rejection") return Sampler::DIRECT;
  if (lower == "controlled") return Sampler::CONTROLLED;
  if (lower == "conditioned") return Sampler::CONDITIONED;
  throw std::invalid_argument("unknown sampler: " + name);
}

// ---------------------------------------------------------------- alias

AliasTable::AliasTable(const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("AliasTable: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("AliasTable: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("AliasTable: weights sum to zero");
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) prob_[i] = 1.0;
  for (std::size_t i : small) prob_[i] = 1.0;  // leftovers from rounding
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] == 0.0) prob_[i] = 0.0;  // never return an impossible outcome
  }
}

std::size_t AliasTable::sample(double u) const noexcept {
  const double x = u * static_cast<double>(prob_.size());
  const std::size_t i = std::min(static_cast<std::size_t>(x), prob_.size() - 1);
  return (x - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
}

// ---------------------------------------------------------------- rng

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

// ---------------------------------------------------------------- sampler

BranchingSampler::BranchingSampler(const DefectivePGF& f, Sampler kind, std::size_t horizon,
                                   std::uint64_t population_cap)
    : kind_(kind), horizon_(horizon), cap_(population_cap) {
  const auto pmf = f.pmf();
  std::vector<double> w(pmf.begin(), pmf.end());
  switch (kind_) {
    case Sampler::DIRECT:
      w.push_back(f.defect());
      with_delta_ = AliasTable(w);
      break;
    case Sampler::CONTROLLED:
      proper_ = AliasTable(w);
      log_survive_ = std::log1p(-f.defect());
      break;
    case Sampler::CONDITIONED: {
      if (f.p(0) != 0.0) throw RegimeError("conditioned sampler: requires p_0 = 0");
      tilted_.reserve(horizon_);
      for (std::size_t g = 0; g < horizon_; ++g) {
        // a = f(horizon - g - 1, 1): chance that one child's line avoids Delta until the horizon.
        const double log_a = log_iterate(f, horizon_ - g - 1, 0.0);
        std::vector<double> lw(pmf.size(), -std::numeric_limits<double>::infinity());
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pmf.size(); ++j) {
          if (pmf[j] > 0.0) {
            lw[j] = std::log(pmf[j]) + static_cast<double>(j) * log_a;
            top = std::max(top, lw[j]);
          }
        }
        std::vector<double> tw(pmf.size(), 0.0);
        for (std::size_t j = 0; j < pmf.size(); ++j) tw[j] = std::exp(lw[j] - top);
        tilted_.emplace_back(tw);
      }
      break;
    }
  }
}

std::uint64_t BranchingSampler::step(std::uint64_t z, std::size_t generation, std::mt19937_64& rng) const {
  std::uint64_t total = 0;
  switch (kind_) {
    case Sampler::DIRECT: {
      const std::size_t delta = with_delta_.size() - 1;
      for (std::uint64_t i = 0; i < z; ++i) {
        const std::size_t k = with_delta_.sample(uniform01(rng));
        if (k == delta) return kDelta;
        total += k;
        if (total > cap_) throw PopulationOverflow("population exceeded the cap");
      }
      return total;
    }
    case Sampler::CONTROLLED: {
      const double p_delta = -std::expm1(static_cast<double>(z) * log_survive_);
      if (uniform01(rng) < p_delta) return kDelta;
      for (std::uint64_t i = 0; i < z; ++i) {
        total += proper_.sample(uniform01(rng));
        if (total > cap_) throw PopulationOverflow("population exceeded the cap");
      }
      return total;
    }
    case Sampler::CONDITIONED: {
      if (generation >= tilted_.size()) throw std::out_of_range("conditioned sampler: generation beyond horizon");
      const AliasTable& table = tilted_[generation];
      for (std::uint64_t i = 0; i < z; ++i) {
        total += table.sample(uniform01(rng));
        if (total > cap_) throw PopulationOverflow("population exceeded the cap");
      }
      return total;
    }
  }
  return total;
}

Trajectory BranchingSampler::run(std::mt19937_64& rng) const {
  Trajectory path;
  path.states.reserve(horizon_ + 1);
  path.states.push_back(1);
  std::uint64_t z = 1;
  for (std::size_t g = 0; g < horizon_; ++g) {
    z = step(z, g, rng);
    path.states.push_back(z);
    if (z == kDelta || z == 0) {
      path.absorption = z == 0 ? Absorption::EXTINCT : Absorption::KILLED;
      path.absorption_time = g + 1;
      return path;
    }
  }
  path.absorption = Absorption::ALIVE;
  return path;
}

Trajectory sample_trajectory(const DefectivePGF& f, std::size_t horizon, std::uint64_t seed) {
  auto rng = path_rng(seed, 0);
  return BranchingSampler(f, Sampler::DIRECT, horizon).run(rng);
}

Trajectory sample_trajectory_controlled(const DefectivePGF& f, std::size_t horizon, std::uint64_t seed) {
  auto rng = path_rng(seed, 0);
  return BranchingSampler(f, Sampler::CONTROLLED, horizon).run(rng);
}

// ---------------------------------------------------------------- statistics

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DGW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PathStatistics::PathStatistics(std::size_t horizon, bool marginals)
    : horizon(horizon),
      sum(horizon + 1, 0),
      sum_sq(horizon + 1, 0),
      survivor_hist(horizon + 1),
      marginal(marginals ? horizon + 1 : 0),
      extinct_at(horizon + 1, 0),
      killed_at(horizon + 1, 0) {}

void PathStatistics::add(const Trajectory& path) {
  ++n_total;
  if (!marginal.empty()) {
    for (std::size_t k = 0; k <= horizon; ++k) {
      const std::uint64_t z = k < path.states.size() ? path.states[k] : path.states.back();
      ++marginal[k][z];
    }
  }
  if (path.absorption != Absorption::ALIVE) {
    auto& bucket = path.absorption == Absorption::EXTINCT ? extinct_at : killed_at;
    ++bucket[*path.absorption_time];
    return;
  }
  ++n_survived;
  for (std::size_t k = 0; k <= horizon; ++k) {
    const std::uint64_t z = path.states[k];
    sum[k] += z;
    sum_sq[k] += static_cast<uint128>(z) * z;
    ++survivor_hist[k][z];
  }
  if (horizon >= 1) ++joint_last[{path.states[horizon - 1], path.states[horizon]}];
}

void PathStatistics::merge(const PathStatistics& other) {
  if (other.horizon != horizon || other.marginal.size() != marginal.size()) {
    throw std::invalid_argument("PathStatistics::merge: incompatible batches");
  }
  n_total += other.n_total;
  n_survived += other.n_survived;
  for (std::size_t k = 0; k <= horizon; ++k) {
    sum[k] += other.sum[k];
    sum_sq[k] += other.sum_sq[k];
    for (const auto& [z, c] : other.survivor_hist[k]) survivor_hist[k][z] += c;
    extinct_at[k] += other.extinct_at[k];
    killed_at[k] += other.killed_at[k];
  }
  for (std::size_t k = 0; k < marginal.size(); ++k) {
    for (const auto& [z, c] : other.marginal[k]) marginal[k][z] += c;
  }
  for (const auto& [key, c] : other.joint_last) joint_last[key] += c;
}

PathStatistics simulate_block(const DefectivePGF& f, std::size_t horizon, std::uint64_t first, std::uint64_t last,
                              std::uint64_t seed, const SimulationOptions& options) {
  const BranchingSampler sampler(f, options.sampler, horizon, options.population_cap);
  PathStatistics stats(horizon, options.record_marginals);
  for (std::uint64_t i = first; i < last; ++i) {
    auto rng = path_rng(seed, i);
    stats.add(sampler.run(rng));
  }
  return stats;
}

PathStatistics simulate_paths(const DefectivePGF& f, std::size_t horizon, std::uint64_t n_paths, std::uint64_t seed,
                              const SimulationOptions& options) {
  const std::size_t threads = std::min<std::uint64_t>(resolve_threads(options.threads), std::max<std::uint64_t>(n_paths, 1));
  if (threads <= 1) return simulate_block(f, horizon, 0, n_paths, seed, options);
  std::vector<PathStatistics> parts(threads);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    const std::uint64_t first = n_paths * w / threads;
    const std::uint64_t last = n_paths * (w + 1) / threads;
    workers.emplace_back([&, w, first, last] {
      try {
        parts[w] = simulate_block(f, horizon, first, last, seed, options);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  PathStatistics total(horizon, options.record_marginals);
  for (const auto& p : parts) total.merge(p);
  return total;
}

// ---------------------------------------------------------------- estimates

double Histogram::frequency(std::uint64_t j) const {
  const auto it = counts.find(j);
  if (it == counts.end() || total == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

double Histogram::std_error(std::uint64_t j) const {
  if (total == 0) return 0.0;
  const double p = frequency(j);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

double y_scale(const DefectivePGF& f, std::size_t k) {
  const DerivedParams params = extinction_prob(f);
  if (params.gamma == 0.0) return std::pow(static_cast<double>(params.l), static_cast<double>(k));
  return 1.0;
}

namespace {

void require_survivors(const PathStatistics& stats, std::size_t k) {
  if (stats.n_survived == 0) throw ConditioningError("no path survived the horizon", 0);
  if (k > stats.horizon) throw std::invalid_argument("estimate: k exceeds the horizon");
}

// Unbiased sample variance of Z(k) from exact integer sums.
long double sample_variance(const PathStatistics& stats, std::size_t k) {
  const std::uint64_t n = stats.n_survived;
  if (n < 2) return 0.0L;
  const uint128 s1 = stats.sum[k];
  const uint128 num = stats.sum_sq[k] * n - s1 * s1;
  return static_cast<long double>(num) / (static_cast<long double>(n) * static_cast<long double>(n - 1));
}

}  // namespace

ConditionalEstimate mean_estimate(const PathStatistics& stats, std::size_t k, double scale) {
  require_survivors(stats, k);
  const long double n = static_cast<long double>(stats.n_survived);
  const long double mean = static_cast<long double>(stats.sum[k]) / n / scale;
  const long double var = sample_variance(stats, k) / (static_cast<long double>(scale) * scale);
  ConditionalEstimate e;
  e.value = static_cast<double>(mean);
  e.std_error = stats.n_survived < 2 ? std::numeric_limits<double>::infinity() : static_cast<double>(std::sqrt(var / n));
  e.n_total = stats.n_total;
  e.n_survived = stats.n_survived;
  return e;
}

ConditionalEstimate var_estimate(const PathStatistics& stats, std::size_t k, double scale) {
  require_survivors(stats, k);
  const long double var = sample_variance(stats, k) / (static_cast<long double>(scale) * scale);
  ConditionalEstimate e;
  e.value = static_cast<double>(var);
  e.std_error = stats.n_survived < 2
                    ? std::numeric_limits<double>::infinity()
                    : static_cast<double>(var * std::sqrt(2.0L / static_cast<long double>(stats.n_survived - 1)));
  e.n_total = stats.n_total;
  e.n_survived = stats.n_survived;
  return e;
}

ConditionalResult estimate_conditional(const DefectivePGF& f, std::size_t t, std::size_t k, Statistic statistic,
                                       std::uint64_t n_paths, std::uint64_t seed, const SimulationOptions& options) {
  if (k > t) throw std::invalid_argument("estimate_conditional: requires k <= t");
  if (n_paths < 1) throw std::invalid_argument("estimate_conditional: requires n_paths >= 1");
  const PathStatistics stats = simulate_paths(f, t, n_paths, seed, options);
  if (stats.n_survived == 0) throw ConditioningError("estimate_conditional: no path survived to t", 0);
  ConditionalResult out;
  out.statistic = statistic;
  switch (statistic) {
    case Statistic::MEAN_Y:
      out.estimates.push_back(mean_estimate(stats, k, y_scale(f, k)));
      break;
    case Statistic::VAR_Y:
      out.estimates.push_back(var_estimate(stats, k, y_scale(f, k)));
      break;
    case Statistic::DIST_Z:
      out.histogram.counts = stats.survivor_hist[t - k];
      out.histogram.total = stats.n_survived;
      out.estimates.push_back({0.0, 0.0, stats.n_total, stats.n_survived});
      break;
    case Statistic::TRAJ_PROFILE:
      for (std::size_t j = 0; j <= t; ++j) out.estimates.push_back(mean_estimate(stats, j, y_scale(f, j)));
      break;
  }
  return out;
}

}  // namespace dgw
