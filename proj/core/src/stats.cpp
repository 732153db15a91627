#include "dgw/stats.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace dgw {

namespace {

double count_at(const Counts& c, std::uint64_t key) {
  const auto it = c.find(key);
  return it == c.end() ? 0.0 : static_cast<double>(it->second);
}

double upper_tail(double stat, std::size_t dof) {
  if (dof == 0) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, std::max(stat, 0.0)));
}

}  // namespace

ChiSquareResult two_sample_chi_square(const Counts& a, const Counts& b, double min_expected) {
  double na = 0.0;
  double nb = 0.0;
  std::set<std::uint64_t> keys;
  for (const auto& [k, c] : a) {
    keys.insert(k);
    na += static_cast<double>(c);
  }
  for (const auto& [k, c] : b) {
    keys.insert(k);
    nb += static_cast<double>(c);
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("two_sample_chi_square: empty sample");
  const double n = na + nb;

  // pool consecutive keys
  struct Bin {
    std::uint64_t lo, hi;
    double ca, cb;
  };
  std::vector<Bin> bins;
  Bin cur{0, 0, 0.0, 0.0};
  bool open = false;
  for (std::uint64_t k : keys) {
    if (!open) {
      cur = {k, k, 0.0, 0.0};
      open = true;
    }
    cur.hi = k;
    cur.ca += count_at(a, k);
    cur.cb += count_at(b, k);
    const double tot = cur.ca + cur.cb;
    if (tot * na / n >= min_expected && tot * nb / n >= min_expected) {
      bins.push_back(cur);
      open = false;
    }
  }
  if (open) {
    if (bins.empty()) {
      bins.push_back(cur);
    } else {
      bins.back().hi = cur.hi;
      bins.back().ca += cur.ca;
      bins.back().cb += cur.cb;
    }
  }

  ChiSquareResult out;
  for (const auto& bin : bins) {
    const double tot = bin.ca + bin.cb;
    const double ea = tot * na / n;
    const double eb = tot * nb / n;
    out.statistic += (bin.ca - ea) * (bin.ca - ea) / ea + (bin.cb - eb) * (bin.cb - eb) / eb;
    out.bins.emplace_back(bin.lo, bin.hi);
  }
  out.dof = bins.size() - 1;
  out.p_value = upper_tail(out.statistic, out.dof);
  return out;
}

ChiSquareResult chi_square_gof(const Counts& observed, const std::vector<double>& probs, double min_expected) {
  double n = 0.0;
  for (const auto& [k, c] : observed) n += static_cast<double>(c);
  if (n == 0.0) throw std::invalid_argument("chi_square_gof: empty sample");
  double listed = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("chi_square_gof: negative probability");
    listed += p;
  }

  struct Bin {
    std::uint64_t lo, hi;
    double obs, p;
  };
  std::vector<Bin> bins;
  Bin cur{0, 0, 0.0, 0.0};
  bool open = false;
  for (std::uint64_t k = 0; k < probs.size(); ++k) {
    if (!open) {
      cur = {k, k, 0.0, 0.0};
      open = true;
    }
    cur.hi = k;
    cur.obs += count_at(observed, k);
    cur.p += probs[k];
    if (cur.p * n >= min_expected) {
      bins.push_back(cur);
      open = false;
    }
  }
  double outside = 0.0;
  for (const auto& [k, c] : observed) {
    if (k >= probs.size()) outside += static_cast<double>(c);
  }
  const double rest = std::max(0.0, 1.0 - listed);
  if (open) {
    cur.obs += outside;
    cur.p += rest;
    if (bins.empty() || cur.p * n >= min_expected) {
      cur.hi = std::numeric_limits<std::uint64_t>::max();
      bins.push_back(cur);
    } else {
      bins.back().hi = std::numeric_limits<std::uint64_t>::max();
      bins.back().obs += cur.obs;
      bins.back().p += cur.p;
    }
  } else if (rest * n >= min_expected) {
    bins.push_back({probs.size(), std::numeric_limits<std::uint64_t>::max(), outside, rest});
  } else if (!bins.empty()) {
    bins.back().hi = std::numeric_limits<std::uint64_t>::max();
    bins.back().obs += outside;
    bins.back().p += rest;
  }

  ChiSquareResult out;
  for (const auto& bin : bins) {
    const double e = bin.p * n;
    if (e > 0.0) out.statistic += (bin.obs - e) * (bin.obs - e) / e;
    out.bins.emplace_back(bin.lo, bin.hi);
  }
  out.dof = bins.empty() ? 0 : bins.size() - 1;
  out.p_value = upper_tail(out.statistic, out.dof);
  return out;
}

double binomial_se(double p, std::uint64_t n) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double z_score(double estimate, double truth, double se) {
  const double diff = std::abs(estimate - truth);
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace dgw
