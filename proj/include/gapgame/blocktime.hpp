#ifndef GAPGAME_BLOCKTIME_HPP
#define GAPGAME_BLOCKTIME_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "gapgame/model.hpp"

namespace gapgame {

struct Exposure {
  int count = 0;        // |A(t)|
  double exposure = 0;  // sum over active rigs of (t - s_j)
};

/// Piecewise-constant description of the active rig set.
///
/// Interval k is [breakpoint(k), breakpoint(k+1)), the last one extends to
/// infinity. Counts and start sums are cumulative, so exposure at any t is
/// count * t - start_sum of the interval containing t.
class ActiveProfile {
 public:
  ActiveProfile() = default;

  static ActiveProfile from_schedule(const StartSchedule& schedule) {
    std::vector<RigGroup> all;
    for (const auto& p : schedule.players) all.insert(all.end(), p.groups.begin(), p.groups.end());
    return from_groups(all);
  }

  static ActiveProfile from_groups(std::span<const RigGroup> groups) {
    std::vector<RigGroup> sorted(groups.begin(), groups.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const RigGroup& a, const RigGroup& b) { return a.start < b.start; });
    ActiveProfile out;
    int count = 0;
    double sum = 0;
    for (const auto& g : sorted) {
      count += g.rigs;
      sum += g.rigs * g.start;
      if (out.breakpoints_.empty() || out.breakpoints_.back() != g.start) {
        out.breakpoints_.push_back(g.start);
        out.counts_.push_back(count);
        out.start_sums_.push_back(sum);
      } else {
        out.counts_.back() = count;
        out.start_sums_.back() = sum;
      }
    }
    return out;
  }

  [[nodiscard]] std::size_t intervals() const { return breakpoints_.size(); }
  [[nodiscard]] bool empty() const { return breakpoints_.empty(); }
  [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] double breakpoint(std::size_t k) const { return breakpoints_[k]; }
  [[nodiscard]] double interval_end(std::size_t k) const {
    return k + 1 < breakpoints_.size() ? breakpoints_[k + 1]
                                       : std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] int active_count(std::size_t k) const { return counts_[k]; }
  [[nodiscard]] double active_start_sum(std::size_t k) const { return start_sums_[k]; }
  [[nodiscard]] int total_rigs() const { return counts_.empty() ? 0 : counts_.back(); }

  /// Exposure on interval k evaluated at t (t need not lie in the interval).
  [[nodiscard]] double exposure_on(std::size_t k, double t) const {
    return counts_[k] * t - start_sums_[k];
  }

  /// Index of the interval containing t (right-continuous), or npos before
  /// the first start.
  [[nodiscard]] std::size_t interval_at(double t) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    if (it == breakpoints_.begin()) return npos;
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

  [[nodiscard]] Exposure exposure_at(double t) const {
    std::size_t k = interval_at(t);
    if (k == npos) return {};
    return {counts_[k], std::max(0.0, exposure_on(k, t))};
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> breakpoints_;
  std::vector<int> counts_;
  std::vector<double> start_sums_;
};

inline Exposure active_exposure(const ActiveProfile& profile, double t) {
  return profile.exposure_at(t);
}

/// exp(-x) with values below e^-700 flushed to zero.
inline double survival_factor(double x) { return x > 700.0 ? 0.0 : std::exp(-x); }

/// Distribution of the block-finding time X for a schedule and per-rig rate.
class BlockTimeDistribution {
 public:
  BlockTimeDistribution(ActiveProfile profile, double rate)
      : profile_(std::move(profile)), rate_(rate) {
    if (!(rate_ > 0) || !std::isfinite(rate_)) throw InvalidParams("rate must be positive");
    if (profile_.empty()) throw InvalidSchedule("no rigs in schedule");
  }

  BlockTimeDistribution(const StartSchedule& schedule, double rate)
      : BlockTimeDistribution(ActiveProfile::from_schedule(schedule), rate) {}

  [[nodiscard]] const ActiveProfile& profile() const { return profile_; }
  [[nodiscard]] double rate() const { return rate_; }

  [[nodiscard]] double survival(double t) const {
    return survival_factor(rate_ * profile_.exposure_at(t).exposure);
  }

  [[nodiscard]] double cdf(double t) const { return 1.0 - survival(t); }

  // Right-continuous at breakpoints.
  [[nodiscard]] double pdf(double t) const {
    Exposure e = profile_.exposure_at(t);
    if (e.count == 0) return 0.0;
    return rate_ * e.count * survival_factor(rate_ * e.exposure);
  }

  /// Survival at the start of interval k.
  [[nodiscard]] double survival_at_breakpoint(std::size_t k) const {
    return survival_factor(rate_ * profile_.exposure_on(k, profile_.breakpoint(k)));
  }

  /// Survival at the end of interval k (zero for the last interval).
  [[nodiscard]] double survival_at_interval_end(std::size_t k) const {
    double end = profile_.interval_end(k);
    if (std::isinf(end)) return 0.0;
    return survival_factor(rate_ * profile_.exposure_on(k, end));
  }

  /// Probability mass of interval k: S(start) - S(end).
  [[nodiscard]] double interval_mass(std::size_t k) const {
    return survival_at_breakpoint(k) - survival_at_interval_end(k);
  }

  /// Closed-form integral of the pdf over [0, inf).
  [[nodiscard]] double total_mass() const {
    double sum = 0;
    for (std::size_t k = 0; k < profile_.intervals(); ++k) sum += interval_mass(k);
    return sum;
  }

  /// E[X] = s_(1) + sum_k (S_k - S_{k+1}) / (rate * count_k).
  [[nodiscard]] double mean() const {
    double m = profile_.breakpoint(0);
    for (std::size_t k = 0; k < profile_.intervals(); ++k)
      m += interval_mass(k) / (rate_ * profile_.active_count(k));
    return m;
  }

  /// Closed-form E[(a + b X) ; X in interval k] for linear integrands
  /// a + b t, used by utility and utilization.
  [[nodiscard]] double linear_expectation_on(std::size_t k, double a, double b) const {
    const double beta = rate_ * profile_.active_count(k);
    const double start = profile_.breakpoint(k);
    const double end = profile_.interval_end(k);
    // antiderivative of (a + b t) beta e^{-beta t}: -(a + b t + b / beta) e^{-beta t}
    double value = survival_at_breakpoint(k) * (a + b * start + b / beta);
    if (!std::isinf(end)) {
      double s_end = survival_at_interval_end(k);
      if (s_end > 0) value -= s_end * (a + b * end + b / beta);
    }
    return value;
  }

 private:
  ActiveProfile profile_;
  double rate_;
};

inline double survival(const BlockTimeDistribution& d, double t) { return d.survival(t); }
inline double pdf(const BlockTimeDistribution& d, double t) { return d.pdf(t); }
inline double expected_block_time(const BlockTimeDistribution& d) { return d.mean(); }

inline double expected_block_time(const StartSchedule& schedule, double rate) {
  return BlockTimeDistribution(schedule, rate).mean();
}

struct BlockSample {
  double time = 0;
  std::size_t winner = 0;  // player index
};

/// Draws (X, winning player) for a fixed schedule. The minimum of k iid
/// Exponential(rate) variables is Exponential(k * rate), so one draw per
/// group is enough.
class BlockSampler {
 public:
  BlockSampler(const StartSchedule& schedule, double rate) {
    if (!(rate > 0)) throw InvalidParams("rate must be positive");
    for (std::size_t i = 0; i < schedule.players.size(); ++i)
      for (const auto& g : schedule.players[i].groups)
        entries_.push_back({g.start, std::exponential_distribution<double>(g.rigs * rate), i});
    if (entries_.empty()) throw InvalidSchedule("no rigs in schedule");
  }

  template <class Rng>
  BlockSample operator()(Rng& rng) {
    BlockSample best{std::numeric_limits<double>::infinity(), 0};
    for (auto& e : entries_) {
      double t = e.start + e.dist(rng);
      if (t < best.time) best = {t, e.player};
    }
    return best;
  }

 private:
  struct Entry {
    double start;
    std::exponential_distribution<double> dist;
    std::size_t player;
  };
  std::vector<Entry> entries_;
};

template <class Rng>
BlockSample sample_block_time(const StartSchedule& schedule, double rate, Rng& rng) {
  BlockSampler sampler(schedule, rate);
  return sampler(rng);
}

}  // namespace gapgame

#endif  // GAPGAME_BLOCKTIME_HPP
