#ifndef GAPGAME_DIFFICULTY_HPP
#define GAPGAME_DIFFICULTY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gapgame/blocktime.hpp"
#include "gapgame/model.hpp"

namespace gapgame {

class InfeasibleSchedule : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  [[nodiscard]] double bracket_lo() const { return lo_; }
  [[nodiscard]] double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

struct DifficultySolution {
  double rate = 0;      // per-rig rate lambda
  double residual = 0;  // |E[X](rate) - T|
  int iterations = 0;
};

struct DifficultyOptions {
  double relative_tolerance = 1e-9;  // on E[X], relative to T; failure beyond this
  // Polishing target. Utilities are compared at the 1e-12 level, so the rate
  // is pushed well past the required tolerance when Newton allows it.
  double target_tolerance = 1e-14;
  int polish_iterations = 4;
  int max_iterations = 400;
  double rate_hint = 0;  // optional starting point; 0 uses 1/(nT)
};

namespace detail {

// E[X] at `rate` and d E[X] / d rate, both in closed form. With
// u = rate * exposure, interval k contributes (e^-u0 - e^-u1) / (rate c) to
// E[X] and -((u0 + 1) e^-u0 - (u1 + 1) e^-u1) / (rate^2 c) to the derivative.
inline std::pair<double, double> mean_and_slope(const ActiveProfile& profile, double rate) {
  double mean = profile.breakpoint(0);
  double slope = 0;
  for (std::size_t k = 0; k < profile.intervals(); ++k) {
    const double c = profile.active_count(k);
    const double u0 = rate * profile.exposure_on(k, profile.breakpoint(k));
    const double end = profile.interval_end(k);
    const double s0 = survival_factor(u0);
    double s1 = 0, w1 = 0;
    if (!std::isinf(end)) {
      const double u1 = rate * profile.exposure_on(k, end);
      s1 = survival_factor(u1);
      w1 = (u1 + 1) * s1;
    }
    mean += (s0 - s1) / (rate * c);
    slope -= ((u0 + 1) * s0 - w1) / (rate * rate * c);
  }
  return {mean, slope};
}

}  // namespace detail

/// Finds the per-rig rate that makes the expected block time equal the
/// target interval. E[X] is continuous and strictly decreasing in the rate,
/// so the root is unique. Newton steps in log-space, kept inside a
/// geometric bracket and replaced by bisection when they leave it.
inline DifficultySolution solve_rate(const StartSchedule& schedule, const SystemParams& params,
                                     const DifficultyOptions& opt = {}) {
  const double T = params.block_interval;
  const ActiveProfile profile = ActiveProfile::from_schedule(schedule);
  if (profile.empty()) throw InvalidSchedule("no rigs in schedule");
  if (profile.breakpoint(0) >= T)
    throw InfeasibleSchedule("earliest start time is not below the block interval; no rate "
                             "achieves the target expected block time");
  const double n = profile.total_rigs();
  auto mean_at = [&](double rate) { return detail::mean_and_slope(profile, rate).first; };
  const double tol = opt.relative_tolerance * T;
  const double target = std::min(opt.target_tolerance, opt.relative_tolerance) * T;

  double center = opt.rate_hint > 0 ? opt.rate_hint : 1.0 / (n * T);
  double spread = opt.rate_hint > 0 ? 2.0 : 1e3;
  double lo = center / spread;
  double hi = center * spread;
  int iterations = 0;
  while (mean_at(lo) < T) {
    lo /= 10;
    if (++iterations > opt.max_iterations) throw NoConvergence("rate bracket search failed", lo, hi);
  }
  while (mean_at(hi) > T) {
    hi *= 10;
    if (++iterations > opt.max_iterations) throw NoConvergence("rate bracket search failed", lo, hi);
  }

  double x = std::clamp(center, lo, hi);
  DifficultySolution best{x, INFINITY, iterations};
  int polish = 0;
  while (iterations < opt.max_iterations) {
    ++iterations;
    auto [m, slope] = detail::mean_and_slope(profile, x);
    double residual = std::abs(m - T);
    if (residual < best.residual) best = {x, residual, iterations};
    if (residual <= target) return best;
    if (residual <= tol && ++polish > opt.polish_iterations) return best;
    if (m > T)
      lo = x;
    else
      hi = x;
    if (hi / lo - 1.0 < 1e-15) break;
    // Newton on log E = log T with respect to log rate.
    double next = 0;
    const double d = x * slope / m;
    if (d < 0) next = x * std::exp((std::log(T) - std::log(m)) / d);
    if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);
    x = next;
  }
  best.iterations = iterations;
  if (best.residual <= tol) return best;
  throw NoConvergence("rate search did not reach tolerance", lo, hi);
}

}  // namespace gapgame

#endif  // GAPGAME_DIFFICULTY_HPP
