#ifndef GAPGAME_OPTIMIZE_HPP
#define GAPGAME_OPTIMIZE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace gapgame {

struct ScalarMaximum {
  double argmax = 0;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Golden-section search for a maximum of a unimodal function on [lo, hi].
template <class F>
ScalarMaximum golden_section_maximize(F&& f, double lo, double hi, double tolerance,
                                      int max_iterations = 200) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarMaximum out;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  out.evaluations = 2;
  for (int i = 0; i < max_iterations && hi - lo > tolerance; ++i) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.argmax = c;
    out.value = fc;
  } else {
    out.argmax = d;
    out.value = fd;
  }
  return out;
}

/// Uniform grid over [lo, hi] followed by golden-section refinement on the
/// bracket around the best grid point. Ties go to the smallest argument;
/// the refined point only replaces the grid point if strictly better.
template <class F>
ScalarMaximum grid_golden_maximize(F&& f, double lo, double hi, std::size_t grid_points,
                                   double tolerance) {
  if (grid_points < 2) grid_points = 2;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  ScalarMaximum best;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    double x = i + 1 == grid_points ? hi : lo + step * static_cast<double>(i);
    double v = f(x);
    ++best.evaluations;
    if (v > best.value) {
      best.value = v;
      best.argmax = x;
      best_index = i;
    }
  }
  if (!std::isfinite(best.value)) return best;
  double a = best_index == 0 ? lo : lo + step * static_cast<double>(best_index - 1);
  double b = best_index + 1 >= grid_points ? hi : lo + step * static_cast<double>(best_index + 1);
  ScalarMaximum refined = golden_section_maximize(f, a, b, tolerance);
  best.evaluations += refined.evaluations;
  if (refined.value > best.value) {
    best.value = refined.value;
    best.argmax = refined.argmax;
  }
  return best;
}

}  // namespace gapgame

#endif  // GAPGAME_OPTIMIZE_HPP
