#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace privsub {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean; 0 for fewer than two samples
  std::size_t n = 0;

  // (mean - target) / se; infinite when se == 0 and the mean misses the target.
  double z_score(double target) const {
    const double diff = mean - target;
    if (se > 0.0) return diff / se;
    return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  }
};

// Two-pass mean and standard error, summed in index order.
inline Estimate estimate(std::span<const double> samples) {
  Estimate e;
  e.n = samples.size();
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double x : samples) sum += x;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double var = ss / static_cast<double>(e.n - 1);
  e.se = std::sqrt(var / static_cast<double>(e.n));
  return e;
}

}  // namespace privsub
