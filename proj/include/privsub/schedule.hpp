#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "privsub/core.hpp"

namespace privsub {

struct ScheduleSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double variance = 0.0;  // sigma_eps(t)^2 on [t_start, t_end)
};

// Piecewise-constant privacy-noise variance covering [0, T] without gaps or overlaps.
class NoiseSchedule {
 public:
  // Validates; throws ValidationError on gaps, overlaps, empty segments or negative variance.
  explicit NoiseSchedule(std::vector<ScheduleSegment> segments);

  static NoiseSchedule constant(double variance, double horizon_T = 1.0);

  const std::vector<ScheduleSegment>& segments() const { return segments_; }
  double horizon() const { return segments_.back().t_end; }

  // sigma_eps(t)^2, right-continuous; t = T maps to the last segment.
  double variance_at(double t) const;

  // Integral of sigma_eps(s)^2 over [0, t].
  double integrated_variance(double t) const;

 private:
  std::vector<ScheduleSegment> segments_;
};

// (1/T) * sum over segments of length * variance.
double mean_variance(const NoiseSchedule& schedule);

struct SegmentRate {
  double t_start = 0.0;
  double t_end = 0.0;
  double rate = 0.0;  // lambda * sigma_eps(t)^2
};

struct ScheduleSubsidy {
  double mean_variance = 0.0;
  double lambda = 0.0;
  double subsidy = 0.0;
  std::vector<SegmentRate> rates;
};

// Requires a unit horizon for both params and schedule; params.sigma_eps is ignored.
ScheduleSubsidy schedule_subsidy(const MarketParams& params, const NoiseSchedule& schedule);

// Equilibrium with a time-varying privacy channel: constant lambda, piecewise-linear Sigma(t).
class ScheduledEquilibrium {
 public:
  ScheduledEquilibrium(const MarketParams& params, NoiseSchedule schedule);

  double lambda() const { return lambda_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const MarketParams& params() const { return params_; }

  // Sigma0 - lambda^2 * integral_0^t (sigma_u^2 + sigma_eps(s)^2) ds
  double posterior_variance(double t) const;

  // lambda (sigma_u^2 + sigma_eps(t)^2) / Sigma(t), on [0, T).
  double trading_intensity(double t) const;

 private:
  MarketParams params_;
  NoiseSchedule schedule_;
  double lambda_ = 0.0;
};

// CSV with header `t_start,t_end,variance`.
NoiseSchedule read_schedule_csv(std::istream& in);
NoiseSchedule read_schedule_csv(const std::filesystem::path& path);

}  // namespace privsub
