#include "privsub/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "privsub/error.hpp"

namespace privsub {

namespace {

constexpr double kBoundaryTol = 1e-12;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, std::size_t line_no) {
  const std::string field = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw ValidationError("schedule", "line " + std::to_string(line_no) + ": not a number '" + field + "'");
  }
  return value;
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<ScheduleSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ValidationError("schedule", "no segments");
  if (std::abs(segments_.front().t_start) > kBoundaryTol) {
    throw ValidationError("schedule", "first segment must start at t=0");
  }
  segments_.front().t_start = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.t_start) || !std::isfinite(s.t_end) || !std::isfinite(s.variance)) {
      throw ValidationError("schedule", "segment " + std::to_string(i) + " has a non-finite value");
    }
    if (!(s.t_end > s.t_start)) {
      throw ValidationError("schedule", "segment " + std::to_string(i) + " is empty or reversed");
    }
    if (s.variance < 0.0) {
      throw ValidationError("schedule", "segment " + std::to_string(i) + " has negative variance");
    }
    if (i > 0) {
      const double prev_end = segments_[i - 1].t_end;
      if (s.t_start > prev_end + kBoundaryTol) {
        throw ValidationError("schedule", "gap before segment " + std::to_string(i));
      }
      if (s.t_start < prev_end - kBoundaryTol) {
        throw ValidationError("schedule", "segment " + std::to_string(i) + " overlaps its predecessor");
      }
      segments_[i].t_start = prev_end;
    }
  }
}

NoiseSchedule NoiseSchedule::constant(double variance, double horizon_T) {
  return NoiseSchedule({{0.0, horizon_T, variance}});
}

double NoiseSchedule::variance_at(double t) const {
  if (!(t >= 0.0 && t <= horizon())) {
    throw ValidationError("t", "outside schedule horizon: " + std::to_string(t));
  }
  for (const auto& s : segments_) {
    if (t < s.t_end) return s.variance;
  }
  return segments_.back().variance;
}

double NoiseSchedule::integrated_variance(double t) const {
  if (!(t >= 0.0 && t <= horizon())) {
    throw ValidationError("t", "outside schedule horizon: " + std::to_string(t));
  }
  double total = 0.0;
  for (const auto& s : segments_) {
    if (t <= s.t_start) break;
    total += (std::min(t, s.t_end) - s.t_start) * s.variance;
  }
  return total;
}

double mean_variance(const NoiseSchedule& schedule) {
  double total = 0.0;
  for (const auto& s : schedule.segments()) total += (s.t_end - s.t_start) * s.variance;
  return total / schedule.horizon();
}

ScheduleSubsidy schedule_subsidy(const MarketParams& params, const NoiseSchedule& schedule) {
  MarketParams p = params;
  p.sigma_eps = 0.0;
  validate(p);
  if (std::abs(params.horizon_T - 1.0) > kBoundaryTol) {
    throw ValidationError("horizon_T", "time-varying schedules are supported on a unit horizon only");
  }
  if (std::abs(schedule.horizon() - 1.0) > kBoundaryTol) {
    throw ValidationError("schedule", "schedule must end at t=1, ends at " + std::to_string(schedule.horizon()));
  }

  ScheduleSubsidy out;
  out.mean_variance = mean_variance(schedule);
  const double su2 = params.sigma_u * params.sigma_u;
  out.lambda = params.sigma_v / std::sqrt(su2 + out.mean_variance);
  out.subsidy = out.lambda * out.mean_variance;
  out.rates.reserve(schedule.segments().size());
  for (const auto& s : schedule.segments()) {
    out.rates.push_back({s.t_start, s.t_end, out.lambda * s.variance});
  }
  return out;
}

ScheduledEquilibrium::ScheduledEquilibrium(const MarketParams& params, NoiseSchedule schedule)
    : params_(params), schedule_(std::move(schedule)) {
  lambda_ = schedule_subsidy(params_, schedule_).lambda;
  params_.sigma_eps = std::sqrt(mean_variance(schedule_));
}

double ScheduledEquilibrium::posterior_variance(double t) const {
  const double su2 = params_.sigma_u * params_.sigma_u;
  const double absorbed = lambda_ * lambda_ * (su2 * t + schedule_.integrated_variance(t));
  return std::max(0.0, params_.sigma_v * params_.sigma_v - absorbed);
}

double ScheduledEquilibrium::trading_intensity(double t) const {
  if (!(t >= 0.0 && t < schedule_.horizon())) {
    throw ValidationError("t", "trading intensity is defined on [0, T), got " + std::to_string(t));
  }
  const double su2 = params_.sigma_u * params_.sigma_u;
  return lambda_ * (su2 + schedule_.variance_at(t)) / posterior_variance(t);
}

NoiseSchedule read_schedule_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<ScheduleSegment> segments;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char ch : line) {
        if (ch != ' ' && ch != '\t') compact.push_back(ch);
      }
      if (compact != "t_start,t_end,variance") {
        throw ValidationError("schedule", "expected header 't_start,t_end,variance', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 3) {
      throw ValidationError("schedule", "line " + std::to_string(line_no) + ": expected 3 columns");
    }
    segments.push_back({parse_number(fields[0], line_no), parse_number(fields[1], line_no),
                        parse_number(fields[2], line_no)});
  }
  if (!header_seen) throw ValidationError("schedule", "empty schedule file");
  return NoiseSchedule(std::move(segments));
}

NoiseSchedule read_schedule_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file", "cannot open schedule file " + path.string());
  return read_schedule_csv(in);
}

}  // namespace privsub
