#include "privsub/core.hpp"

#include <cmath>
#include <string>

#include "privsub/error.hpp"

namespace privsub {

namespace {

void require_positive(const char* field, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(field, "must be positive and finite, got " + std::to_string(value));
  }
}

}  // namespace

void validate(const MarketParams& params) {
  require_positive("sigma_v", params.sigma_v);
  require_positive("sigma_u", params.sigma_u);
  if (!(params.sigma_eps >= 0.0) || !std::isfinite(params.sigma_eps)) {
    throw ValidationError("sigma_eps",
                          "must be non-negative and finite, got " + std::to_string(params.sigma_eps));
  }
  require_positive("horizon_T", params.horizon_T);
  if (!std::isfinite(params.p0)) throw ValidationError("p0", "must be finite");
}

Equilibrium solve_equilibrium(const MarketParams& params) {
  validate(params);
  const double noise_var = params.total_noise_var();
  const double T = params.horizon_T;

  Equilibrium eq;
  eq.params = params;
  eq.lambda = params.sigma_v / std::sqrt(T * noise_var);
  eq.c = params.sigma_v * std::sqrt(noise_var / T);
  eq.alpha = 0.5 / eq.lambda;
  eq.gamma0 = 0.5 * eq.c * T;
  return eq;
}

double Equilibrium::posterior_variance(double t) const {
  const double T = params.horizon_T;
  if (!(t >= 0.0 && t <= T)) {
    throw ValidationError("t", "outside [0, T]: " + std::to_string(t));
  }
  return params.sigma_v * params.sigma_v * (1.0 - t / T);
}

double Equilibrium::trading_intensity(double t) const {
  if (!(t >= 0.0 && t < params.horizon_T)) {
    throw ValidationError("t", "trading intensity is defined on [0, T), got " + std::to_string(t));
  }
  return c / posterior_variance(t);
}

double Equilibrium::gamma(double t) const {
  if (!(t >= 0.0 && t <= params.horizon_T)) {
    throw ValidationError("t", "outside [0, T]: " + std::to_string(t));
  }
  return 0.5 * c * (params.horizon_T - t);
}

double privacy_rate(double sigma_v, double sigma_u, double sigma_eps) {
  const double eps2 = sigma_eps * sigma_eps;
  return sigma_v * eps2 / std::sqrt(sigma_u * sigma_u + eps2);
}

WelfareReport welfare_closed_form(const MarketParams& params) {
  const Equilibrium eq = solve_equilibrium(params);
  const double T = params.horizon_T;
  const double su = params.sigma_u;
  const double eps2 = params.sigma_eps * params.sigma_eps;
  const double total_sd = std::sqrt(params.total_noise_var());
  const double sqrt_T = std::sqrt(T);

  WelfareReport w;
  w.pi_I = eq.c * T;
  w.pi_N = -eq.lambda * su * su * T;
  w.pi_M = -eq.lambda * eps2 * T;
  w.subsidy = -w.pi_M;

  // sqrt(su^2 + e^2) - su rewritten as e^2 / (sqrt(su^2 + e^2) + su) to avoid cancellation.
  const double excess_sd = eps2 / (total_sd + su);
  w.delta_pi_I = params.sigma_v * excess_sd * sqrt_T;
  w.delta_pi_N = params.sigma_v * su * excess_sd / total_sd * sqrt_T;
  w.share_ratio = total_sd / su;
  w.single_period_subsidy = 0.5 * privacy_rate(params.sigma_v, su, params.sigma_eps);
  return w;
}

}  // namespace privsub
