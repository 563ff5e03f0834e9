#pragma once

// Closed-form equilibrium and welfare of the continuous-time Kyle market with
// a committed Bayesian market maker observing order flow through an
// independent Brownian privacy channel.

namespace privsub {

struct MarketParams {
  double sigma_v = 1.0;    // prior std of the asset value
  double sigma_u = 1.0;    // noise-flow diffusion intensity
  double sigma_eps = 0.0;  // privacy-noise diffusion intensity
  double horizon_T = 1.0;
  double p0 = 0.0;         // prior mean price

  // sigma_u^2 + sigma_eps^2, the total observation-noise intensity.
  double total_noise_var() const { return sigma_u * sigma_u + sigma_eps * sigma_eps; }
};

// Throws ValidationError naming the offending field.
void validate(const MarketParams& params);

class Equilibrium {
 public:
  double lambda = 0.0;  // constant price impact
  double c = 0.0;       // beta(t) * Sigma(t), constant along the path
  double alpha = 0.0;   // insider value function J = alpha (v-p)^2 + gamma(t)
  double gamma0 = 0.0;
  MarketParams params;

  // Sigma(t) = sigma_v^2 (1 - t/T). Valid on [0, T].
  double posterior_variance(double t) const;

  // beta(t) = c / Sigma(t). Valid on [0, T); the horizon itself is a singularity.
  double trading_intensity(double t) const;

  double gamma(double t) const;  // (c/2)(T - t)
};

Equilibrium solve_equilibrium(const MarketParams& params);

struct WelfareReport {
  double pi_I = 0.0;
  double pi_N = 0.0;
  double pi_M = 0.0;
  double subsidy = 0.0;  // |pi_M|
  double delta_pi_I = 0.0;
  double delta_pi_N = 0.0;
  double share_ratio = 1.0;  // delta_pi_I / delta_pi_N, 1 in the sigma_eps -> 0 limit
  double single_period_subsidy = 0.0;
};

WelfareReport welfare_closed_form(const MarketParams& params);

// Unit-horizon subsidy sigma_v sigma_eps^2 / sqrt(sigma_u^2 + sigma_eps^2); also the
// constant instantaneous privacy-subsidy rate at T = 1.
double privacy_rate(double sigma_v, double sigma_u, double sigma_eps);

}  // namespace privsub
