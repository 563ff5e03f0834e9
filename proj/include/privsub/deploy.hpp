#pragma once

// Discrete-block deployment: Gaussian-mechanism privacy accounting, the
// break-even fee that keeps the liquidity pool solvent against the privacy
// subsidy, and the net-of-fee welfare check.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "privsub/core.hpp"
#include "privsub/sim.hpp"
#include "privsub/stats.hpp"

namespace privsub {

enum class Composition { Basic, Advanced };

std::string_view composition_name(Composition c);
Composition parse_composition(std::string_view name);  // "basic" | "advanced"

struct DeploymentPlan {
  std::size_t n_blocks = 1;
  double per_block_noise_var = 0.0;  // sigma_eps^2 / N
  double sensitivity = 1.0;          // unit-trade sensitivity

  double implied_sigma_eps() const;
  double sigma_block() const;

  static DeploymentPlan from_sigma_eps(std::size_t n_blocks, double sigma_eps, double sensitivity = 1.0);
};

struct DpBudget {
  double epsilon_block = 0.0;
  double delta_block = 0.0;
  double epsilon_joint = 0.0;
  double delta_joint = 0.0;
  Composition composition = Composition::Basic;
};

// Noise std giving (epsilon, delta)-DP for one release: sensitivity * sqrt(2 ln(1.25/delta)) / epsilon.
double gaussian_mechanism_sigma(double epsilon, double delta, double sensitivity);
// Inverse of gaussian_mechanism_sigma in epsilon.
double gaussian_mechanism_epsilon(double sigma, double delta, double sensitivity);

struct DpInverseResult {
  double epsilon_block = 0.0;
  double delta_block = 0.0;
  double sigma_block = 0.0;
  double implied_sigma_eps = 0.0;  // sqrt(N) * sigma_block, the model's sigma_eps
};

// Splits a joint budget over N blocks: basic gives eps/N and delta/N; advanced gives
// eps/sqrt(N) and delta/(2N), the other half of delta reserved for the composition slack.
DpInverseResult dp_inverse(double epsilon_joint, double delta_joint, std::size_t n_blocks, double sensitivity,
                           Composition composition);

// Composes the per-block guarantee implied by the plan's noise. Advanced composition uses
// eps' = eps sqrt(2N ln(1/d')) + N eps (e^eps - 1) with d' = delta_block, delta' = N delta_block + d'.
DpBudget dp_forward(const DeploymentPlan& plan, double delta_block, Composition composition);

enum class VolumeMode { Given, Mc, Analytic };
std::string_view volume_mode_name(VolumeMode m);

struct FeeReport {
  double subsidy = 0.0;
  double volume_Q = 0.0;
  double volume_se = 0.0;  // only for VolumeMode::Mc
  double break_even_fee = 0.0;
  VolumeMode volume_mode = VolumeMode::Given;
  std::size_t n_blocks = 0;  // 0 when the volume was supplied directly
};

FeeReport break_even_fee(const MarketParams& params, double volume_Q);
// Q from the simulated per-block |net flow|.
FeeReport break_even_fee(const MarketParams& params, const SimResult& sim);
// Q = sum_k sqrt(2/pi) sqrt(beta_k^2 dt^2 Sigma(t_k) + sigma_u^2 dt), treating the block flow as a
// centred Gaussian with the closed-form posterior variance.
double analytic_block_volume(const Equilibrium& eq, std::size_t n_blocks);
FeeReport break_even_fee_analytic(const MarketParams& params, std::size_t n_blocks);

struct NetRow {
  std::string name;
  Estimate gross;
  Estimate fee_charge;  // fee paid (insider, noise) or received (mm)
  Estimate net;
  double target = 0.0;
  double z = 0.0;
  bool flagged = false;
};

struct NetOfFeeReport {
  double fee = 0.0;
  std::vector<NetRow> rows;          // insider, noise, mm
  std::vector<NetRow> charge_split;  // insider/noise fee charge vs delta_pi_I / delta_pi_N
  std::vector<std::string> flags;
};

// Partial equilibrium: no-fee trading intensities, each block's fee f * |dx + du| split
// between insider and noise traders in proportion to |dx| and |du|.
NetOfFeeReport net_of_fee_report(const MarketParams& params, const SimResult& sim, double fee);

}  // namespace privsub
