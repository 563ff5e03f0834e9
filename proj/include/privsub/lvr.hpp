#pragma once

// Loss-versus-rebalancing of a constant-product AMM, and its correspondence
// with the privacy subsidy of the Kyle market.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "privsub/core.hpp"
#include "privsub/kernels.hpp"
#include "privsub/stats.hpp"

namespace privsub {

struct CpammParams {
  double k = 1e4;        // reserve product R^x R^y
  double q0 = 1.0;       // initial reference price
  double sigma = 0.2;    // reference-price volatility
  double mu_drift = 0.0; // GBM drift
  double horizon_T = 1.0;
};

void validate(const CpammParams& params);

// Pool value at reference price q: 2 sqrt(k q).
double amm_value(double k, double q);
// Second derivative of amm_value in q: -sqrt(k) / (2 q^{3/2}).
double amm_value_curvature(double k, double q);

// (sigma^2 / 8) V(q)
double lvr_rate(const CpammParams& params, double q);
// -1/2 sigma^2 q^2 V''(q); equal to lvr_rate up to rounding.
double lvr_rate_curvature_form(const CpammParams& params, double q);

// Loss of the pool against a rebalancing portfolio over one price move from q_old to q_new
// with frictionless arbitrage: [R^y_old + q_new R^x_old] - V(q_new).
double rebalancing_loss(double k, double q_old, double q_new);

// E[integral_0^T (sigma^2/8) V(q_t) dt] under GBM, using E sqrt(q_t) = sqrt(q0) exp((mu/2 - sigma^2/8) t).
double expected_lvr_integral(const CpammParams& params);

struct LvrSimConfig {
  std::size_t n_steps = 2000;
  std::size_t n_paths = 10000;
  std::uint64_t master_seed = 20240601;
  unsigned threads = 0;
  kernels::Isa isa = kernels::best_isa();
};

struct LvrResult {
  Estimate mc_lvr;          // realised cumulative rebalancing loss
  Estimate integral;        // path-wise sum of (sigma^2/8) V(q_k) dt
  double expected_integral = 0.0;
  double min_step_loss = 0.0;  // smallest realised per-step loss over all paths
  double relative_gap = 0.0;   // |mc - integral| / integral, 0 when both vanish
  bool drift_outside_comparison = false;  // mu != 0
  CpammParams params;
  LvrSimConfig config;
};

inline constexpr std::string_view kLvrCsvHeader = "t,q,V,lvr_step";

// When csv is non-null, path 0 is written one row per step.
LvrResult simulate_lvr(const CpammParams& params, const LvrSimConfig& config, std::ostream* csv = nullptr);

struct CorrespondenceRow {
  std::string concept_name;
  std::string lvr;
  std::string privacy;
};

struct CorrespondenceReport {
  std::vector<CorrespondenceRow> rows;

  double lvr_rate = 0.0;  // at q0
  double lvr_noise_factor = 0.0;      // sigma^2
  double lvr_committed_factor = 0.0;  // V(q0) / 8
  double lvr_cumulative_expected = 0.0;

  double privacy_rate = 0.0;
  double privacy_noise_factor = 0.0;      // sigma_eps^2
  double privacy_committed_factor = 0.0;  // lambda = sigma_v / sqrt(T (sigma_u^2 + sigma_eps^2))
  double privacy_cumulative = 0.0;        // rate * T
  double small_noise_approx = 0.0;        // sigma_v sigma_eps^2 / sigma_u
  double large_noise_approx = 0.0;        // sigma_v sigma_eps
  std::string regime;                     // "small-noise" | "large-noise" | "intermediate" | "no-noise"

  std::string lvr_solvency;
  std::string privacy_solvency;
  std::string note;
};

CorrespondenceReport correspondence_report(const MarketParams& market, const CpammParams& amm);

}  // namespace privsub
