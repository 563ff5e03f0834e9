#pragma once

// Monte Carlo verification engine: the Kyle market discretised on an N-step
// grid, with the committed pricing rule driving prices and an exact discrete
// Kalman filter running alongside as the Bayesian oracle.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "privsub/core.hpp"
#include "privsub/kernels.hpp"
#include "privsub/schedule.hpp"
#include "privsub/stats.hpp"

namespace privsub {

enum class Clearing { Post, Pre };

std::string_view clearing_name(Clearing c);
Clearing parse_clearing(std::string_view name);  // "post" | "pre"

struct SimConfig {
  std::size_t n_steps = 2000;
  std::size_t n_paths = 20000;
  std::uint64_t master_seed = 20240601;
  Clearing clearing = Clearing::Post;
  std::size_t record_paths = 0;  // leading paths written to the trajectory CSV
  unsigned threads = 0;          // 0 = hardware concurrency
  kernels::Isa isa = kernels::best_isa();
  std::size_t insider_buckets = 10;
};

void validate(const SimConfig& config);

struct KalmanUpdate {
  double mean = 0.0;
  double var = 0.0;
  double gain = 0.0;
};

// Exact linear-Gaussian update for v ~ N(prior_mean, prior_var) observed through
// increment ~ N(beta * (v - prior_mean) * dt, flow_var).
KalmanUpdate kalman_step(double prior_mean, double prior_var, double observed_increment, double beta, double dt,
                         double flow_var);

// Deterministic per-step coefficients shared by every path.
struct StepPlan {
  MarketParams params;  // sigma_eps is the root-mean-square level for scheduled runs
  double lambda = 0.0;
  double dt = 0.0;
  std::vector<kernels::KyleStep> steps;  // size N
  std::vector<double> times;             // t_0 .. t_N
  std::vector<double> closed_form_var;   // Sigma(t_k), size N + 1
  std::vector<double> filter_var;        // Kalman posterior variance, size N + 1
  bool scheduled = false;
};

StepPlan make_plan(const Equilibrium& eq, std::size_t n_steps);
StepPlan make_plan(const ScheduledEquilibrium& eq, std::size_t n_steps);

struct SimResult {
  Estimate pi_I;
  Estimate pi_N;
  Estimate pi_M;
  Estimate volume;          // sum over steps of |dx + du|
  Estimate terminal_error;  // (v - p_T)^2
  std::vector<Estimate> insider_by_bucket;  // insider profit accrued in equal time buckets
  std::vector<double> bucket_edges;         // bucket boundaries in time, size buckets + 1

  double filter_max_deviation = 0.0;  // max_k |filter_var_k - Sigma(t_k)|
  double filter_terminal_var = 0.0;
  double price_mean_gap_max = 0.0;    // max over paths and steps of |p - Kalman mean|
  double zero_sum_max = 0.0;          // max over paths and steps of |profit_I + profit_N + profit_M|

  MarketParams params;
  double lambda = 0.0;
  bool scheduled = false;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  Clearing clearing = Clearing::Post;

  // Per-path totals, indexed by path id.
  std::vector<double> path_pi_I;
  std::vector<double> path_pi_N;
  std::vector<double> path_pi_M;
  std::vector<double> path_volume;
  std::vector<double> path_fee_base_I;  // insider's volume-proportional share of each block's |dy|
  std::vector<double> path_fee_base_N;
};

// Header of the per-path trajectory CSV.
inline constexpr std::string_view kTrajectoryCsvHeader =
    "path_id,step,t,v,p,dx,du,deps,dy_obs,sigma_post,profit_I,profit_N,profit_M";

// Throws ValidationError on a bad config and SimulationAbort if any path goes non-finite.
// When trajectory_csv is non-null, the first config.record_paths paths are written to it.
SimResult simulate_plan(const StepPlan& plan, const SimConfig& config, std::ostream* trajectory_csv = nullptr);
SimResult simulate_paths(const Equilibrium& eq, const SimConfig& config, std::ostream* trajectory_csv = nullptr);
SimResult simulate_paths(const ScheduledEquilibrium& eq, const SimConfig& config,
                         std::ostream* trajectory_csv = nullptr);

struct ComparisonRow {
  std::string name;
  double closed_form = 0.0;
  Estimate mc;
  double z = 0.0;
  bool flagged = false;  // |z| > 3
};

struct WelfareComparison {
  std::vector<ComparisonRow> rows;  // pi_I, pi_N, pi_M
  std::vector<std::string> flags;
};

inline constexpr double kZFlagThreshold = 3.0;

// Monte Carlo means against the post-clearing closed forms. Throws if n_paths < 2.
WelfareComparison estimate_welfare(const SimResult& result, const MarketParams& params);

}  // namespace privsub
