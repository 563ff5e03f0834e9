#include "privsub/lvr.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "privsub/error.hpp"
#include "privsub/rng.hpp"

namespace privsub {

namespace {

constexpr std::size_t kBatch = 64;

void require_q(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("q", "must be positive and finite");
}

}  // namespace

void validate(const CpammParams& params) {
  if (!(params.k > 0.0) || !std::isfinite(params.k)) throw ValidationError("k", "must be positive");
  if (!(params.q0 > 0.0) || !std::isfinite(params.q0)) throw ValidationError("q0", "must be positive");
  if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma)) throw ValidationError("sigma", "must be non-negative");
  if (!std::isfinite(params.mu_drift)) throw ValidationError("mu_drift", "must be finite");
  if (!(params.horizon_T > 0.0) || !std::isfinite(params.horizon_T)) {
    throw ValidationError("horizon_T", "must be positive");
  }
}

double amm_value(double k, double q) { return 2.0 * std::sqrt(k * q); }

double amm_value_curvature(double k, double q) { return -std::sqrt(k) / (2.0 * q * std::sqrt(q)); }

double lvr_rate(const CpammParams& params, double q) {
  validate(params);
  require_q(q);
  return params.sigma * params.sigma / 8.0 * amm_value(params.k, q);
}

double lvr_rate_curvature_form(const CpammParams& params, double q) {
  validate(params);
  require_q(q);
  return -0.5 * params.sigma * params.sigma * q * q * amm_value_curvature(params.k, q);
}

double rebalancing_loss(double k, double q_old, double q_new) {
  require_q(q_old);
  require_q(q_new);
  const double reserve_x = std::sqrt(k / q_old);
  const double reserve_y = std::sqrt(k * q_old);
  return reserve_y + q_new * reserve_x - amm_value(k, q_new);
}

double expected_lvr_integral(const CpammParams& params) {
  validate(params);
  const double a = 0.5 * params.mu_drift - params.sigma * params.sigma / 8.0;
  const double T = params.horizon_T;
  const double time_factor = a == 0.0 ? T : std::expm1(a * T) / a;
  return params.sigma * params.sigma / 8.0 * amm_value(params.k, params.q0) * time_factor;
}

LvrResult simulate_lvr(const CpammParams& params, const LvrSimConfig& config, std::ostream* csv) {
  validate(params);
  if (config.n_steps < 1) throw ValidationError("steps", "need at least 1 step");
  if (config.n_paths < 1) throw ValidationError("paths", "need at least 1 path");
  const kernels::KernelTable& kt = kernels::table(config.isa);

  const std::size_t n_steps = config.n_steps;
  const std::size_t n_paths = config.n_paths;
  const double dt = params.horizon_T / static_cast<double>(n_steps);
  const double log_drift = (params.mu_drift - 0.5 * params.sigma * params.sigma) * dt;
  const double log_sd = params.sigma * std::sqrt(dt);
  const kernels::LvrStep step{std::sqrt(params.k), params.sigma * params.sigma / 8.0 * 2.0 * std::sqrt(params.k) * dt};

  std::vector<double> lvr(n_paths), integral(n_paths), min_step(n_paths);
  std::string csv_rows;
  std::mutex failure_mutex;
  std::size_t failed_path = std::numeric_limits<std::size_t>::max();
  std::string failure;

  const std::size_t n_batches = (n_paths + kBatch - 1) / kBatch;
  std::atomic<std::size_t> next_batch{0};

  auto run_batch = [&](std::size_t batch) {
    const std::size_t first = batch * kBatch;
    const std::size_t n = std::min(kBatch, n_paths - first);
    std::vector<double> q(n, params.q0), sq(n, std::sqrt(params.q0)), acc(n, 0.0), integ(n, 0.0),
        mins(n, std::numeric_limits<double>::infinity()), last(n, 0.0), growth(n);
    std::vector<PathStream> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.emplace_back(config.master_seed, StreamKind::LvrReference, first + i);
    const kernels::LvrLanes lanes{q.data(), sq.data(), acc.data(), integ.data(), mins.data(), last.data()};
    const bool record = csv != nullptr && first == 0;

    for (std::size_t k = 0; k < n_steps; ++k) {
      for (std::size_t i = 0; i < n; ++i) growth[i] = std::exp(log_drift + log_sd * streams[i].normal());
      kt.lvr_step(step, lanes, growth.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(q[i]) || !(q[i] > 0.0) || !std::isfinite(acc[i])) {
          std::lock_guard lock(failure_mutex);
          if (first + i < failed_path) {
            failed_path = first + i;
            failure = "reference price left (0, inf) on path " + std::to_string(first + i) + " at step " +
                      std::to_string(k + 1);
          }
          return;
        }
      }
      if (record) {
        char buf[32];
        const double t = params.horizon_T * (static_cast<double>(k + 1) / static_cast<double>(n_steps));
        for (double x : {t, q[0], amm_value(params.k, q[0]), last[0]}) {
          auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
          csv_rows.append(buf, end);
          csv_rows += ',';
        }
        csv_rows.back() = '\n';
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      lvr[first + i] = acc[i];
      integral[first + i] = integ[i];
      min_step[first + i] = mins[i];
    }
  };

  auto worker = [&] {
    for (std::size_t b = next_batch.fetch_add(1); b < n_batches; b = next_batch.fetch_add(1)) run_batch(b);
  };
  unsigned n_threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_batches));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failed_path != std::numeric_limits<std::size_t>::max()) throw SimulationAbort(failure);

  if (csv) *csv << kLvrCsvHeader << '\n' << csv_rows;

  LvrResult r;
  r.params = params;
  r.config = config;
  r.mc_lvr = estimate(lvr);
  r.integral = estimate(integral);
  r.expected_integral = expected_lvr_integral(params);
  r.min_step_loss = *std::min_element(min_step.begin(), min_step.end());
  r.relative_gap = r.integral.mean > 0.0 ? std::fabs(r.mc_lvr.mean - r.integral.mean) / r.integral.mean
                                         : (r.mc_lvr.mean == 0.0 ? 0.0 : INFINITY);
  r.drift_outside_comparison = params.mu_drift != 0.0;
  return r;
}

CorrespondenceReport correspondence_report(const MarketParams& market, const CpammParams& amm) {
  validate(amm);
  const Equilibrium eq = solve_equilibrium(market);
  const double eps2 = market.sigma_eps * market.sigma_eps;

  CorrespondenceReport r;
  r.rows = {
      {"Committed object", "AMM curve V(q) = 2 sqrt(k q)", "pricing rule lambda"},
      {"Observation channel", "external reference price q_t", "noisy order flow d(y~)_t"},
      {"Noise driver", "reference-price Brownian motion", "privacy-noise Brownian motion W^eps"},
      {"Counterparty", "arbitrageur", "informed trader"},
      {"Welfare rate", "sigma^2 V(q_t) / 8", "sigma_v sigma_eps^2 / sqrt(sigma_u^2 + sigma_eps^2)"},
      {"Solvency criterion", "integral fee >= integral LVR rate", "integral fee >= integral privacy rate"},
  };

  r.lvr_noise_factor = amm.sigma * amm.sigma;
  r.lvr_committed_factor = amm_value(amm.k, amm.q0) / 8.0;
  r.lvr_rate = lvr_rate(amm, amm.q0);
  r.lvr_cumulative_expected = expected_lvr_integral(amm);

  r.privacy_noise_factor = eps2;
  r.privacy_committed_factor = eq.lambda;
  r.privacy_rate = eq.lambda * eps2;
  r.privacy_cumulative = r.privacy_rate * market.horizon_T;
  r.small_noise_approx = market.sigma_v * eps2 / market.sigma_u;
  r.large_noise_approx = market.sigma_v * market.sigma_eps;
  if (market.sigma_eps == 0.0) {
    r.regime = "no-noise";
  } else if (market.sigma_eps <= 0.1 * market.sigma_u) {
    r.regime = "small-noise";
  } else if (market.sigma_eps >= 10.0 * market.sigma_u) {
    r.regime = "large-noise";
  } else {
    r.regime = "intermediate";
  }

  r.lvr_solvency = "cumulative fee income >= integral_0^T (sigma^2/8) V(q_t) dt";
  r.privacy_solvency = "f * Q >= |Pi_M| = integral_0^T lambda sigma_eps^2 dt";
  r.note =
      "Both rates factor as (noise intensity)^2 times a committed-object factor, but they are measured in "
      "different markets; their magnitudes are not comparable across columns.";
  return r;
}

}  // namespace privsub
