#include "privsub/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "privsub/error.hpp"
#include "privsub/rng.hpp"

namespace privsub {

namespace {

constexpr std::size_t kBatch = 64;

void append_number(std::string& out, double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, end);
}

void append_number(std::string& out, std::size_t x) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, end);
}

double step_time(double T, std::size_t k, std::size_t n) {
  return T * (static_cast<double>(k) / static_cast<double>(n));
}

// Fills filter_var and gains by running the Kalman recursion on the deterministic coefficients.
void run_filter(StepPlan& plan, double sigma_u) {
  const std::size_t n = plan.steps.size();
  plan.filter_var.assign(n + 1, 0.0);
  plan.filter_var[0] = plan.params.sigma_v * plan.params.sigma_v;
  for (std::size_t k = 0; k < n; ++k) {
    auto& step = plan.steps[k];
    const double beta = step.beta_dt / plan.dt;
    const double eps_sd = step.privacy_sd / std::sqrt(plan.dt);
    const double flow_var = (sigma_u * sigma_u + eps_sd * eps_sd) * plan.dt;
    const KalmanUpdate upd = kalman_step(0.0, plan.filter_var[k], 0.0, beta, plan.dt, flow_var);
    step.gain = upd.gain;
    plan.filter_var[k + 1] = upd.var;
  }
}

// Per-lane storage for one batch of paths.
struct BatchState {
  std::vector<double> v, p, m, prof_I, prof_N, prof_M, volume, fee_I, fee_N, zero_sum, gap, dx, du, deps, dyo;
  std::vector<double> z_u, z_eps;

  explicit BatchState(std::size_t n)
      : v(n), p(n), m(n), prof_I(n), prof_N(n), prof_M(n), volume(n), fee_I(n), fee_N(n), zero_sum(n), gap(n),
        dx(n), du(n), deps(n), dyo(n), z_u(n), z_eps(n) {}

  kernels::KyleLanes lanes() {
    return {v.data(),      p.data(),      m.data(),        prof_I.data(),   prof_N.data(),
            prof_M.data(), volume.data(), fee_I.data(),    fee_N.data(),    zero_sum.data(),
            gap.data(),    dx.data(),     du.data(),       deps.data(),     dyo.data()};
  }
};

struct PathFailure {
  std::size_t path = std::numeric_limits<std::size_t>::max();
  std::string message;
};

}  // namespace

std::string_view clearing_name(Clearing c) { return c == Clearing::Post ? "post" : "pre"; }

Clearing parse_clearing(std::string_view name) {
  if (name == "post") return Clearing::Post;
  if (name == "pre") return Clearing::Pre;
  throw ValidationError("convention", "expected post|pre, got '" + std::string(name) + "'");
}

void validate(const SimConfig& config) {
  if (config.n_steps < 2) throw ValidationError("steps", "need at least 2 steps");
  if (config.n_paths < 1) throw ValidationError("paths", "need at least 1 path");
  if (config.insider_buckets < 1 || config.insider_buckets > config.n_steps) {
    throw ValidationError("insider_buckets", "must lie in [1, steps]");
  }
  if (!kernels::isa_available(config.isa)) {
    throw ValidationError("kernel", std::string(kernels::isa_name(config.isa)) + " is not available");
  }
}

KalmanUpdate kalman_step(double prior_mean, double prior_var, double observed_increment, double beta, double dt,
                         double flow_var) {
  if (!(dt > 0.0)) throw ValidationError("dt", "must be positive");
  if (!(flow_var > 0.0)) throw ValidationError("flow_var", "must be positive");
  if (!(prior_var >= 0.0)) throw ValidationError("prior_var", "must be non-negative");
  const double loading = beta * dt;  // d(increment) / d(v)
  KalmanUpdate out;
  out.gain = loading * prior_var / (loading * loading * prior_var + flow_var);
  out.mean = prior_mean + out.gain * observed_increment;
  out.var = prior_var - out.gain * loading * prior_var;
  return out;
}

StepPlan make_plan(const Equilibrium& eq, std::size_t n_steps) {
  if (n_steps < 2) throw ValidationError("steps", "need at least 2 steps");
  const MarketParams& prm = eq.params;
  const double T = prm.horizon_T;
  StepPlan plan;
  plan.params = prm;
  plan.lambda = eq.lambda;
  plan.dt = T / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(plan.dt);
  plan.steps.resize(n_steps);
  plan.times.resize(n_steps + 1);
  plan.closed_form_var.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    plan.times[k] = step_time(T, k, n_steps);
    plan.closed_form_var[k] = eq.posterior_variance(plan.times[k]);
    if (k == n_steps) break;
    plan.steps[k] = {eq.trading_intensity(plan.times[k]) * plan.dt, prm.sigma_u * sqrt_dt, prm.sigma_eps * sqrt_dt,
                     eq.lambda, 0.0};
  }
  run_filter(plan, prm.sigma_u);
  return plan;
}

StepPlan make_plan(const ScheduledEquilibrium& eq, std::size_t n_steps) {
  if (n_steps < 2) throw ValidationError("steps", "need at least 2 steps");
  const MarketParams& prm = eq.params();
  const double T = eq.schedule().horizon();
  StepPlan plan;
  plan.params = prm;
  plan.scheduled = true;
  plan.lambda = eq.lambda();
  plan.dt = T / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(plan.dt);
  plan.steps.resize(n_steps);
  plan.times.resize(n_steps + 1);
  plan.closed_form_var.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    plan.times[k] = step_time(T, k, n_steps);
    plan.closed_form_var[k] = eq.posterior_variance(plan.times[k]);
    if (k == n_steps) break;
    const double eps_sd = std::sqrt(eq.schedule().variance_at(plan.times[k]));
    plan.steps[k] = {eq.trading_intensity(plan.times[k]) * plan.dt, prm.sigma_u * sqrt_dt, eps_sd * sqrt_dt,
                     eq.lambda(), 0.0};
  }
  plan.closed_form_var[n_steps] = 0.0;
  run_filter(plan, prm.sigma_u);
  return plan;
}

SimResult simulate_plan(const StepPlan& plan, const SimConfig& config, std::ostream* trajectory_csv) {
  validate(config);
  const std::size_t n_steps = plan.steps.size();
  if (n_steps != config.n_steps) throw ValidationError("steps", "plan and config disagree on the step count");
  const std::size_t n_paths = config.n_paths;
  const std::size_t n_buckets = config.insider_buckets;
  const kernels::KernelTable& kt = kernels::table(config.isa);
  const kernels::KyleStepFn step_fn = config.clearing == Clearing::Post ? kt.kyle_step_post : kt.kyle_step_pre;
  const MarketParams& prm = plan.params;
  const std::size_t n_record = trajectory_csv ? std::min(config.record_paths, n_paths) : 0;

  std::vector<std::size_t> bucket_end(n_buckets);
  for (std::size_t j = 0; j < n_buckets; ++j) bucket_end[j] = (n_steps * (j + 1)) / n_buckets;

  SimResult res;
  res.params = prm;
  res.lambda = plan.lambda;
  res.scheduled = plan.scheduled;
  res.n_paths = n_paths;
  res.n_steps = n_steps;
  res.seed = config.master_seed;
  res.clearing = config.clearing;
  res.path_pi_I.resize(n_paths);
  res.path_pi_N.resize(n_paths);
  res.path_pi_M.resize(n_paths);
  res.path_volume.resize(n_paths);
  res.path_fee_base_I.resize(n_paths);
  res.path_fee_base_N.resize(n_paths);
  std::vector<double> terminal(n_paths), zero_sum(n_paths), gap(n_paths);
  std::vector<double> bucket_profit(n_paths * n_buckets);

  const std::size_t n_batches = (n_paths + kBatch - 1) / kBatch;
  std::vector<std::string> csv_chunks(n_record > 0 ? (n_record + kBatch - 1) / kBatch : 0);
  std::atomic<std::size_t> next_batch{0};
  std::mutex failure_mutex;
  PathFailure failure;

  auto run_batch = [&](std::size_t batch) {
    const std::size_t first = batch * kBatch;
    const std::size_t n = std::min(kBatch, n_paths - first);
    BatchState st(n);
    std::vector<PathStream> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      streams.emplace_back(config.master_seed, StreamKind::KyleMarket, first + i);
      st.v[i] = prm.p0 + prm.sigma_v * streams[i].normal();
      st.p[i] = prm.p0;
      st.m[i] = prm.p0;
    }
    std::vector<double> snapshot(n, 0.0);
    std::size_t bucket = 0;
    const std::size_t n_rec_here = first < n_record ? std::min(n, n_record - first) : 0;
    std::string* csv = n_rec_here > 0 ? &csv_chunks[batch] : nullptr;
    const kernels::KyleLanes lanes = st.lanes();

    for (std::size_t k = 0; k < n_steps; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        st.z_u[i] = streams[i].normal();
        st.z_eps[i] = streams[i].normal();
      }
      step_fn(plan.steps[k], lanes, st.z_u.data(), st.z_eps.data(), n);

      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(st.p[i]) || !std::isfinite(st.m[i])) {
          std::lock_guard lock(failure_mutex);
          if (first + i < failure.path) {
            failure.path = first + i;
            failure.message = "non-finite price on path " + std::to_string(first + i) + " at step " +
                              std::to_string(k + 1) + " (t=" + std::to_string(plan.times[k + 1]) + ")";
          }
          return;
        }
      }
      if (k + 1 == bucket_end[bucket]) {
        for (std::size_t i = 0; i < n; ++i) {
          bucket_profit[(first + i) * n_buckets + bucket] = st.prof_I[i] - snapshot[i];
          snapshot[i] = st.prof_I[i];
        }
        ++bucket;
      }
      if (csv) {
        for (std::size_t i = 0; i < n_rec_here; ++i) {
          std::string& out = *csv;
          append_number(out, first + i);
          out += ',';
          append_number(out, k + 1);
          for (double x : {plan.times[k + 1], st.v[i], st.p[i], st.dx[i], st.du[i], st.deps[i], st.dyo[i],
                           plan.filter_var[k + 1], st.prof_I[i], st.prof_N[i], st.prof_M[i]}) {
            out += ',';
            append_number(out, x);
          }
          out += '\n';
        }
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t path = first + i;
      res.path_pi_I[path] = st.prof_I[i];
      res.path_pi_N[path] = st.prof_N[i];
      res.path_pi_M[path] = st.prof_M[i];
      res.path_volume[path] = st.volume[i];
      res.path_fee_base_I[path] = st.fee_I[i];
      res.path_fee_base_N[path] = st.fee_N[i];
      const double err = st.v[i] - st.p[i];
      terminal[path] = err * err;
      zero_sum[path] = st.zero_sum[i];
      gap[path] = st.gap[i];
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
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  if (failure.path != std::numeric_limits<std::size_t>::max()) throw SimulationAbort(failure.message);

  if (trajectory_csv) {
    *trajectory_csv << kTrajectoryCsvHeader << '\n';
    for (const auto& chunk : csv_chunks) *trajectory_csv << chunk;
  }

  res.pi_I = estimate(res.path_pi_I);
  res.pi_N = estimate(res.path_pi_N);
  res.pi_M = estimate(res.path_pi_M);
  res.volume = estimate(res.path_volume);
  res.terminal_error = estimate(terminal);
  res.zero_sum_max = *std::max_element(zero_sum.begin(), zero_sum.end());
  res.price_mean_gap_max = *std::max_element(gap.begin(), gap.end());

  res.bucket_edges.resize(n_buckets + 1);
  res.bucket_edges[0] = 0.0;
  std::vector<double> column(n_paths);
  for (std::size_t j = 0; j < n_buckets; ++j) {
    res.bucket_edges[j + 1] = plan.times[bucket_end[j]];
    for (std::size_t path = 0; path < n_paths; ++path) column[path] = bucket_profit[path * n_buckets + j];
    res.insider_by_bucket.push_back(estimate(column));
  }

  for (std::size_t k = 0; k <= n_steps; ++k) {
    res.filter_max_deviation =
        std::max(res.filter_max_deviation, std::fabs(plan.filter_var[k] - plan.closed_form_var[k]));
  }
  res.filter_terminal_var = plan.filter_var.back();
  return res;
}

SimResult simulate_paths(const Equilibrium& eq, const SimConfig& config, std::ostream* trajectory_csv) {
  validate(config);
  return simulate_plan(make_plan(eq, config.n_steps), config, trajectory_csv);
}

SimResult simulate_paths(const ScheduledEquilibrium& eq, const SimConfig& config, std::ostream* trajectory_csv) {
  validate(config);
  return simulate_plan(make_plan(eq, config.n_steps), config, trajectory_csv);
}

WelfareComparison estimate_welfare(const SimResult& result, const MarketParams& params) {
  if (result.n_paths < 2) {
    throw ValidationError("paths", "standard errors need at least 2 paths");
  }
  const WelfareReport closed = welfare_closed_form(params);
  WelfareComparison out;
  auto add = [&](const char* name, double closed_value, const Estimate& mc) {
    ComparisonRow row;
    row.name = name;
    row.closed_form = closed_value;
    row.mc = mc;
    row.z = mc.z_score(closed_value);
    row.flagged = !(std::fabs(row.z) <= kZFlagThreshold);
    if (row.flagged) {
      out.flags.push_back(std::string(name) + ": |z| = " + std::to_string(std::fabs(row.z)) + " > 3");
    }
    out.rows.push_back(std::move(row));
  };
  add("pi_I", closed.pi_I, result.pi_I);
  add("pi_N", closed.pi_N, result.pi_N);
  add("pi_M", closed.pi_M, result.pi_M);
  return out;
}

}  // namespace privsub
