#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "privsub/error.hpp"
#include "privsub/lvr.hpp"

using namespace privsub;
using doctest::Approx;

namespace {

CpammParams amm(double k, double sigma, double q0 = 1.0) {
  CpammParams p;
  p.k = k;
  p.sigma = sigma;
  p.q0 = q0;
  return p;
}

// E of the integral of (sigma^2/8) V(q_t) dt by quadrature over the lognormal law of q_t and Simpson in t.
double quadrature_expected_integral(const CpammParams& p) {
  auto mean_sqrt_q = [&](double t) {
    if (t == 0.0) return std::sqrt(p.q0);
    const int n = 4001;
    const double h = 16.0 / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = -8.0 + h * i;
      const double q = p.q0 * std::exp((p.mu_drift - 0.5 * p.sigma * p.sigma) * t + p.sigma * std::sqrt(t) * z);
      acc += std::sqrt(q) * std::exp(-0.5 * z * z) * (i == 0 || i == n - 1 ? 0.5 : 1.0);
    }
    return acc * h / std::sqrt(2.0 * std::numbers::pi);
  };
  const int m = 200;
  const double dt = p.horizon_T / m;
  double s = 0.0;
  for (int j = 0; j <= m; ++j) {
    const double w = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    s += w * mean_sqrt_q(j * dt);
  }
  return p.sigma * p.sigma / 8.0 * 2.0 * std::sqrt(p.k) * s * dt / 3.0;
}

}  // namespace

TEST_CASE("LVR rate reference values") {
  CHECK(lvr_rate(amm(1e4, 0.2), 1.0) == Approx(1.0).epsilon(1e-14));
  CHECK(lvr_rate(amm(100, 0.5), 4.0) == Approx(1.25).epsilon(1e-14));
  CHECK(lvr_rate(amm(100, 0.0), 4.0) == 0.0);
  CHECK(lvr_rate_curvature_form(amm(100, 0.0), 4.0) == 0.0);
  CHECK(amm_value(1e4, 1.0) == 200.0);
  CHECK_THROWS_AS(lvr_rate(amm(100, 0.5), 0.0), ValidationError);
  CHECK_THROWS_AS(lvr_rate(amm(-1, 0.5), 1.0), ValidationError);
}

TEST_CASE("two forms of the LVR rate agree on a log grid") {
  for (double k : {1e-2, 1.0, 1e4, 1e8}) {
    for (int i = -60; i <= 60; ++i) {
      const double q = std::pow(10.0, i / 10.0);
      const auto p = amm(k, 0.37);
      const double a = lvr_rate(p, q);
      const double b = lvr_rate_curvature_form(p, q);
      CHECK(std::fabs(a - b) <= 1e-12 * a);
    }
  }
}

TEST_CASE("rebalancing loss") {
  // portfolio form against the closed form sqrt(k) (sqrt(q1) - sqrt(q0))^2 / sqrt(q0)
  for (double q0 : {0.5, 1.0, 3.0}) {
    for (double g : {0.9, 0.99, 1.0, 1.01, 1.3}) {
      const double q1 = q0 * g;
      const double k = 1e4;
      const double closed = std::sqrt(k) * std::pow(std::sqrt(q1) - std::sqrt(q0), 2) / std::sqrt(q0);
      const double loss = rebalancing_loss(k, q0, q1);
      CHECK(loss >= 0.0);
      CHECK(loss == Approx(closed).epsilon(1e-6).scale(1e-9));
    }
  }
  CHECK(rebalancing_loss(1e4, 2.0, 2.0) == 0.0);
}

TEST_CASE("expected integral matches quadrature") {
  for (double mu : {0.0, 0.1, -0.3}) {
    auto p = amm(1e4, 0.2);
    p.mu_drift = mu;
    p.horizon_T = 2.0;
    CHECK(expected_lvr_integral(p) == Approx(quadrature_expected_integral(p)).epsilon(1e-8));
  }
  CHECK(expected_lvr_integral(amm(1e4, 0.0)) == 0.0);
}

TEST_CASE("LVR simulation") {
  LvrSimConfig cfg;
  cfg.n_steps = 500;
  cfg.n_paths = 2000;
  cfg.threads = 1;
  const auto r = simulate_lvr(amm(1e4, 0.2), cfg);
  CHECK(r.min_step_loss >= 0.0);
  CHECK(r.relative_gap < 0.02);
  CHECK(std::fabs(r.integral.z_score(r.expected_integral)) < 4.0);
  CHECK_FALSE(r.drift_outside_comparison);

  const auto flat = simulate_lvr(amm(1e4, 0.0), cfg);
  CHECK(flat.mc_lvr.mean == 0.0);
  CHECK(flat.integral.mean == 0.0);
  CHECK(flat.relative_gap == 0.0);

  cfg.threads = 3;
  const auto again = simulate_lvr(amm(1e4, 0.2), cfg);
  CHECK(again.mc_lvr.mean == r.mc_lvr.mean);
  CHECK(again.mc_lvr.se == r.mc_lvr.se);

  cfg.n_paths = 0;
  CHECK_THROWS_AS(simulate_lvr(amm(1e4, 0.2), cfg), ValidationError);
}

TEST_CASE("LVR is quadratic in volatility") {
  LvrSimConfig cfg;
  cfg.n_steps = 400;
  cfg.n_paths = 2000;
  cfg.threads = 1;
  const double lo = simulate_lvr(amm(1e4, 0.05), cfg).mc_lvr.mean;
  const double hi = simulate_lvr(amm(1e4, 0.1), cfg).mc_lvr.mean;
  CHECK(hi / lo > 3.8);
  CHECK(hi / lo < 4.2);
}

TEST_CASE("LVR CSV") {
  LvrSimConfig cfg;
  cfg.n_steps = 25;
  cfg.n_paths = 4;
  cfg.threads = 1;
  std::ostringstream csv;
  simulate_lvr(amm(1e4, 0.2), cfg, &csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kLvrCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows >= 25);
  CHECK(rows <= 26);
}

TEST_CASE("correspondence report") {
  const auto small = correspondence_report({1.0, 1.0, 0.1, 1.0, 0.0}, amm(1e4, 0.2));
  CHECK(small.rows.size() == 6);
  CHECK(small.privacy_rate == Approx(0.0099504).epsilon(1e-6));
  CHECK(small.small_noise_approx == Approx(0.01));
  CHECK(std::fabs(small.privacy_rate - small.small_noise_approx) / small.small_noise_approx < 0.005);
  CHECK(small.regime == "small-noise");
  CHECK(small.lvr_rate == Approx(1.0));
  CHECK(small.lvr_noise_factor * small.lvr_committed_factor == Approx(small.lvr_rate));
  CHECK(small.privacy_noise_factor * small.privacy_committed_factor == Approx(small.privacy_rate));
  CHECK(small.note.find("not comparable") != std::string::npos);

  const auto large = correspondence_report({1.0, 1.0, 100.0, 1.0, 0.0}, amm(1e4, 0.2));
  CHECK(large.privacy_rate == Approx(99.995).epsilon(1e-6));
  CHECK(large.large_noise_approx == Approx(100.0));
  CHECK(large.regime == "large-noise");
  CHECK(correspondence_report({1.0, 1.0, 0.0, 1.0, 0.0}, amm(1e4, 0.2)).regime == "no-noise");
}
