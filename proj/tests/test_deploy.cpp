#include <doctest.h>

#include <cmath>

#include "privsub/deploy.hpp"
#include "privsub/error.hpp"

using namespace privsub;
using doctest::Approx;

namespace {
const MarketParams kUnitNoise{1.0, 1.0, 1.0, 1.0, 0.0};
}

TEST_CASE("Gaussian mechanism calibration") {
  CHECK(gaussian_mechanism_sigma(1.0, 1e-5, 1.0) == Approx(4.8448053).epsilon(1e-7));
  CHECK(gaussian_mechanism_sigma(2.0, 1e-5, 3.0) == Approx(1.5 * 4.8448053).epsilon(1e-7));
  for (double eps : {0.01, 0.3, 1.0, 4.0}) {
    const double s = gaussian_mechanism_sigma(eps, 1e-6, 2.0);
    CHECK(gaussian_mechanism_epsilon(s, 1e-6, 2.0) == Approx(eps).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gaussian_mechanism_sigma(0.0, 1e-5, 1.0), ValidationError);
  CHECK_THROWS_AS(gaussian_mechanism_sigma(1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(gaussian_mechanism_sigma(1.0, 1e-5, 0.0), ValidationError);
}

TEST_CASE("dp_inverse") {
  const auto r = dp_inverse(10.0, 1e-5, 100, 1.0, Composition::Basic);
  CHECK(r.epsilon_block == Approx(0.1));
  CHECK(r.delta_block == Approx(1e-7));
  CHECK(r.sigma_block == Approx(57.1686).epsilon(1e-6));
  CHECK(r.implied_sigma_eps == Approx(571.686).epsilon(1e-6));

  const auto one = dp_inverse(10.0, 1e-5, 1, 1.0, Composition::Basic);
  CHECK(one.sigma_block == Approx(0.48448).epsilon(1e-5));
  CHECK(one.implied_sigma_eps == one.sigma_block);

  const auto adv = dp_inverse(10.0, 1e-5, 100, 1.0, Composition::Advanced);
  CHECK(adv.epsilon_block == Approx(1.0));
  CHECK(adv.delta_block == Approx(5e-8));
  CHECK(adv.sigma_block < r.sigma_block);

  CHECK_THROWS_AS(dp_inverse(1.0, 1e-5, 0, 1.0, Composition::Basic), ValidationError);
  CHECK_THROWS_AS(dp_inverse(-1.0, 1e-5, 10, 1.0, Composition::Basic), ValidationError);
  CHECK_THROWS_AS(parse_composition("fancy"), ValidationError);
}

TEST_CASE("dp_forward") {
  const auto plan = DeploymentPlan::from_sigma_eps(100, 48.448053);
  CHECK(plan.sigma_block() == Approx(4.8448053));
  const auto basic = dp_forward(plan, 1e-5, Composition::Basic);
  CHECK(basic.epsilon_block == Approx(1.0).epsilon(1e-7));
  CHECK(basic.epsilon_joint == Approx(100.0).epsilon(1e-7));
  CHECK(basic.delta_joint == Approx(1e-3));
  const auto adv = dp_forward(plan, 1e-5, Composition::Advanced);
  CHECK(adv.epsilon_joint == Approx(219.81).epsilon(1e-4));
  CHECK(adv.delta_joint == Approx(100e-5 + 1e-5));

  CHECK_THROWS_AS(dp_forward(DeploymentPlan::from_sigma_eps(10, 0.0), 1e-5, Composition::Basic), ValidationError);
  CHECK_THROWS_AS(dp_forward(DeploymentPlan::from_sigma_eps(1000, 1.0), 1e-3, Composition::Basic), ValidationError);
}

TEST_CASE("dp round trip and monotonicity") {
  for (std::size_t n : {1u, 7u, 100u, 5000u}) {
    for (double eps : {0.1, 1.0, 8.0}) {
      const auto inv = dp_inverse(eps, 1e-5, n, 1.0, Composition::Basic);
      const auto plan = DeploymentPlan::from_sigma_eps(n, inv.implied_sigma_eps);
      const auto fwd = dp_forward(plan, inv.delta_block, Composition::Basic);
      CHECK(std::fabs(fwd.epsilon_joint - eps) <= 1e-9 * eps);
      CHECK(fwd.delta_joint == Approx(1e-5).epsilon(1e-12));
    }
  }
  // fixed sigma_eps: joint epsilon diverges with the block count
  for (auto comp : {Composition::Basic, Composition::Advanced}) {
    double prev = 0.0;
    for (std::size_t n = 1; n <= 4096; n *= 2) {
      const double e = dp_forward(DeploymentPlan::from_sigma_eps(n, 50.0), 1e-9, comp).epsilon_joint;
      CHECK(e > prev);
      prev = e;
    }
  }
  // advanced composition wins for small per-block epsilon over many blocks
  const auto plan = DeploymentPlan::from_sigma_eps(10000, 10000.0);
  CHECK(dp_forward(plan, 1e-9, Composition::Advanced).epsilon_joint <
        dp_forward(plan, 1e-9, Composition::Basic).epsilon_joint);
}

TEST_CASE("break-even fee") {
  const auto f = break_even_fee(kUnitNoise, 10.0);
  CHECK(f.subsidy == Approx(0.7071068).epsilon(1e-7));
  CHECK(f.break_even_fee == Approx(0.07071068).epsilon(1e-7));
  CHECK(break_even_fee({1.0, 1.0, 0.0, 1.0, 0.0}, 10.0).break_even_fee == 0.0);
  CHECK_THROWS_AS(break_even_fee(kUnitNoise, 0.0), ValidationError);
  CHECK_THROWS_AS(analytic_block_volume(solve_equilibrium(kUnitNoise), 0), ValidationError);
}

TEST_CASE("analytic block volume agrees with simulation") {
  const auto eq = solve_equilibrium(kUnitNoise);
  SimConfig cfg;
  cfg.n_steps = 200;
  cfg.n_paths = 2000;
  cfg.threads = 1;
  const auto sim = simulate_paths(eq, cfg);
  const double q = analytic_block_volume(eq, 200);
  CHECK(sim.volume.mean == Approx(q).epsilon(0.02));
  const auto mc = break_even_fee(kUnitNoise, sim);
  CHECK(mc.volume_mode == VolumeMode::Mc);
  CHECK(mc.volume_Q == sim.volume.mean);
  CHECK(mc.volume_se == sim.volume.se);
  CHECK(mc.n_blocks == 200);
  // more blocks means more volume, so a smaller fee
  CHECK(break_even_fee_analytic(kUnitNoise, 400).break_even_fee < break_even_fee_analytic(kUnitNoise, 200).break_even_fee);
}

TEST_CASE("net-of-fee accounting") {
  SimConfig cfg;
  cfg.n_steps = 200;
  cfg.n_paths = 3000;
  cfg.threads = 1;
  const auto sim = simulate_paths(solve_equilibrium(kUnitNoise), cfg);

  const auto zero = net_of_fee_report(kUnitNoise, sim, 0.0);
  REQUIRE(zero.rows.size() == 3);
  for (const auto& row : zero.rows) CHECK(row.net.mean == row.gross.mean);

  const auto fee = break_even_fee(kUnitNoise, sim).break_even_fee;
  const auto rep = net_of_fee_report(kUnitNoise, sim, fee);
  const auto& mm = rep.rows[2];
  CHECK(mm.name == "mm");
  CHECK(std::fabs(mm.net.z_score(0.0)) < 4.0);
  CHECK(rep.rows[0].fee_charge.mean + rep.rows[1].fee_charge.mean == Approx(mm.fee_charge.mean).epsilon(1e-12));
  REQUIRE(rep.charge_split.size() == 2);
  CHECK_THROWS_AS(net_of_fee_report(kUnitNoise, sim, -1.0), ValidationError);
}
