#include "privsub/deploy.hpp"

#include <cmath>
#include <numbers>

#include "privsub/error.hpp"

namespace privsub {

namespace {

void require_delta(const char* field, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError(field, "must lie in (0, 1)");
}

void require_positive(const char* field, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(field, "must be positive and finite");
}

}  // namespace

std::string_view composition_name(Composition c) { return c == Composition::Basic ? "basic" : "advanced"; }

Composition parse_composition(std::string_view name) {
  if (name == "basic") return Composition::Basic;
  if (name == "advanced") return Composition::Advanced;
  throw ValidationError("composition", "expected basic|advanced, got '" + std::string(name) + "'");
}

std::string_view volume_mode_name(VolumeMode m) {
  switch (m) {
    case VolumeMode::Mc:
      return "mc";
    case VolumeMode::Analytic:
      return "analytic";
    case VolumeMode::Given:
      break;
  }
  return "given";
}

double DeploymentPlan::implied_sigma_eps() const {
  return std::sqrt(static_cast<double>(n_blocks) * per_block_noise_var);
}

double DeploymentPlan::sigma_block() const { return std::sqrt(per_block_noise_var); }

DeploymentPlan DeploymentPlan::from_sigma_eps(std::size_t n_blocks, double sigma_eps, double sensitivity) {
  if (n_blocks < 1) throw ValidationError("blocks", "need at least one block");
  if (!(sigma_eps >= 0.0)) throw ValidationError("sigma_eps", "must be non-negative");
  require_positive("sensitivity", sensitivity);
  return {n_blocks, sigma_eps * sigma_eps / static_cast<double>(n_blocks), sensitivity};
}

double gaussian_mechanism_sigma(double epsilon, double delta, double sensitivity) {
  require_positive("epsilon", epsilon);
  require_delta("delta", delta);
  require_positive("sensitivity", sensitivity);
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

double gaussian_mechanism_epsilon(double sigma, double delta, double sensitivity) {
  require_positive("sigma_block", sigma);
  require_delta("delta", delta);
  require_positive("sensitivity", sensitivity);
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / sigma;
}

DpInverseResult dp_inverse(double epsilon_joint, double delta_joint, std::size_t n_blocks, double sensitivity,
                           Composition composition) {
  require_positive("epsilon_joint", epsilon_joint);
  require_delta("delta", delta_joint);
  if (n_blocks < 1) throw ValidationError("blocks", "need at least one block");
  const double n = static_cast<double>(n_blocks);

  DpInverseResult out;
  if (composition == Composition::Basic) {
    out.epsilon_block = epsilon_joint / n;
    out.delta_block = delta_joint / n;
  } else {
    out.epsilon_block = epsilon_joint / std::sqrt(n);
    out.delta_block = delta_joint / (2.0 * n);
  }
  require_delta("delta_block", out.delta_block);
  out.sigma_block = gaussian_mechanism_sigma(out.epsilon_block, out.delta_block, sensitivity);
  out.implied_sigma_eps = std::sqrt(n) * out.sigma_block;
  return out;
}

DpBudget dp_forward(const DeploymentPlan& plan, double delta_block, Composition composition) {
  if (plan.n_blocks < 1) throw ValidationError("blocks", "need at least one block");
  if (!(plan.per_block_noise_var > 0.0)) {
    throw ValidationError("per_block_noise_var", "zero privacy noise gives no finite epsilon");
  }
  require_delta("delta_block", delta_block);
  const double n = static_cast<double>(plan.n_blocks);

  DpBudget b;
  b.composition = composition;
  b.delta_block = delta_block;
  b.epsilon_block = gaussian_mechanism_epsilon(plan.sigma_block(), delta_block, plan.sensitivity);
  if (composition == Composition::Basic) {
    b.epsilon_joint = n * b.epsilon_block;
    b.delta_joint = n * delta_block;
  } else {
    const double slack = delta_block;
    b.epsilon_joint = b.epsilon_block * std::sqrt(2.0 * n * std::log(1.0 / slack)) +
                      n * b.epsilon_block * std::expm1(b.epsilon_block);
    b.delta_joint = n * delta_block + slack;
  }
  if (!(b.delta_joint < 1.0)) {
    throw ValidationError("delta_block", "composed delta reaches 1 over " + std::to_string(plan.n_blocks) + " blocks");
  }
  return b;
}

FeeReport break_even_fee(const MarketParams& params, double volume_Q) {
  if (!(volume_Q > 0.0) || !std::isfinite(volume_Q)) throw ValidationError("volume", "must be positive");
  FeeReport r;
  r.subsidy = welfare_closed_form(params).subsidy;
  r.volume_Q = volume_Q;
  r.break_even_fee = r.subsidy / volume_Q;
  return r;
}

FeeReport break_even_fee(const MarketParams& params, const SimResult& sim) {
  FeeReport r = break_even_fee(params, sim.volume.mean);
  r.volume_se = sim.volume.se;
  r.volume_mode = VolumeMode::Mc;
  r.n_blocks = sim.n_steps;
  return r;
}

double analytic_block_volume(const Equilibrium& eq, std::size_t n_blocks) {
  if (n_blocks < 1) throw ValidationError("blocks", "need at least one block");
  const double T = eq.params.horizon_T;
  const double dt = T / static_cast<double>(n_blocks);
  const double su2 = eq.params.sigma_u * eq.params.sigma_u;
  double total = 0.0;
  for (std::size_t k = 0; k < n_blocks; ++k) {
    const double t = T * (static_cast<double>(k) / static_cast<double>(n_blocks));
    // beta^2 Sigma = c^2 / Sigma
    const double insider_var = eq.c * eq.c / eq.posterior_variance(t) * dt * dt;
    total += std::sqrt(insider_var + su2 * dt);
  }
  return std::sqrt(2.0 / std::numbers::pi) * total;
}

FeeReport break_even_fee_analytic(const MarketParams& params, std::size_t n_blocks) {
  FeeReport r = break_even_fee(params, analytic_block_volume(solve_equilibrium(params), n_blocks));
  r.volume_mode = VolumeMode::Analytic;
  r.n_blocks = n_blocks;
  return r;
}

NetOfFeeReport net_of_fee_report(const MarketParams& params, const SimResult& sim, double fee) {
  if (!(fee >= 0.0) || !std::isfinite(fee)) throw ValidationError("fee", "must be non-negative");
  if (sim.n_paths < 2) throw ValidationError("paths", "standard errors need at least 2 paths");
  const WelfareReport w = welfare_closed_form(params);
  const double classical = params.sigma_v * params.sigma_u * std::sqrt(params.horizon_T);
  const std::size_t n = sim.n_paths;

  std::vector<double> charge_I(n), charge_N(n), income_M(n), net_I(n), net_N(n), net_M(n);
  for (std::size_t i = 0; i < n; ++i) {
    charge_I[i] = fee * sim.path_fee_base_I[i];
    charge_N[i] = fee * sim.path_fee_base_N[i];
    income_M[i] = fee * sim.path_volume[i];
    net_I[i] = sim.path_pi_I[i] - charge_I[i];
    net_N[i] = sim.path_pi_N[i] - charge_N[i];
    net_M[i] = sim.path_pi_M[i] + income_M[i];
  }

  NetOfFeeReport rep;
  rep.fee = fee;
  auto make_row = [&](std::string name, const Estimate& gross, const std::vector<double>& charge,
                      const std::vector<double>& net, double target) {
    NetRow row;
    row.name = std::move(name);
    row.gross = gross;
    row.fee_charge = estimate(charge);
    row.net = estimate(net);
    row.target = target;
    row.z = row.net.z_score(target);
    row.flagged = !(std::fabs(row.z) <= kZFlagThreshold);
    return row;
  };
  rep.rows.push_back(make_row("insider", sim.pi_I, charge_I, net_I, classical));
  rep.rows.push_back(make_row("noise", sim.pi_N, charge_N, net_N, -classical));
  rep.rows.push_back(make_row("mm", sim.pi_M, income_M, net_M, 0.0));
  for (const auto& row : rep.rows) {
    if (row.flagged) rep.flags.push_back(row.name + " net: |z| = " + std::to_string(std::fabs(row.z)) + " > 3");
  }

  auto split_row = [&](std::string name, const std::vector<double>& charge, double target) {
    NetRow row;
    row.name = std::move(name);
    row.fee_charge = estimate(charge);
    row.net = row.fee_charge;
    row.target = target;
    row.z = row.fee_charge.z_score(target);
    row.flagged = !(std::fabs(row.z) <= kZFlagThreshold);
    if (row.flagged) {
      rep.flags.push_back(row.name + ": volume-share fee charge " + std::to_string(row.fee_charge.mean) +
                          " differs from incremental gain " + std::to_string(target));
    }
    return row;
  };
  rep.charge_split.push_back(split_row("insider_charge", charge_I, w.delta_pi_I));
  rep.charge_split.push_back(split_row("noise_charge", charge_N, w.delta_pi_N));
  return rep;
}

}  // namespace privsub
