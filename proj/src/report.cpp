#include "privsub/report.hpp"

namespace privsub::report {

json to_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"n", e.n}}; }

json to_json(const MarketParams& p) {
  return {{"sigma_v", p.sigma_v}, {"sigma_u", p.sigma_u}, {"sigma_eps", p.sigma_eps},
          {"horizon_T", p.horizon_T}, {"p0", p.p0}};
}

json to_json(const Equilibrium& eq, std::size_t sigma_samples) {
  json samples = json::array();
  const double T = eq.params.horizon_T;
  for (std::size_t i = 0; i < sigma_samples; ++i) {
    const double t = sigma_samples == 1 ? 0.0
                                        : T * (static_cast<double>(i) / static_cast<double>(sigma_samples - 1));
    json row = {{"t", t}, {"Sigma", eq.posterior_variance(t)}};
    row["beta"] = t < T ? json(eq.trading_intensity(t)) : json(nullptr);
    samples.push_back(std::move(row));
  }
  return {{"lambda", eq.lambda}, {"c", eq.c}, {"alpha", eq.alpha}, {"gamma0", eq.gamma0}, {"Sigma_samples", samples}};
}

json to_json(const WelfareReport& w) {
  return {{"pi_I", w.pi_I},
          {"pi_N", w.pi_N},
          {"pi_M", w.pi_M},
          {"subsidy", w.subsidy},
          {"delta_pi_I", w.delta_pi_I},
          {"delta_pi_N", w.delta_pi_N},
          {"share_ratio", w.share_ratio},
          {"single_period_subsidy", w.single_period_subsidy}};
}

json to_json(const ScheduleSubsidy& s) {
  json rates = json::array();
  for (const auto& r : s.rates) rates.push_back({{"t_start", r.t_start}, {"t_end", r.t_end}, {"rate", r.rate}});
  return {{"mean_variance", s.mean_variance}, {"lambda", s.lambda}, {"subsidy", s.subsidy}, {"segment_rates", rates}};
}

json to_json(const SimResult& r) {
  json buckets = json::array();
  for (std::size_t j = 0; j < r.insider_by_bucket.size(); ++j) {
    buckets.push_back({{"t_start", r.bucket_edges[j]},
                       {"t_end", r.bucket_edges[j + 1]},
                       {"insider_profit", to_json(r.insider_by_bucket[j])}});
  }
  return {{"pi_I", to_json(r.pi_I)},
          {"pi_N", to_json(r.pi_N)},
          {"pi_M", to_json(r.pi_M)},
          {"volume_Q", to_json(r.volume)},
          {"terminal_price_error", to_json(r.terminal_error)},
          {"insider_profit_by_bucket", buckets},
          {"filter_max_deviation", r.filter_max_deviation},
          {"filter_terminal_var", r.filter_terminal_var},
          {"price_mean_gap_max", r.price_mean_gap_max},
          {"zero_sum_max", r.zero_sum_max},
          {"lambda", r.lambda},
          {"scheduled", r.scheduled},
          {"n_paths", r.n_paths},
          {"n_steps", r.n_steps},
          {"seed", r.seed},
          {"clearing", std::string(clearing_name(r.clearing))}};
}

json to_json(const WelfareComparison& c) {
  json rows = json::array();
  for (const auto& row : c.rows) {
    rows.push_back({{"quantity", row.name},
                    {"closed_form", row.closed_form},
                    {"mc_mean", row.mc.mean},
                    {"se", row.mc.se},
                    {"z", row.z},
                    {"flagged", row.flagged}});
  }
  return rows;
}

json to_json(const FeeReport& f) {
  json j = {{"subsidy", f.subsidy},
            {"volume_Q", f.volume_Q},
            {"break_even_fee", f.break_even_fee},
            {"volume_mode", std::string(volume_mode_name(f.volume_mode))}};
  if (f.volume_mode == VolumeMode::Mc) j["volume_se"] = f.volume_se;
  if (f.n_blocks > 0) j["n_blocks"] = f.n_blocks;
  return j;
}

namespace {

json net_row(const NetRow& r) {
  return {{"name", r.name},      {"gross", to_json(r.gross)}, {"fee_charge", to_json(r.fee_charge)},
          {"net", to_json(r.net)}, {"target", r.target},      {"z", r.z},
          {"flagged", r.flagged}};
}

}  // namespace

json to_json(const NetOfFeeReport& n) {
  json rows = json::array();
  for (const auto& r : n.rows) rows.push_back(net_row(r));
  json split = json::array();
  for (const auto& r : n.charge_split) split.push_back(net_row(r));
  return {{"fee", n.fee}, {"rows", rows}, {"charge_split", split}, {"flags", n.flags}};
}

json to_json(const DpInverseResult& d) {
  return {{"epsilon_block", d.epsilon_block},
          {"delta_block", d.delta_block},
          {"sigma_block", d.sigma_block},
          {"implied_sigma_eps", d.implied_sigma_eps}};
}

json to_json(const DpBudget& b) {
  return {{"epsilon_block", b.epsilon_block},
          {"delta_block", b.delta_block},
          {"epsilon_joint", b.epsilon_joint},
          {"delta_joint", b.delta_joint},
          {"composition", std::string(composition_name(b.composition))}};
}

json to_json(const LvrResult& r) {
  return {{"mc_lvr", to_json(r.mc_lvr)},
          {"integral", to_json(r.integral)},
          {"expected_integral", r.expected_integral},
          {"relative_gap", r.relative_gap},
          {"min_step_loss", r.min_step_loss},
          {"drift_outside_comparison", r.drift_outside_comparison},
          {"n_steps", r.config.n_steps},
          {"n_paths", r.config.n_paths},
          {"seed", r.config.master_seed}};
}

json to_json(const CorrespondenceReport& c) {
  json rows = json::array();
  for (const auto& r : c.rows) rows.push_back({{"concept", r.concept_name}, {"lvr", r.lvr}, {"privacy", r.privacy}});
  return {{"columns", {"concept", "lvr", "privacy"}},
          {"rows", rows},
          {"lvr",
           {{"rate_at_q0", c.lvr_rate},
            {"noise_factor", c.lvr_noise_factor},
            {"committed_factor", c.lvr_committed_factor},
            {"cumulative_expected", c.lvr_cumulative_expected},
            {"solvency", c.lvr_solvency}}},
          {"privacy",
           {{"rate", c.privacy_rate},
            {"noise_factor", c.privacy_noise_factor},
            {"committed_factor", c.privacy_committed_factor},
            {"cumulative", c.privacy_cumulative},
            {"small_noise_approx", c.small_noise_approx},
            {"large_noise_approx", c.large_noise_approx},
            {"regime", c.regime},
            {"solvency", c.privacy_solvency}}},
          {"note", c.note}};
}

json equilibrium_formulas() {
  return {{"lambda", "sigma_v / sqrt(T (sigma_u^2 + sigma_eps^2))"},
          {"c", "sigma_v sqrt((sigma_u^2 + sigma_eps^2) / T)"},
          {"alpha", "1 / (2 lambda)"},
          {"gamma0", "c T / 2"},
          {"Sigma", "sigma_v^2 (1 - t/T)"},
          {"beta", "c / Sigma(t)"}};
}

json welfare_formulas() {
  return {{"pi_I", "c T = sigma_v sqrt(T (sigma_u^2 + sigma_eps^2))"},
          {"pi_N", "-lambda sigma_u^2 T"},
          {"pi_M", "-lambda sigma_eps^2 T"},
          {"subsidy", "sqrt(T) sigma_v sigma_eps^2 / sqrt(sigma_u^2 + sigma_eps^2)"},
          {"delta_pi_I", "sigma_v sqrt(T) (sqrt(sigma_u^2 + sigma_eps^2) - sigma_u)"},
          {"delta_pi_N", "sigma_v sigma_u sqrt(T) (sqrt(sigma_u^2 + sigma_eps^2) - sigma_u) / sqrt(sigma_u^2 + sigma_eps^2)"},
          {"share_ratio", "sqrt(sigma_u^2 + sigma_eps^2) / sigma_u"},
          {"single_period_subsidy", "sigma_v sigma_eps^2 / (2 sqrt(sigma_u^2 + sigma_eps^2))"}};
}

json simulation_formulas() {
  return {{"dx", "beta(t_k) (v - p_k) dt"},
          {"du", "sigma_u sqrt(dt) Z_u"},
          {"deps", "sigma_eps(t_k) sqrt(dt) Z_eps"},
          {"p", "p_{k+1} = p_k + lambda (dx + du + deps)"},
          {"pi_I", "sum (v - p_settle) dx"},
          {"pi_N", "sum (v - p_settle) du"},
          {"pi_M", "sum (p_settle - v) (dx + du)"},
          {"volume_Q", "sum |dx + du|"},
          {"filter_max_deviation", "max_k |P_k - sigma_v^2 (1 - t_k/T)|, P the exact Kalman variance"},
          {"closed_form", welfare_formulas()}};
}

json schedule_formulas() {
  return {{"mean_variance", "(1/T) sum (t_end - t_start) variance"},
          {"lambda", "sigma_v / sqrt(sigma_u^2 + mean_variance)"},
          {"subsidy", "sigma_v mean_variance / sqrt(sigma_u^2 + mean_variance)"},
          {"rate", "lambda sigma_eps(t)^2"}};
}

json fee_formulas() {
  return {{"subsidy", "sqrt(T) sigma_v sigma_eps^2 / sqrt(sigma_u^2 + sigma_eps^2)"},
          {"break_even_fee", "subsidy / Q"},
          {"volume_Q_mc", "E sum_k |dx_k + du_k|"},
          {"volume_Q_analytic", "sum_k sqrt(2/pi) sqrt(beta_k^2 dt^2 Sigma(t_k) + sigma_u^2 dt)"},
          {"net_insider_target", "sigma_v sigma_u sqrt(T)"},
          {"net_noise_target", "-sigma_v sigma_u sqrt(T)"},
          {"net_mm_target", "0"}};
}

json dp_formulas() {
  return {{"sigma_block", "sensitivity sqrt(2 ln(1.25/delta_block)) / epsilon_block"},
          {"implied_sigma_eps", "sqrt(N) sigma_block"},
          {"basic", "epsilon_joint = N epsilon_block, delta_joint = N delta_block"},
          {"advanced",
           "epsilon_joint = epsilon_block sqrt(2 N ln(1/delta_block)) + N epsilon_block (exp(epsilon_block) - 1), "
           "delta_joint = (N + 1) delta_block"},
          {"inverse_basic", "epsilon_block = epsilon_joint / N, delta_block = delta_joint / N"},
          {"inverse_advanced", "epsilon_block = epsilon_joint / sqrt(N), delta_block = delta_joint / (2 N)"}};
}

json lvr_formulas() {
  return {{"V", "2 sqrt(k q)"},
          {"rate", "(sigma^2 / 8) V(q) = -1/2 sigma^2 q^2 V''(q)"},
          {"mc_lvr", "sum_k [R^y_k + q_{k+1} R^x_k - V(q_{k+1})]"},
          {"integral", "sum_k (sigma^2 / 8) V(q_k) dt"},
          {"expected_integral", "(sigma^2/8) 2 sqrt(k q0) integral_0^T exp((mu/2 - sigma^2/8) t) dt"}};
}

json correspondence_formulas() {
  return {{"lvr_rate", "sigma^2 V(q) / 8"},
          {"privacy_rate", "sigma_eps^2 sigma_v / sqrt(T (sigma_u^2 + sigma_eps^2))"},
          {"small_noise_approx", "sigma_v sigma_eps^2 / sigma_u"},
          {"large_noise_approx", "sigma_v sigma_eps"},
          {"privacy_cumulative", "privacy_rate T"}};
}

}  // namespace privsub::report
