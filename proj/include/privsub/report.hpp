#pragma once

// JSON views of the library's result types. Field names are stable; every
// report built by the CLI also carries a "formulas" map from field name to
// the closed-form expression that produced it.

#include <json.hpp>
#include <string_view>

#include "privsub/core.hpp"
#include "privsub/deploy.hpp"
#include "privsub/lvr.hpp"
#include "privsub/schedule.hpp"
#include "privsub/sim.hpp"

namespace privsub::report {

using nlohmann::json;

inline constexpr std::string_view kVersion = "privsub 1.0.0";

json to_json(const Estimate& e);
json to_json(const MarketParams& p);
json to_json(const Equilibrium& eq, std::size_t sigma_samples);
json to_json(const WelfareReport& w);
json to_json(const ScheduleSubsidy& s);
json to_json(const SimResult& r);
json to_json(const WelfareComparison& c);
json to_json(const FeeReport& f);
json to_json(const NetOfFeeReport& n);
json to_json(const DpInverseResult& d);
json to_json(const DpBudget& b);
json to_json(const LvrResult& r);
json to_json(const CorrespondenceReport& c);

json equilibrium_formulas();
json welfare_formulas();
json simulation_formulas();
json schedule_formulas();
json fee_formulas();
json dp_formulas();
json lvr_formulas();
json correspondence_formulas();

}  // namespace privsub::report
