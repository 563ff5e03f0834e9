#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "privsub/cli.hpp"

using nlohmann::json;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = privsub::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
  const auto r = run(std::move(args));
  REQUIRE(r.code == 0);
  return json::parse(r.out);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "privsub_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int system_exit(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("closed-form subcommands") {
  const auto eq = run_json({"equilibrium"});
  CHECK(eq["command"] == "equilibrium");
  CHECK(eq["version"] == "privsub 1.0.0");
  CHECK(eq["result"]["lambda"].get<double>() == Approx(0.7071068).epsilon(1e-7));
  CHECK(eq["config"]["sigma-eps"] == 1.0);

  const auto w = run_json({"welfare", "--sigma-v", "2", "--sigma-eps", "0.5"});
  CHECK(w["result"]["subsidy"].get<double>() == Approx(0.4472136).epsilon(1e-7));

  const auto fee = run_json({"fee", "--volume", "10"});
  CHECK(fee["result"]["break_even_fee"].get<double>() == Approx(0.07071068).epsilon(1e-7));
  CHECK(fee["result"]["volume_mode"] == "given");

  const auto inv = run_json({"dp", "inverse", "--epsilon-joint", "10", "--delta", "1e-5", "--blocks", "100"});
  CHECK(inv["result"]["implied_sigma_eps"].get<double>() == Approx(571.686).epsilon(1e-6));

  const auto map = run_json({"dp", "map", "--sigma-eps", "48.448053", "--blocks", "100", "--composition", "advanced"});
  CHECK(map["result"]["epsilon_joint"].get<double>() == Approx(219.81).epsilon(1e-4));

  const auto corr = run_json({"report", "correspondence", "--sigma-eps", "0.1"});
  CHECK(corr["result"]["rows"].size() == 6);
}

TEST_CASE("validation errors exit with 2") {
  auto r = run({"equilibrium", "--sigma-eps", "-1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("sigma_eps") != std::string::npos);
  CHECK(run({"simulate", "--paths", "0"}).code == 2);
  CHECK(run({"simulate", "--convention", "sideways"}).code == 2);
  CHECK(run({"fee", "--volume", "-3"}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"schedule", "--file", "/nonexistent.csv"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("schedule subcommand") {
  const auto a = scratch("constant.csv");
  const auto b = scratch("back.csv");
  write_file(a, "t_start,t_end,variance\n0,1,1\n");
  write_file(b, "t_start,t_end,variance\n0,0.5,0\n0.5,1,2\n");
  const auto ra = run_json({"schedule", "--file", a.string()});
  const auto rb = run_json({"schedule", "--file", b.string()});
  CHECK(ra["result"]["subsidy"].get<double>() == Approx(0.7071068).epsilon(1e-7));
  CHECK(ra["result"]["subsidy"] == rb["result"]["subsidy"]);
}

TEST_CASE("simulate output, CSV and determinism") {
  const auto csv = scratch("traj.csv");
  const std::vector<std::string> base = {"simulate", "--paths", "300", "--steps", "40", "--out-csv", csv.string(),
                                         "--record-paths", "2"};
  auto one = base;
  one.insert(one.end(), {"--threads", "1"});
  auto three = base;
  three.insert(three.end(), {"--threads", "3", "--kernel", "scalar"});
  const auto r1 = run(one);
  const auto r3 = run(three);
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r3.out);

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("path_id,step,t,", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 80);

  const auto j = json::parse(r1.out);
  CHECK(j["result"]["comparison"].size() == 3);
  CHECK(j["result"]["n_paths"] == 300);
}

TEST_CASE("config file round trip") {
  const auto first = run_json({"simulate", "--paths", "200", "--steps", "30", "--seed", "7", "--sigma-eps", "0.5"});
  const auto cfg = scratch("config.json");
  write_file(cfg, first["config"].dump());
  const auto second = run_json({"simulate", "--config", cfg.string()});
  CHECK(second["result"] == first["result"]);
  CHECK(second["config"] == first["config"]);

  // explicit flags override the file
  const auto third = run_json({"simulate", "--config", cfg.string(), "--seed", "8"});
  CHECK(third["config"]["seed"] == 8);
  CHECK(third["result"]["pi_I"] != first["result"]["pi_I"]);

  write_file(cfg, "{\"no-such-flag\": 1}");
  CHECK(run({"simulate", "--config", cfg.string()}).code == 2);
  write_file(cfg, "not json");
  CHECK(run({"simulate", "--config", cfg.string()}).code == 2);
}

TEST_CASE("fee volume modes") {
  const auto mc = run_json({"fee", "--paths", "300", "--blocks", "50"});
  CHECK(mc["result"]["volume_mode"] == "mc");
  CHECK(mc["result"].contains("net_of_fee"));
  const auto an = run_json({"fee", "--volume-mode", "analytic", "--blocks", "50"});
  CHECK(an["result"]["volume_Q"].get<double>() ==
        Approx(mc["result"]["volume_Q"].get<double>()).epsilon(0.03));
}

TEST_CASE("lvr subcommand") {
  const auto r = run_json({"lvr", "--paths", "500", "--steps", "200"});
  CHECK(r["result"]["relative_gap"].get<double>() < 0.02);
  CHECK(r["result"]["min_step_loss"].get<double>() >= 0.0);
}

TEST_CASE("installed binary exit codes") {
  const std::string bin = PRIVSUB_CLI_PATH;
  CHECK(system_exit(bin + " equilibrium > /dev/null") == 0);
  CHECK(system_exit(bin + " equilibrium --sigma-eps -1 > /dev/null 2>&1") == 2);
  CHECK(system_exit(bin + " simulate --paths 0 > /dev/null 2>&1") == 2);
  CHECK(system_exit(bin + " --version > /dev/null") == 0);
}
