#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "quiltframe/experiments.hpp"

using namespace quiltframe;
using namespace quiltframe::experiments;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

json stripe_config() {
  return json::parse(R"({
    "L": 48,
    "seed": 7,
    "delta": 1,
    "frames": [
      {"id": 0, "window": "gaussian", "tfr": 1.0, "a": 4, "b": 6},
      {"id": 1, "window": "gaussian", "tfr": 1.0, "a": 6, "b": 4}
    ],
    "partition": {"type": "stripes", "boundaries": [0, 24]},
    "assignment": [[0, 0], [1, 1]],
    "solver": {"tol": 1e-10, "max_iter": 500, "tol_mode": "update-norm"}
  })");
}

json replacement_config() {
  return json::parse(R"({
    "L": 48,
    "frames": [
      {"id": 0, "a": 4, "b": 6},
      {"id": 1, "a": 6, "b": 4}
    ],
    "partition": {"type": "replacement", "omega": {"x": 12, "width": 16, "omega": 12, "height": 16},
                  "omega_star_delta": "auto"}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("quiltframe-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(QUILTFRAME_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("valid configs parse") {
  const ExperimentConfig cfg = parse_config(stripe_config());
  CHECK(cfg.L == 48);
  CHECK(cfg.seed == 7);
  CHECK(cfg.frames.size() == 2);
  CHECK(cfg.frames[1].a == 6);
  CHECK(cfg.partition.boundaries == std::vector<Index>{0, 24});
  CHECK(cfg.assignment.size() == 2);
  CHECK(cfg.solver.max_iter == 500);
  CHECK_FALSE(cfg.solver.relaxation.has_value());

  const ExperimentConfig rep = parse_config(replacement_config());
  CHECK(rep.seed == kDefaultSeed);
  CHECK(rep.frames[0].tighten);
  CHECK_FALSE(rep.partition.omega_star_delta.has_value());
  json fixed = replacement_config();
  fixed["partition"]["omega_star_delta"] = 5;
  CHECK(*parse_config(fixed).partition.omega_star_delta == 5);
}

TEST_CASE("bad configs are config errors") {
  const auto broken = [](auto mutate) {
    json doc = stripe_config();
    mutate(doc);
    return doc;
  };
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d.erase("L"); })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["L"] = "many"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["frames"] = json::array(); })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["frames"][0].erase("a"); })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["frames"][0]["window"] = "boxcar"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["partition"]["type"] = "hexagons"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["assignment"] = json::array({json::array({0})}); })),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["solver"]["tol_mode"] = "vibes"; })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["solver"]["tol"] = 2.0; })), ConfigError);
  CHECK_THROWS_AS(parse_config(broken([](json& d) { d["delta"] = -1; })), ConfigError);
  json rep = replacement_config();
  rep["frames"].push_back({{"id", 2}, {"a", 4}, {"b", 4}});
  CHECK_THROWS_AS(parse_config(rep), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

  const fs::path dir = scratch("badjson");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("run a stripe config") {
  const RunResult result = run(parse_config(stripe_config()));
  CHECK(result.bounds.is_frame());
  CHECK(result.report.converged);
  CHECK(*result.report.epsilon < 1e-8);
  CHECK_FALSE(result.plan.has_value());
  // bounds reported by the runner match an independent SVD
  const auto [A, B] = oracle::svd_bounds(oracle::stacked_analysis(result.quilt));
  CHECK(result.bounds.A == doctest::Approx(A).epsilon(1e-9));
  CHECK(result.bounds.B == doctest::Approx(B).epsilon(1e-9));
}

TEST_CASE("run a replacement config") {
  const RunResult result = run(parse_config(replacement_config()));
  REQUIRE(result.plan.has_value());
  CHECK(result.plan->certified);
  CHECK(result.bounds.A >= result.plan->guaranteed_A - 1e-9);
  const json j = plan_to_json(*result.plan);
  for (const char* key : {"omega", "omega_star", "F1_count", "F2_count", "A1", "C", "C_power_iteration",
                          "Lmap_norm_sq", "certified", "guaranteed_A"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["F1_count"] == result.plan->F1.size());
  CHECK(j["omega"]["rects"].size() == 1);
}

TEST_CASE("runs are deterministic") {
  const auto a = run(parse_config(stripe_config()));
  const auto b = run(parse_config(stripe_config()));
  CHECK(a.report.history == b.report.history);
  CHECK(a.report.signal == b.report.signal);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.report);
  write_history_csv(hb, b.report);
  CHECK(ha.str() == hb.str());
}

TEST_CASE("a config that is not a frame fails cleanly") {
  json doc = stripe_config();
  doc["frames"][0]["a"] = 8;
  doc["frames"][0]["b"] = 8;
  doc["frames"][0]["tighten"] = false;
  doc["frames"][1] = doc["frames"][0];
  doc["frames"][1]["id"] = 1;
  doc["delta"] = 0;
  CHECK_THROWS_AS(run(parse_config(doc)), NotAFrameError);
}

TEST_CASE("format helpers") {
  CHECK(format_fixed(1.23456, 2) == "1.23");
  CHECK(format_fixed(2.0, 0) == "2");
  CHECK(format_sci(0.5, 3) == "5.000e-01");
  CHECK(std::stod(format_sci(0.1)) == 0.1);
  CHECK(region_to_json(Region::box(48, 40, 16, 0, 4, 3))["rects"].size() == 2);
}

TEST_CASE("command line tool") {
  const fs::path dir = scratch("cli");
  CHECK(cli("nonsense") == 2);
  CHECK(cli("run") == 2);
  CHECK(cli("run --config /nonexistent.json --out " + dir.string()) == 2);

  std::ofstream(dir / "stripes.json") << stripe_config().dump();
  CHECK(cli("run --config " + (dir / "stripes.json").string() + " --out " + (dir / "a").string()) == 0);
  CHECK(cli("run --config " + (dir / "stripes.json").string() + " --out " + (dir / "b").string()) == 0);
  for (const char* name : {"lattice.csv", "history.csv"}) {
    REQUIRE(fs::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }

  std::ofstream(dir / "replace.json") << replacement_config().dump();
  CHECK(cli("run --config " + (dir / "replace.json").string() + " --out " + (dir / "r").string()) == 0);
  const json plan = json::parse(slurp(dir / "r" / "plan.json"));
  CHECK(plan["certified"] == true);

  CHECK(cli("figure1 --out " + (dir / "fig").string()) == 0);
  CHECK(slurp(dir / "fig" / "figure1_lattice.csv").starts_with("frame_id,x,omega\n"));
}

}  // TEST_SUITE
