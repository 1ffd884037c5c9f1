#include <doctest.h>

#include <json.hpp>

#include "support/cli_runner.hpp"

using clirun::run;
using Json = nlohmann::json;

TEST_CASE("classify") {
  const auto dir = clirun::scratch_dir("classify");
  SUBCASE("default boundary kernel") {
    const auto r = run({"classify", "--out", (dir / "a").string()});
    CHECK(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["regime"] == "boundary");
    CHECK(j["valid"] == true);
    CHECK(clirun::slurp(dir / "a" / "classify.json") == r.out);
  }
  SUBCASE("short memory") {
    const auto cfg = clirun::write_file(dir / "s.json", R"({"kernel": {"rows": [[-0.9, -0.9]]}})");
    const auto r = run({"classify", "--config", cfg.string(), "--out", (dir / "s").string()});
    CHECK(r.code == 0);
    CHECK(Json::parse(r.out)["regime"] == "short");
  }
  SUBCASE("invalid exponents exit 2") {
    const auto cfg = clirun::write_file(dir / "i.json", R"({"kernel": {"rows": [[-0.5, -1.0]]}})");
    const auto r = run({"classify", "--config", cfg.string(), "--out", (dir / "i").string()});
    CHECK(r.code == 2);
    CHECK(Json::parse(r.out)["valid"] == false);
  }
  SUBCASE("malformed JSON reports line and column") {
    const auto cfg = clirun::write_file(dir / "m.json", "{\n  \"seed\": 1\n  \"n_grid\": [1]\n}");
    const auto r = run({"classify", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK(r.log.find("line 3") != std::string::npos);
  }
  SUBCASE("unknown key names the field") {
    const auto cfg = clirun::write_file(dir / "u.json", R"({"budget": {"flops": 1}})");
    const auto r = run({"classify", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK(r.log.find("budget.flops") != std::string::npos);
  }
  SUBCASE("wrong type names the field") {
    const auto cfg = clirun::write_file(dir / "t.json", R"({"n_grid": [256, "x"]})");
    const auto r = run({"classify", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK(r.log.find("n_grid[1]") != std::string::npos);
  }
}

TEST_CASE("command line errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"classify", "--threads", "0"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("resolved config round trip") {
  const auto dir = clirun::scratch_dir("roundtrip");
  const auto cfg = clirun::write_file(dir / "c.json", R"({"n_grid": [64, 128, 256], "lag_horizon": 16, "seed": 5})");
  const auto a = run({"variance", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "9"});
  REQUIRE(a.code == 0);
  const Json resolved = Json::parse(clirun::slurp(dir / "a" / "resolved_config.json"));
  CHECK(resolved["seed"] == 9);
  CHECK(resolved["lag_horizon"] == 16);
  CHECK(resolved["replicates"] == 2000);
  CHECK(resolved["kernel"]["rows"][0][0] == -0.75);
  // Re-running the resolved config reproduces every file.
  const auto before = clirun::snapshot(dir / "a");
  const auto b = run({"variance", "--config", (dir / "a" / "resolved_config.json").string()});
  REQUIRE(b.code == 0);
  CHECK(clirun::snapshot(dir / "a") == before);
  CHECK(b.out == a.out);
}

TEST_CASE("budget exit code") {
  const auto dir = clirun::scratch_dir("budget");
  const auto cfg = clirun::write_file(dir / "c.json", R"({"n_grid": [512], "lag_horizon": 64, "replicates": 100})");
  const auto r = run({"clt", "--config", cfg.string(), "--out", (dir / "o").string(), "--budget", "1000"});
  CHECK(r.code == 3);
}

TEST_CASE("clt needs a finite horizon") {
  const auto dir = clirun::scratch_dir("clt_inf");
  const auto cfg = clirun::write_file(dir / "c.json", R"({"n_grid": [512], "lag_horizon": "infinite"})");
  CHECK(run({"clt", "--config", cfg.string(), "--out", (dir / "o").string()}).code == 2);
}

TEST_CASE("linear and contractions outputs") {
  const auto dir = clirun::scratch_dir("tables");
  const auto cfg = clirun::write_file(dir / "c.json", R"({"n_grid": [64, 128, 256], "contractions": {"lag_horizon": 16}})");
  const auto l = run({"linear", "--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(l.code == 0);
  CHECK(l.out.rfind("N,gamma,", 0) == 0);
  const auto c = run({"contractions", "--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK((c.code == 0 || c.code == 4));
  const Json j = Json::parse(c.out);
  CHECK(j["decay_ok"] == true);
  CHECK(clirun::slurp(dir / "o" / "contractions.csv").rfind("N,inner_product,contraction_norm_r1\n", 0) == 0);
}
