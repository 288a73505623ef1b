#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cdasim/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = CDASIM_TEST_TMP;

struct Result {
  int code{-1};
  std::string err;
};

Result cli(const std::string& args, const std::string& env = {}) {
  fs::create_directories(kTmp);
  const auto err_path = kTmp / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string("\"") + CDASIM_CLI_PATH + "\" " + args +
                          " > /dev/null 2> \"" + err_path.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_path);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh(const std::string& name) {
  const auto p = kTmp / name;
  fs::remove_all(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kTmp);
  const auto p = kTmp / name;
  std::ofstream(p) << text;
  return p;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("missing config names the path") {
  const auto r = cli("run --config /no/such/config.txt --seed 1 --out " + fresh("missing").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("/no/such/config.txt") != std::string::npos);
}

TEST_CASE("unknown key names the key") {
  const auto cfg = write_config("bad.cfg", "steps = 100\nstepz = 5\n");
  const auto r = cli("run --config " + cfg.string() + " --seed 1 --out " + fresh("bad").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("stepz") != std::string::npos);

  const auto bad_value = write_config("bad_value.cfg", "tau_c = soon\n");
  const auto r2 = cli("run --config " + bad_value.string() + " --seed 1 --out " + fresh("bad2").string());
  CHECK(r2.code != 0);
  CHECK(r2.err.find("tau_c") != std::string::npos);
}

TEST_CASE("run writes one row per step and is repeatable") {
  const auto cfg = write_config("small.cfg", "steps = 1000\ntrace_fundamental = true\nlob_snapshot_steps = 999\n");
  const auto a = fresh("run_a");
  const auto b = fresh("run_b");
  REQUIRE(cli("run --config " + cfg.string() + " --seed 7 --out " + a.string()).code == 0);
  REQUIRE(cli("run --config " + cfg.string() + " --seed 7 --out " + b.string()).code == 0);
  CHECK(line_count(a / "steps.csv") == 1001);
  CHECK(slurp(a / "steps.csv") == slurp(b / "steps.csv"));
  CHECK(slurp(a / "trades.csv") == slurp(b / "trades.csv"));
  for (const char* f : {"trades.csv", "fundamental.csv", "lob_999.csv", "manifest.json", "experiment.json", "config.txt"}) {
    CAPTURE(f);
    CHECK(fs::exists(a / f));
  }

  std::ifstream in(a / "experiment.json");
  const auto m = nlohmann::json::parse(in);
  CHECK(m["config_path"] == cfg.string());
  CHECK(m["config_sha256"] == cdasim::io::sha256_hex(slurp(cfg)));
  CHECK(m["seeds"][0] == 7);
  CHECK(m["runs"][0]["status"] == "ok");
  CHECK(m.contains("version"));

  // Repeating from the saved effective configuration reproduces the run.
  const auto c = fresh("run_c");
  REQUIRE(cli("run --config " + (a / "config.txt").string() + " --seed 7 --out " + c.string()).code == 0);
  CHECK(slurp(a / "steps.csv") == slurp(c / "steps.csv"));

  // Deleting the output and re-running gives the same bytes.
  fs::remove_all(b);
  REQUIRE(cli("run --config " + cfg.string() + " --seed 7 --out " + b.string()).code == 0);
  CHECK(slurp(a / "steps.csv") == slurp(b / "steps.csv"));
}

TEST_CASE("overrides") {
  const auto cfg = write_config("override.cfg", "steps = 1000\n");
  const auto out = fresh("override");
  REQUIRE(cli("run --config " + cfg.string() + " --seed 3 --set steps=500 --set switching=false --out " + out.string())
              .code == 0);
  CHECK(line_count(out / "steps.csv") == 501);
  const auto r = cli("run --config " + cfg.string() + " --seed 3 --set steps --out " + out.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("key=value") != std::string::npos);
}

TEST_CASE("ensemble then analyze") {
  const auto cfg = write_config("ens.cfg", "steps = 60000\nseed = 4\n");
  const auto ens = fresh("ens");
  REQUIRE(cli("ensemble --config " + cfg.string() + " --seeds 2 --out " + ens.string(), "CDASIM_WORKERS=2").code == 0);
  CHECK(fs::exists(ens / "seed_4" / "steps.csv"));
  CHECK(fs::exists(ens / "seed_5" / "steps.csv"));
  std::ifstream in(ens / "experiment.json");
  const auto m = nlohmann::json::parse(in);
  CHECK(m["workers"] == 2);
  CHECK(m["seeds"] == nlohmann::json::array({4, 5}));
  CHECK(m["runs"][1]["dir"] == "seed_5");

  const auto an = fresh("analysis");
  REQUIRE(cli("analyze --in " + ens.string() + " --out " + an.string() + " --bin-width 0.02 --xmin-quantile 0.9")
              .code == 0);
  std::ifstream aj(an / "analysis.json");
  const auto a = nlohmann::json::parse(aj);
  CHECK(a["runs"] == 2);
  CHECK(a["options"]["bin_width"] == 0.02);
  CHECK(a["hurst"]["return"]["H"].is_number());
  CHECK(fs::exists(an / "sigma_vs_pc.csv"));

  CHECK(cli("analyze --in " + fresh("nothing").string() + " --out " + an.string()).code != 0);
  CHECK(cli("analyze --in " + ens.string() + " --out " + an.string() + " --bin-width 2").code == 2);
}

TEST_CASE("reproduce at a small scale") {
  const auto out = fresh("reproduce");
  const auto r = cli("reproduce-paper --scale 0.02 --homogeneous --out " + out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "runs" / "seed_1" / "steps.csv"));
  CHECK(fs::exists(out / "runs" / "seed_2" / "steps.csv"));
  CHECK(fs::exists(out / "analysis" / "analysis.json"));
  CHECK(fs::exists(out / "experiment.json"));
  CHECK(fs::exists(out / "summary.txt"));
  CHECK(cli("reproduce-paper --scale 3 --out " + out.string()).code == 2);
}

TEST_CASE("worker count from the environment") {
  const auto cfg = write_config("env.cfg", "steps = 10\n");
  const auto r = cli("ensemble --config " + cfg.string() + " --seeds 1 --out " + fresh("env").string(),
                     "CDASIM_WORKERS=zero");
  CHECK(r.code == 2);
  CHECK(r.err.find("CDASIM_WORKERS") != std::string::npos);
}
