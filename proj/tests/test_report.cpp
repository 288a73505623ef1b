#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cdasim/report.hpp"

using namespace cdasim;
using namespace cdasim::analytics;
namespace fs = std::filesystem;

namespace {

std::vector<RunOutput> small_ensemble(bool homogeneous) {
  SimConfig c;
  c.steps = 60000;
  if (homogeneous) c = c.homogeneous();
  std::vector<RunOutput> out;
  for (std::uint64_t seed : {1u, 2u}) {
    c.seed = seed;
    out.push_back(run_simulation(c));
  }
  return out;
}

}  // namespace

TEST_CASE("report over a small ensemble") {
  const auto runs = small_ensemble(false);
  const auto rep = analyze_runs(runs);
  CHECK(rep.runs == 2);
  CHECK(rep.steps == 120000);
  CHECK(rep.periods == 1200);
  REQUIRE(rep.hurst.size() == kAllSeries.size());
  for (auto kind : kAllSeries) {
    const auto& h = rep.hurst_of(kind);
    CAPTURE(to_string(kind));
    CHECK(h.error.empty());
    REQUIRE(h.pooled);
    CHECK(h.pooled->hurst);
    CHECK(h.runs == 2);
  }

  for (const char* name : {"spread", "first_gap", "return_positive", "return_negative", "volatility"}) {
    const auto& t = rep.tail(name);
    CAPTURE(std::string(name));
    // Period tails of this short ensemble fall below the minimum tail size.
    if (t.samples < 20 * kMinTail) {
      CHECK_FALSE(t.fit);
      CHECK(t.error.find("at least") != std::string::npos);
    } else {
      REQUIRE(t.fit);
      CHECK(t.fit->alpha > 1.0);
      CHECK(t.fit->n_tail >= kMinTail);
    }
    REQUIRE_FALSE(t.ccdf.empty());
    CHECK(t.ccdf.size() <= kCcdfPoints);
    CHECK(t.ccdf.front().probability == 1.0);
    for (std::size_t i = 1; i < t.ccdf.size(); ++i) CHECK(t.ccdf[i].probability < t.ccdf[i - 1].probability);
  }
  CHECK_THROWS(rep.tail("nope"));

  // The volatility tail equals a direct fit on the pooled period series.
  std::vector<double> vol;
  for (const auto& r : runs) {
    const auto s = period_series(r.records, r.config.steps_per_period, r.config.p0, r.config.pf0);
    vol.insert(vol.end(), s.volatility.begin(), s.volatility.end());
  }
  const auto direct = fit_power_law_quantile(vol, 0.95);
  REQUIRE(rep.tail("volatility").fit);
  CHECK(rep.tail("volatility").fit->alpha == doctest::Approx(direct.alpha).epsilon(1e-12));

  std::size_t counted = 0;
  for (const auto& b : rep.bins) counted += b.count;
  CHECK(counted == rep.steps);
  CHECK(rep.kurtosis.size() == rep.options.kurtosis_lags.size());
  CHECK(rep.fv_kurtosis.size() == rep.options.kurtosis_lags.size());
}

TEST_CASE("report files") {
  const auto rep = analyze_runs(small_ensemble(true));
  const auto dir = fs::temp_directory_path() / "cdasim_test_report";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto files = write_report(dir, rep);
  for (const auto& f : files) CHECK(fs::exists(f));
  for (const char* name : {"analysis.json", "dfa_return.csv", "dfa_volatility.csv", "ccdf_spread.csv",
                           "ccdf_first_gap.csv", "regimes.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }
  std::ifstream in(dir / "analysis.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["runs"] == 2);
  for (const char* key : {"hurst", "tails", "regimes", "regime_bounds", "sigma_vs_pc", "aggregational_gaussianity"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["hurst"]["volatility"]["H"].is_number());
  CHECK(j["tails"]["spread"].contains("alpha"));
  // A homogeneous market occupies one chartist bin, too few for a sigma curve.
  CHECK(j["sigma_vs_pc"]["volatility"]["argmax_pc"].is_null());
  fs::remove_all(dir);
}

TEST_CASE("analyzer input checks") {
  Analyzer a;
  Report empty = a.finish();
  CHECK(empty.runs == 0);
  for (const auto& h : empty.hurst) CHECK_FALSE(h.error.empty());
}
