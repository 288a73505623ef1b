#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cdasim/analytics.hpp"
#include "cdasim/config.hpp"
#include "cdasim/engine.hpp"

namespace cdasim::analytics {

struct AnalysisOptions {
  double bin_width{0.01};
  double xmin_quantile{0.95};
  double depth_floor{kDefaultDepthFloor};
  PeriodSampling sampling{PeriodSampling::Close};
  std::vector<std::size_t> kurtosis_lags{1, 4, 16, 64};
};

struct HurstEntry {
  SeriesKind kind{SeriesKind::Return};
  std::optional<DfaResult> pooled;  // empty when the series is unavailable
  double run_mean{0.0};             // mean and standard error of per-run H
  double run_stderr{0.0};
  std::size_t runs{0};
  std::string error;
};

struct TailEntry {
  std::string name;
  std::optional<TailFit> fit;
  std::size_t samples{0};
  std::string error;
  std::vector<CcdfPoint> ccdf;  // thinned to at most kCcdfPoints, evenly in log probability
  std::optional<TailShape> shape;  // of the full empirical CCDF above x_min
};

inline constexpr std::size_t kCcdfPoints = 2000;

struct Report {
  std::size_t runs{0};
  std::size_t periods{0};
  std::size_t steps{0};
  AnalysisOptions options;

  std::vector<HurstEntry> hurst;  // one per SeriesKind
  // spread and first_gap use step samples (gaps per side); returns and
  // volatility use period samples.
  std::vector<TailEntry> tails;   // spread, first_gap, return_positive, return_negative, volatility
  std::vector<RegimeBin> bins;    // classified
  std::array<RegimeBounds, 3> bounds{};
  std::array<std::optional<SigmaCurve>, 3> sigma{};
  std::array<std::string, 3> sigma_error{};
  // Spearman correlation of mean depth against P_c over populated
  // non-MMC bins (volatility labels).
  std::optional<double> depth_spearman;

  std::vector<double> kurtosis;     // per lag, pooled over runs
  std::vector<double> fv_kurtosis;  // same for the fundamental value
  std::string kurtosis_error;

  const HurstEntry& hurst_of(SeriesKind kind) const;
  const TailEntry& tail(const std::string& name) const;
};

// Accumulates runs one at a time and produces the report.
class Analyzer {
 public:
  explicit Analyzer(AnalysisOptions options = {});

  void add_run(const SimConfig& config, std::span<const StepRecord> records);
  std::size_t runs() const noexcept { return series_.size(); }

  // Consumes the pooled tail samples; call once.
  Report finish();

 private:
  AnalysisOptions options_;
  PcBinner binner_;
  std::vector<PeriodSeries> series_;
  std::vector<float> gap_sides_;  // bid and ask first gaps as separate samples
  std::size_t steps_{0};
};

Report analyze_runs(std::span<const RunOutput> runs, AnalysisOptions options = {});

// analysis.json plus dfa_<series>.csv, ccdf_<name>.csv, regimes.csv and
// sigma_vs_pc.csv. Returns the written paths.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const Report& report);

}  // namespace cdasim::analytics
