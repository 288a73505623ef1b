#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cdasim/engine.hpp"

namespace cdasim::analytics {

// ---------------------------------------------------------------------------
// Detrended fluctuation analysis (order-1 local trends).

struct DfaResult {
  std::vector<std::size_t> box_sizes;
  std::vector<double> fluctuation;  // F(n) per box size
  // Least-squares slope of log F(n) against log n. Empty when some F(n) is
  // zero (constant input), since the exponent is then undefined.
  std::optional<double> hurst;
  double slope_stderr{0.0};
  double r_squared{0.0};
};

// `count` sizes spaced geometrically over [min_box, max_box], rounded and
// deduplicated.
std::vector<std::size_t> geometric_boxes(std::size_t min_box, std::size_t max_box, std::size_t count = 20);

// Default grid for a series of `length`: 10 .. length/4 with 20 sizes. When
// that spans less than 1.5 decades the lower end drops (not below 4) to keep
// 1.5 decades. Throws std::invalid_argument when the length cannot support it.
std::vector<std::size_t> default_boxes(std::size_t length);

// Throws std::invalid_argument when a box exceeds a quarter of the series.
DfaResult dfa(std::span<const double> series, std::span<const std::size_t> box_sizes);
DfaResult dfa(std::span<const double> series);

// DFA over independent realisations: each series is integrated and
// detrended on its own and the squared residuals are pooled per box size.
DfaResult dfa_pooled(std::span<const std::vector<double>> series, std::span<const std::size_t> box_sizes);
DfaResult dfa_pooled(std::span<const std::vector<double>> series);

// ---------------------------------------------------------------------------
// Heavy tails.

struct TailFit {
  double alpha{0.0};  // density exponent, p(x) ~ x^-alpha
  double x_min{0.0};
  std::size_t n_tail{0};
  double stderr_alpha{0.0};
  // Log-likelihood ratio of an exponential tail over the power law
  // (positive favours the exponential) and its normalised form.
  double exp_vs_power_llr{0.0};
  double exp_vs_power_z{0.0};
};

inline constexpr std::size_t kMinTail = 50;

// Continuous maximum-likelihood exponent 1 + n / sum ln(x_i / x_min).
// Requires every sample >= x_min > 0 and at least kMinTail samples; throws
// std::invalid_argument otherwise and std::domain_error when all samples
// equal x_min.
TailFit fit_power_law(std::span<const double> tail, double x_min);

// Chooses x_min as the `quantile` of the positive samples and fits the
// samples at or above it.
TailFit fit_power_law_quantile(std::span<const double> samples, double quantile = 0.95);

struct CcdfPoint {
  double value{0.0};
  double probability{0.0};  // P(X >= value)
};

// Throws std::invalid_argument on empty input.
std::vector<CcdfPoint> ccdf(std::span<const double> samples);

// How straight the CCDF tail (points with value >= x_min) is on lin-log
// axes (ln P against x, exponential decay) and on log-log axes (ln P
// against ln x, power law), as R^2 of least-squares lines.
struct TailShape {
  double r2_exponential{0.0};
  double r2_power{0.0};
  std::size_t points{0};
  bool exponential_like() const noexcept { return r2_exponential > r2_power; }
};

// Throws std::invalid_argument with fewer than 3 tail points.
TailShape ccdf_tail_shape(std::span<const CcdfPoint> ccdf, double x_min);

// ---------------------------------------------------------------------------
// Moments and extreme events.

double mean(std::span<const double> x);
double stddev(std::span<const double> x);  // population
double excess_kurtosis(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);

inline constexpr double kExtremeSigmas = 4.0;

// Fraction of observations beyond mean + 4 sigma (one-sided) or with
// |x - mean| > 4 sigma (two-sided). Zero-variance input gives 0. Throws
// std::invalid_argument for fewer than 100 observations.
double extreme_event_rate(std::span<const double> series, bool two_sided = false);

// Excess kurtosis of ln p(t) - ln p(t - lag) for each lag (overlapping
// windows). Throws std::invalid_argument when a lag is not below the
// series length.
std::vector<double> aggregational_gaussianity(std::span<const double> prices, std::span<const std::size_t> lags);

// Same over independent price paths, pooling the lagged returns.
std::vector<double> aggregational_gaussianity_pooled(std::span<const std::vector<double>> paths,
                                                     std::span<const std::size_t> lags);

// ---------------------------------------------------------------------------
// Series derived from step records.

enum class SeriesKind : std::uint8_t { Return, Volatility, Spread, FirstGap, Volume, FvReturn };
inline constexpr std::array<SeriesKind, 6> kAllSeries{SeriesKind::Return,   SeriesKind::Volatility,
                                                      SeriesKind::Spread,   SeriesKind::FirstGap,
                                                      SeriesKind::Volume,   SeriesKind::FvReturn};
std::string_view to_string(SeriesKind kind) noexcept;

// First gap of one step: mean of the bid and ask gaps that exist, NaN when
// neither does.
double first_gap(const StepRecord& r) noexcept;

// How spread and first gap are reduced to one value per period.
//  Close: the last value quoted in the period (same sampling as prices).
//  Mean:  the mean over steps of the period where the value exists.
enum class PeriodSampling : std::uint8_t { Close, Mean };

// One value per trading period. Returns use period-close prices, the first
// period measured from the opening price p0; volume counts trades.
struct PeriodSeries {
  std::vector<double> close;
  std::vector<double> fundamental_close;
  std::vector<double> chartist_fraction;
  std::vector<double> ret;
  std::vector<double> volatility;
  std::vector<double> fv_return;
  std::vector<double> spread;
  std::vector<double> first_gap;
  std::vector<double> volume;
  std::vector<double> depth;

  const std::vector<double>& of(SeriesKind kind) const;
  std::size_t size() const noexcept { return close.size(); }
};

// Trailing partial periods are dropped. Periods without any quoted spread
// (or gap) carry the previous period's value so the series stay gap-free.
PeriodSeries period_series(std::span<const StepRecord> records, std::int32_t steps_per_period, double p0,
                           double pf0, PeriodSampling sampling = PeriodSampling::Close);

// ---------------------------------------------------------------------------
// Regimes over the chartist fraction.

enum class Regime : std::uint8_t { Memh, Mrfm, Mmc };
std::string_view to_string(Regime r) noexcept;

// Quantities examined per bin.
enum class BinQuantity : std::uint8_t { Volatility, Spread, FirstGap };
inline constexpr std::array<BinQuantity, 3> kBinQuantities{BinQuantity::Volatility, BinQuantity::Spread,
                                                           BinQuantity::FirstGap};
std::string_view to_string(BinQuantity q) noexcept;

inline constexpr double kMrfmThreshold = 0.005;
inline constexpr double kDefaultDepthFloor = 2.0;
inline constexpr std::size_t kLowConfidenceCount = 1000;

struct QuantityStats {
  std::size_t count{0};
  double extreme_rate{0.0};
  double sigma{0.0};
  Regime label{Regime::Memh};
};

struct RegimeBin {
  double lo{0.0};
  double hi{0.0};
  std::size_t count{0};
  bool low_confidence{true};
  double mean_depth{0.0};
  std::array<QuantityStats, 3> quantities{};

  double centre() const noexcept { return 0.5 * (lo + hi); }
  const QuantityStats& of(BinQuantity q) const noexcept { return quantities[static_cast<std::size_t>(q)]; }
  QuantityStats& of(BinQuantity q) noexcept { return quantities[static_cast<std::size_t>(q)]; }
};

// Pools step-level observations into chartist-fraction bins of width
// `bin_width`. Bin k covers [k w, (k + 1) w); a fraction of exactly 1 lands
// in the last bin. The volatility attached to a step is the absolute log
// return over the trading period ending at that step,
// |ln p_t - ln p_{t - steps_per_period}| (p0 before the first full period).
class PcBinner {
 public:
  explicit PcBinner(double bin_width = 0.01);

  void add(double chartist_fraction, double volatility, double spread, double first_gap, double depth);
  void add_run(std::span<const StepRecord> records, std::int32_t steps_per_period, double p0);

  std::size_t bin_count() const noexcept { return values_.size(); }
  std::size_t bin_index(double chartist_fraction) const noexcept;
  double bin_width() const noexcept { return width_; }

  // Statistics per bin (unlabelled; see classify_regimes). Empty bins are
  // included with count 0.
  std::vector<RegimeBin> bins() const;

  // Pooled samples of a quantity over all bins (NaN-free).
  std::vector<double> pooled(BinQuantity q) const;
  std::vector<float> pooled_f(BinQuantity q) const;

 private:
  struct BinValues {
    std::array<std::vector<float>, 3> values;
    std::size_t count{0};
    double depth_sum{0.0};
  };
  double width_;
  std::vector<BinValues> values_;
};

std::vector<RegimeBin> bin_by_pc(std::span<const StepRecord> records, std::int32_t steps_per_period, double p0,
                                 double bin_width = 0.01);

// MMC when mean depth is below `depth_floor`; else MRFM when the quantity's
// extreme-event rate exceeds 0.005; else MEMH. Empty bins keep MEMH with
// count 0 and are ignored downstream.
std::vector<RegimeBin> classify_regimes(std::vector<RegimeBin> bins, double depth_floor = kDefaultDepthFloor);

struct RegimeBounds {
  std::optional<double> mrfm_start;  // lower edge of the first MRFM bin
  std::optional<double> mmc_start;   // lower edge of the MMC tail
  bool memh_contiguous{false};       // every populated bin below mrfm_start is MEMH
};

// Only bins with at least `min_count` observations take part.
RegimeBounds regime_bounds(std::span<const RegimeBin> bins, BinQuantity q, std::size_t min_count = 1);

struct SigmaCurve {
  std::vector<double> pc;          // bin centres
  std::vector<double> normalized;  // sigma / max sigma
  double argmax_pc{0.0};
  std::size_t argmax_index{0};
};

// Throws std::invalid_argument with fewer than 10 populated bins.
SigmaCurve sigma_vs_pc(std::span<const RegimeBin> bins, BinQuantity q, std::size_t min_count = 1);

}  // namespace cdasim::analytics
