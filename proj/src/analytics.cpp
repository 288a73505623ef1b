#include "cdasim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cdasim::analytics {

namespace {

struct LineFit {
  double slope{0.0};
  double intercept{0.0};
  double slope_stderr{0.0};
  double r_squared{0.0};
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_stderr = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return f;
}

// Profile (cumulative sum of the demeaned series).
std::vector<double> profile(std::span<const double> series) {
  const double m = mean(series);
  std::vector<double> y(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i] - m;
    y[i] = acc;
  }
  return y;
}

// Sum of squared residuals after a linear fit in every full box of size n.
// Returns {sum, number of points covered}.
std::pair<double, std::size_t> detrended_ss(const std::vector<double>& y, std::size_t n) {
  const std::size_t boxes = y.size() / n;
  const double xc = 0.5 * static_cast<double>(n - 1);
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxx += (i - xc) * (i - xc);
  double total = 0.0;
  for (std::size_t b = 0; b < boxes; ++b) {
    const double* seg = y.data() + b * n;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) my += seg[i];
    my /= static_cast<double>(n);
    double sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = seg[i] - my;
      sxy += (i - xc) * d;
      syy += d * d;
    }
    total += std::max(0.0, syy - sxy * sxy / sxx);
  }
  return {total, boxes * n};
}

void check_boxes(std::size_t length, std::span<const std::size_t> box_sizes) {
  if (box_sizes.size() < 2) throw std::invalid_argument("dfa needs at least two box sizes");
  for (auto n : box_sizes) {
    if (n < 3) throw std::invalid_argument("dfa box sizes must be at least 3");
    if (4 * n > length) {
      throw std::invalid_argument("dfa box size " + std::to_string(n) + " exceeds a quarter of the series length " +
                                  std::to_string(length));
    }
  }
}

DfaResult finish_dfa(std::span<const std::size_t> box_sizes, std::vector<double> fluctuation) {
  DfaResult r;
  r.box_sizes.assign(box_sizes.begin(), box_sizes.end());
  r.fluctuation = std::move(fluctuation);
  const bool defined = std::all_of(r.fluctuation.begin(), r.fluctuation.end(),
                                   [](double f) { return f > 0.0 && std::isfinite(f); });
  if (!defined) return r;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.box_sizes.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(r.box_sizes[i])));
    ly.push_back(std::log(r.fluctuation[i]));
  }
  const auto fit = least_squares(lx, ly);
  r.hurst = fit.slope;
  r.slope_stderr = fit.slope_stderr;
  r.r_squared = fit.r_squared;
  return r;
}

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double extreme_rate_f(const std::vector<float>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (float x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (float x : v) var += (x - m) * (x - m);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  if (sd == 0.0) return 0.0;
  const double cut = m + kExtremeSigmas * sd;
  std::size_t hits = 0;
  for (float x : v) hits += (x > cut) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(v.size());
}

double stddev_f(const std::vector<float>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (float x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (float x : v) var += (x - m) * (x - m);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::size_t> geometric_boxes(std::size_t min_box, std::size_t max_box, std::size_t count) {
  if (min_box < 1 || max_box < min_box || count < 2) throw std::invalid_argument("bad box grid");
  std::vector<std::size_t> out;
  const double lo = std::log(static_cast<double>(min_box));
  const double hi = std::log(static_cast<double>(max_box));
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    const auto n = static_cast<std::size_t>(std::llround(v));
    if (out.empty() || n != out.back()) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> default_boxes(std::size_t length) {
  const std::size_t max_box = length / 4;
  const double min_span = std::pow(10.0, 1.5);
  std::size_t min_box = 10;
  if (static_cast<double>(max_box) / static_cast<double>(min_box) < min_span) {
    min_box = static_cast<std::size_t>(std::floor(static_cast<double>(max_box) / min_span));
  }
  if (min_box < 4) {
    throw std::invalid_argument("series of length " + std::to_string(length) +
                                " is too short for a DFA grid spanning 1.5 decades");
  }
  return geometric_boxes(min_box, max_box, 20);
}

DfaResult dfa(std::span<const double> series, std::span<const std::size_t> box_sizes) {
  check_boxes(series.size(), box_sizes);
  const auto y = profile(series);
  std::vector<double> f;
  for (auto n : box_sizes) {
    const auto [ss, pts] = detrended_ss(y, n);
    f.push_back(std::sqrt(ss / static_cast<double>(pts)));
  }
  return finish_dfa(box_sizes, std::move(f));
}

DfaResult dfa(std::span<const double> series) {
  const auto boxes = default_boxes(series.size());
  return dfa(series, boxes);
}

DfaResult dfa_pooled(std::span<const std::vector<double>> series, std::span<const std::size_t> box_sizes) {
  if (series.empty()) throw std::invalid_argument("dfa_pooled needs at least one series");
  std::size_t shortest = series.front().size();
  for (const auto& s : series) shortest = std::min(shortest, s.size());
  check_boxes(shortest, box_sizes);
  std::vector<double> ss(box_sizes.size(), 0.0);
  std::vector<std::size_t> pts(box_sizes.size(), 0);
  for (const auto& s : series) {
    const auto y = profile(s);
    for (std::size_t k = 0; k < box_sizes.size(); ++k) {
      const auto [a, b] = detrended_ss(y, box_sizes[k]);
      ss[k] += a;
      pts[k] += b;
    }
  }
  std::vector<double> f(box_sizes.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sqrt(ss[k] / static_cast<double>(pts[k]));
  return finish_dfa(box_sizes, std::move(f));
}

DfaResult dfa_pooled(std::span<const std::vector<double>> series) {
  if (series.empty()) throw std::invalid_argument("dfa_pooled needs at least one series");
  std::size_t shortest = series.front().size();
  for (const auto& s : series) shortest = std::min(shortest, s.size());
  const auto boxes = default_boxes(shortest);
  return dfa_pooled(series, boxes);
}

// ---------------------------------------------------------------------------

TailFit fit_power_law(std::span<const double> tail, double x_min) {
  if (!(x_min > 0.0)) throw std::invalid_argument("x_min must be positive");
  if (tail.size() < kMinTail) {
    throw std::invalid_argument("power-law fit needs at least " + std::to_string(kMinTail) + " tail samples, got " +
                                std::to_string(tail.size()));
  }
  double sum_log = 0.0;
  for (double x : tail) {
    if (!(x >= x_min)) throw std::invalid_argument("power-law tail sample below x_min");
    sum_log += std::log(x / x_min);
  }
  if (!(sum_log > 0.0)) throw std::domain_error("power-law exponent diverges: every tail sample equals x_min");

  const auto n = static_cast<double>(tail.size());
  TailFit fit;
  fit.alpha = 1.0 + n / sum_log;
  fit.x_min = x_min;
  fit.n_tail = tail.size();
  fit.stderr_alpha = (fit.alpha - 1.0) / std::sqrt(n);

  // Exponential tail on the same support, for comparison.
  double excess = 0.0;
  for (double x : tail) excess += x - x_min;
  const double lambda = n / excess;
  std::vector<double> diff(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double x = tail[i];
    const double l_exp = std::log(lambda) - lambda * (x - x_min);
    const double l_pl = std::log(fit.alpha - 1.0) - std::log(x_min) - fit.alpha * std::log(x / x_min);
    diff[i] = l_exp - l_pl;
  }
  fit.exp_vs_power_llr = std::accumulate(diff.begin(), diff.end(), 0.0);
  const double sd = stddev(diff);
  fit.exp_vs_power_z = sd > 0.0 ? fit.exp_vs_power_llr / (sd * std::sqrt(n)) : 0.0;
  return fit;
}

TailFit fit_power_law_quantile(std::span<const double> samples, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw std::invalid_argument("quantile must lie in (0, 1)");
  std::vector<double> pos;
  pos.reserve(samples.size());
  for (double x : samples) {
    if (x > 0.0 && std::isfinite(x)) pos.push_back(x);
  }
  if (pos.empty()) throw std::invalid_argument("power-law fit needs positive samples");
  std::sort(pos.begin(), pos.end());
  const auto k = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(pos.size() - 1)));
  const double x_min = pos[k];
  const auto first = std::lower_bound(pos.begin(), pos.end(), x_min);
  return fit_power_law(std::span<const double>(&*first, static_cast<std::size_t>(pos.end() - first)), x_min);
}

std::vector<CcdfPoint> ccdf(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("ccdf needs at least one sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0 && s[i] == s[i - 1]) continue;
    out.push_back({s[i], static_cast<double>(s.size() - i) / n});
  }
  return out;
}

TailShape ccdf_tail_shape(std::span<const CcdfPoint> ccdf, double x_min) {
  std::vector<double> x, lx, lp;
  for (const auto& pt : ccdf) {
    if (pt.value >= x_min && pt.value > 0.0 && pt.probability > 0.0) {
      x.push_back(pt.value);
      lx.push_back(std::log(pt.value));
      lp.push_back(std::log(pt.probability));
    }
  }
  if (x.size() < 3) throw std::invalid_argument("tail shape needs at least 3 CCDF points above x_min");
  TailShape t;
  t.points = x.size();
  t.r2_exponential = least_squares(x, lp).r_squared;
  t.r2_power = least_squares(lx, lp).r_squared;
  return t;
}

// ---------------------------------------------------------------------------

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double v = 0.0;
  for (double d : x) v += (d - m) * (d - m);
  return std::sqrt(v / static_cast<double>(x.size()));
}

double excess_kurtosis(std::span<const double> x) {
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double d : x) {
    const double c = (d - m) * (d - m);
    m2 += c;
    m4 += c * c;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  if (m2 == 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman needs equal-length inputs");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double extreme_event_rate(std::span<const double> series, bool two_sided) {
  if (series.size() < 100) throw std::invalid_argument("extreme_event_rate needs at least 100 observations");
  const double m = mean(series);
  const double sd = stddev(series);
  if (sd == 0.0) return 0.0;
  const double cut = kExtremeSigmas * sd;
  std::size_t hits = 0;
  for (double x : series) {
    const double d = x - m;
    if (two_sided ? std::abs(d) > cut : d > cut) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(series.size());
}

std::vector<double> aggregational_gaussianity(std::span<const double> prices, std::span<const std::size_t> lags) {
  std::vector<double> out;
  for (auto lag : lags) {
    if (lag == 0 || lag >= prices.size()) {
      throw std::invalid_argument("lag " + std::to_string(lag) + " must lie in [1, series length " +
                                  std::to_string(prices.size()) + ")");
    }
    std::vector<double> r;
    r.reserve(prices.size() - lag);
    for (std::size_t t = lag; t < prices.size(); ++t) r.push_back(std::log(prices[t]) - std::log(prices[t - lag]));
    out.push_back(excess_kurtosis(r));
  }
  return out;
}

std::vector<double> aggregational_gaussianity_pooled(std::span<const std::vector<double>> paths,
                                                     std::span<const std::size_t> lags) {
  if (paths.empty()) throw std::invalid_argument("aggregational_gaussianity needs at least one path");
  std::vector<double> out;
  for (auto lag : lags) {
    std::vector<double> r;
    for (const auto& p : paths) {
      if (lag == 0 || lag >= p.size()) {
        throw std::invalid_argument("lag " + std::to_string(lag) + " must lie in [1, series length " +
                                    std::to_string(p.size()) + ")");
      }
      for (std::size_t t = lag; t < p.size(); ++t) r.push_back(std::log(p[t]) - std::log(p[t - lag]));
    }
    out.push_back(excess_kurtosis(r));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SeriesKind kind) noexcept {
  switch (kind) {
    case SeriesKind::Return: return "return";
    case SeriesKind::Volatility: return "volatility";
    case SeriesKind::Spread: return "spread";
    case SeriesKind::FirstGap: return "first_gap";
    case SeriesKind::Volume: return "volume";
    case SeriesKind::FvReturn: return "fv_return";
  }
  return "?";
}

double first_gap(const StepRecord& r) noexcept {
  const bool b = !std::isnan(r.bid_gap);
  const bool a = !std::isnan(r.ask_gap);
  if (a && b) return 0.5 * (r.bid_gap + r.ask_gap);
  if (b) return r.bid_gap;
  if (a) return r.ask_gap;
  return kMissing;
}

const std::vector<double>& PeriodSeries::of(SeriesKind kind) const {
  switch (kind) {
    case SeriesKind::Return: return ret;
    case SeriesKind::Volatility: return volatility;
    case SeriesKind::Spread: return spread;
    case SeriesKind::FirstGap: return first_gap;
    case SeriesKind::Volume: return volume;
    case SeriesKind::FvReturn: return fv_return;
  }
  throw std::invalid_argument("unknown series kind");
}

namespace {

// Replaces NaNs by the previous value; leading NaNs take the first value.
void carry_forward(std::vector<double>& v) {
  const auto first = std::find_if(v.begin(), v.end(), [](double x) { return !std::isnan(x); });
  if (first == v.end()) return;
  double last = *first;
  for (auto& x : v) {
    if (std::isnan(x)) x = last;
    else last = x;
  }
}

}  // namespace

PeriodSeries period_series(std::span<const StepRecord> records, std::int32_t steps_per_period, double p0,
                           double pf0, PeriodSampling sampling) {
  if (steps_per_period <= 0) throw std::invalid_argument("steps_per_period must be positive");
  const auto spp = static_cast<std::size_t>(steps_per_period);
  const std::size_t periods = records.size() / spp;
  PeriodSeries s;
  double prev = p0, prev_fv = pf0;
  for (std::size_t k = 0; k < periods; ++k) {
    const auto block = records.subspan(k * spp, spp);
    const auto& last = block.back();
    double spread_sum = 0.0, gap_sum = 0.0, depth_sum = 0.0;
    double spread_last = kMissing, gap_last = kMissing;
    std::size_t spread_n = 0, gap_n = 0, trades = 0;
    for (const auto& r : block) {
      if (!std::isnan(r.spread)) {
        spread_sum += r.spread;
        spread_last = r.spread;
        ++spread_n;
      }
      if (const double g = first_gap(r); !std::isnan(g)) {
        gap_sum += g;
        gap_last = g;
        ++gap_n;
      }
      depth_sum += static_cast<double>(r.depth);
      trades += r.traded ? 1 : 0;
    }
    s.close.push_back(last.price);
    s.fundamental_close.push_back(last.fundamental);
    s.chartist_fraction.push_back(last.chartist_fraction());
    const double r = std::log(last.price) - std::log(prev);
    s.ret.push_back(r);
    s.volatility.push_back(std::abs(r));
    s.fv_return.push_back(std::log(last.fundamental) - std::log(prev_fv));
    if (sampling == PeriodSampling::Close) {
      s.spread.push_back(spread_last);
      s.first_gap.push_back(gap_last);
    } else {
      s.spread.push_back(spread_n ? spread_sum / static_cast<double>(spread_n) : kMissing);
      s.first_gap.push_back(gap_n ? gap_sum / static_cast<double>(gap_n) : kMissing);
    }
    s.volume.push_back(static_cast<double>(trades));
    s.depth.push_back(depth_sum / static_cast<double>(spp));
    prev = last.price;
    prev_fv = last.fundamental;
  }
  carry_forward(s.spread);
  carry_forward(s.first_gap);
  return s;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Memh: return "MEMH";
    case Regime::Mrfm: return "MRFM";
    case Regime::Mmc: return "MMC";
  }
  return "?";
}

std::string_view to_string(BinQuantity q) noexcept {
  switch (q) {
    case BinQuantity::Volatility: return "volatility";
    case BinQuantity::Spread: return "spread";
    case BinQuantity::FirstGap: return "first_gap";
  }
  return "?";
}

PcBinner::PcBinner(double bin_width) : width_(bin_width) {
  if (!(bin_width > 0.0) || bin_width > 1.0) throw std::invalid_argument("bin width must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  values_.resize(n);
}

std::size_t PcBinner::bin_index(double pc) const noexcept {
  if (!(pc > 0.0)) return 0;
  const auto k = static_cast<std::size_t>(std::floor(pc / width_ + 1e-12));
  return std::min(k, values_.size() - 1);
}

void PcBinner::add(double pc, double volatility, double spread, double gap, double depth) {
  auto& b = values_[bin_index(pc)];
  ++b.count;
  b.depth_sum += depth;
  const std::array<double, 3> v{volatility, spread, gap};
  for (std::size_t q = 0; q < 3; ++q) {
    if (!std::isnan(v[q])) b.values[q].push_back(static_cast<float>(v[q]));
  }
}

void PcBinner::add_run(std::span<const StepRecord> records, std::int32_t steps_per_period, double p0) {
  if (steps_per_period <= 0) throw std::invalid_argument("steps_per_period must be positive");
  const auto spp = static_cast<std::size_t>(steps_per_period);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const double base = i >= spp ? records[i - spp].price : p0;
    const double vol = std::abs(std::log(r.price) - std::log(base));
    add(r.chartist_fraction(), vol, r.spread, first_gap(r), static_cast<double>(r.depth));
  }
}

std::vector<RegimeBin> PcBinner::bins() const {
  std::vector<RegimeBin> out(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const auto& b = values_[k];
    auto& o = out[k];
    o.lo = static_cast<double>(k) * width_;
    o.hi = std::min(1.0, static_cast<double>(k + 1) * width_);
    o.count = b.count;
    o.low_confidence = b.count < kLowConfidenceCount;
    o.mean_depth = b.count ? b.depth_sum / static_cast<double>(b.count) : 0.0;
    for (std::size_t q = 0; q < 3; ++q) {
      o.quantities[q].count = b.values[q].size();
      o.quantities[q].extreme_rate = extreme_rate_f(b.values[q]);
      o.quantities[q].sigma = stddev_f(b.values[q]);
    }
  }
  return out;
}

std::vector<double> PcBinner::pooled(BinQuantity q) const {
  std::vector<double> out;
  for (const auto& b : values_) {
    const auto& v = b.values[static_cast<std::size_t>(q)];
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<float> PcBinner::pooled_f(BinQuantity q) const {
  std::vector<float> out;
  for (const auto& b : values_) {
    const auto& v = b.values[static_cast<std::size_t>(q)];
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<RegimeBin> bin_by_pc(std::span<const StepRecord> records, std::int32_t steps_per_period, double p0,
                                 double bin_width) {
  PcBinner binner(bin_width);
  binner.add_run(records, steps_per_period, p0);
  return binner.bins();
}

std::vector<RegimeBin> classify_regimes(std::vector<RegimeBin> bins, double depth_floor) {
  for (auto& b : bins) {
    for (auto& q : b.quantities) {
      if (b.count == 0) q.label = Regime::Memh;
      else if (b.mean_depth < depth_floor) q.label = Regime::Mmc;
      else if (q.extreme_rate > kMrfmThreshold) q.label = Regime::Mrfm;
      else q.label = Regime::Memh;
    }
  }
  return bins;
}

RegimeBounds regime_bounds(std::span<const RegimeBin> bins, BinQuantity q, std::size_t min_count) {
  std::vector<const RegimeBin*> used;
  for (const auto& b : bins) {
    if (b.count >= std::max<std::size_t>(min_count, 1)) used.push_back(&b);
  }
  RegimeBounds out;
  // MMC tail: the longest suffix of MMC bins.
  std::size_t tail = used.size();
  while (tail > 0 && used[tail - 1]->of(q).label == Regime::Mmc) --tail;
  if (tail < used.size()) out.mmc_start = used[tail]->lo;
  std::size_t first_mrfm = tail;
  for (std::size_t i = 0; i < tail; ++i) {
    if (used[i]->of(q).label == Regime::Mrfm) {
      first_mrfm = i;
      break;
    }
  }
  if (first_mrfm < tail) out.mrfm_start = used[first_mrfm]->lo;
  out.memh_contiguous = first_mrfm > 0;
  for (std::size_t i = 0; i < first_mrfm; ++i) {
    if (used[i]->of(q).label != Regime::Memh) out.memh_contiguous = false;
  }
  return out;
}

SigmaCurve sigma_vs_pc(std::span<const RegimeBin> bins, BinQuantity q, std::size_t min_count) {
  SigmaCurve c;
  std::vector<double> sigma;
  for (const auto& b : bins) {
    if (b.of(q).count >= std::max<std::size_t>(min_count, 1)) {
      c.pc.push_back(b.centre());
      sigma.push_back(b.of(q).sigma);
    }
  }
  if (c.pc.size() < 10) {
    throw std::invalid_argument("sigma_vs_pc needs at least 10 populated bins, got " + std::to_string(c.pc.size()));
  }
  const auto it = std::max_element(sigma.begin(), sigma.end());
  c.argmax_index = static_cast<std::size_t>(it - sigma.begin());
  c.argmax_pc = c.pc[c.argmax_index];
  const double peak = *it;
  c.normalized.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) c.normalized[i] = peak > 0.0 ? sigma[i] / peak : 1.0;
  return c;
}

}  // namespace cdasim::analytics
