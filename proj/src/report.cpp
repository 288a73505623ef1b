#include "cdasim/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cdasim::analytics {

namespace {

using json = nlohmann::ordered_json;

// Sorts `v` in place (after dropping non-positive values), fits the tail
// above the quantile and records a thinned CCDF. Frees `v`.
template <class T>
TailEntry tail_entry(const std::string& name, std::vector<T>& v, double quantile) {
  TailEntry e;
  e.name = name;
  std::erase_if(v, [](T x) { return !(x > 0) || !std::isfinite(static_cast<double>(x)); });
  e.samples = v.size();
  if (v.empty()) {
    e.error = "no positive samples";
    return e;
  }
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  const double log_floor = std::log(1.0 / static_cast<double>(n));
  const double step = log_floor / static_cast<double>(kCcdfPoints - 1);
  double next = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && v[i] == v[i - 1]) continue;
    const double p = static_cast<double>(n - i) / static_cast<double>(n);
    const bool last = std::upper_bound(v.begin() + static_cast<std::ptrdiff_t>(i), v.end(), v[i]) == v.end();
    if (std::log(p) <= next + 1e-12 || last) {
      e.ccdf.push_back({static_cast<double>(v[i]), p});
      next = std::log(p) + step;
    }
  }
  const auto k = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(n - 1)));
  const double x_min = static_cast<double>(v[k]);
  const auto first = std::lower_bound(v.begin(), v.end(), v[k]);
  std::vector<double> tail(first, v.end());
  try {
    e.fit = fit_power_law(tail, x_min);
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  std::vector<CcdfPoint> tail_points;
  for (auto it = first; it != v.end(); it = std::upper_bound(it, v.end(), *it)) {
    const auto i = static_cast<std::size_t>(it - v.begin());
    tail_points.push_back({static_cast<double>(*it), static_cast<double>(n - i) / static_cast<double>(n)});
  }
  try {
    e.shape = ccdf_tail_shape(tail_points, x_min);
  } catch (const std::exception&) {
  }
  v.clear();
  v.shrink_to_fit();
  return e;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out.precision(10);
  return out;
}

}  // namespace

const HurstEntry& Report::hurst_of(SeriesKind kind) const {
  for (const auto& h : hurst) {
    if (h.kind == kind) return h;
  }
  throw std::out_of_range("no Hurst entry for " + std::string(to_string(kind)));
}

const TailEntry& Report::tail(const std::string& name) const {
  for (const auto& t : tails) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tail entry named " + name);
}

Analyzer::Analyzer(AnalysisOptions options) : options_(std::move(options)), binner_(options_.bin_width) {}

void Analyzer::add_run(const SimConfig& config, std::span<const StepRecord> records) {
  binner_.add_run(records, config.steps_per_period, config.p0);
  series_.push_back(period_series(records, config.steps_per_period, config.p0, config.pf0, options_.sampling));
  for (const auto& r : records) {
    if (!std::isnan(r.bid_gap)) gap_sides_.push_back(static_cast<float>(r.bid_gap));
    if (!std::isnan(r.ask_gap)) gap_sides_.push_back(static_cast<float>(r.ask_gap));
  }
  steps_ += records.size();
}

Report Analyzer::finish() {
  Report rep;
  rep.runs = series_.size();
  rep.steps = steps_;
  rep.options = options_;
  for (const auto& s : series_) rep.periods += s.size();

  for (auto kind : kAllSeries) {
    HurstEntry h;
    h.kind = kind;
    std::vector<std::vector<double>> all;
    for (const auto& s : series_) all.push_back(s.of(kind));
    try {
      h.pooled = dfa_pooled(all);
      std::vector<double> per_run;
      for (const auto& x : all) {
        const auto r = dfa(x);
        if (r.hurst) per_run.push_back(*r.hurst);
      }
      h.runs = per_run.size();
      h.run_mean = mean(per_run);
      h.run_stderr = per_run.size() > 1
                         ? stddev(per_run) * std::sqrt(static_cast<double>(per_run.size()) /
                                                       static_cast<double>(per_run.size() - 1)) /
                               std::sqrt(static_cast<double>(per_run.size()))
                         : 0.0;
      if (!h.pooled->hurst) h.error = "zero fluctuation: exponent undefined";
    } catch (const std::exception& ex) {
      h.pooled.reset();
      h.error = ex.what();
    }
    rep.hurst.push_back(std::move(h));
  }

  const double q = options_.xmin_quantile;
  {
    auto spread = binner_.pooled_f(BinQuantity::Spread);
    rep.tails.push_back(tail_entry("spread", spread, q));
  }
  rep.tails.push_back(tail_entry("first_gap", gap_sides_, q));
  std::vector<double> pos, neg, vol;
  for (const auto& s : series_) {
    for (double r : s.ret) {
      if (r > 0.0) pos.push_back(r);
      else if (r < 0.0) neg.push_back(-r);
    }
    vol.insert(vol.end(), s.volatility.begin(), s.volatility.end());
  }
  rep.tails.push_back(tail_entry("return_positive", pos, q));
  rep.tails.push_back(tail_entry("return_negative", neg, q));
  rep.tails.push_back(tail_entry("volatility", vol, q));

  rep.bins = classify_regimes(binner_.bins(), options_.depth_floor);
  for (auto bq : kBinQuantities) {
    const auto i = static_cast<std::size_t>(bq);
    rep.bounds[i] = regime_bounds(rep.bins, bq, kLowConfidenceCount);
    try {
      rep.sigma[i] = sigma_vs_pc(rep.bins, bq, kLowConfidenceCount);
    } catch (const std::exception& ex) {
      rep.sigma_error[i] = ex.what();
    }
  }
  std::vector<double> pc, depth;
  for (const auto& b : rep.bins) {
    if (b.count >= kLowConfidenceCount && b.of(BinQuantity::Volatility).label != Regime::Mmc) {
      pc.push_back(b.centre());
      depth.push_back(b.mean_depth);
    }
  }
  if (pc.size() >= 3) rep.depth_spearman = spearman(pc, depth);

  try {
    std::vector<std::vector<double>> prices, fv;
    for (const auto& s : series_) {
      prices.push_back(s.close);
      fv.push_back(s.fundamental_close);
    }
    rep.kurtosis = aggregational_gaussianity_pooled(prices, options_.kurtosis_lags);
    rep.fv_kurtosis = aggregational_gaussianity_pooled(fv, options_.kurtosis_lags);
  } catch (const std::exception& ex) {
    rep.kurtosis.clear();
    rep.fv_kurtosis.clear();
    rep.kurtosis_error = ex.what();
  }
  return rep;
}

Report analyze_runs(std::span<const RunOutput> runs, AnalysisOptions options) {
  Analyzer a(std::move(options));
  for (const auto& r : runs) a.add_run(r.config, r.records);
  return a.finish();
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const Report& rep) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  json j;
  j["runs"] = rep.runs;
  j["steps"] = rep.steps;
  j["periods"] = rep.periods;
  j["options"] = {{"bin_width", rep.options.bin_width},
                  {"xmin_quantile", rep.options.xmin_quantile},
                  {"depth_floor", rep.options.depth_floor},
                  {"period_sampling", rep.options.sampling == PeriodSampling::Close ? "close" : "mean"},
                  {"kurtosis_lags", rep.options.kurtosis_lags}};

  json hurst = json::object();
  for (const auto& h : rep.hurst) {
    json e;
    e["H"] = (h.pooled && h.pooled->hurst) ? json(*h.pooled->hurst) : json(nullptr);
    e["H_stderr"] = h.pooled ? json(h.pooled->slope_stderr) : json(nullptr);
    e["r_squared"] = h.pooled ? json(h.pooled->r_squared) : json(nullptr);
    e["per_run_mean"] = h.run_mean;
    e["per_run_stderr"] = h.run_stderr;
    e["per_run_count"] = h.runs;
    if (!h.error.empty()) e["error"] = h.error;
    hurst[std::string(to_string(h.kind))] = e;

    if (h.pooled) {
      const auto p = dir / ("dfa_" + std::string(to_string(h.kind)) + ".csv");
      auto out = open_out(p);
      out << "n,F\n";
      for (std::size_t i = 0; i < h.pooled->box_sizes.size(); ++i) {
        out << h.pooled->box_sizes[i] << ',' << h.pooled->fluctuation[i] << '\n';
      }
      written.push_back(p);
    }
  }
  j["hurst"] = hurst;

  json tails = json::object();
  for (const auto& t : rep.tails) {
    json e;
    e["samples"] = t.samples;
    if (t.fit) {
      e["alpha"] = t.fit->alpha;
      e["alpha_stderr"] = t.fit->stderr_alpha;
      e["ccdf_exponent"] = t.fit->alpha - 1.0;
      e["x_min"] = t.fit->x_min;
      e["n_tail"] = t.fit->n_tail;
      e["exp_vs_power_llr"] = t.fit->exp_vs_power_llr;
      e["exp_vs_power_z"] = t.fit->exp_vs_power_z;
      if (t.shape) {
        e["tail_r2_exponential"] = t.shape->r2_exponential;
        e["tail_r2_power"] = t.shape->r2_power;
      }
    } else {
      e["alpha"] = nullptr;
      e["error"] = t.error;
    }
    tails[t.name] = e;
  }
  j["tails"] = tails;

  for (const auto& t : rep.tails) {
    if (t.ccdf.empty()) continue;
    const auto p = dir / ("ccdf_" + t.name + ".csv");
    auto out = open_out(p);
    out << "value,probability\n";
    for (const auto& pt : t.ccdf) out << pt.value << ',' << pt.probability << '\n';
    written.push_back(p);
  }

  json bins = json::array();
  {
    const auto p = dir / "regimes.csv";
    auto out = open_out(p);
    out << "pc_lo,pc_hi,count,low_confidence,mean_depth";
    for (auto q : kBinQuantities) {
      const std::string n(to_string(q));
      out << ',' << n << "_ne," << n << "_sigma," << n << "_label";
    }
    out << '\n';
    for (const auto& b : rep.bins) {
      if (b.count == 0) continue;
      json e;
      e["pc_lo"] = b.lo;
      e["pc_hi"] = b.hi;
      e["count"] = b.count;
      e["low_confidence"] = b.low_confidence;
      e["mean_depth"] = b.mean_depth;
      out << b.lo << ',' << b.hi << ',' << b.count << ',' << (b.low_confidence ? 1 : 0) << ',' << b.mean_depth;
      for (auto q : kBinQuantities) {
        const auto& s = b.of(q);
        e[std::string(to_string(q))] = {
            {"ne", s.extreme_rate}, {"sigma", s.sigma}, {"count", s.count}, {"label", std::string(to_string(s.label))}};
        out << ',' << s.extreme_rate << ',' << s.sigma << ',' << to_string(s.label);
      }
      out << '\n';
      bins.push_back(e);
    }
    written.push_back(p);
  }
  j["regimes"] = bins;

  json bounds = json::object();
  json sigma = json::object();
  for (auto q : kBinQuantities) {
    const auto i = static_cast<std::size_t>(q);
    const auto& b = rep.bounds[i];
    bounds[std::string(to_string(q))] = {
        {"mrfm_start", opt(b.mrfm_start)}, {"mmc_start", opt(b.mmc_start)}, {"memh_contiguous", b.memh_contiguous}};
    if (rep.sigma[i]) {
      sigma[std::string(to_string(q))] = {{"argmax_pc", rep.sigma[i]->argmax_pc}};
    } else {
      sigma[std::string(to_string(q))] = {{"argmax_pc", nullptr}, {"error", rep.sigma_error[i]}};
    }
  }
  j["regime_bounds"] = bounds;
  j["depth_spearman"] = opt(rep.depth_spearman);
  j["sigma_vs_pc"] = sigma;
  {
    const auto p = dir / "sigma_vs_pc.csv";
    auto out = open_out(p);
    out << "quantity,pc,normalized_sigma\n";
    for (auto q : kBinQuantities) {
      const auto& c = rep.sigma[static_cast<std::size_t>(q)];
      if (!c) continue;
      for (std::size_t k = 0; k < c->pc.size(); ++k) {
        out << to_string(q) << ',' << c->pc[k] << ',' << c->normalized[k] << '\n';
      }
    }
    written.push_back(p);
  }

  json kurt;
  kurt["lags"] = rep.options.kurtosis_lags;
  kurt["excess_kurtosis"] = rep.kurtosis;
  kurt["fundamental_excess_kurtosis"] = rep.fv_kurtosis;
  if (!rep.kurtosis_error.empty()) kurt["error"] = rep.kurtosis_error;
  j["aggregational_gaussianity"] = kurt;

  const auto p = dir / "analysis.json";
  auto out = open_out(p);
  out << j.dump(2) << '\n';
  written.push_back(p);
  return written;
}

}  // namespace cdasim::analytics
