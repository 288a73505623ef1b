#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdasim/analytics.hpp"
#include "cdasim/config.hpp"
#include "cdasim/engine.hpp"
#include "cdasim/report.hpp"

namespace py = pybind11;
using namespace cdasim;

namespace {

SimConfig make_config(const std::map<std::string, py::object>& overrides) {
  SimConfig config;
  for (const auto& [key, value] : overrides) set_field(config, key, py::str(value).cast<std::string>());
  config.validate();
  return config;
}

template <typename T, typename F>
py::array_t<T> column(const std::vector<StepRecord>& records, F get) {
  py::array_t<T> out(static_cast<py::ssize_t>(records.size()));
  auto view = out.template mutable_unchecked<1>();
  for (std::size_t i = 0; i < records.size(); ++i) view(static_cast<py::ssize_t>(i)) = get(records[i]);
  return out;
}

py::dict counters_dict(const RunCounters& c) {
  py::dict d;
  d["intents"] = c.intents;
  d["no_order"] = c.no_order;
  d["budget_rejections"] = c.budget_rejections;
  d["breaker_rejections"] = c.breaker_rejections;
  d["self_trade_blocks"] = c.self_trade_blocks;
  d["trades"] = c.trades;
  d["rested"] = c.rested;
  d["expired"] = c.expired;
  d["switches"] = c.switches;
  d["clamp_events"] = c.clamp_events;
  d["floor_blocks"] = c.floor_blocks;
  return d;
}

py::dict run(const std::map<std::string, py::object>& overrides) {
  const SimConfig config = make_config(overrides);
  RunOutput out;
  {
    py::gil_scoped_release release;
    out = run_simulation(config);
  }
  const auto& r = out.records;
  py::dict d;
  d["step"] = column<std::int64_t>(r, [](const StepRecord& s) { return static_cast<std::int64_t>(s.step); });
  d["price"] = column<double>(r, [](const StepRecord& s) { return s.price; });
  d["fundamental"] = column<double>(r, [](const StepRecord& s) { return s.fundamental; });
  d["best_bid"] = column<double>(r, [](const StepRecord& s) { return s.best_bid; });
  d["best_ask"] = column<double>(r, [](const StepRecord& s) { return s.best_ask; });
  d["spread"] = column<double>(r, [](const StepRecord& s) { return s.spread; });
  d["bid_gap"] = column<double>(r, [](const StepRecord& s) { return s.bid_gap; });
  d["ask_gap"] = column<double>(r, [](const StepRecord& s) { return s.ask_gap; });
  d["depth"] = column<std::int64_t>(r, [](const StepRecord& s) { return s.depth; });
  d["n_f"] = column<std::int32_t>(r, [](const StepRecord& s) { return s.n_f; });
  d["n_plus"] = column<std::int32_t>(r, [](const StepRecord& s) { return s.n_plus; });
  d["n_minus"] = column<std::int32_t>(r, [](const StepRecord& s) { return s.n_minus; });
  d["traded"] = column<bool>(r, [](const StepRecord& s) { return s.traded; });
  d["trade_price"] = column<double>(r, [](const StepRecord& s) { return s.trade_price; });
  d["counters"] = counters_dict(out.counters);
  d["seed"] = out.seed;
  return d;
}

py::object opt(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict analyze(const std::map<std::string, py::object>& overrides, const std::vector<std::uint64_t>& seeds,
                 unsigned workers, double bin_width, std::optional<std::filesystem::path> out_dir) {
  const SimConfig config = make_config(overrides);
  analytics::AnalysisOptions options;
  options.bin_width = bin_width;
  analytics::Report rep;
  std::vector<std::string> errors;
  {
    py::gil_scoped_release release;
    analytics::Analyzer analyzer(options);
    for_each_run(config, seeds, workers, [&](EnsembleEntry&& e) {
      if (e.output) analyzer.add_run(config, e.output->records);
      else errors.push_back("seed " + std::to_string(e.seed) + ": " + e.error);
    });
    rep = analyzer.finish();
    if (out_dir) analytics::write_report(*out_dir, rep);
  }

  py::dict hurst;
  for (const auto& h : rep.hurst) hurst[py::str(std::string(analytics::to_string(h.kind)))] =
      h.pooled ? opt(h.pooled->hurst) : py::none();
  py::dict alpha;
  for (const auto& t : rep.tails) alpha[py::str(t.name)] = t.fit ? py::cast(t.fit->alpha) : py::none();
  py::dict sigma_argmax;
  for (std::size_t q = 0; q < rep.sigma.size(); ++q)
    sigma_argmax[py::str(std::string(analytics::to_string(analytics::kBinQuantities[q])))] =
        rep.sigma[q] ? py::cast(rep.sigma[q]->argmax_pc) : py::none();

  py::dict d;
  d["runs"] = rep.runs;
  d["periods"] = rep.periods;
  d["hurst"] = hurst;
  d["alpha"] = alpha;
  d["sigma_argmax_pc"] = sigma_argmax;
  d["kurtosis"] = rep.kurtosis;
  d["depth_spearman"] = opt(rep.depth_spearman);
  d["errors"] = errors;
  return d;
}

py::dict dfa(const std::vector<double>& series, std::optional<std::vector<std::size_t>> boxes) {
  const auto res = boxes ? analytics::dfa(series, *boxes) : analytics::dfa(series);
  py::dict d;
  d["box_sizes"] = res.box_sizes;
  d["fluctuation"] = res.fluctuation;
  d["hurst"] = opt(res.hurst);
  d["stderr"] = res.slope_stderr;
  return d;
}

py::dict fit_power_law(const std::vector<double>& samples, double quantile) {
  const auto fit = analytics::fit_power_law_quantile(samples, quantile);
  py::dict d;
  d["alpha"] = fit.alpha;
  d["x_min"] = fit.x_min;
  d["n_tail"] = fit.n_tail;
  d["stderr"] = fit.stderr_alpha;
  d["exp_vs_power_llr"] = fit.exp_vs_power_llr;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuous double auction simulator and analytics";
  m.attr("__version__") = CDASIM_VERSION;

  m.def("default_config", [] {
    py::dict d;
    for (const auto& [k, v] : to_key_values(SimConfig{})) d[py::str(k)] = v;
    return d;
  }, "Every configuration key with its default value, as text.");

  m.def("run", &run, py::arg("config") = std::map<std::string, py::object>{},
        "Run one simulation. `config` maps keys to values overriding the defaults.\n"
        "Returns per-step columns as numpy arrays plus run counters.");

  m.def("analyze", &analyze, py::arg("config") = std::map<std::string, py::object>{},
        py::arg("seeds") = std::vector<std::uint64_t>{1}, py::arg("workers") = 1u, py::arg("bin_width") = 0.01,
        py::arg("out_dir") = py::none(),
        "Run an ensemble and summarise it. Writes the full report when out_dir is given.");

  m.def("dfa", &dfa, py::arg("series"), py::arg("box_sizes") = py::none(),
        "Detrended fluctuation analysis of a series of increments.");

  m.def("fit_power_law", &fit_power_law, py::arg("samples"), py::arg("quantile") = 0.95,
        "Maximum-likelihood power-law exponent above the given quantile.");

  py::register_exception<std::invalid_argument>(m, "ConfigError", PyExc_ValueError);
}
