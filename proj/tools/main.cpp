#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdasim/config.hpp"
#include "cdasim/engine.hpp"
#include "cdasim/io.hpp"
#include "cdasim/report.hpp"
#include "cdasim/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cdasim;

namespace {

constexpr const char* kWorkersEnv = "CDASIM_WORKERS";

// Exit codes: 1 runtime/I-O failure, 2 bad usage or configuration.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string(kWorkersEnv) + " must be a positive integer, got '" + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read config file '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedConfig {
  SimConfig config;
  std::string source;  // path or "<defaults>"
  std::string text;    // exact bytes hashed
};

LoadedConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  LoadedConfig lc;
  if (!path.empty()) {
    lc.source = path;
    lc.text = read_file(path);
    try {
      lc.config = parse_config(lc.text);
    } catch (const std::exception& e) {
      throw UsageError(path + ": " + e.what());
    }
  } else {
    lc.source = "<defaults>";
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
    try {
      set_field(lc.config, o.substr(0, eq), o.substr(eq + 1));
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  return lc;
}

void validate(const SimConfig& c) {
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

json experiment_base(const std::string& command, const LoadedConfig& lc, const SimConfig& effective,
                     const fs::path& out, const std::vector<std::string>& overrides) {
  json m;
  m["tool"] = "cdasim";
  m["version"] = kVersion;
  m["command"] = command;
  m["config_path"] = lc.source;
  m["config_sha256"] = lc.text.empty() && lc.source == "<defaults>" ? json(nullptr) : json(io::sha256_hex(lc.text));
  m["overrides"] = overrides;
  // The effective configuration is saved beside the manifest so a run can
  // be repeated from it.
  const auto eff_path = out / "config.txt";
  const auto eff_text = format_config(effective);
  write_text(eff_path, eff_text);
  m["effective_config"] = eff_path.filename().string();
  m["effective_config_sha256"] = io::sha256_hex(eff_text);
  return m;
}

std::vector<std::string> relative_files(const std::vector<fs::path>& files, const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(fs::relative(f, root).generic_string());
  return out;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), first);
  return s;
}

struct EnsembleSummary {
  json runs = json::array();
  std::size_t failed{0};
};

// Runs every seed, writing each run to <out>/seed_<s> and feeding it to
// `analyzer` when given. Records are dropped once written.
EnsembleSummary run_seeds(const SimConfig& config, const std::vector<std::uint64_t>& seeds, unsigned workers,
                          const fs::path& out, analytics::Analyzer* analyzer) {
  EnsembleSummary summary;
  std::vector<json> by_seed(seeds.size());
  for_each_run(config, seeds, workers, [&](EnsembleEntry&& e) {
    const auto idx = static_cast<std::size_t>(std::find(seeds.begin(), seeds.end(), e.seed) - seeds.begin());
    json r;
    r["seed"] = e.seed;
    r["wall_seconds"] = e.wall_seconds;
    if (e.output) {
      const auto dir = out / ("seed_" + std::to_string(e.seed));
      const auto files = io::write_run(dir, *e.output);
      if (analyzer) analyzer->add_run(e.output->config, e.output->records);
      r["status"] = "ok";
      r["dir"] = fs::relative(dir, out).generic_string();
      r["files"] = relative_files(files, out);
      std::cerr << "seed " << e.seed << " done in " << e.wall_seconds << " s\n";
    } else {
      ++summary.failed;
      r["status"] = "failed";
      r["error"] = e.error;
      std::cerr << "seed " << e.seed << " failed: " << e.error << "\n";
    }
    by_seed[idx] = std::move(r);
  });
  for (auto& r : by_seed) summary.runs.push_back(std::move(r));
  return summary;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::uint64_t seed{1};
  std::string out;
  std::vector<std::string> overrides;
};

int cmd_run(const RunArgs& a) {
  auto lc = load(a.config, a.overrides);
  lc.config.seed = a.seed;
  validate(lc.config);
  const fs::path out = a.out;
  fs::create_directories(out);
  auto m = experiment_base("run", lc, lc.config, out, a.overrides);
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_simulation(lc.config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto files = io::write_run(out, result);
  m["seeds"] = {a.seed};
  m["runs"] = json::array({{{"seed", a.seed},
                            {"status", "ok"},
                            {"dir", "."},
                            {"files", relative_files(files, out)},
                            {"wall_seconds", wall}}});
  write_text(out / "experiment.json", m.dump(2) + "\n");
  std::cerr << "wrote " << result.records.size() << " steps to " << out.string() << "\n";
  return 0;
}

struct EnsembleArgs {
  std::string config;
  std::size_t seeds{10};
  std::string out;
  unsigned workers{0};
  std::vector<std::string> overrides;
};

int cmd_ensemble(const EnsembleArgs& a) {
  auto lc = load(a.config, a.overrides);
  validate(lc.config);
  const fs::path out = a.out;
  fs::create_directories(out);
  auto m = experiment_base("ensemble", lc, lc.config, out, a.overrides);
  const auto seeds = seed_range(lc.config.seed, a.seeds);
  const unsigned workers = a.workers ? a.workers : default_workers();
  const auto start = std::chrono::steady_clock::now();
  auto summary = run_seeds(lc.config, seeds, workers, out, nullptr);
  m["seeds"] = seeds;
  m["workers"] = workers;
  m["runs"] = std::move(summary.runs);
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(out / "experiment.json", m.dump(2) + "\n");
  return summary.failed ? 1 : 0;
}

// Config of a run directory, read back from its manifest.
SimConfig run_config(const fs::path& dir) {
  const auto p = dir / "manifest.json";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  const auto j = json::parse(in);
  SimConfig c;
  for (const auto& [k, v] : j.at("config").items()) set_field(c, k, v.get<std::string>());
  return c;
}

std::vector<fs::path> find_runs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> runs;
  for (const auto& in : inputs) {
    const fs::path p = in;
    if (fs::exists(p / "steps.csv")) {
      runs.push_back(p);
      continue;
    }
    if (!fs::is_directory(p)) throw UsageError("input '" + in + "' is not a directory");
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_directory() && fs::exists(e.path() / "steps.csv")) found.push_back(e.path());
    }
    if (found.empty()) throw UsageError("no run directories (with steps.csv) under '" + in + "'");
    std::sort(found.begin(), found.end());
    runs.insert(runs.end(), found.begin(), found.end());
  }
  return runs;
}

void print_tables(const analytics::Report& rep, bool homogeneous, std::ostream& os) {
  using analytics::SeriesKind;
  struct Ref {
    SeriesKind kind;
    double het;
    double hom;
  };
  const std::vector<Ref> refs{{SeriesKind::Return, 0.46, 0.52},   {SeriesKind::Volatility, 0.82, 0.51},
                              {SeriesKind::Spread, 0.87, 0.52},   {SeriesKind::FirstGap, 0.87, 0.50},
                              {SeriesKind::FvReturn, 0.49, 0.50}, {SeriesKind::Volume, 0.94, 0.51}};
  char line[160];
  os << "Hurst exponents (DFA-1, pooled over " << rep.runs << " runs)\n";
  std::snprintf(line, sizeof line, "  %-12s %10s %10s %10s\n", "series", "H", "stderr", "paper");
  os << line;
  for (const auto& r : refs) {
    const auto& h = rep.hurst_of(r.kind);
    const bool ok = h.pooled && h.pooled->hurst;
    std::snprintf(line, sizeof line, "  %-12s %10.3f %10.3f %10.2f\n", std::string(to_string(r.kind)).c_str(),
                  ok ? *h.pooled->hurst : std::nan(""), ok ? h.pooled->slope_stderr : std::nan(""),
                  homogeneous ? r.hom : r.het);
    os << line;
  }
  os << "Tail exponents (density MLE, x_min at quantile " << rep.options.xmin_quantile << ")\n";
  const std::vector<std::pair<std::string, double>> tails{
      {"return_positive", 1.89}, {"return_negative", 2.03}, {"spread", 1.53}, {"first_gap", 1.78}};
  std::snprintf(line, sizeof line, "  %-16s %10s %10s %8s %10s\n", "series", "alpha", "stderr", "n_tail", "paper");
  os << line;
  for (const auto& [name, ref] : tails) {
    const auto& t = rep.tail(name);
    if (t.fit) {
      std::snprintf(line, sizeof line, "  %-16s %10.3f %10.3f %8zu %10.2f\n", name.c_str(), t.fit->alpha,
                    t.fit->stderr_alpha, t.fit->n_tail, homogeneous ? std::nan("") : ref);
    } else {
      std::snprintf(line, sizeof line, "  %-16s %s\n", name.c_str(), t.error.c_str());
    }
    os << line;
  }
  os << "Regime bounds over P_c (bins with >= " << analytics::kLowConfidenceCount << " steps)\n";
  for (auto q : analytics::kBinQuantities) {
    const auto& b = rep.bounds[static_cast<std::size_t>(q)];
    const auto& s = rep.sigma[static_cast<std::size_t>(q)];
    os << "  " << to_string(q) << ": MRFM from " << (b.mrfm_start ? std::to_string(*b.mrfm_start) : "none")
       << ", MMC from " << (b.mmc_start ? std::to_string(*b.mmc_start) : "none") << ", sigma peak at "
       << (s ? std::to_string(s->argmax_pc) : "n/a") << "\n";
  }
  os << "Excess kurtosis of returns by lag (periods):";
  for (std::size_t i = 0; i < rep.kurtosis.size(); ++i) {
    os << " " << rep.options.kurtosis_lags[i] << ":" << rep.kurtosis[i];
  }
  os << "\n";
}

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string out;
  double bin_width{0.01};
  double xmin_quantile{0.95};
  std::string sampling{"close"};
};

analytics::AnalysisOptions options_from(double bin_width, double q, const std::string& sampling) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) throw UsageError("--bin-width must lie in (0, 1]");
  if (!(q > 0.0 && q < 1.0)) throw UsageError("--xmin-quantile must lie in (0, 1)");
  analytics::AnalysisOptions o;
  o.bin_width = bin_width;
  o.xmin_quantile = q;
  if (sampling == "close") o.sampling = analytics::PeriodSampling::Close;
  else if (sampling == "mean") o.sampling = analytics::PeriodSampling::Mean;
  else throw UsageError("--period-sampling must be 'close' or 'mean'");
  return o;
}

int cmd_analyze(const AnalyzeArgs& a) {
  const auto runs = find_runs(a.inputs);
  analytics::Analyzer analyzer(options_from(a.bin_width, a.xmin_quantile, a.sampling));
  bool homogeneous = true;
  for (const auto& dir : runs) {
    const auto config = run_config(dir);
    homogeneous = homogeneous && !config.switching && config.frac_fundamentalist == 1.0;
    const auto records = io::read_steps_csv(dir / "steps.csv");
    analyzer.add_run(config, records);
  }
  auto rep = analyzer.finish();
  analytics::write_report(a.out, rep);
  print_tables(rep, homogeneous, std::cout);
  return 0;
}

struct ReproduceArgs {
  double scale{0.1};
  bool homogeneous{false};
  std::string out{"reproduce_out"};
  std::string config;
  unsigned workers{0};
  std::vector<std::string> overrides;
  double bin_width{0.01};
  double xmin_quantile{0.95};
  std::string sampling{"close"};
};

int cmd_reproduce(const ReproduceArgs& a) {
  if (!(a.scale > 0.0 && a.scale <= 1.0)) throw UsageError("--scale must lie in (0, 1]");
  auto lc = load(a.config, a.overrides);
  // Full scale is 100 seeds of 10^6 steps; both shrink with the scale.
  lc.config.steps = static_cast<std::int64_t>(std::llround(1'000'000 * a.scale));
  const auto n_seeds = static_cast<std::size_t>(std::max(1L, std::lround(100 * a.scale)));
  SimConfig config = a.homogeneous ? lc.config.homogeneous() : lc.config;
  validate(config);

  const fs::path out = a.out;
  fs::create_directories(out);
  auto m = experiment_base(a.homogeneous ? "reproduce-paper --homogeneous" : "reproduce-paper", lc, config, out,
                           a.overrides);
  const auto seeds = seed_range(config.seed, n_seeds);
  const unsigned workers = a.workers ? a.workers : default_workers();
  std::cerr << "running " << n_seeds << " seeds x " << config.steps << " steps on " << workers << " worker(s)\n";

  analytics::Analyzer analyzer(options_from(a.bin_width, a.xmin_quantile, a.sampling));
  const auto start = std::chrono::steady_clock::now();
  auto summary = run_seeds(config, seeds, workers, out / "runs", &analyzer);
  for (auto& r : summary.runs) {
    if (r.contains("dir")) r["dir"] = "runs/" + r["dir"].get<std::string>();
    if (r.contains("files")) {
      for (auto& f : r["files"]) f = "runs/" + f.get<std::string>();
    }
  }
  m["scale"] = a.scale;
  m["homogeneous"] = a.homogeneous;
  m["seeds"] = seeds;
  m["workers"] = workers;
  m["runs"] = summary.runs;

  if (analyzer.runs() == 0) {
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(out / "experiment.json", m.dump(2) + "\n");
    std::cerr << "every run failed; nothing to analyse\n";
    return 1;
  }
  auto rep = analyzer.finish();
  const auto files = analytics::write_report(out / "analysis", rep);
  m["analysis"] = relative_files(files, out);
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(out / "experiment.json", m.dump(2) + "\n");

  std::ostringstream tables;
  print_tables(rep, a.homogeneous, tables);
  write_text(out / "summary.txt", tables.str());
  std::cout << tables.str();
  if (summary.failed) std::cerr << summary.failed << " run(s) failed; analysis used the rest\n";
  return summary.failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous double auction market simulator with switching traders"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cmd->add_option("--config", run.config, "Config file (key = value lines)")->required();
  run_cmd->add_option("--seed", run.seed, "Random seed")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--set", run.overrides, "Override a config key (key=value)");

  EnsembleArgs ens;
  auto* ens_cmd = app.add_subcommand("ensemble", "Run consecutive seeds starting at the config seed");
  ens_cmd->add_option("--config", ens.config, "Config file")->required();
  ens_cmd->add_option("--seeds", ens.seeds, "Number of seeds")->required()->check(CLI::PositiveNumber);
  ens_cmd->add_option("--out", ens.out, "Output root")->required();
  ens_cmd->add_option("--workers", ens.workers, std::string("Worker threads (default: $") + kWorkersEnv +
                                                     " or the hardware thread count)");
  ens_cmd->add_option("--set", ens.overrides, "Override a config key (key=value)");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Analyse run directories or ensemble roots");
  an_cmd->add_option("--in", an.inputs, "Run directories or ensemble roots")->required()->expected(1, -1);
  an_cmd->add_option("--out", an.out, "Output directory")->required();
  an_cmd->add_option("--bin-width", an.bin_width, "Width of chartist-fraction bins")->capture_default_str();
  an_cmd->add_option("--xmin-quantile", an.xmin_quantile, "Quantile used as the tail threshold")
      ->capture_default_str();
  an_cmd->add_option("--period-sampling", an.sampling, "Spread/gap per period: close or mean")->capture_default_str();

  ReproduceArgs rp;
  auto* rp_cmd = app.add_subcommand("reproduce-paper", "Ensemble plus full analysis at a given scale");
  rp_cmd->add_option("--scale", rp.scale, "1.0 = 100 seeds x 10^6 steps; default 0.1 = 10 seeds x 10^5 steps")
      ->capture_default_str();
  rp_cmd->add_flag("--homogeneous", rp.homogeneous, "Fundamentalists only, switching off");
  rp_cmd->add_option("--out", rp.out, "Output root")->capture_default_str();
  rp_cmd->add_option("--config", rp.config, "Base config file (defaults otherwise)");
  rp_cmd->add_option("--workers", rp.workers, "Worker threads");
  rp_cmd->add_option("--set", rp.overrides, "Override a config key (key=value)");
  rp_cmd->add_option("--bin-width", rp.bin_width, "Width of chartist-fraction bins")->capture_default_str();
  rp_cmd->add_option("--xmin-quantile", rp.xmin_quantile, "Quantile used as the tail threshold")
      ->capture_default_str();
  rp_cmd->add_option("--period-sampling", rp.sampling, "Spread/gap per period: close or mean")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*ens_cmd) return cmd_ensemble(ens);
    if (*an_cmd) return cmd_analyze(an);
    if (*rp_cmd) return cmd_reproduce(rp);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
