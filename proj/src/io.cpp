#include "cdasim/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cdasim::io {

namespace {

void put(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  // Shortest form that round-trips.
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ptr - buf.data());
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double field_double(std::string_view s, std::size_t lineno) {
  if (s.empty()) return kMissing;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("steps.csv line " + std::to_string(lineno) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

template <class Int>
Int field_int(std::string_view s, std::size_t lineno) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("steps.csv line " + std::to_string(lineno) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

void write_steps_csv(std::ostream& out, std::span<const StepRecord> records) {
  out << kStepColumns << '\n';
  for (const auto& r : records) {
    out << r.step << ',';
    put(out, r.price);
    out << ',';
    put(out, r.fundamental);
    out << ',';
    put(out, r.best_bid);
    out << ',';
    put(out, r.best_ask);
    out << ',';
    put(out, r.spread);
    out << ',';
    put(out, r.bid_gap);
    out << ',';
    put(out, r.ask_gap);
    out << ',' << r.depth << ',' << r.n_f << ',' << r.n_plus << ',' << r.n_minus << ',' << (r.traded ? 1 : 0) << ',';
    put(out, r.trade_price);
    out << '\n';
  }
}

void write_trades_csv(std::ostream& out, std::span<const Trade> trades, double tick) {
  const TickGrid grid(tick);
  out << "step,price,buyer,seller,aggressor,resting_order\n";
  for (const auto& t : trades) {
    out << t.step << ',';
    put(out, grid.to_price(t.price));
    out << ',' << t.buyer << ',' << t.seller << ',' << to_string(t.aggressor) << ',' << t.resting_order << '\n';
  }
}

void write_snapshot_csv(std::ostream& out, const LobSnapshot& snapshot, double tick) {
  const TickGrid grid(tick);
  out << "price,volume\n";
  for (const auto& level : snapshot.levels) {
    put(out, grid.to_price(level.price));
    out << ',' << level.volume << '\n';
  }
}

void write_fundamental_csv(std::ostream& out, std::span<const StepRecord> records) {
  out << "step,value\n";
  for (const auto& r : records) {
    out << r.step << ',';
    put(out, r.fundamental);
    out << '\n';
  }
}

std::vector<StepRecord> read_steps_csv(std::istream& in) {
  std::vector<StepRecord> out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw std::runtime_error("steps.csv is empty");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kStepColumns) throw std::runtime_error("steps.csv has an unexpected header");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 14) {
      throw std::runtime_error("steps.csv line " + std::to_string(lineno) + ": expected 14 fields");
    }
    StepRecord r;
    r.step = field_int<Step>(f[0], lineno);
    r.price = field_double(f[1], lineno);
    r.fundamental = field_double(f[2], lineno);
    r.best_bid = field_double(f[3], lineno);
    r.best_ask = field_double(f[4], lineno);
    r.spread = field_double(f[5], lineno);
    r.bid_gap = field_double(f[6], lineno);
    r.ask_gap = field_double(f[7], lineno);
    r.depth = field_int<std::int64_t>(f[8], lineno);
    r.n_f = field_int<std::int32_t>(f[9], lineno);
    r.n_plus = field_int<std::int32_t>(f[10], lineno);
    r.n_minus = field_int<std::int32_t>(f[11], lineno);
    r.traded = field_int<int>(f[12], lineno) != 0;
    r.trade_price = field_double(f[13], lineno);
    out.push_back(r);
  }
  return out;
}

std::vector<StepRecord> read_steps_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return read_steps_csv(in);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::vector<std::filesystem::path> write_run(const std::filesystem::path& dir, const RunOutput& run) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  const auto steps_path = dir / "steps.csv";
  {
    auto out = open_out(steps_path);
    write_steps_csv(out, run.records);
  }
  written.push_back(steps_path);

  const auto trades_path = dir / "trades.csv";
  {
    auto out = open_out(trades_path);
    write_trades_csv(out, run.trades, run.config.tick);
  }
  written.push_back(trades_path);

  for (const auto& snap : run.snapshots) {
    const auto p = dir / ("lob_" + std::to_string(snap.step) + ".csv");
    auto out = open_out(p);
    write_snapshot_csv(out, snap, run.config.tick);
    written.push_back(p);
  }

  if (run.config.trace_fundamental) {
    const auto p = dir / "fundamental.csv";
    auto out = open_out(p);
    write_fundamental_csv(out, run.records);
    written.push_back(p);
  }

  Ticks final_cash{};
  std::int64_t final_shares = 0;
  for (const auto& a : run.final_agents) {
    final_cash += a.cash;
    final_shares += a.shares;
  }
  const TickGrid grid(run.config.tick);
  const auto& c = run.counters;

  nlohmann::ordered_json manifest;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : to_key_values(run.config)) cfg[k] = v;
  manifest["config"] = cfg;
  manifest["seed"] = run.seed;
  manifest["steps"] = run.records.size();
  manifest["totals"] = {{"initial_cash", grid.to_price(run.initial_cash_total)},
                        {"final_cash", grid.to_price(final_cash)},
                        {"initial_cash_ticks", run.initial_cash_total.value},
                        {"final_cash_ticks", final_cash.value},
                        {"initial_shares", run.initial_share_total},
                        {"final_shares", final_shares}};
  manifest["counters"] = {{"intents", c.intents},
                          {"no_order", c.no_order},
                          {"budget_rejections", c.budget_rejections},
                          {"breaker_rejections", c.breaker_rejections},
                          {"self_trade_blocks", c.self_trade_blocks},
                          {"trades", c.trades},
                          {"rested", c.rested},
                          {"expired", c.expired},
                          {"switches", c.switches},
                          {"clamp_events", c.clamp_events},
                          {"floor_blocks", c.floor_blocks}};
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& p : written) files.push_back(p.filename().string());
  manifest["files"] = files;

  const auto manifest_path = dir / "manifest.json";
  {
    auto out = open_out(manifest_path);
    out << manifest.dump(2) << '\n';
  }
  written.push_back(manifest_path);
  return written;
}

}  // namespace cdasim::io
