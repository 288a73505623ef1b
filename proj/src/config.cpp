#include "cdasim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace cdasim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("invalid value '" + std::string(value) + "' for config key '" + std::string(key) + "'");
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  std::string s(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != s.size() || !std::isfinite(out)) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::string key;
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <class T>
Field int_field(std::string key, T SimConfig::*member) {
  return {key,
          [key, member](SimConfig& c, std::string_view v) { c.*member = parse_int<T>(key, v); },
          [member](const SimConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(std::string key, double SimConfig::*member) {
  return {key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_double(key, v); },
          [member](const SimConfig& c) { return fmt_double(c.*member); }};
}

Field switch_field(std::string key, double SwitchParams::*member) {
  return {key,
          [key, member](SimConfig& c, std::string_view v) { c.switching_params.*member = parse_double(key, v); },
          [member](const SimConfig& c) { return fmt_double(c.switching_params.*member); }};
}

Field bool_field(std::string key, bool SimConfig::*member) {
  return {key, [key, member](SimConfig& c, std::string_view v) { c.*member = parse_bool(key, v); },
          [member](const SimConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("n_agents", &SimConfig::n_agents));
    f.push_back(int_field("steps", &SimConfig::steps));
    f.push_back(double_field("dt", &SimConfig::dt));
    f.push_back(int_field("steps_per_period", &SimConfig::steps_per_period));
    f.push_back(double_field("sigma_eps", &SimConfig::sigma_eps));
    f.push_back(double_field("sigma", &SimConfig::sigma));
    f.push_back(double_field("tick", &SimConfig::tick));
    f.push_back(double_field("p0", &SimConfig::p0));
    f.push_back(double_field("pf0", &SimConfig::pf0));
    f.push_back(double_field("gamma_f", &SimConfig::gamma_f));
    f.push_back(double_field("gamma_c", &SimConfig::gamma_c));
    f.push_back(int_field("tau_f", &SimConfig::tau_f));
    f.push_back(int_field("tau_c", &SimConfig::tau_c));
    f.push_back(switch_field("v1", &SwitchParams::v1));
    f.push_back(switch_field("v2", &SwitchParams::v2));
    f.push_back(switch_field("alpha1", &SwitchParams::alpha1));
    f.push_back(switch_field("alpha2", &SwitchParams::alpha2));
    f.push_back(switch_field("alpha3", &SwitchParams::alpha3));
    f.push_back(switch_field("big_r", &SwitchParams::big_r));
    f.push_back(switch_field("s", &SwitchParams::s));
    f.push_back(switch_field("floor_fraction", &SwitchParams::floor_fraction));
    f.push_back(double_field("band", &SimConfig::band));
    f.push_back({"breaker",
                 [](SimConfig& c, std::string_view v) {
                   if (v == "trades") c.breaker = BreakerMode::Trades;
                   else if (v == "orders") c.breaker = BreakerMode::Orders;
                   else bad_value("breaker", v);
                 },
                 [](const SimConfig& c) { return std::string(c.breaker == BreakerMode::Trades ? "trades" : "orders"); }});
    f.push_back(double_field("frac_fundamentalist", &SimConfig::frac_fundamentalist));
    f.push_back(double_field("frac_optimist", &SimConfig::frac_optimist));
    f.push_back(double_field("frac_pessimist", &SimConfig::frac_pessimist));
    f.push_back(double_field("initial_cash", &SimConfig::initial_cash));
    f.push_back(int_field("initial_shares", &SimConfig::initial_shares));
    f.push_back(bool_field("switching", &SimConfig::switching));
    f.push_back({"switching_mode",
                 [](SimConfig& c, std::string_view v) {
                   if (v == "all") c.switching_mode = SwitchingMode::AllAgents;
                   else if (v == "trader") c.switching_mode = SwitchingMode::TraderOnly;
                   else bad_value("switching_mode", v);
                 },
                 [](const SimConfig& c) {
                   return std::string(c.switching_mode == SwitchingMode::AllAgents ? "all" : "trader");
                 }});
    f.push_back({"sigma_indexing",
                 [](SimConfig& c, std::string_view v) {
                   if (v == "verbatim") c.sigma_indexing = SigmaIndexing::Verbatim;
                   else if (v == "aligned") c.sigma_indexing = SigmaIndexing::Aligned;
                   else bad_value("sigma_indexing", v);
                 },
                 [](const SimConfig& c) {
                   return std::string(c.sigma_indexing == SigmaIndexing::Verbatim ? "verbatim" : "aligned");
                 }});
    f.push_back({"self_trade",
                 [](SimConfig& c, std::string_view v) {
                   if (v == "prevent") c.self_trade = SelfTradePolicy::Prevent;
                   else if (v == "allow") c.self_trade = SelfTradePolicy::Allow;
                   else bad_value("self_trade", v);
                 },
                 [](const SimConfig& c) {
                   return std::string(c.self_trade == SelfTradePolicy::Prevent ? "prevent" : "allow");
                 }});
    f.push_back(bool_field("trace_fundamental", &SimConfig::trace_fundamental));
    f.push_back({"lob_snapshot_steps",
                 [](SimConfig& c, std::string_view v) {
                   c.lob_snapshot_steps.clear();
                   std::string s(v);
                   std::stringstream ss(s);
                   std::string item;
                   while (std::getline(ss, item, ',')) {
                     const auto t = trim(item);
                     if (!t.empty()) c.lob_snapshot_steps.push_back(parse_int<Step>("lob_snapshot_steps", t));
                   }
                 },
                 [](const SimConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.lob_snapshot_steps.size(); ++i) {
                     if (i) out += ',';
                     out += std::to_string(c.lob_snapshot_steps[i]);
                   }
                   return out;
                 }});
    f.push_back(int_field("seed", &SimConfig::seed));
    return f;
  }();
  return table;
}

[[noreturn]] void invalid(const std::string& what) { throw std::invalid_argument("invalid config: " + what); }

}  // namespace

void SimConfig::validate() const {
  if (n_agents <= 0) invalid("n_agents must be positive");
  if (steps < 0) invalid("steps must be non-negative");
  if (!(dt > 0.0)) invalid("dt must be positive");
  if (steps_per_period <= 0) invalid("steps_per_period must be positive");
  if (std::abs(steps_per_period * dt - 1.0) > 1e-9) invalid("steps_per_period * dt must equal one time unit");
  if (sigma_eps < 0.0) invalid("sigma_eps must be non-negative");
  if (!(sigma > 0.0)) invalid("sigma must be positive");
  if (!(tick > 0.0)) invalid("tick must be positive");
  if (!(p0 > 0.0)) invalid("p0 must be positive");
  if (!(pf0 > 0.0)) invalid("pf0 must be positive");
  if (!(gamma_f > 0.0) || !(gamma_c > 0.0)) invalid("gamma_f and gamma_c must be positive");
  if (tau_f <= 0 || tau_c <= 0) invalid("tau_f and tau_c must be positive");
  const auto& sp = switching_params;
  if (!(sp.v1 > 0.0) || !(sp.v2 > 0.0)) invalid("v1 and v2 must be positive");
  if (sp.floor_fraction < 0.0 || sp.floor_fraction >= 1.0) invalid("floor_fraction must lie in [0, 1)");
  if (!(band > 0.0) || band >= 1.0) invalid("band must lie in (0, 1)");
  if (frac_fundamentalist < 0.0 || frac_optimist < 0.0 || frac_pessimist < 0.0) invalid("fractions must be >= 0");
  if (std::abs(frac_fundamentalist + frac_optimist + frac_pessimist - 1.0) > 1e-9) invalid("fractions must sum to 1");
  if (initial_cash < 0.0) invalid("initial_cash must be non-negative");
  if (initial_shares < 0) invalid("initial_shares must be non-negative");
}

SimConfig SimConfig::homogeneous() const {
  SimConfig c = *this;
  c.frac_fundamentalist = 1.0;
  c.frac_optimist = 0.0;
  c.frac_pessimist = 0.0;
  c.switching = false;
  return c;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const SimConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

void set_field(SimConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

SimConfig parse_config(std::string_view text) {
  SimConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    set_field(config, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
  }
  return config;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const SimConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace cdasim
