#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cdasim/expectations.hpp"
#include "cdasim/order_book.hpp"
#include "cdasim/population.hpp"

namespace cdasim {

enum class SwitchingMode : std::uint8_t { AllAgents, TraderOnly };

// What the +/- band around the previous period close restricts.
//  Trades: executions outside the band are refused; limit orders may rest
//          at any price and still move the quoted mid-point.
//  Orders: additionally, submissions priced outside the band are refused.
enum class BreakerMode : std::uint8_t { Trades, Orders };

struct SimConfig {
  std::int32_t n_agents{500};
  std::int64_t steps{1'000'000};
  double dt{0.01};
  std::int32_t steps_per_period{100};
  double sigma_eps{0.005};
  double sigma{0.1};  // mean of the exponential reservation offset k
  double tick{0.0005};
  double p0{300.0};
  double pf0{300.0};
  double gamma_f{1.0};
  double gamma_c{0.1};
  std::int32_t tau_f{300};
  std::int32_t tau_c{100};
  SwitchParams switching_params{};
  double band{0.15};
  BreakerMode breaker{BreakerMode::Trades};

  double frac_fundamentalist{0.5};
  double frac_optimist{0.25};
  double frac_pessimist{0.25};
  double initial_cash{10'000.0};
  std::int64_t initial_shares{10};

  bool switching{true};
  SwitchingMode switching_mode{SwitchingMode::AllAgents};
  SigmaIndexing sigma_indexing{SigmaIndexing::Verbatim};
  SelfTradePolicy self_trade{SelfTradePolicy::Prevent};

  bool trace_fundamental{false};
  std::vector<Step> lob_snapshot_steps;

  std::uint64_t seed{1};

  Horizons horizons() const noexcept { return Horizons{tau_f, tau_c}; }
  ExpectationParams expectation_params() const noexcept { return ExpectationParams{gamma_f, gamma_c, sigma, tick}; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Same settings with an all-fundamentalist population and switching off.
  SimConfig homogeneous() const;
};

// Ordered key/value view of every field; keys match the config file format.
std::vector<std::pair<std::string, std::string>> to_key_values(const SimConfig& config);

// Sets one field from text. Throws std::invalid_argument naming the key
// when the key is unknown or the value does not parse.
void set_field(SimConfig& config, std::string_view key, std::string_view value);

// `key = value` lines; '#' starts a comment; blank lines ignored.
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);
std::string format_config(const SimConfig& config);

}  // namespace cdasim
