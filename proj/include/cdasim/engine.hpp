#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdasim/config.hpp"
#include "cdasim/order_book.hpp"
#include "cdasim/population.hpp"

namespace cdasim {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Per-step market snapshot. Quote-derived fields are NaN when undefined.
struct StepRecord {
  Step step{0};
  double price{0.0};
  double fundamental{0.0};
  double best_bid{kMissing};
  double best_ask{kMissing};
  double spread{kMissing};
  double bid_gap{kMissing};
  double ask_gap{kMissing};
  std::int64_t depth{0};
  std::int32_t n_f{0};
  std::int32_t n_plus{0};
  std::int32_t n_minus{0};
  bool traded{false};
  double trade_price{kMissing};

  double chartist_fraction() const noexcept {
    const auto n = n_f + n_plus + n_minus;
    return n > 0 ? static_cast<double>(n_plus + n_minus) / n : 0.0;
  }
};

struct RunCounters {
  std::int64_t intents{0};
  std::int64_t no_order{0};
  std::int64_t budget_rejections{0};
  std::int64_t breaker_rejections{0};
  std::int64_t self_trade_blocks{0};
  std::int64_t trades{0};
  std::int64_t rested{0};
  std::int64_t expired{0};
  std::int64_t switches{0};
  std::int64_t clamp_events{0};
  std::int64_t floor_blocks{0};
};

struct LobSnapshot {
  Step step{0};
  std::vector<LevelVolume> levels;
};

struct RunOutput {
  SimConfig config;
  std::uint64_t seed{0};
  std::vector<StepRecord> records;
  std::vector<Trade> trades;
  std::vector<Agent> final_agents;
  std::vector<LobSnapshot> snapshots;
  RunCounters counters;
  Ticks initial_cash_total{};
  std::int64_t initial_share_total{0};
};

enum class Rejection : std::uint8_t { Budget, CircuitBreaker };

// Buy: rejected when uncommitted cash is below the worst-case payment (the
// best ask when marketable, else the reservation). Sell: rejected when no
// uncommitted share is held.
std::optional<Rejection> enforce_budget(const Agent& agent, const OrderIntent& intent, const OrderBook& book);

// Rejected when the reservation lies outside [1 - band, 1 + band] times the
// reference close (inclusive).
bool within_band(double price, double reference_close, double band);
std::optional<Rejection> circuit_breaker(const OrderIntent& intent, double reference_close, double band,
                                         const TickGrid& grid);

// Moves one share and exactly `trade.price` ticks of cash. Throws
// std::logic_error when the buyer lacks the cash or the seller the share.
void settle_trade(const Trade& trade, Agent& buyer, Agent& seller);

std::vector<Agent> initial_population(const SimConfig& config);

// Runs `config.steps` steps from `config.seed`. Throws std::runtime_error
// with the step number on a non-finite state.
RunOutput run_simulation(const SimConfig& config);

struct EnsembleEntry {
  std::uint64_t seed{0};
  std::optional<RunOutput> output;
  std::string error;
  double wall_seconds{0.0};
};

// Runs one simulation per seed on up to `workers` threads. A failing run is
// reported in its entry without affecting the others. Results are in seed
// list order.
std::vector<EnsembleEntry> run_ensemble(const SimConfig& config, std::span<const std::uint64_t> seeds,
                                        unsigned workers = 1);

// Streaming variant: `sink` receives each finished entry (serialised, in
// completion order) and owns it afterwards. An exception thrown by the sink
// stops the remaining runs and is rethrown to the caller.
void for_each_run(const SimConfig& config, std::span<const std::uint64_t> seeds, unsigned workers,
                  const std::function<void(EnsembleEntry&&)>& sink);

}  // namespace cdasim
