#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "cdasim/expectations.hpp"
#include "cdasim/types.hpp"

namespace cdasim {

struct LimitOrder {
  OrderId id{0};
  AgentId agent{0};
  Side side{Side::Buy};
  Ticks price{};
  Step submitted{0};
  Step expires_at{0};
};

struct Trade {
  Step step{0};
  Ticks price{};
  AgentId buyer{0};
  AgentId seller{0};
  Side aggressor{Side::Buy};
  OrderId resting_order{0};
};

enum class SelfTradePolicy : std::uint8_t { Prevent, Allow };

enum class SubmitStatus : std::uint8_t { Rested, Executed, SelfTradeBlocked };

struct SubmitResult {
  SubmitStatus status{SubmitStatus::Rested};
  std::optional<Trade> trade;
  std::optional<OrderId> rested;
};

struct BookStats {
  std::optional<Ticks> spread;
  std::optional<Ticks> bid_gap;
  std::optional<Ticks> ask_gap;
  std::size_t depth{0};
};

struct LevelVolume {
  Ticks price{};
  std::int64_t volume{0};  // bids positive, asks negative
};

// Continuous double-auction book of one-unit orders with price-time
// priority. A marketable intent consumes exactly one resting order at the
// resting price; anything else rests until it executes or expires.
class OrderBook {
 public:
  explicit OrderBook(SelfTradePolicy policy = SelfTradePolicy::Prevent) : policy_(policy) {}

  std::optional<Ticks> best_bid() const;
  std::optional<Ticks> best_ask() const;

  // Price the intent would execute at if submitted now, or nullopt when it
  // would rest (or be blocked as a self-trade).
  std::optional<Ticks> execution_price(const OrderIntent& intent) const;

  // Throws std::invalid_argument for a non-positive price.
  SubmitResult submit(const OrderIntent& intent, Step t);

  // Removes every order with expires_at <= t and returns them.
  std::vector<LimitOrder> expire(Step t);

  BookStats stats() const;
  std::vector<LevelVolume> snapshot() const;

  std::size_t depth() const noexcept { return live_.size(); }
  std::size_t bid_count() const noexcept { return bid_count_; }
  std::size_t ask_count() const noexcept { return live_.size() - bid_count_; }
  bool empty() const noexcept { return live_.empty(); }
  SelfTradePolicy policy() const noexcept { return policy_; }

  // All resting orders, bids best-first then asks best-first.
  std::vector<LimitOrder> orders() const;

 private:
  using Level = std::deque<LimitOrder>;
  using BidLevels = std::map<Ticks, Level, std::greater<>>;
  using AskLevels = std::map<Ticks, Level, std::less<>>;

  struct Expiry {
    Step at;
    OrderId id;
    bool operator>(const Expiry& o) const noexcept { return at != o.at ? at > o.at : id > o.id; }
  };

  struct Location {
    Side side;
    Ticks price;
  };

  template <class Levels>
  static std::optional<std::size_t> match_index(const Levels& levels, AgentId agent, SelfTradePolicy policy);

  SelfTradePolicy policy_;
  BidLevels bids_;
  AskLevels asks_;
  std::unordered_map<OrderId, Location> live_;
  std::priority_queue<Expiry, std::vector<Expiry>, std::greater<>> expiries_;
  std::size_t bid_count_{0};
  OrderId next_id_{1};
};

// Price after a step: the trade price if one occurred, else the mid-point
// of the quotes when both exist, else the previous price.
double current_price(const OrderBook& book, const std::optional<Trade>& last_trade, double previous_price,
                     const TickGrid& grid);

}  // namespace cdasim
