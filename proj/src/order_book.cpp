#include "cdasim/order_book.hpp"

#include <algorithm>
#include <stdexcept>

namespace cdasim {

std::optional<Ticks> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Ticks> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

template <class Levels>
std::optional<std::size_t> OrderBook::match_index(const Levels& levels, AgentId agent, SelfTradePolicy policy) {
  if (levels.empty()) return std::nullopt;
  const Level& level = levels.begin()->second;
  for (std::size_t i = 0; i < level.size(); ++i) {
    if (policy == SelfTradePolicy::Allow || level[i].agent != agent) return i;
  }
  return std::nullopt;
}

std::optional<Ticks> OrderBook::execution_price(const OrderIntent& intent) const {
  if (intent.side == Side::Buy) {
    const auto ask = best_ask();
    if (!ask || intent.price < *ask) return std::nullopt;
    if (!match_index(asks_, intent.agent, policy_)) return std::nullopt;
    return ask;
  }
  const auto bid = best_bid();
  if (!bid || intent.price > *bid) return std::nullopt;
  if (!match_index(bids_, intent.agent, policy_)) return std::nullopt;
  return bid;
}

SubmitResult OrderBook::submit(const OrderIntent& intent, Step t) {
  if (intent.price.value <= 0) throw std::invalid_argument("order price must be positive");
  SubmitResult result;

  const bool buy = intent.side == Side::Buy;
  const auto opposite_best = buy ? best_ask() : best_bid();
  const bool crosses = opposite_best && (buy ? intent.price >= *opposite_best : intent.price <= *opposite_best);

  if (crosses) {
    const auto idx = buy ? match_index(asks_, intent.agent, policy_) : match_index(bids_, intent.agent, policy_);
    if (!idx) {
      result.status = SubmitStatus::SelfTradeBlocked;
      return result;
    }
    auto consume = [&](auto& levels) {
      auto it = levels.begin();
      const LimitOrder resting = it->second[*idx];
      it->second.erase(it->second.begin() + static_cast<std::ptrdiff_t>(*idx));
      if (it->second.empty()) levels.erase(it);
      live_.erase(resting.id);
      return resting;
    };
    const LimitOrder resting = buy ? consume(asks_) : consume(bids_);
    if (!buy) --bid_count_;

    Trade trade;
    trade.step = t;
    trade.price = resting.price;
    trade.buyer = buy ? intent.agent : resting.agent;
    trade.seller = buy ? resting.agent : intent.agent;
    trade.aggressor = intent.side;
    trade.resting_order = resting.id;
    result.status = SubmitStatus::Executed;
    result.trade = trade;
    return result;
  }

  LimitOrder order;
  order.id = next_id_++;
  order.agent = intent.agent;
  order.side = intent.side;
  order.price = intent.price;
  order.submitted = t;
  order.expires_at = t + intent.horizon;
  if (buy) {
    bids_[order.price].push_back(order);
    ++bid_count_;
  } else {
    asks_[order.price].push_back(order);
  }
  live_.emplace(order.id, Location{order.side, order.price});
  expiries_.push(Expiry{order.expires_at, order.id});
  result.status = SubmitStatus::Rested;
  result.rested = order.id;
  return result;
}

std::vector<LimitOrder> OrderBook::expire(Step t) {
  std::vector<LimitOrder> removed;
  while (!expiries_.empty() && expiries_.top().at <= t) {
    const Expiry e = expiries_.top();
    expiries_.pop();
    auto it = live_.find(e.id);
    if (it == live_.end()) continue;  // already executed
    const Location loc = it->second;
    auto collect = [&](auto& levels) {
      auto lit = levels.find(loc.price);
      auto& level = lit->second;
      auto pos = std::find_if(level.begin(), level.end(), [&](const LimitOrder& o) { return o.id == e.id; });
      removed.push_back(*pos);
      level.erase(pos);
      if (level.empty()) levels.erase(lit);
    };
    if (loc.side == Side::Buy) {
      collect(bids_);
      --bid_count_;
    } else {
      collect(asks_);
    }
    live_.erase(it);
  }
  return removed;
}

BookStats OrderBook::stats() const {
  BookStats s;
  s.depth = live_.size();
  if (!bids_.empty() && !asks_.empty()) s.spread = asks_.begin()->first - bids_.begin()->first;
  if (bids_.size() >= 2) s.bid_gap = bids_.begin()->first - std::next(bids_.begin())->first;
  if (asks_.size() >= 2) s.ask_gap = std::next(asks_.begin())->first - asks_.begin()->first;
  return s;
}

std::vector<LevelVolume> OrderBook::snapshot() const {
  std::vector<LevelVolume> out;
  out.reserve(bids_.size() + asks_.size());
  for (auto it = asks_.rbegin(); it != asks_.rend(); ++it) {
    out.push_back({it->first, -static_cast<std::int64_t>(it->second.size())});
  }
  for (const auto& [price, level] : bids_) out.push_back({price, static_cast<std::int64_t>(level.size())});
  return out;
}

std::vector<LimitOrder> OrderBook::orders() const {
  std::vector<LimitOrder> out;
  out.reserve(live_.size());
  for (const auto& [price, level] : bids_) out.insert(out.end(), level.begin(), level.end());
  for (const auto& [price, level] : asks_) out.insert(out.end(), level.begin(), level.end());
  return out;
}

double current_price(const OrderBook& book, const std::optional<Trade>& last_trade, double previous_price,
                     const TickGrid& grid) {
  if (last_trade) return grid.to_price(last_trade->price);
  const auto bid = book.best_bid();
  const auto ask = book.best_ask();
  if (bid && ask) return 0.5 * (grid.to_price(*bid) + grid.to_price(*ask));
  return previous_price;
}

}  // namespace cdasim
