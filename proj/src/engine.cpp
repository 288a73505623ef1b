#include "cdasim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "cdasim/expectations.hpp"
#include "cdasim/fundamental.hpp"
#include "cdasim/rng.hpp"

namespace cdasim {

std::optional<Rejection> enforce_budget(const Agent& agent, const OrderIntent& intent, const OrderBook& book) {
  if (intent.side == Side::Sell) {
    if (agent.shares - agent.reserved_shares < 1) return Rejection::Budget;
    return std::nullopt;
  }
  const Ticks payment = book.execution_price(intent).value_or(intent.price);
  if (agent.cash - agent.reserved_cash < payment) return Rejection::Budget;
  return std::nullopt;
}

bool within_band(double price, double reference_close, double band) {
  constexpr double kRel = 1e-12;
  const double upper = reference_close * (1.0 + band);
  const double lower = reference_close * (1.0 - band);
  return price <= upper * (1.0 + kRel) && price >= lower * (1.0 - kRel);
}

std::optional<Rejection> circuit_breaker(const OrderIntent& intent, double reference_close, double band,
                                         const TickGrid& grid) {
  if (!(reference_close > 0.0)) throw std::invalid_argument("reference close must be positive");
  if (!within_band(grid.to_price(intent.price), reference_close, band)) return Rejection::CircuitBreaker;
  return std::nullopt;
}

void settle_trade(const Trade& trade, Agent& buyer, Agent& seller) {
  if (buyer.cash < trade.price) {
    throw std::logic_error("settlement would leave agent " + std::to_string(buyer.id) + " with negative cash");
  }
  if (seller.shares < 1) {
    throw std::logic_error("settlement would leave agent " + std::to_string(seller.id) + " short");
  }
  buyer.cash -= trade.price;
  buyer.shares += 1;
  seller.cash += trade.price;
  seller.shares -= 1;
}

std::vector<Agent> initial_population(const SimConfig& config) {
  const auto n = config.n_agents;
  const auto n_f = static_cast<std::int32_t>(std::llround(config.frac_fundamentalist * n));
  const auto n_plus = std::min(n - n_f, static_cast<std::int32_t>(std::llround(config.frac_optimist * n)));
  const TickGrid grid(config.tick);
  const Horizons horizons = config.horizons();

  std::vector<Agent> agents(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) {
    Agent& a = agents[static_cast<std::size_t>(i)];
    a.id = i;
    a.type = i < n_f ? AgentType::Fundamentalist : (i < n_f + n_plus ? AgentType::Optimist : AgentType::Pessimist);
    a.horizon = horizons.of(a.type);
    a.cash = grid.nearest(config.initial_cash);
    a.shares = config.initial_shares;
  }
  return agents;
}

namespace {

double price_or_missing(const std::optional<Ticks>& t, const TickGrid& grid) {
  return t ? grid.to_price(*t) : kMissing;
}

void release(Agent& agent, const LimitOrder& order) {
  if (order.side == Side::Buy) {
    agent.reserved_cash -= order.price;
  } else {
    agent.reserved_shares -= 1;
  }
}

class Simulation {
 public:
  explicit Simulation(const SimConfig& config)
      : config_(config),
        grid_(config.tick),
        horizons_(config.horizons()),
        expectation_params_(config.expectation_params()),
        book_(config.self_trade),
        fundamental_rng_(make_stream(config.seed, Stream::Fundamental)),
        switching_rng_(make_stream(config.seed, Stream::Switching)),
        trading_rng_(make_stream(config.seed, Stream::Trading)),
        expectation_rng_(make_stream(config.seed, Stream::Expectation)) {
    config_.validate();
    out_.config = config;
    out_.seed = config.seed;
    agents_ = initial_population(config);
    counts_ = PopulationCounts::tally(agents_);
    fundamental_ = FundamentalState{config.pf0, 0};
    history_.reserve(static_cast<std::size_t>(config.steps) + 1);
    history_.push_back(config.p0);
    reference_close_ = config.p0;
    for (const auto& a : agents_) {
      out_.initial_cash_total += a.cash;
      out_.initial_share_total += a.shares;
    }
    out_.records.reserve(static_cast<std::size_t>(config.steps));
    snapshot_steps_ = config.lob_snapshot_steps;
    std::sort(snapshot_steps_.begin(), snapshot_steps_.end());
  }

  RunOutput run() && {
    for (Step t = 0; t < config_.steps; ++t) step(t);
    out_.final_agents = std::move(agents_);
    return std::move(out_);
  }

 private:
  MarketSignals signals() const {
    MarketSignals m;
    m.price = history_.back();
    m.fundamental = fundamental_.value;
    m.trend_fundamentalist = average_price_trend(history_, horizons_.fundamentalist, config_.dt);
    m.trend_chartist = average_price_trend(history_, horizons_.chartist, config_.dt);
    return m;
  }

  void absorb(const SwitchReport& r) {
    out_.counters.switches += r.switches;
    out_.counters.clamp_events += r.clamp_events;
    out_.counters.floor_blocks += r.floor_blocks;
  }

  void step(Step t) {
    // 1. expiry sweep
    for (const auto& order : book_.expire(t)) {
      release(agents_[static_cast<std::size_t>(order.agent)], order);
      ++out_.counters.expired;
    }

    // 2. opinion switching
    if (config_.switching && config_.switching_mode == SwitchingMode::AllAgents) {
      absorb(apply_switching(agents_, counts_, signals(), config_.switching_params, horizons_, config_.dt,
                             switching_rng_));
    }

    // 3. fundamental value
    fundamental_ = step_fundamental(fundamental_, config_.sigma_eps, config_.dt, fundamental_rng_);

    // 4. random trader
    std::uniform_int_distribution<std::int32_t> pick(0, config_.n_agents - 1);
    Agent& trader = agents_[static_cast<std::size_t>(pick(trading_rng_))];
    if (config_.switching && config_.switching_mode == SwitchingMode::TraderOnly) {
      absorb(apply_switching_one(trader, counts_, signals(), config_.switching_params, horizons_, config_.dt,
                                 switching_rng_));
    }

    // 5. expectation and intent
    const double price = history_.back();
    const double sigma_tau =
        is_chartist(trader.type) ? rolling_sigma(history_, trader.horizon, config_.sigma_indexing) : 0.0;
    const double expectation = expected_price(trader.type, price, fundamental_.value, sigma_tau, config_.sigma_eps,
                                              expectation_params_, expectation_rng_);
    const double k = draw_k(expectation_rng_, config_.sigma);
    const auto intent = decide_order(trader.id, trader.horizon, expectation, price, k, grid_);

    std::optional<Trade> trade;
    if (!intent) {
      ++out_.counters.no_order;
    } else {
      ++out_.counters.intents;
      trade = route(trader, *intent, t);
    }

    // 8. price
    const double next_price = current_price(book_, trade, price, grid_);
    if (!std::isfinite(next_price) || !(next_price > 0.0)) {
      throw std::runtime_error("non-finite or non-positive price at step " + std::to_string(t));
    }
    history_.push_back(next_price);

    // 9. record
    record(t, next_price, trade);
    if ((t + 1) % config_.steps_per_period == 0) reference_close_ = next_price;
  }

  // 6-7. filters, submission and settlement
  std::optional<Trade> route(Agent& trader, const OrderIntent& intent, Step t) {
    if (enforce_budget(trader, intent, book_)) {
      ++out_.counters.budget_rejections;
      return std::nullopt;
    }
    if (config_.breaker == BreakerMode::Orders && circuit_breaker(intent, reference_close_, config_.band, grid_)) {
      ++out_.counters.breaker_rejections;
      return std::nullopt;
    }
    // Executions must stay inside the band in either mode; resting orders
    // from earlier periods may sit outside the current one.
    if (const auto exec = book_.execution_price(intent);
        exec && !within_band(grid_.to_price(*exec), reference_close_, config_.band)) {
      ++out_.counters.breaker_rejections;
      return std::nullopt;
    }

    const SubmitResult result = book_.submit(intent, t);
    switch (result.status) {
      case SubmitStatus::SelfTradeBlocked:
        ++out_.counters.self_trade_blocks;
        return std::nullopt;
      case SubmitStatus::Rested:
        ++out_.counters.rested;
        if (intent.side == Side::Buy) {
          trader.reserved_cash += intent.price;
        } else {
          trader.reserved_shares += 1;
        }
        return std::nullopt;
      case SubmitStatus::Executed:
        break;
    }

    const Trade& tr = *result.trade;
    Agent& buyer = agents_[static_cast<std::size_t>(tr.buyer)];
    Agent& seller = agents_[static_cast<std::size_t>(tr.seller)];
    // The resting side's commitment is released before the transfer.
    if (tr.aggressor == Side::Buy) {
      seller.reserved_shares -= 1;
    } else {
      buyer.reserved_cash -= tr.price;
    }
    settle_trade(tr, buyer, seller);
    ++out_.counters.trades;
    out_.trades.push_back(tr);
    return tr;
  }

  void record(Step t, double price, const std::optional<Trade>& trade) {
    const BookStats s = book_.stats();
    StepRecord r;
    r.step = t;
    r.price = price;
    r.fundamental = fundamental_.value;
    r.best_bid = price_or_missing(book_.best_bid(), grid_);
    r.best_ask = price_or_missing(book_.best_ask(), grid_);
    r.spread = price_or_missing(s.spread, grid_);
    r.bid_gap = price_or_missing(s.bid_gap, grid_);
    r.ask_gap = price_or_missing(s.ask_gap, grid_);
    r.depth = static_cast<std::int64_t>(s.depth);
    r.n_f = counts_.n_f;
    r.n_plus = counts_.n_plus;
    r.n_minus = counts_.n_minus;
    r.traded = trade.has_value();
    r.trade_price = trade ? grid_.to_price(trade->price) : kMissing;
    out_.records.push_back(r);

    while (next_snapshot_ < snapshot_steps_.size() && snapshot_steps_[next_snapshot_] <= t) {
      if (snapshot_steps_[next_snapshot_] == t) out_.snapshots.push_back(LobSnapshot{t, book_.snapshot()});
      ++next_snapshot_;
    }
  }

  SimConfig config_;
  TickGrid grid_;
  Horizons horizons_;
  ExpectationParams expectation_params_;
  OrderBook book_;
  Rng fundamental_rng_;
  Rng switching_rng_;
  Rng trading_rng_;
  Rng expectation_rng_;

  std::vector<Agent> agents_;
  PopulationCounts counts_;
  FundamentalState fundamental_;
  std::vector<double> history_;
  double reference_close_{0.0};
  std::vector<Step> snapshot_steps_;
  std::size_t next_snapshot_{0};
  RunOutput out_;
};

}  // namespace

RunOutput run_simulation(const SimConfig& config) { return Simulation(config).run(); }

void for_each_run(const SimConfig& config, std::span<const std::uint64_t> seeds, unsigned workers,
                  const std::function<void(EnsembleEntry&&)>& sink) {
  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;
  std::exception_ptr sink_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      EnsembleEntry entry;
      entry.seed = seeds[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        SimConfig c = config;
        c.seed = seeds[i];
        entry.output = run_simulation(c);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
      entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::lock_guard lock(sink_mutex);
      if (sink_error) return;
      try {
        sink(std::move(entry));
      } catch (...) {
        // Stop handing out work; rethrown once every worker has finished.
        sink_error = std::current_exception();
        next = seeds.size();
        return;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(seeds.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (sink_error) std::rethrow_exception(sink_error);
}

std::vector<EnsembleEntry> run_ensemble(const SimConfig& config, std::span<const std::uint64_t> seeds,
                                        unsigned workers) {
  std::vector<std::uint64_t> sorted(seeds.begin(), seeds.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("ensemble seeds must be distinct");
  }
  std::vector<EnsembleEntry> out(seeds.size());
  for_each_run(config, seeds, workers, [&](EnsembleEntry&& e) {
    const auto pos = std::find(seeds.begin(), seeds.end(), e.seed) - seeds.begin();
    out[static_cast<std::size_t>(pos)] = std::move(e);
  });
  return out;
}

}  // namespace cdasim
