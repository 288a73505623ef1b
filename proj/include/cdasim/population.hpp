#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdasim/rng.hpp"
#include "cdasim/types.hpp"

namespace cdasim {

struct Agent {
  AgentId id{0};
  AgentType type{AgentType::Fundamentalist};
  std::int32_t horizon{300};  // steps
  Ticks cash{};
  std::int64_t shares{0};
  // Amounts committed to resting orders. Available cash is cash - reserved_cash.
  Ticks reserved_cash{};
  std::int64_t reserved_shares{0};
};

struct PopulationCounts {
  std::int32_t n_f{0};
  std::int32_t n_plus{0};
  std::int32_t n_minus{0};

  std::int32_t total() const noexcept { return n_f + n_plus + n_minus; }
  std::int32_t chartists() const noexcept { return n_plus + n_minus; }
  std::int32_t of(AgentType t) const noexcept;
  std::int32_t& of(AgentType t) noexcept;
  // (n_plus - n_minus) / n_c; 0 when there are no chartists.
  double opinion_index() const noexcept;
  double chartist_fraction() const noexcept;

  static PopulationCounts tally(std::span<const Agent> agents);
  bool operator==(const PopulationCounts&) const = default;
};

struct SwitchParams {
  double v1{2.0};
  double v2{0.6};
  double alpha1{0.6};
  double alpha2{1.5};
  double alpha3{1.0};
  double big_r{0.0004};  // R; the interest term is r = R * p_f
  double s{0.75};
  double floor_fraction{0.008};
};

enum class Outlook : std::uint8_t { Optimistic, Pessimistic };

// Mean of (p_t - p_{t-1}) / dt over the last `horizon` differences of
// `history` (oldest first). Shorter histories use what is available; an
// empty or single-entry history yields 0.
double average_price_trend(std::span<const double> history, std::int32_t horizon, double dt);

// Herding plus trend signal between optimists and pessimists.
double compute_u1(double x, double trend, double price, const SwitchParams& params);

// Excess profit of an optimistic (pessimistic) chartist over a fundamentalist.
double compute_u2(Outlook outlook, double trend, double price, double fundamental, const SwitchParams& params);

// Probability pi * dt that one agent of type `from` becomes `to` within a
// step, clamped to [0, 1]. `u` is the signal of that pair: U1 for the
// chartist pair, U2,1 for optimist/fundamentalist, U2,2 for
// pessimist/fundamentalist; the sign is applied here. Throws
// std::invalid_argument when from == to.
double transition_probability(AgentType from, AgentType to, const PopulationCounts& counts, double u,
                              const SwitchParams& params, double dt);

// Same as above, also reporting whether the raw value left [0, 1].
struct ClampedProbability {
  double p{0.0};
  bool clamped{false};
};
ClampedProbability transition_probability_checked(AgentType from, AgentType to, const PopulationCounts& counts,
                                                  double u, const SwitchParams& params, double dt);

struct MarketSignals {
  double price{300.0};
  double fundamental{300.0};
  double trend_fundamentalist{0.0};  // average trend over the fundamentalist horizon
  double trend_chartist{0.0};        // average trend over the chartist horizon
};

struct Horizons {
  std::int32_t fundamentalist{300};
  std::int32_t chartist{100};
  std::int32_t of(AgentType t) const noexcept { return is_chartist(t) ? chartist : fundamentalist; }
};

struct SwitchReport {
  std::int64_t switches{0};
  std::int64_t clamp_events{0};
  std::int64_t floor_blocks{0};
};

// One switching pass over `agents` in id order. Probabilities use `counts`
// as frozen at the start of the pass; each agent draws a single uniform
// against its two admissible targets. An agent stays put when its group
// held fewer than floor_fraction * N members at the start of the pass or
// holds fewer now, or when it is the group's last member.
// `counts` is updated in place; switched agents take the new type's horizon.
SwitchReport apply_switching(std::span<Agent> agents, PopulationCounts& counts, const MarketSignals& market,
                             const SwitchParams& params, const Horizons& horizons, double dt, Rng& rng);

// Switching for a single agent, used by the per-trader switching mode.
SwitchReport apply_switching_one(Agent& agent, PopulationCounts& counts, const MarketSignals& market,
                                 const SwitchParams& params, const Horizons& horizons, double dt, Rng& rng);

}  // namespace cdasim
