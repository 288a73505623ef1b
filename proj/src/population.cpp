#include "cdasim/population.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace cdasim {

std::int32_t PopulationCounts::of(AgentType t) const noexcept {
  switch (t) {
    case AgentType::Fundamentalist: return n_f;
    case AgentType::Optimist: return n_plus;
    case AgentType::Pessimist: return n_minus;
  }
  return 0;
}

std::int32_t& PopulationCounts::of(AgentType t) noexcept {
  switch (t) {
    case AgentType::Optimist: return n_plus;
    case AgentType::Pessimist: return n_minus;
    default: return n_f;
  }
}

double PopulationCounts::opinion_index() const noexcept {
  const auto nc = chartists();
  return nc > 0 ? static_cast<double>(n_plus - n_minus) / nc : 0.0;
}

double PopulationCounts::chartist_fraction() const noexcept {
  const auto n = total();
  return n > 0 ? static_cast<double>(chartists()) / n : 0.0;
}

PopulationCounts PopulationCounts::tally(std::span<const Agent> agents) {
  PopulationCounts c;
  for (const auto& a : agents) ++c.of(a.type);
  return c;
}

double average_price_trend(std::span<const double> history, std::int32_t horizon, double dt) {
  if (history.size() < 2 || horizon <= 0) return 0.0;
  const auto diffs = std::min<std::size_t>(static_cast<std::size_t>(horizon), history.size() - 1);
  // The mean of consecutive differences telescopes to (last - first) / count.
  const double last = history[history.size() - 1];
  const double first = history[history.size() - 1 - diffs];
  return (last - first) / (static_cast<double>(diffs) * dt);
}

double compute_u1(double x, double trend, double price, const SwitchParams& params) {
  if (!(price > 0.0)) throw std::invalid_argument("price must be positive");
  return params.alpha1 * x + (params.alpha2 / params.v1) * (trend / price);
}

double compute_u2(Outlook outlook, double trend, double price, double fundamental, const SwitchParams& params) {
  if (!(price > 0.0) || !(fundamental > 0.0)) throw std::invalid_argument("prices must be positive");
  const double r = params.big_r * fundamental;
  const double chartist_return = (r + trend / params.v2) / price;
  const double fundamental_gap = params.s * std::abs((fundamental - price) / price);
  const double excess = outlook == Outlook::Optimistic ? chartist_return - params.big_r
                                                       : params.big_r - chartist_return;
  return params.alpha3 * (excess - fundamental_gap);
}

ClampedProbability transition_probability_checked(AgentType from, AgentType to, const PopulationCounts& counts,
                                                  double u, const SwitchParams& params, double dt) {
  if (from == to) throw std::invalid_argument("transition requires distinct types");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double n = counts.total();
  if (n <= 0) return {};

  double rate = 0.0;
  if (is_chartist(from) && is_chartist(to)) {
    // pi_{+-} (pessimist -> optimist) carries e^{U1}; the reverse e^{-U1}.
    const double sign = to == AgentType::Optimist ? 1.0 : -1.0;
    rate = params.v1 * (counts.chartists() / n) * std::exp(sign * u);
  } else if (to == AgentType::Fundamentalist) {
    rate = params.v2 * (counts.n_f / n) * std::exp(-u);
  } else {
    rate = params.v2 * (counts.of(to) / n) * std::exp(u);
  }

  const double raw = rate * dt;
  if (std::isnan(raw)) return {0.0, true};
  if (raw > 1.0) return {1.0, true};
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

double transition_probability(AgentType from, AgentType to, const PopulationCounts& counts, double u,
                              const SwitchParams& params, double dt) {
  return transition_probability_checked(from, to, counts, u, params, dt).p;
}

namespace {

constexpr std::array<AgentType, 3> kTypes{AgentType::Fundamentalist, AgentType::Optimist, AgentType::Pessimist};

struct Targets {
  std::array<AgentType, 2> to{};
  std::array<double, 2> p{};
  bool clamped{false};
};

double pair_signal(AgentType a, AgentType b, const PopulationCounts& counts, double trend, const MarketSignals& m,
                   const SwitchParams& params) {
  if (is_chartist(a) && is_chartist(b)) return compute_u1(counts.opinion_index(), trend, m.price, params);
  const bool optimist_pair = a == AgentType::Optimist || b == AgentType::Optimist;
  return compute_u2(optimist_pair ? Outlook::Optimistic : Outlook::Pessimistic, trend, m.price, m.fundamental,
                    params);
}

std::array<Targets, 3> build_targets(const PopulationCounts& counts, const MarketSignals& market,
                                     const SwitchParams& params, double dt) {
  std::array<Targets, 3> out{};
  for (std::size_t i = 0; i < kTypes.size(); ++i) {
    const AgentType from = kTypes[i];
    const double trend = is_chartist(from) ? market.trend_chartist : market.trend_fundamentalist;
    auto& t = out[i];
    std::size_t k = 0;
    for (AgentType to : kTypes) {
      if (to == from) continue;
      const double u = pair_signal(from, to, counts, trend, market, params);
      const auto cp = transition_probability_checked(from, to, counts, u, params, dt);
      t.to[k] = to;
      t.p[k] = cp.p;
      t.clamped = t.clamped || cp.clamped;
      ++k;
    }
    if (t.p[0] + t.p[1] > 1.0) {
      t.p[1] = 1.0 - t.p[0];
      t.clamped = true;
    }
  }
  return out;
}

bool may_leave(std::int32_t live_group_size, std::int32_t population, double floor_fraction) {
  if (live_group_size <= 1) return false;
  return static_cast<double>(live_group_size) >= floor_fraction * population;
}

// Returns true when the agent switched.
// The floor applies to the group size both at the start of the pass and as
// it stands now, so joins earlier in a pass do not unblock a small group.
bool switch_agent(Agent& agent, const PopulationCounts& frozen, PopulationCounts& live, const Targets& targets,
                  std::int32_t population, const SwitchParams& params, const Horizons& horizons, double u,
                  SwitchReport& report) {
  std::optional<AgentType> target;
  if (u < targets.p[0]) {
    target = targets.to[0];
  } else if (u < targets.p[0] + targets.p[1]) {
    target = targets.to[1];
  }
  if (!target) return false;
  if (!may_leave(frozen.of(agent.type), population, params.floor_fraction) ||
      !may_leave(live.of(agent.type), population, params.floor_fraction)) {
    ++report.floor_blocks;
    return false;
  }
  --live.of(agent.type);
  ++live.of(*target);
  agent.type = *target;
  agent.horizon = horizons.of(*target);
  ++report.switches;
  return true;
}

}  // namespace

SwitchReport apply_switching(std::span<Agent> agents, PopulationCounts& counts, const MarketSignals& market,
                             const SwitchParams& params, const Horizons& horizons, double dt, Rng& rng) {
  SwitchReport report;
  const auto targets = build_targets(counts, market, params, dt);
  for (const auto& t : targets) report.clamp_events += t.clamped ? 1 : 0;
  const std::int32_t population = counts.total();
  PopulationCounts live = counts;
  for (auto& agent : agents) {
    const double u = uniform01(rng);
    switch_agent(agent, counts, live, targets[static_cast<std::size_t>(agent.type)], population, params, horizons,
                 u, report);
  }
  counts = live;
  return report;
}

SwitchReport apply_switching_one(Agent& agent, PopulationCounts& counts, const MarketSignals& market,
                                 const SwitchParams& params, const Horizons& horizons, double dt, Rng& rng) {
  SwitchReport report;
  const auto targets = build_targets(counts, market, params, dt);
  report.clamp_events += targets[static_cast<std::size_t>(agent.type)].clamped ? 1 : 0;
  const double u = uniform01(rng);
  const PopulationCounts frozen = counts;
  switch_agent(agent, frozen, counts, targets[static_cast<std::size_t>(agent.type)], counts.total(), params,
               horizons, u, report);
  return report;
}

}  // namespace cdasim
