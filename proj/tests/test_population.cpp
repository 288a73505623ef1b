#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "cdasim/population.hpp"

using namespace cdasim;

namespace {

std::vector<Agent> make_agents(int n_f, int n_plus, int n_minus) {
  std::vector<Agent> out;
  AgentId id = 0;
  auto add = [&](AgentType t, int n, int horizon) {
    for (int i = 0; i < n; ++i) out.push_back(Agent{id++, t, horizon});
  };
  add(AgentType::Fundamentalist, n_f, 300);
  add(AgentType::Optimist, n_plus, 100);
  add(AgentType::Pessimist, n_minus, 100);
  return out;
}

// Price at the fundamental and no trend makes every signal vanish.
constexpr MarketSignals kNeutral{300.0, 300.0, 0.0, 0.0};

std::size_t idx(AgentType t) { return static_cast<std::size_t>(t); }

}  // namespace

TEST_CASE("average trend") {
  const std::vector<double> flat(50, 300.0);
  CHECK(average_price_trend(flat, 20, 0.01) == 0.0);

  const std::vector<double> h{100.0, 101.0, 102.0};
  CHECK(average_price_trend(h, 2, 0.01) == doctest::Approx(100.0));

  CHECK(average_price_trend(std::vector<double>{}, 5, 0.01) == 0.0);
  CHECK(average_price_trend(std::vector<double>{300.0}, 5, 0.01) == 0.0);

  SUBCASE("ramps against a brute-force mean of differences") {
    for (double m : {-0.3, 0.002, 1.7}) {
      std::vector<double> ramp;
      for (int i = 0; i < 400; ++i) ramp.push_back(250.0 + m * i);
      for (int horizon : {1, 7, 100, 399, 1000}) {
        const std::size_t n = std::min<std::size_t>(horizon, ramp.size() - 1);
        double acc = 0.0;
        for (std::size_t k = ramp.size() - n; k < ramp.size(); ++k) acc += (ramp[k] - ramp[k - 1]) / 0.01;
        CHECK(average_price_trend(ramp, horizon, 0.01) == doctest::Approx(acc / n).epsilon(1e-9));
        CHECK(average_price_trend(ramp, horizon, 0.01) == doctest::Approx(m / 0.01).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("U1") {
  const SwitchParams p;
  CHECK(compute_u1(0.0, 0.0, 300.0, p) == 0.0);
  CHECK(compute_u1(1.0, 0.0, 300.0, p) == doctest::Approx(0.6));
  CHECK(compute_u1(0.0, 2.0, 100.0, p) == doctest::Approx(0.015));
  CHECK_THROWS_AS(compute_u1(0.0, 0.0, 0.0, p), std::invalid_argument);
}

TEST_CASE("U2") {
  const SwitchParams p;
  CHECK(compute_u2(Outlook::Optimistic, 0.0, 300.0, 300.0, p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(compute_u2(Outlook::Pessimistic, 0.0, 300.0, 300.0, p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(compute_u2(Outlook::Optimistic, 0.6, 300.0, 300.0, p) == doctest::Approx(1.0 / 300.0));

  // Pessimistic with trend equals optimistic with the opposite trend at p = p_f.
  for (double trend = -5.0; trend <= 5.0; trend += 0.25) {
    CHECK(compute_u2(Outlook::Pessimistic, trend, 280.0, 280.0, p) ==
          doctest::Approx(compute_u2(Outlook::Optimistic, -trend, 280.0, 280.0, p)).epsilon(1e-12));
  }

  // The fundamental gap penalises both outlooks equally.
  const double gap_opt = compute_u2(Outlook::Optimistic, 0.0, 300.0, 330.0, p);
  const double r = p.big_r * 330.0;
  CHECK(gap_opt == doctest::Approx(p.alpha3 * ((r / 300.0 - p.big_r) - p.s * 0.1)));
}

TEST_CASE("transition probabilities") {
  const SwitchParams p;
  const PopulationCounts half{250, 125, 125};
  CHECK(transition_probability(AgentType::Pessimist, AgentType::Optimist, half, 0.0, p, 0.01) ==
        doctest::Approx(0.01));
  CHECK(transition_probability(AgentType::Pessimist, AgentType::Optimist, half, 0.0, p, 0.01) ==
        transition_probability(AgentType::Optimist, AgentType::Pessimist, half, 0.0, p, 0.01));

  const PopulationCounts no_chartists{500, 0, 0};
  CHECK(transition_probability(AgentType::Pessimist, AgentType::Optimist, no_chartists, 0.3, p, 0.01) == 0.0);

  // Signs of the signal per direction.
  const double u = 0.4;
  CHECK(transition_probability(AgentType::Pessimist, AgentType::Optimist, half, u, p, 0.01) ==
        doctest::Approx(p.v1 * 0.5 * std::exp(u) * 0.01));
  CHECK(transition_probability(AgentType::Optimist, AgentType::Pessimist, half, u, p, 0.01) ==
        doctest::Approx(p.v1 * 0.5 * std::exp(-u) * 0.01));
  CHECK(transition_probability(AgentType::Fundamentalist, AgentType::Optimist, half, u, p, 0.01) ==
        doctest::Approx(p.v2 * 0.25 * std::exp(u) * 0.01));
  CHECK(transition_probability(AgentType::Optimist, AgentType::Fundamentalist, half, u, p, 0.01) ==
        doctest::Approx(p.v2 * 0.5 * std::exp(-u) * 0.01));

  CHECK_THROWS_AS(transition_probability(AgentType::Optimist, AgentType::Optimist, half, 0.0, p, 0.01),
                  std::invalid_argument);

  const auto clamped = transition_probability_checked(AgentType::Pessimist, AgentType::Optimist, half, 50.0, p, 0.01);
  CHECK(clamped.p == 1.0);
  CHECK(clamped.clamped);
}

TEST_CASE("counts") {
  const auto agents = make_agents(3, 5, 2);
  const auto c = PopulationCounts::tally(agents);
  CHECK(c == PopulationCounts{3, 5, 2});
  CHECK(c.opinion_index() == doctest::Approx(3.0 / 7.0));
  CHECK(c.chartist_fraction() == doctest::Approx(0.7));
  CHECK(PopulationCounts{4, 0, 0}.opinion_index() == 0.0);
}

TEST_CASE("zero rates leave the population unchanged") {
  SwitchParams p;
  p.v1 = 0.0;
  p.v2 = 0.0;
  auto agents = make_agents(250, 125, 125);
  auto counts = PopulationCounts::tally(agents);
  Rng rng = make_stream(1, Stream::Switching);
  for (int i = 0; i < 100; ++i) {
    const auto rep = apply_switching(agents, counts, kNeutral, p, Horizons{}, 0.01, rng);
    CHECK(rep.switches == 0);
  }
  CHECK(counts == PopulationCounts{250, 125, 125});
}

TEST_CASE("floor rule blocks exits from a small group") {
  SwitchParams p;
  auto agents = make_agents(3, 250, 247);
  auto counts = PopulationCounts::tally(agents);
  Rng rng = make_stream(2, Stream::Switching);
  // dt = 1 pushes every probability to its clamp so exits would be certain.
  for (int i = 0; i < 20; ++i) {
    std::vector<AgentId> fundamentalists;
    for (const auto& a : agents) {
      if (a.type == AgentType::Fundamentalist) fundamentalists.push_back(a.id);
    }
    const auto before = counts.n_f;
    apply_switching(agents, counts, kNeutral, p, Horizons{}, 1.0, rng);
    if (before < 4) {
      for (auto id : fundamentalists) CHECK(agents[static_cast<std::size_t>(id)].type == AgentType::Fundamentalist);
    }
  }
}

TEST_CASE("switching preserves counts and the floor over random trajectories") {
  const SwitchParams p;
  const int n = 500;
  const int floor_size = static_cast<int>(std::ceil(p.floor_fraction * n));
  Rng market_rng(99);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto agents = make_agents(400, 60, 40);
  auto counts = PopulationCounts::tally(agents);
  Rng rng = make_stream(4, Stream::Switching);
  for (int step = 0; step < 3000; ++step) {
    const MarketSignals m{300.0 + 20.0 * noise(market_rng), 300.0, 50.0 * noise(market_rng),
                          50.0 * noise(market_rng)};
    const auto before = counts;
    apply_switching(agents, counts, m, p, Horizons{}, 0.05, rng);
    REQUIRE(counts.total() == n);
    REQUIRE(counts == PopulationCounts::tally(agents));
    for (AgentType t : {AgentType::Fundamentalist, AgentType::Optimist, AgentType::Pessimist}) {
      REQUIRE(counts.of(t) >= std::min(before.of(t), floor_size - 1));
      if (before.of(t) >= 1) REQUIRE(counts.of(t) >= 1);
    }
    for (const auto& a : agents) REQUIRE(a.horizon == Horizons{}.of(a.type));
  }
}

TEST_CASE("switch frequency matches the analytic rate") {
  const SwitchParams p;
  const auto initial = make_agents(250, 125, 125);
  const auto initial_counts = PopulationCounts::tally(initial);
  Rng rng = make_stream(11, Stream::Switching);
  constexpr int kSteps = 10000;
  std::array<std::array<double, 3>, 3> flows{};
  for (int step = 0; step < kSteps; ++step) {
    auto agents = initial;
    auto counts = initial_counts;
    apply_switching(agents, counts, kNeutral, p, Horizons{}, 0.01, rng);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].type != initial[i].type) flows[idx(initial[i].type)][idx(agents[i].type)] += 1.0;
    }
  }
  const std::array<AgentType, 3> types{AgentType::Fundamentalist, AgentType::Optimist, AgentType::Pessimist};
  for (AgentType from : types) {
    for (AgentType to : types) {
      if (from == to) continue;
      // Analytic: v * (group share) * e^0 * dt, with the group set by the pair.
      double rate = 0.0;
      if (is_chartist(from) && is_chartist(to)) rate = p.v1 * 0.5;
      else if (to == AgentType::Fundamentalist) rate = p.v2 * 0.5;
      else rate = p.v2 * 0.25;
      const double prob = rate * 0.01;
      const double trials = static_cast<double>(kSteps) * initial_counts.of(from);
      const double expected = trials * prob;
      const double se = std::sqrt(trials * prob * (1.0 - prob));
      CAPTURE(static_cast<int>(from));
      CAPTURE(static_cast<int>(to));
      CHECK(std::abs(flows[idx(from)][idx(to)] - expected) < 3.0 * se);
    }
  }
}

TEST_CASE("zero signal with equal groups gives balanced flows") {
  const SwitchParams p;
  const auto initial = make_agents(100, 100, 100);
  const auto initial_counts = PopulationCounts::tally(initial);
  Rng rng = make_stream(12, Stream::Switching);
  std::array<std::array<double, 3>, 3> flows{};
  for (int step = 0; step < 10000; ++step) {
    auto agents = initial;
    auto counts = initial_counts;
    apply_switching(agents, counts, kNeutral, p, Horizons{}, 0.01, rng);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].type != initial[i].type) flows[idx(initial[i].type)][idx(agents[i].type)] += 1.0;
    }
  }
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double net = flows[a][b] - flows[b][a];
      CHECK(std::abs(net) < 3.0 * std::sqrt(flows[a][b] + flows[b][a]));
    }
  }
}
