#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cdasim/expectations.hpp"

using namespace cdasim;

namespace {

// Direct transcription of the dispersion formula with explicit time
// indices: prices p_0 .. p_{t-1} are stored at positions 0 .. t-1.
double sigma_reference(const std::vector<double>& p, int tau, bool aligned) {
  const long t = static_cast<long>(p.size());
  if (t < 2) return 0.0;
  tau = static_cast<int>(std::min<long>(tau, t - 1));
  long double mean = 0.0L;
  for (int k = 1; k <= tau; ++k) mean += aligned ? p[t - k] : p[t - 1 - k];
  mean /= tau;
  long double ss = 0.0L;
  for (int k = 1; k <= tau; ++k) ss += (p[t - k] - mean) * (p[t - k] - mean);
  return static_cast<double>(std::sqrt(ss * std::sqrt(static_cast<long double>(tau)) / tau));
}

}  // namespace

TEST_CASE("rolling sigma examples") {
  const std::vector<double> flat(30, 250.0);
  CHECK(rolling_sigma(flat, 10) == 0.0);
  CHECK(rolling_sigma(std::vector<double>{100.0, 102.0}, 1) == doctest::Approx(2.0));
  CHECK(rolling_sigma(std::vector<double>{100.0}, 5) == 0.0);
  CHECK(rolling_sigma(std::vector<double>{}, 5) == 0.0);
}

TEST_CASE("rolling sigma matches the reference transcription") {
  Rng rng(2024);
  std::normal_distribution<double> step(0.0, 0.7);
  std::uniform_int_distribution<int> len(2, 400);
  std::uniform_int_distribution<int> hor(1, 300);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> h(static_cast<std::size_t>(len(rng)));
    double p = 300.0;
    for (auto& v : h) v = (p += step(rng));
    const int tau = hor(rng);
    for (bool aligned : {false, true}) {
      const double got = rolling_sigma(h, tau, aligned ? SigmaIndexing::Aligned : SigmaIndexing::Verbatim);
      const double want = sigma_reference(h, tau, aligned);
      if (want == 0.0) {
        CHECK(got == 0.0);
      } else {
        REQUIRE(std::abs(got - want) <= 1e-12 * want);
      }
    }
  }
}

TEST_CASE("expectation examples") {
  const ExpectationParams ep;
  CHECK(expectation_from_draw(AgentType::Fundamentalist, 310.0, 300.0, 2.0, 0.005, ep, 0.0) == 300.0);
  CHECK(expectation_from_draw(AgentType::Optimist, 310.0, 300.0, 0.0, 0.005, ep, 1.3) == 310.0);
  CHECK(expectation_from_draw(AgentType::Pessimist, 310.0, 300.0, 0.0, 0.005, ep, -1.3) == 310.0);
  // Floored at one tick.
  CHECK(expectation_from_draw(AgentType::Pessimist, 1.0, 300.0, 50.0, 0.005, ep, 3.0) == ep.tick);

  Rng rng = make_stream(1, Stream::Expectation);
  for (int i = 0; i < 10000; ++i) {
    CHECK(expected_price(AgentType::Pessimist, 300.0, 300.0, 1.5, 0.005, ep, rng) <= 300.0);
    CHECK(expected_price(AgentType::Optimist, 300.0, 300.0, 1.5, 0.005, ep, rng) >= 300.0);
  }
  CHECK_THROWS_AS(expected_price(AgentType::Optimist, 0.0, 300.0, 1.5, 0.005, ep, rng), std::invalid_argument);
}

TEST_CASE("fundamentalist expectations are unbiased") {
  const ExpectationParams ep;
  Rng rng = make_stream(3, Stream::Expectation);
  constexpr int kDraws = 100000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += expected_price(AgentType::Fundamentalist, 310.0, 300.0, 1.0, 0.005, ep, rng);
  const double se = 300.0 * 0.005 / ep.gamma_f / std::sqrt(static_cast<double>(kDraws));
  CHECK(std::abs(sum / kDraws - 300.0) < 3.0 * se);
}

TEST_CASE("optimist minus pessimist gap has the half-normal mean") {
  const ExpectationParams ep;
  const double sigma_tau = 0.8;
  Rng rng = make_stream(4, Stream::Expectation);
  std::normal_distribution<double> gauss;
  constexpr int kDraws = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double z = gauss(rng);
    const double g = expectation_from_draw(AgentType::Optimist, 300.0, 300.0, sigma_tau, 0.005, ep, z) -
                     expectation_from_draw(AgentType::Pessimist, 300.0, 300.0, sigma_tau, 0.005, ep, z);
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
  const double want = 2.0 * sigma_tau / ep.gamma_c * std::sqrt(2.0 / std::numbers::pi);
  CHECK(std::abs(mean - want) < 3.0 * se);
}

TEST_CASE("k draws") {
  Rng rng = make_stream(6, Stream::Trading);
  constexpr int kDraws = 1000000;
  double sum = 0.0;
  int below = 0;
  bool nonneg = true;
  for (int i = 0; i < kDraws; ++i) {
    const double k = draw_k(rng, 0.1);
    nonneg = nonneg && k >= 0.0;
    sum += k;
    below += k <= 0.1 ? 1 : 0;
  }
  CHECK(nonneg);
  CHECK(sum / kDraws == doctest::Approx(0.1).epsilon(0.01));
  CHECK(static_cast<double>(below) / kDraws == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.005 / 0.632));
  CHECK_THROWS_AS(draw_k(rng, 0.0), std::invalid_argument);
}

TEST_CASE("order decisions") {
  const TickGrid grid(0.0005);
  CHECK_FALSE(decide_order(1, 100, 300.0, 300.0, 0.1, grid));

  const auto buy = decide_order(1, 100, 310.0, 300.0, 0.1, grid);
  REQUIRE(buy);
  CHECK(buy->side == Side::Buy);
  CHECK(buy->price == Ticks{558000});
  CHECK(buy->horizon == 100);

  const auto sell = decide_order(2, 300, 290.0, 300.0, 0.0, grid);
  REQUIRE(sell);
  CHECK(sell->side == Side::Sell);
  CHECK(sell->price == Ticks{580000});

  CHECK_FALSE(decide_order(1, 100, 0.0002, 0.0001, 0.9, grid));
}

TEST_CASE("reservations bracket the expectation and sit on the grid") {
  const TickGrid grid(0.0005);
  Rng rng(77);
  std::uniform_real_distribution<double> price(1.0, 600.0);
  for (int i = 0; i < 100000; ++i) {
    const double p = price(rng);
    const double e = price(rng);
    const double k = draw_k(rng, 0.1);
    const auto o = decide_order(0, 10, e, p, k, grid);
    if (!o) continue;
    const double r = grid.to_price(o->price);
    REQUIRE(o->price.value > 0);
    REQUIRE(std::abs(r / grid.tick() - std::round(r / grid.tick())) < 1e-6);
    if (o->side == Side::Buy) {
      REQUIRE(e > p);
      REQUIRE(r <= e + 1e-9);
      REQUIRE(r <= e * (1.0 - k) + 1e-9);
      REQUIRE(r > e * (1.0 - k) - grid.tick() - 1e-9);
    } else {
      REQUIRE(e < p);
      REQUIRE(r >= e - 1e-9);
      REQUIRE(r >= e * (1.0 + k) - 1e-9);
      REQUIRE(r < e * (1.0 + k) + grid.tick() + 1e-9);
    }
  }
}
