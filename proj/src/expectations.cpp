#include "cdasim/expectations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdasim {

double rolling_sigma(std::span<const double> history, std::int32_t horizon, SigmaIndexing indexing) {
  if (history.size() < 2 || horizon <= 0) return 0.0;
  const auto tau = std::min<std::size_t>(static_cast<std::size_t>(horizon), history.size() - 1);
  const auto n = history.size();
  // p_{t-k} is history[n - k].
  auto lagged = [&](std::size_t k) { return history[n - k]; };

  double mean = 0.0;
  if (indexing == SigmaIndexing::Verbatim) {
    for (std::size_t k = 1; k <= tau; ++k) mean += lagged(k + 1);
  } else {
    for (std::size_t k = 1; k <= tau; ++k) mean += lagged(k);
  }
  mean /= static_cast<double>(tau);

  double ss = 0.0;
  for (std::size_t k = 1; k <= tau; ++k) {
    const double d = lagged(k) - mean;
    ss += d * d;
  }
  const double t = static_cast<double>(tau);
  return std::sqrt(ss * std::sqrt(t) / t);
}

double expectation_from_draw(AgentType type, double price, double fundamental, double sigma_tau, double sigma_eps,
                             const ExpectationParams& params, double z) {
  double e = price;
  switch (type) {
    case AgentType::Fundamentalist:
      e = fundamental * (1.0 + z * sigma_eps / params.gamma_f);
      break;
    case AgentType::Optimist:
      e = price + std::abs(z) * sigma_tau / params.gamma_c;
      break;
    case AgentType::Pessimist:
      e = price - std::abs(z) * sigma_tau / params.gamma_c;
      break;
  }
  return std::max(e, params.tick);
}

double expected_price(AgentType type, double price, double fundamental, double sigma_tau, double sigma_eps,
                      const ExpectationParams& params, Rng& rng) {
  if (!(price > 0.0) || !(fundamental > 0.0)) throw std::invalid_argument("prices must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  return expectation_from_draw(type, price, fundamental, sigma_tau, sigma_eps, params, gauss(rng));
}

double draw_k(Rng& rng, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("k scale must be positive");
  std::exponential_distribution<double> expo(1.0 / sigma);
  return expo(rng);
}

std::optional<OrderIntent> decide_order(AgentId agent, std::int32_t horizon, double expectation, double price,
                                        double k, const TickGrid& grid) {
  if (expectation == price) return std::nullopt;
  OrderIntent intent;
  intent.agent = agent;
  intent.horizon = horizon;
  if (expectation > price) {
    intent.side = Side::Buy;
    intent.price = grid.floor(expectation * (1.0 - k));
  } else {
    intent.side = Side::Sell;
    intent.price = grid.ceil(expectation * (1.0 + k));
  }
  if (intent.price.value <= 0) return std::nullopt;
  return intent;
}

}  // namespace cdasim
