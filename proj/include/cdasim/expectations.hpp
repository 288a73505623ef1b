#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "cdasim/rng.hpp"
#include "cdasim/types.hpp"

namespace cdasim {

struct ExpectationParams {
  double gamma_f{1.0};
  double gamma_c{0.1};
  double k_scale{0.1};  // mean of the exponential price offset k
  double tick{0.0005};
};

// How the reference mean of the rolling dispersion is indexed.
//  Verbatim: mean over p_{t-2} .. p_{t-1-tau}, one step behind the deviations.
//  Aligned:  mean over the same p_{t-1} .. p_{t-tau} window as the deviations.
enum class SigmaIndexing : std::uint8_t { Verbatim, Aligned };

struct OrderIntent {
  AgentId agent{0};
  Side side{Side::Buy};
  Ticks price{};
  std::int32_t horizon{0};  // steps until expiry
};

// Dispersion of recent prices: sigma^2 = (sqrt(tau)/tau) * sum_{k=1..tau} (p_{t-k} - mean)^2.
// `history` is oldest first and its last entry is p_{t-1}. With fewer than
// tau + 1 entries the window shrinks to size - 1; below two entries returns 0.
double rolling_sigma(std::span<const double> history, std::int32_t horizon,
                     SigmaIndexing indexing = SigmaIndexing::Verbatim);

// Expected future price given a standard normal draw `z`. Fundamentalists:
// p_f (1 + z sigma_eps / gamma_f). Optimists: p + |z| sigma_tau / gamma_c.
// Pessimists: p - |z| sigma_tau / gamma_c. Floored at one tick.
double expectation_from_draw(AgentType type, double price, double fundamental, double sigma_tau, double sigma_eps,
                             const ExpectationParams& params, double z);

double expected_price(AgentType type, double price, double fundamental, double sigma_tau, double sigma_eps,
                      const ExpectationParams& params, Rng& rng);

// Exponential draw with mean `sigma`.
double draw_k(Rng& rng, double sigma);

// Buy at expectation * (1 - k) when expectation > price, sell at
// expectation * (1 + k) when expectation < price. Buys round down to the
// grid, sells round up. No order on equality or a non-positive snapped price.
std::optional<OrderIntent> decide_order(AgentId agent, std::int32_t horizon, double expectation, double price,
                                        double k, const TickGrid& grid);

}  // namespace cdasim
