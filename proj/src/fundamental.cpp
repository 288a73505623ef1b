#include "cdasim/fundamental.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cdasim {

FundamentalState apply_log_increment(const FundamentalState& state, double increment) {
  const double next = state.value * std::exp(increment);
  if (!std::isfinite(next) || !(next > 0.0)) {
    throw std::runtime_error("fundamental value became non-finite at step " + std::to_string(state.time));
  }
  return FundamentalState{next, state.time + 1};
}

FundamentalState step_fundamental(const FundamentalState& state, double sigma_eps, double dt, Rng& rng) {
  if (sigma_eps < 0.0) throw std::invalid_argument("sigma_eps must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (sigma_eps == 0.0) return FundamentalState{state.value, state.time + 1};
  std::normal_distribution<double> gauss(0.0, sigma_eps * std::sqrt(dt));
  return apply_log_increment(state, gauss(rng));
}

}  // namespace cdasim
