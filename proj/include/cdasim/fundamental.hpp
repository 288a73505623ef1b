#pragma once

#include "cdasim/rng.hpp"
#include "cdasim/types.hpp"

namespace cdasim {

struct FundamentalState {
  double value{300.0};
  Step time{0};
};

// One sub-step of the geometric Brownian motion: ln value moves by a
// N(0, sigma_eps * sqrt(dt)) increment, so 1/dt sub-steps aggregate to a
// N(0, sigma_eps) unit-time increment.
FundamentalState step_fundamental(const FundamentalState& state, double sigma_eps, double dt, Rng& rng);

// Applies a given log-increment. Throws std::runtime_error on a non-finite result.
FundamentalState apply_log_increment(const FundamentalState& state, double increment);

}  // namespace cdasim
