#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace cdasim {

using Step = std::int64_t;
using AgentId = std::int32_t;
using OrderId = std::uint64_t;

enum class Side : std::uint8_t { Buy, Sell };

enum class AgentType : std::uint8_t { Fundamentalist, Optimist, Pessimist };

inline constexpr bool is_chartist(AgentType t) noexcept {
  return t != AgentType::Fundamentalist;
}

std::string_view to_string(Side s) noexcept;
std::string_view to_string(AgentType t) noexcept;

// Integer count of price ticks. Prices, cash and reservations are all held in
// ticks so that every settlement is exact.
struct Ticks {
  std::int64_t value{0};

  constexpr Ticks() = default;
  constexpr explicit Ticks(std::int64_t v) : value(v) {}

  constexpr auto operator<=>(const Ticks&) const = default;

  constexpr Ticks& operator+=(Ticks o) noexcept { value += o.value; return *this; }
  constexpr Ticks& operator-=(Ticks o) noexcept { value -= o.value; return *this; }
  friend constexpr Ticks operator+(Ticks a, Ticks b) noexcept { return Ticks{a.value + b.value}; }
  friend constexpr Ticks operator-(Ticks a, Ticks b) noexcept { return Ticks{a.value - b.value}; }
};

// Maps currency amounts onto the tick grid.
class TickGrid {
 public:
  explicit TickGrid(double tick) : tick_(tick) {
    if (!(tick > 0.0) || !std::isfinite(tick)) throw std::invalid_argument("tick size must be positive");
  }

  double tick() const noexcept { return tick_; }
  double to_price(Ticks t) const noexcept { return static_cast<double>(t.value) * tick_; }

  // Ratios within 1e-9 of an integer are treated as on-grid, so 279 / 0.0005
  // snaps to 558000 in either direction.
  Ticks floor(double price) const noexcept {
    return Ticks{static_cast<std::int64_t>(std::floor(price / tick_ + kSnap))};
  }
  Ticks ceil(double price) const noexcept {
    return Ticks{static_cast<std::int64_t>(std::ceil(price / tick_ - kSnap))};
  }
  Ticks nearest(double price) const noexcept {
    return Ticks{static_cast<std::int64_t>(std::llround(price / tick_))};
  }

 private:
  static constexpr double kSnap = 1e-9;
  double tick_;
};

}  // namespace cdasim
