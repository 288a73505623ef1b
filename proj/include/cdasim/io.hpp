#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cdasim/engine.hpp"

namespace cdasim::io {

// Column order of steps.csv; missing values are written as empty fields.
inline constexpr const char* kStepColumns =
    "step,price,fundamental,best_bid,best_ask,spread,bid_gap,ask_gap,depth,n_f,n_plus,n_minus,traded,trade_price";

void write_steps_csv(std::ostream& out, std::span<const StepRecord> records);
void write_trades_csv(std::ostream& out, std::span<const Trade> trades, double tick);
void write_snapshot_csv(std::ostream& out, const LobSnapshot& snapshot, double tick);
void write_fundamental_csv(std::ostream& out, std::span<const StepRecord> records);

// Throws std::runtime_error with the line number on malformed input.
std::vector<StepRecord> read_steps_csv(std::istream& in);
std::vector<StepRecord> read_steps_csv(const std::filesystem::path& path);

// Writes steps.csv, trades.csv, lob_<step>.csv and (when traced)
// fundamental.csv into `dir`, plus manifest.json. Returns the written paths.
std::vector<std::filesystem::path> write_run(const std::filesystem::path& dir, const RunOutput& run);

std::string sha256_hex(std::string_view data);

}  // namespace cdasim::io
