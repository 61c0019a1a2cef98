#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/corpus.hpp"
#include "pumpwatch/error.hpp"

namespace pumpwatch::pumps {

enum class PriceUnit { btc, usd };

std::string_view to_string(PriceUnit unit);

struct ParsedPrices {
  std::optional<double> buy;
  std::vector<double> targets;  // strictly ascending
  std::optional<double> stop_loss;
  // btc when any value was written in satoshi or every value is below 1.
  PriceUnit unit = PriceUnit::btc;
};

// Registry symbols, aliases and $cashtags found on token boundaries,
// case-insensitively. Returns canonical uppercase symbols.
std::set<std::string> extract_mentions(std::string_view text, const CoinRegistry& registry);

// Rule-based price extraction.
//  - buy: first number after a buy cue (buy, bid, entry, cp)
//  - targets: numbers after a target cue (target, tg, t1..t9, sell) until
//    another cue; "target 1:" style ordinals are skipped
//  - stop loss: first number after stop/stoploss/sl (stored, never evaluated)
// "N sat", "N sats", "N satoshi" convert to BTC (1 sat = 1e-8). Numbers
// followed by '%' are ignored. A cue expires after four words without a
// number. Nothing is ever guessed: missing fields stay empty.
ParsedPrices parse_prices(std::string_view text);

// A (coin, timestamp) pump attempt aggregated from one or more pump messages.
struct PumpAttempt {
  std::string id;  // "<COIN>-<anchor>"
  std::string coin;
  Timestamp anchor_time = 0;
  std::vector<std::size_t> message_ids;
  std::optional<double> buy_price;
  std::vector<double> target_prices;  // strictly ascending, all above buy
  std::optional<double> stop_loss;
  PriceUnit unit = PriceUnit::btc;
  std::set<std::string> channel_ids;
  // Members with parsed targets that differ from the ones adopted.
  std::size_t price_disagreements = 0;

  friend bool operator==(const PumpAttempt&, const PumpAttempt&) = default;
};

struct AttemptConfig {
  std::size_t max_coins = 3;
  Timestamp merge_window = 3 * kHour;
};

// Groups pump-labeled messages into attempts. Messages without a pump label,
// without mentions, or mentioning more than max_coins coins are skipped. Per
// coin, a message joins the open attempt iff its timestamp <= anchor +
// merge_window; otherwise it opens a new attempt anchored at itself. Prices
// come from the earliest member with parsed targets (or, failing that, a
// parsed buy). Output is sorted by (anchor_time, coin).
std::vector<PumpAttempt> build_attempts(std::span<const SocialMessage> messages, const CoinRegistry& registry,
                                        const AttemptConfig& config = {});

enum class TargetChoice { first, max };

struct SuccessVerdict {
  std::string attempt_id;
  double threshold = 1.0;
  int window_hours = 1;
  bool success = false;
  double target = 0.0;
  double peak_price = 0.0;
  Timestamp peak_time = 0;
  PriceUnit unit = PriceUnit::btc;
};

class UnpricedAttempt : public DataError {
 public:
  using DataError::DataError;
};

class MarketGap : public DataError {
 public:
  using DataError::DataError;
};

// Success iff the max price in (anchor, anchor + window] reaches
// threshold * target (inclusive). Throws UnpricedAttempt without a target and
// MarketGap when the series does not cover [anchor, anchor + window].
SuccessVerdict evaluate_success(const PumpAttempt& attempt, const CoinSeries& series, double threshold,
                                int window_hours, TargetChoice choice = TargetChoice::first);

struct GridCell {
  double threshold = 1.0;
  int window_hours = 1;
  std::size_t successes = 0;
  std::size_t evaluable = 0;
  std::size_t unpriced = 0;
  std::size_t market_gap = 0;
  std::optional<double> ratio;  // absent when nothing was evaluable
};

std::vector<GridCell> success_ratio_grid(std::span<const PumpAttempt> attempts, const Market& market,
                                         std::span<const double> thresholds, std::span<const int> windows,
                                         TargetChoice choice = TargetChoice::first);

void write_grid_csv(std::ostream& out, std::span<const GridCell> grid);

// attempts JSONL: one object per attempt.
void write_attempts(std::ostream& out, std::span<const PumpAttempt> attempts);
std::vector<PumpAttempt> read_attempts(std::istream& in, std::string_view source = "attempts");
std::vector<PumpAttempt> load_attempts(const std::filesystem::path& path);

}  // namespace pumpwatch::pumps
