#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/types.hpp"

namespace pumpwatch {

// One market observation. Prices, volume and market cap are nonnegative.
struct MarketPoint {
  Timestamp timestamp = 0;
  double price_btc = 0.0;
  double price_usd = 0.0;
  double volume = 0.0;  // USD traded over the preceding period
  double market_cap = 0.0;

  friend bool operator==(const MarketPoint&, const MarketPoint&) = default;
};

// Per-coin market history with strictly increasing timestamps.
struct CoinSeries {
  std::string coin;
  std::vector<MarketPoint> points;

  bool empty() const { return points.empty(); }
  Timestamp first_time() const { return points.front().timestamp; }
  Timestamp last_time() const { return points.back().timestamp; }

  // Last observation with timestamp <= t, or nullptr when t precedes the
  // series.
  const MarketPoint* at_or_before(Timestamp t) const;

  friend bool operator==(const CoinSeries&, const CoinSeries&) = default;
};

using Market = std::map<std::string, CoinSeries, std::less<>>;

enum class MessageLabel { pump, not_pump };

std::string_view to_string(MessageLabel label);
std::optional<MessageLabel> parse_message_label(std::string_view text);

// A channel message. `index` is the zero-based position in the source file
// and serves as the message id.
struct SocialMessage {
  std::size_t index = 0;
  std::string channel_id;
  Timestamp timestamp = 0;
  std::string text;
  std::optional<MessageLabel> label;

  friend bool operator==(const SocialMessage&, const SocialMessage&) = default;
};

struct Tweet {
  std::string tweet_id;
  std::string user_id;
  Timestamp timestamp = 0;
  std::string text;
  std::set<std::string> cashtags;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

// Known coin symbols (uppercase) plus lowercase-insensitive aliases.
class CoinRegistry {
 public:
  CoinRegistry() = default;
  CoinRegistry(std::set<std::string> symbols,
               std::map<std::string, std::string> aliases);

  // Case-insensitive lookup of a symbol or alias; returns the canonical
  // uppercase symbol.
  std::optional<std::string> resolve(std::string_view token) const;

  bool contains(std::string_view symbol) const { return symbols_.count(std::string(symbol)) > 0; }

  const std::set<std::string>& symbols() const { return symbols_; }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }

 private:
  std::set<std::string> symbols_;
  std::map<std::string, std::string> aliases_;
  std::map<std::string, std::string, std::less<>> lookup_;  // lowercase -> symbol
};

enum class AccountState { active, suspended };

struct AccountStatus {
  std::string user_id;
  AccountState status = AccountState::active;
  std::optional<double> botometer_score;

  friend bool operator==(const AccountStatus&, const AccountStatus&) = default;
};

using StatusMap = std::map<std::string, AccountStatus, std::less<>>;

// Readers. Each throws DataError with "<source>:<line>: reason" on malformed
// input. The stream overloads take a source name used in error messages.
Market load_market(const std::filesystem::path& path);
Market read_market(std::istream& in, std::string_view source = "market");

std::vector<SocialMessage> load_messages(const std::filesystem::path& path);
std::vector<SocialMessage> read_messages(std::istream& in, std::string_view source = "messages");

std::vector<Tweet> load_tweets(const std::filesystem::path& path);
std::vector<Tweet> read_tweets(std::istream& in, std::string_view source = "tweets");

StatusMap load_statuses(const std::filesystem::path& path);
StatusMap read_statuses(std::istream& in, std::string_view source = "statuses");

CoinRegistry load_registry(const std::filesystem::path& path);
CoinRegistry read_registry(std::istream& in, std::string_view source = "registry");

// Writers emit the canonical form accepted by the readers: market rows sorted
// by (timestamp, coin); shortest round-trip decimals.
void write_market(std::ostream& out, const Market& market);
void write_messages(std::ostream& out, const std::vector<SocialMessage>& messages);
void write_tweets(std::ostream& out, const std::vector<Tweet>& tweets);
void write_statuses(std::ostream& out, const StatusMap& statuses);
void write_registry(std::ostream& out, const CoinRegistry& registry);

// Time-ordered view over a tweet collection, by coin and overall. Holds
// pointers into the source vector, which must outlive the index.
class TweetIndex {
 public:
  TweetIndex() = default;
  explicit TweetIndex(std::span<const Tweet> tweets);

  // Tweets tagging `coin` with timestamp in [from, to], in time order.
  std::span<const Tweet* const> mentions(std::string_view coin, Timestamp from, Timestamp to) const;

  // All tweets with timestamp in [from, to], in time order.
  std::span<const Tweet* const> between(Timestamp from, Timestamp to) const;

  std::size_t size() const { return all_.size(); }

 private:
  static std::span<const Tweet* const> slice(const std::vector<const Tweet*>& v, Timestamp from, Timestamp to);

  std::vector<const Tweet*> all_;
  std::map<std::string, std::vector<const Tweet*>, std::less<>> by_coin_;
};

// Hourly resampling with last-observation-carried-forward. Output hours run
// from the first hour boundary at or after the first observation to the first
// boundary at or after the last one.
CoinSeries resample_hourly(const CoinSeries& series);

// Hours of an hourly resample whose carried value is older than `max_age`
// relative to the original series.
std::vector<Timestamp> stale_hours(const CoinSeries& original, Timestamp max_age = 6 * kHour);

Market resample_hourly(const Market& market);

}  // namespace pumpwatch
