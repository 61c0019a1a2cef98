#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "pumpwatch/corpus.hpp"

namespace pumpwatch::synth {

// A pump the caller wants injected. Prices are derived from the generated
// path at the anchor.
struct PlannedPump {
  std::string coin;
  Timestamp anchor = 0;
  bool succeed = false;
};

// Ground truth for one injected pump. Prices in BTC.
struct ScheduledPump {
  std::string coin;
  Timestamp anchor = 0;
  std::string channel_id;
  double buy = 0.0;
  std::vector<double> targets;  // ascending; the first one decides success
  double stop_loss = 0.0;
  bool succeed = false;
  bool momentum = false;  // a pre-pump price ramp was planted
  Timestamp peak_time = 0;
  double peak_price = 0.0;

  std::string attempt_id() const { return coin + "-" + std::to_string(anchor); }
};

struct Scenario {
  std::uint64_t seed = 7;
  std::size_t coins = 12;
  int duration_days = 60;
  Timestamp start = 1514764800;  // 2018-01-01T00:00:00Z

  // Generated schedule, used when `plan` is empty.
  std::size_t pumps_per_coin = 20;
  double success_rate = 0.5;
  Timestamp min_spacing = 30 * kHour;
  std::vector<PlannedPump> plan;

  // Successful pumps get an upward price ramp over the hours before the
  // anchor; failed ones do not.
  bool momentum = true;
  int momentum_hours = 7;

  std::size_t bots_per_coin = 30;
  std::size_t humans = 400;
  double bot_participation = 0.8;
  int bot_degree_boost = 4;  // mean tweets per participating bot per pump
  double telegram_bot_share = 0.5;
  double human_tweets_per_hour = 2.0;  // per coin
  double co_mention_share = 0.2;

  double volatility = 0.0015;  // log-price stddev per 5 minutes
  double news_per_day = 30.0;
  std::size_t labeled_messages = 600;
  double labeled_pump_share = 0.6;

  // Throws ValidationError; anchors closer than 3 hours for one coin are an
  // infeasible schedule.
  void validate() const;
};

struct SynthOutput {
  Scenario scenario;
  CoinRegistry registry;
  Market market;
  std::vector<SocialMessage> messages;  // with ground-truth labels
  std::vector<SocialMessage> labeled;   // disjoint training set
  std::vector<Tweet> tweets;
  StatusMap statuses;
  std::vector<ScheduledPump> pumps;  // sorted by (anchor, coin)
  std::set<std::string> bots;
  std::vector<std::vector<std::string>> bot_groups;  // group i serves coin i
};

// Deterministic in the scenario. Throws ValidationError when a planned flag
// cannot be realized by the price path.
SynthOutput generate(const Scenario& scenario);

// Coin tickers used by generate(), in order.
std::vector<std::string> coin_symbols(std::size_t count);

// Labeled channel messages drawn from the same templates as generate().
std::vector<SocialMessage> labeled_messages(const std::vector<std::string>& coins, std::size_t count,
                                            double pump_share, std::uint64_t seed);

void write_truth_json(std::ostream& out, const SynthOutput& output);

// Writes market.csv, messages.jsonl, labeled.jsonl, tweets.jsonl,
// statuses.csv, registry.txt and truth.json into `dir`.
void write_files(const SynthOutput& output, const std::filesystem::path& dir);

}  // namespace pumpwatch::synth
