#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/corex.hpp"
#include "pumpwatch/corpus.hpp"
#include "pumpwatch/graph.hpp"
#include "pumpwatch/pump_extract.hpp"
#include "pumpwatch/sentiment.hpp"

namespace pumpwatch::features {

// (next - prev) / prev. Throws DataError("nonpositive base") when prev <= 0.
double pct_change(double prev, double next);

// Hourly last-observation-carried-forward view of one coin. An hour whose
// carried observation is older than max_age is a gap.
class HourlySeries {
 public:
  HourlySeries() = default;
  explicit HourlySeries(const CoinSeries& series, Timestamp max_age = 6 * kHour);

  const std::string& coin() const { return coin_; }
  bool empty() const { return points_.empty(); }
  Timestamp first_hour() const { return first_; }
  Timestamp last_hour() const { return first_ + static_cast<Timestamp>(points_.size() - 1) * kHour; }

  // Value at an hour boundary; nullptr outside the range or at a gap.
  const MarketPoint* at(Timestamp hour) const;

 private:
  std::string coin_;
  Timestamp first_ = 0;
  std::vector<std::optional<MarketPoint>> points_;
};

// Reference hour of a timestamp: the hour boundary at or before it.
constexpr Timestamp reference_hour(Timestamp t) { return floor_to(t, kHour); }

// For price_btc, volume and market_cap in that order: levels at T0 - h hours
// for h = 1..w, then pct changes (x[h-1] - x[h]) / x[h] for h = 1..w, where
// T0 = reference_hour(t). Length 6w. Throws MarketGap("market gap at t-Nh").
std::vector<double> economic_features(const HourlySeries& series, Timestamp t, int w_econ);

// (x - price_h) / x for h = 1..w with prices in the target's unit.
std::vector<double> target_features(double target, pumps::PriceUnit unit, const HourlySeries& series, Timestamp t,
                                    int w_econ);
// Uses the attempt's first target; throws UnpricedAttempt without one.
std::vector<double> target_features(const pumps::PumpAttempt& attempt, const HourlySeries& series, int w_econ);

struct TwitterStats {
  std::size_t count = 0;
  std::size_t unique_users = 0;
  double mean_sentiment = 0.0;
};

// Tweets tagging `coin` in [from, to]. `scores` holds one sentiment score per
// tweet of the span the index was built from, addressed by position.
TwitterStats twitter_stats(const TweetIndex& index, std::span<const Tweet> tweets, std::span<const double> scores,
                           std::string_view coin, Timestamp from, Timestamp to);
TwitterStats twitter_stats(std::span<const Tweet> tweets, std::string_view coin, Timestamp from, Timestamp to,
                           const sentiment::Lexicon& lexicon = sentiment::Lexicon::builtin());

enum class Variant { twitter, economic, both };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);

struct FeatureConfig {
  int w_econ = 15;
  int w_tw = 15;  // hours

  void validate() const;
};

// Immutable inputs shared by every row of a run. Keeps references to the
// market and tweets, which must outlive it.
class FeatureSources {
 public:
  FeatureSources(const Market& market, std::span<const Tweet> tweets,
                 const sentiment::Lexicon& lexicon = sentiment::Lexicon::builtin());

  // Throws MarketGap for a coin without market data.
  const HourlySeries& hourly(std::string_view coin) const;
  bool has_coin(std::string_view coin) const { return hourly_.count(coin) > 0; }
  const Market& market() const { return *market_; }
  const TweetIndex& index() const { return index_; }
  std::span<const Tweet> tweets() const { return tweets_; }
  std::span<const double> scores() const { return scores_; }

  // Optional graph-derived families.
  void set_components(std::string coin, graph::ComponentAssignment assignment);
  const graph::ComponentAssignment* components(std::string_view coin) const;
  void set_corex(const corex::CorexModel* model);
  const corex::CorexModel* corex() const { return corex_; }
  // Row of a user in the CorEx weights, if present.
  std::optional<std::size_t> corex_row(std::string_view user) const;

 private:
  const Market* market_;
  std::map<std::string, HourlySeries, std::less<>> hourly_;
  std::span<const Tweet> tweets_;
  TweetIndex index_;
  std::vector<double> scores_;
  std::map<std::string, graph::ComponentAssignment, std::less<>> components_;
  const corex::CorexModel* corex_ = nullptr;
  std::map<std::string, std::size_t, std::less<>> corex_rows_;
};

struct FeatureRow {
  std::string coin;
  Timestamp timestamp = 0;
  std::optional<bool> label;  // true = positive
  std::vector<double> economic;
  std::optional<std::vector<double>> target;
  std::vector<double> twitter;  // count, unique users, mean sentiment
  double pagerank = 0.0;
  std::vector<double> components;
  std::optional<std::vector<double>> corex;
  FeatureConfig config;

  // twitter: twitter, pagerank, components, corex.
  // economic: economic, target.
  // both: economic, target, twitter, pagerank, components, corex.
  std::vector<double> values(Variant variant = Variant::both) const;
};

struct TargetSpec {
  double price = 0.0;
  pumps::PriceUnit unit = pumps::PriceUnit::btc;
};

// Builds one row. Errors from a family are rethrown with the family name.
FeatureRow assemble_row(std::string_view coin, Timestamp t, std::optional<bool> label, const FeatureSources& sources,
                        const FeatureConfig& config, std::optional<TargetSpec> target = std::nullopt);

// Column names of a row, in values(variant) order.
std::vector<std::string> column_names(const FeatureRow& row, Variant variant = Variant::both);

// CSV: coin,timestamp,label,<columns>; label is 1, 0 or empty. All rows must
// share one layout.
void write_dataset_csv(std::ostream& out, std::span<const FeatureRow> rows);
// Sidecar schema: config, families with their column names, and row count.
void write_schema_json(std::ostream& out, std::span<const FeatureRow> rows);

}  // namespace pumpwatch::features
