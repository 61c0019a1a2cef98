#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pumpwatch/corpus.hpp"
#include "pumpwatch/pump_extract.hpp"

namespace pumpwatch::signature {

enum class SegmentKind { price, tweet_volume };
enum class Baseline { pump, random };

std::string_view to_string(SegmentKind kind);
std::string_view to_string(Baseline baseline);

// Min-max normalized window of a series around a center timestamp.
struct Segment {
  std::string coin;
  Timestamp center = 0;
  std::vector<std::int64_t> offsets_minutes;  // symmetric around 0
  std::vector<double> values;                 // each in [0, 1]
};

struct AggregateCurve {
  SegmentKind kind = SegmentKind::price;
  Baseline baseline = Baseline::pump;
  std::vector<std::int64_t> offsets_minutes;
  std::vector<double> mean_values;
  std::size_t n = 0;
};

// (x - min) / (max - min); a constant input maps to all zeros.
std::vector<double> minmax_normalize(std::span<const double> values);

// Tweets of one coin in time order, for bucket counting.
class TweetTimeline {
 public:
  TweetTimeline() = default;
  TweetTimeline(std::span<const Tweet> tweets, std::string_view coin);

  // Tweets with timestamp in [from, to).
  std::size_t count(Timestamp from, Timestamp to) const;

 private:
  std::vector<Timestamp> times_;
};

// Price (price_btc) sampled every `step` seconds over [center - half_window,
// center + half_window] by last observation carried forward, then
// normalized. Throws DataError("segment gap") when the series does not cover
// the window or a sample would carry a value older than `max_staleness`.
Segment extract_price_segment(const CoinSeries& series, Timestamp center, Timestamp half_window,
                              Timestamp step = kMarketStep, Timestamp max_staleness = 6 * kHour);

// Tweet counts per bucket [center + offset, center + offset + step), then
// normalized.
Segment extract_volume_segment(const TweetTimeline& timeline, std::string_view coin, Timestamp center,
                               Timestamp half_window, Timestamp step = kMarketStep);

// Pointwise mean. Throws ValidationError on an empty set or mismatched
// offsets.
AggregateCurve aggregate(std::span<const Segment> segments, SegmentKind kind, Baseline baseline);

// `count` centers drawn uniformly from [extent.first + half_window,
// extent.second - half_window]. Centers falling inside any `excluded`
// interval are redrawn. Deterministic per seed.
std::vector<Timestamp> random_baseline(std::size_t count, std::pair<Timestamp, Timestamp> extent,
                                       Timestamp half_window, std::uint64_t seed,
                                       std::span<const std::pair<Timestamp, Timestamp>> excluded = {});

struct SignatureConfig {
  Timestamp half_window = 3 * kHour;
  Timestamp step = kMarketStep;
  bool exclude_pump_windows = false;
  std::uint64_t seed = 0;
};

struct SignatureReport {
  std::vector<AggregateCurve> curves;  // price/pump, price/random, tweet/pump, tweet/random
  std::size_t skipped_segments = 0;    // attempts or centers lacking coverage
};

// Q^price and Q^twitter around pump anchors and around per-coin random
// centers (as many as that coin has attempts).
SignatureReport aggregate_signatures(std::span<const pumps::PumpAttempt> attempts, const Market& market,
                                     std::span<const Tweet> tweets, const SignatureConfig& config);

// CSV: kind,baseline,offset_minutes,mean_value,n
void write_curves_csv(std::ostream& out, std::span<const AggregateCurve> curves);

}  // namespace pumpwatch::signature
