#include "pumpwatch/signature.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "pumpwatch/csv.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/rng.hpp"

namespace pumpwatch::signature {

std::string_view to_string(SegmentKind kind) { return kind == SegmentKind::price ? "price" : "tweet_volume"; }

std::string_view to_string(Baseline baseline) { return baseline == Baseline::pump ? "pump" : "random"; }

std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("minmax_normalize: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<double> out(values.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
  }
  return out;
}

TweetTimeline::TweetTimeline(std::span<const Tweet> tweets, std::string_view coin) {
  for (const auto& t : tweets) {
    if (t.cashtags.count(std::string(coin))) times_.push_back(t.timestamp);
  }
  std::sort(times_.begin(), times_.end());
}

std::size_t TweetTimeline::count(Timestamp from, Timestamp to) const {
  auto lo = std::lower_bound(times_.begin(), times_.end(), from);
  auto hi = std::lower_bound(times_.begin(), times_.end(), to);
  return static_cast<std::size_t>(hi - lo);
}

namespace {

std::vector<std::int64_t> make_offsets(Timestamp half_window, Timestamp step) {
  if (step <= 0 || half_window <= 0 || half_window % step != 0) {
    throw ValidationError("half window must be a positive multiple of the step");
  }
  std::vector<std::int64_t> offsets;
  for (Timestamp o = -half_window; o <= half_window; o += step) offsets.push_back(o / kMinute);
  return offsets;
}

}  // namespace

Segment extract_price_segment(const CoinSeries& series, Timestamp center, Timestamp half_window, Timestamp step,
                              Timestamp max_staleness) {
  Segment seg;
  seg.coin = series.coin;
  seg.center = center;
  seg.offsets_minutes = make_offsets(half_window, step);
  if (series.empty() || series.first_time() > center - half_window || series.last_time() < center + half_window) {
    throw DataError("segment gap: " + series.coin + " does not cover " + std::to_string(center) + " +/- " +
                    std::to_string(half_window) + "s");
  }
  std::vector<double> raw;
  raw.reserve(seg.offsets_minutes.size());
  for (auto off : seg.offsets_minutes) {
    const Timestamp t = center + off * kMinute;
    const MarketPoint* p = series.at_or_before(t);
    if (!p || t - p->timestamp > max_staleness) {
      throw DataError("segment gap: " + series.coin + " has no recent observation at " + std::to_string(t));
    }
    raw.push_back(p->price_btc);
  }
  seg.values = minmax_normalize(raw);
  return seg;
}

Segment extract_volume_segment(const TweetTimeline& timeline, std::string_view coin, Timestamp center,
                               Timestamp half_window, Timestamp step) {
  Segment seg;
  seg.coin = std::string(coin);
  seg.center = center;
  seg.offsets_minutes = make_offsets(half_window, step);
  std::vector<double> raw;
  raw.reserve(seg.offsets_minutes.size());
  for (auto off : seg.offsets_minutes) {
    const Timestamp from = center + off * kMinute;
    raw.push_back(static_cast<double>(timeline.count(from, from + step)));
  }
  seg.values = minmax_normalize(raw);
  return seg;
}

AggregateCurve aggregate(std::span<const Segment> segments, SegmentKind kind, Baseline baseline) {
  if (segments.empty()) throw ValidationError("aggregate: no segments");
  AggregateCurve curve;
  curve.kind = kind;
  curve.baseline = baseline;
  curve.offsets_minutes = segments.front().offsets_minutes;
  curve.mean_values.assign(curve.offsets_minutes.size(), 0.0);
  for (const auto& s : segments) {
    if (s.offsets_minutes != curve.offsets_minutes || s.values.size() != curve.offsets_minutes.size()) {
      throw ValidationError("aggregate: segments do not share offsets");
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) curve.mean_values[i] += s.values[i];
  }
  curve.n = segments.size();
  for (auto& v : curve.mean_values) v /= static_cast<double>(curve.n);
  return curve;
}

std::vector<Timestamp> random_baseline(std::size_t count, std::pair<Timestamp, Timestamp> extent,
                                       Timestamp half_window, std::uint64_t seed,
                                       std::span<const std::pair<Timestamp, Timestamp>> excluded) {
  if (count < 1) throw ValidationError("random_baseline: count must be at least 1");
  const Timestamp lo = extent.first + half_window;
  const Timestamp hi = extent.second - half_window;
  if (hi <= lo) throw DataError("random_baseline: extent too small for the segment window");
  Rng rng(seed);
  std::vector<Timestamp> out;
  out.reserve(count);
  constexpr std::size_t kMaxDrawsPerCenter = 1000;
  while (out.size() < count) {
    Timestamp t = 0;
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kMaxDrawsPerCenter && !ok; ++attempt) {
      t = rng.between(lo, hi);
      ok = std::none_of(excluded.begin(), excluded.end(),
                        [t](const auto& iv) { return t >= iv.first && t <= iv.second; });
    }
    if (!ok) throw DataError("random_baseline: exclusions leave no admissible centers");
    out.push_back(t);
  }
  return out;
}

SignatureReport aggregate_signatures(std::span<const pumps::PumpAttempt> attempts, const Market& market,
                                     std::span<const Tweet> tweets, const SignatureConfig& config) {
  SignatureReport report;
  std::map<std::string, std::vector<const pumps::PumpAttempt*>> by_coin;
  for (const auto& a : attempts) by_coin[a.coin].push_back(&a);

  std::vector<Segment> price_pump, price_random, volume_pump, volume_random;
  for (const auto& [coin, list] : by_coin) {
    auto it = market.find(coin);
    if (it == market.end() || it->second.empty()) {
      report.skipped_segments += 2 * list.size();
      continue;
    }
    const CoinSeries& series = it->second;
    const TweetTimeline timeline(tweets, coin);

    std::vector<std::pair<Timestamp, Timestamp>> pump_windows;
    for (const auto* a : list) {
      pump_windows.emplace_back(a->anchor_time - config.half_window, a->anchor_time + config.half_window);
      try {
        auto p = extract_price_segment(series, a->anchor_time, config.half_window, config.step);
        price_pump.push_back(std::move(p));
        volume_pump.push_back(
            extract_volume_segment(timeline, coin, a->anchor_time, config.half_window, config.step));
      } catch (const DataError&) {
        ++report.skipped_segments;
      }
    }

    std::vector<Timestamp> centers;
    try {
      const std::span<const std::pair<Timestamp, Timestamp>> excl =
          config.exclude_pump_windows ? std::span<const std::pair<Timestamp, Timestamp>>(pump_windows)
                                      : std::span<const std::pair<Timestamp, Timestamp>>();
      centers = random_baseline(list.size(), {series.first_time(), series.last_time()}, config.half_window,
                                derive_seed(config.seed, "signature-random:" + coin), excl);
    } catch (const DataError&) {
      report.skipped_segments += list.size();
      continue;
    }
    for (Timestamp c : centers) {
      try {
        price_random.push_back(extract_price_segment(series, c, config.half_window, config.step));
        volume_random.push_back(extract_volume_segment(timeline, coin, c, config.half_window, config.step));
      } catch (const DataError&) {
        ++report.skipped_segments;
      }
    }
  }

  auto push = [&](const std::vector<Segment>& segs, SegmentKind kind, Baseline baseline) {
    if (!segs.empty()) report.curves.push_back(aggregate(segs, kind, baseline));
  };
  push(price_pump, SegmentKind::price, Baseline::pump);
  push(price_random, SegmentKind::price, Baseline::random);
  push(volume_pump, SegmentKind::tweet_volume, Baseline::pump);
  push(volume_random, SegmentKind::tweet_volume, Baseline::random);
  return report;
}

void write_curves_csv(std::ostream& out, std::span<const AggregateCurve> curves) {
  out << "kind,baseline,offset_minutes,mean_value,n\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.offsets_minutes.size(); ++i) {
      out << to_string(c.kind) << ',' << to_string(c.baseline) << ',' << c.offsets_minutes[i] << ','
          << csv::format_double(c.mean_values[i]) << ',' << c.n << '\n';
    }
  }
}

}  // namespace pumpwatch::signature
