#include "pumpwatch/features.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "json.hpp"
#include "pumpwatch/csv.hpp"
#include "pumpwatch/error.hpp"

namespace pumpwatch::features {

double pct_change(double prev, double next) {
  if (!(prev > 0.0)) throw DataError("nonpositive base");
  return (next - prev) / prev;
}

HourlySeries::HourlySeries(const CoinSeries& series, Timestamp max_age) : coin_(series.coin) {
  if (series.empty()) return;
  const CoinSeries hourly = resample_hourly(series);
  const auto stale = stale_hours(series, max_age);
  const std::set<Timestamp> stale_set(stale.begin(), stale.end());
  first_ = hourly.first_time();
  points_.reserve(hourly.points.size());
  for (const auto& p : hourly.points) {
    if (stale_set.count(p.timestamp)) {
      points_.emplace_back(std::nullopt);
    } else {
      points_.emplace_back(p);
    }
  }
}

const MarketPoint* HourlySeries::at(Timestamp hour) const {
  if (points_.empty() || hour < first_ || hour % kHour != 0) return nullptr;
  const auto idx = static_cast<std::size_t>((hour - first_) / kHour);
  if (idx >= points_.size() || !points_[idx]) return nullptr;
  return &*points_[idx];
}

namespace {

const MarketPoint& hour_value(const HourlySeries& series, Timestamp t, int h) {
  const MarketPoint* p = series.at(reference_hour(t) - h * kHour);
  if (!p) throw pumps::MarketGap("market gap at t-" + std::to_string(h) + "h");
  return *p;
}

void check_window(int w) {
  if (w < 1) throw ValidationError("feature window must be at least 1 hour");
}

}  // namespace

std::vector<double> economic_features(const HourlySeries& series, Timestamp t, int w_econ) {
  check_window(w_econ);
  std::vector<const MarketPoint*> hours;
  for (int h = 0; h <= w_econ; ++h) hours.push_back(&hour_value(series, t, h));

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(6 * w_econ));
  auto family = [&](double MarketPoint::*field, const char* name) {
    for (int h = 1; h <= w_econ; ++h) out.push_back(hours[h]->*field);
    for (int h = 1; h <= w_econ; ++h) {
      try {
        out.push_back(pct_change(hours[h]->*field, hours[h - 1]->*field));
      } catch (const DataError&) {
        throw DataError(std::string("nonpositive base: ") + name + " at t-" + std::to_string(h) + "h");
      }
    }
  };
  family(&MarketPoint::price_btc, "price_btc");
  family(&MarketPoint::volume, "volume");
  family(&MarketPoint::market_cap, "market_cap");
  return out;
}

std::vector<double> target_features(double target, pumps::PriceUnit unit, const HourlySeries& series, Timestamp t,
                                    int w_econ) {
  check_window(w_econ);
  if (!(target > 0.0)) throw pumps::UnpricedAttempt("unpriced attempt");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w_econ));
  for (int h = 1; h <= w_econ; ++h) {
    const MarketPoint& p = hour_value(series, t, h);
    const double price = unit == pumps::PriceUnit::btc ? p.price_btc : p.price_usd;
    out.push_back((target - price) / target);
  }
  return out;
}

std::vector<double> target_features(const pumps::PumpAttempt& attempt, const HourlySeries& series, int w_econ) {
  if (attempt.target_prices.empty()) throw pumps::UnpricedAttempt("unpriced attempt");
  return target_features(attempt.target_prices.front(), attempt.unit, series, attempt.anchor_time, w_econ);
}

TwitterStats twitter_stats(const TweetIndex& index, std::span<const Tweet> tweets, std::span<const double> scores,
                           std::string_view coin, Timestamp from, Timestamp to) {
  TwitterStats stats;
  std::set<std::string_view> users;
  double total = 0.0;
  for (const Tweet* t : index.mentions(coin, from, to)) {
    ++stats.count;
    users.insert(t->user_id);
    total += scores[static_cast<std::size_t>(t - tweets.data())];
  }
  stats.unique_users = users.size();
  if (stats.count > 0) stats.mean_sentiment = total / static_cast<double>(stats.count);
  return stats;
}

TwitterStats twitter_stats(std::span<const Tweet> tweets, std::string_view coin, Timestamp from, Timestamp to,
                           const sentiment::Lexicon& lexicon) {
  std::vector<double> scores;
  scores.reserve(tweets.size());
  for (const auto& t : tweets) scores.push_back(sentiment::score(t.text, lexicon));
  return twitter_stats(TweetIndex(tweets), tweets, scores, coin, from, to);
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::twitter:
      return "twitter";
    case Variant::economic:
      return "economic";
    case Variant::both:
      return "both";
  }
  return "both";
}

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "twitter") return Variant::twitter;
  if (text == "economic") return Variant::economic;
  if (text == "both") return Variant::both;
  return std::nullopt;
}

void FeatureConfig::validate() const {
  if (w_econ < 1) throw ValidationError("w_econ must be at least 1");
  if (w_tw < 1) throw ValidationError("w_tw must be at least 1");
}

FeatureSources::FeatureSources(const Market& market, std::span<const Tweet> tweets,
                               const sentiment::Lexicon& lexicon)
    : market_(&market), tweets_(tweets), index_(tweets) {
  for (const auto& [coin, series] : market) {
    if (!series.empty()) hourly_.emplace(coin, HourlySeries(series));
  }
  scores_.reserve(tweets.size());
  for (const auto& t : tweets) scores_.push_back(sentiment::score(t.text, lexicon));
}

const HourlySeries& FeatureSources::hourly(std::string_view coin) const {
  auto it = hourly_.find(coin);
  if (it == hourly_.end()) throw pumps::MarketGap("no market data for " + std::string(coin));
  return it->second;
}

void FeatureSources::set_components(std::string coin, graph::ComponentAssignment assignment) {
  components_[std::move(coin)] = std::move(assignment);
}

const graph::ComponentAssignment* FeatureSources::components(std::string_view coin) const {
  auto it = components_.find(coin);
  return it == components_.end() ? nullptr : &it->second;
}

void FeatureSources::set_corex(const corex::CorexModel* model) {
  corex_ = model;
  corex_rows_.clear();
  if (!model) return;
  for (std::size_t i = 0; i < model->variables.size(); ++i) corex_rows_.emplace(model->variables[i], i);
}

std::optional<std::size_t> FeatureSources::corex_row(std::string_view user) const {
  auto it = corex_rows_.find(user);
  if (it == corex_rows_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> FeatureRow::values(Variant variant) const {
  std::vector<double> out;
  const bool econ = variant != Variant::twitter;
  const bool social = variant != Variant::economic;
  if (econ) {
    out.insert(out.end(), economic.begin(), economic.end());
    if (target) out.insert(out.end(), target->begin(), target->end());
  }
  if (social) {
    out.insert(out.end(), twitter.begin(), twitter.end());
    out.push_back(pagerank);
    out.insert(out.end(), components.begin(), components.end());
    if (corex) out.insert(out.end(), corex->begin(), corex->end());
  }
  return out;
}

namespace {

template <typename F>
auto with_context(const char* family, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const pumps::MarketGap& e) {
    throw pumps::MarketGap(std::string(family) + " features: " + e.what());
  } catch (const pumps::UnpricedAttempt& e) {
    throw pumps::UnpricedAttempt(std::string(family) + " features: " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(family) + " features: " + e.what());
  }
}

}  // namespace

FeatureRow assemble_row(std::string_view coin, Timestamp t, std::optional<bool> label, const FeatureSources& sources,
                        const FeatureConfig& config, std::optional<TargetSpec> target) {
  config.validate();
  FeatureRow row;
  row.coin = std::string(coin);
  row.timestamp = t;
  row.label = label;
  row.config = config;

  const HourlySeries& series = with_context("economic", [&]() -> const HourlySeries& { return sources.hourly(coin); });
  row.economic = with_context("economic", [&] { return economic_features(series, t, config.w_econ); });
  if (target) {
    row.target = with_context("target", [&] { return target_features(target->price, target->unit, series, t, config.w_econ); });
  }

  const Timestamp from = t - config.w_tw * kHour;
  const auto stats = twitter_stats(sources.index(), sources.tweets(), sources.scores(), coin, from, t);
  row.twitter = {static_cast<double>(stats.count), static_cast<double>(stats.unique_users), stats.mean_sentiment};

  const auto co_mentions = graph::coin_coin_graph(sources.index(), from, t);
  if (auto idx = co_mentions.index_of(coin)) {
    row.pagerank = with_context("pagerank", [&] { return graph::pagerank_scores(co_mentions)[*idx]; });
  }

  if (const auto* assignment = sources.components(coin)) {
    row.components = graph::component_activity_features(*assignment, sources.index(), coin, from, t);
  }

  if (const auto* model = sources.corex()) {
    std::vector<double> sum(model->k, 0.0);
    std::set<std::string_view> seen;
    for (const Tweet* tw : sources.index().mentions(coin, from, t)) {
      if (!seen.insert(tw->user_id).second) continue;
      if (auto r = sources.corex_row(tw->user_id)) {
        const auto w = model->row(*r);
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += w[j];
      }
    }
    row.corex = std::move(sum);
  }

  for (double v : row.values()) {
    if (!std::isfinite(v)) throw DataError("non-finite feature for " + row.coin + " at " + std::to_string(t));
  }
  return row;
}

std::vector<std::string> column_names(const FeatureRow& row, Variant variant) {
  std::vector<std::string> out;
  const int w = row.config.w_econ;
  if (variant != Variant::twitter) {
    for (const char* field : {"price_btc", "volume", "market_cap"}) {
      for (int h = 1; h <= w; ++h) out.push_back(std::string(field) + "_h" + std::to_string(h));
      for (int h = 1; h <= w; ++h) out.push_back(std::string(field) + "_pct_h" + std::to_string(h));
    }
    if (row.target) {
      for (int h = 1; h <= w; ++h) out.push_back("target_gap_h" + std::to_string(h));
    }
  }
  if (variant != Variant::economic) {
    out.insert(out.end(), {"tweet_count", "unique_users", "mean_sentiment", "pagerank"});
    for (std::size_t i = 0; i < row.components.size(); ++i) out.push_back("component_" + std::to_string(i + 1));
    if (row.corex) {
      for (std::size_t i = 0; i < row.corex->size(); ++i) out.push_back("corex_" + std::to_string(i + 1));
    }
  }
  return out;
}

void write_dataset_csv(std::ostream& out, std::span<const FeatureRow> rows) {
  if (rows.empty()) {
    out << "coin,timestamp,label\n";
    return;
  }
  const auto names = column_names(rows.front());
  out << "coin,timestamp,label";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& row : rows) {
    const auto values = row.values();
    if (values.size() != names.size()) throw ValidationError("dataset rows do not share one feature layout");
    out << csv::escape(row.coin) << ',' << row.timestamp << ',';
    if (row.label) out << (*row.label ? '1' : '0');
    for (double v : values) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

void write_schema_json(std::ostream& out, std::span<const FeatureRow> rows) {
  nlohmann::ordered_json j;
  j["format"] = "pumpwatch-features";
  j["version"] = 1;
  j["rows"] = rows.size();
  if (!rows.empty()) {
    const auto& row = rows.front();
    j["config"] = {{"w_econ", row.config.w_econ}, {"w_tw", row.config.w_tw}};
    nlohmann::ordered_json families;
    families["economic"] = 6 * row.config.w_econ;
    families["target"] = row.target ? row.target->size() : 0;
    families["twitter"] = row.twitter.size();
    families["pagerank"] = 1;
    families["components"] = row.components.size();
    families["corex"] = row.corex ? row.corex->size() : 0;
    j["families"] = std::move(families);
    j["columns"] = column_names(row);
  }
  out << j.dump(1) << '\n';
}

}  // namespace pumpwatch::features
