#include "pumpwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/pump_extract.hpp"
#include "pumpwatch/rng.hpp"

namespace pumpwatch::synth {

namespace {

constexpr double kSat = 1e-8;
constexpr Timestamp kStep = kMarketStep;
constexpr double kFailCeiling = 0.97;  // failed pumps stay below this share of the first target
constexpr Timestamp kFailHold = 24 * kHour;

const char* const kTickers[] = {
    "QRX", "ZEPH", "VTRA", "KLMN", "DXO",  "BLZT", "NOVX", "PRQ",  "WNDR", "GLYX", "FRZN", "MXT",  "TORQ", "CYVN",
    "OKTA", "HYDX", "JRNL", "SPKR", "UMBR", "VEXA", "ZYNC", "RAPX", "ELKR", "QUIX", "BRNZ", "PLTX", "GRVN", "SKYR",
    "NEXQ", "KRYP", "DRAX", "FLUX", "OMNX", "VRTX", "ZAPR", "XENT", "LUMX", "TRQZ", "WYRM", "ARKZ",
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string btc_text(double sats) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8f", sats * kSat);
  return buf;
}

std::string sats_text(double sats) { return std::to_string(static_cast<long long>(sats)); }

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&options)[N]) {
  return options[rng.below(N)];
}

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

struct PriceSet {
  double buy = 0.0;  // satoshi
  std::vector<double> targets;
  double stop = 0.0;
};

std::string coin_ref(Rng& rng, const std::string& coin) {
  switch (rng.below(3)) {
    case 0:
      return "$" + coin;
    case 1:
      return "#" + coin;
    default:
      return coin;
  }
}

std::string render_pump(Rng& rng, const std::string& coin, const PriceSet& p, bool reminder) {
  const std::string c = coin_ref(rng, coin);
  const std::string& t1 = sats_text(p.targets[0]);
  const std::string t2 = sats_text(p.targets[1]);
  const std::string t3 = sats_text(p.targets[2]);
  std::string head;
  if (reminder) {
    static const char* const heads[] = {"Reminder: ", "Still time to get in! ", "Don't miss it: ",
                                        "Last call. "};
    head = pick(rng, heads);
  }
  switch (rng.below(5)) {
    case 0:
      return head + "PUMP SIGNAL\nCoin: " + c + "\nBuy: " + sats_text(p.buy) + " sats\nTarget 1: " + t1 +
             " sats\nTarget 2: " + t2 + " sats\nTarget 3: " + t3 + " sats\nStop loss: " + sats_text(p.stop) + " sats";
    case 1:
      return head + c + " buy zone " + btc_text(p.buy) + "\nSell targets: " + btc_text(p.targets[0]) + " - " +
             btc_text(p.targets[1]) + " - " + btc_text(p.targets[2]) + "\nStop: " + btc_text(p.stop);
    case 2:
      return head + "Next coin is " + c + "! Entry " + sats_text(p.buy) + " sats. T1 " + t1 + " sats, T2 " + t2 +
             " sats, T3 " + t3 + " sats. Hold for big gains!";
    case 3:
      return head + "Signal for " + c + ": buy below " + btc_text(p.buy) + " btc, targets " + btc_text(p.targets[0]) +
             ", " + btc_text(p.targets[1]) + ", " + btc_text(p.targets[2]) + ". SL " + btc_text(p.stop);
    default:
      return head + "Coin of the day: " + c + "\nBuy price " + sats_text(p.buy) + " sats\nSell " + t1 + " sats / " +
             t2 + " sats / " + t3 + " sats\nStoploss " + sats_text(p.stop) + " sats";
  }
}

std::string render_news(Rng& rng, const std::string& coin, double sats) {
  static const char* const templates[] = {
      "{C} just announced a partnership with a payments provider. Volume is up {P}% today.",
      "Market update: BTC dominance rising, alts like {C} bleeding.",
      "Technical analysis for {C}: support at {S} sats, resistance at {R} sats. Not financial advice.",
      "Results: {C} reached target 2 from yesterday's signal, +{P}% profit!",
      "New listing: {C} is now available on a major exchange.",
      "{C} wallet maintenance scheduled for tomorrow, deposits suspended.",
      "Giveaway! Retweet and win 100 {C} tokens.",
      "{C} team AMA tonight at 18:00 UTC, bring your questions.",
      "Weekly recap: {C} closed the week {P}% higher.",
      "Be careful with {C}, the dev wallet moved {P}% of supply.",
      "{C} roadmap update: mainnet launch moved to next quarter.",
      "Our {C} call from last month is up {P}%. Congrats to everyone who held.",
  };
  std::string text = pick(rng, templates);
  text = replace_all(text, "{C}", coin_ref(rng, coin));
  text = replace_all(text, "{P}", std::to_string(rng.between(3, 60)));
  text = replace_all(text, "{S}", sats_text(std::round(sats * 0.9)));
  text = replace_all(text, "{R}", sats_text(std::round(sats * 1.2)));
  return text;
}

std::string render_human_tweet(Rng& rng, const std::string& coin, const std::string& other) {
  static const char* const templates[] = {
      "{C} looking good today", "not sure about {C}, chart looks weak", "anyone holding {C}?",
      "{C} is a solid project with great potential", "sold my {C}, too risky", "{C} bleeding again, ugh",
      "really like the {C} team", "{C} going up slowly", "is {C} a scam? seems shady",
      "accumulating {C} on this dip", "{C} and {O} are my picks for this month", "comparing {C} with {O}",
  };
  std::string text = pick(rng, templates);
  if (other.empty() && text.find("{O}") != std::string::npos) text = "thoughts on {C}?";
  text = replace_all(text, "{C}", "$" + coin);
  if (!other.empty()) {
    if (text.find("{O}") == std::string::npos) text += " $" + other;
    text = replace_all(text, "{O}", "$" + other);
  }
  return text;
}

std::string render_bot_tweet(Rng& rng, const std::string& coin, const std::string& handle, bool telegram) {
  static const char* const templates[] = {
      "{C} is about to moon! huge gains incoming", "buy {C} now before it explodes", "{C} pump starting, get in",
      "massive move coming for {C}", "{C} to the moon, dont miss out", "{C} breakout confirmed, buy buy buy",
  };
  std::string text = replace_all(pick(rng, templates), "{C}", "$" + coin);
  if (telegram) {
    static const char* const links[] = {" join http://t.me/", " signals at t.me/", " more in https://t.me/"};
    text += std::string(pick(rng, links)) + handle;
  }
  return text;
}

std::size_t index_at_or_before(Timestamp start, Timestamp t) { return static_cast<std::size_t>((t - start) / kStep); }

}  // namespace

void Scenario::validate() const {
  if (coins < 1 || coins > 500) throw ValidationError("coins must lie in [1, 500]");
  if (duration_days < 5) throw ValidationError("duration must be at least 5 days");
  if (!(success_rate >= 0.0 && success_rate <= 1.0)) throw ValidationError("success_rate must lie in [0, 1]");
  if (!(volatility >= 0.0)) throw ValidationError("volatility must be nonnegative");
  if (!(bot_participation >= 0.0 && bot_participation <= 1.0)) throw ValidationError("bot_participation must lie in [0, 1]");
  if (bot_degree_boost < 1) throw ValidationError("bot_degree_boost must be at least 1");
  if (!(human_tweets_per_hour >= 0.0) || !(news_per_day >= 0.0)) throw ValidationError("rates must be nonnegative");
  if (!(labeled_pump_share > 0.0 && labeled_pump_share < 1.0)) throw ValidationError("labeled_pump_share must lie in (0, 1)");
  if (momentum_hours < 1) throw ValidationError("momentum_hours must be at least 1");
  if (min_spacing < 3 * kHour) throw ValidationError("min_spacing must be at least 3 hours");
  if (start % kStep != 0) throw ValidationError("start must be a multiple of 5 minutes");
  const Timestamp end = start + duration_days * kDay;
  const auto symbols = coin_symbols(coins);
  std::map<std::string, std::vector<Timestamp>> anchors;
  for (const auto& p : plan) {
    if (std::find(symbols.begin(), symbols.end(), p.coin) == symbols.end()) {
      throw ValidationError("planned pump for unknown coin " + p.coin);
    }
    if (p.anchor < start + kDay || p.anchor > end - kDay) {
      throw ValidationError("planned anchor " + std::to_string(p.anchor) + " outside the scenario (one-day margins)");
    }
    anchors[p.coin].push_back(p.anchor);
  }
  for (auto& [coin, list] : anchors) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i] - list[i - 1] < 3 * kHour) {
        throw ValidationError("infeasible schedule: " + coin + " anchors " + std::to_string(list[i - 1]) + " and " +
                              std::to_string(list[i]) + " overlap within 3 hours");
      }
    }
  }
  if (plan.empty() && pumps_per_coin > 0) {
    const Timestamp usable = end - start - 5 * kDay;
    if (static_cast<Timestamp>(pumps_per_coin - 1) * min_spacing > usable) {
      throw ValidationError("infeasible schedule: " + std::to_string(pumps_per_coin) + " pumps per coin do not fit");
    }
  }
}

std::vector<std::string> coin_symbols(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i < std::size(kTickers)) {
      out.emplace_back(kTickers[i]);
    } else {
      std::string s = "X";
      for (std::size_t k = i; k > 0; k /= 26) s.push_back(static_cast<char>('A' + k % 26));
      out.push_back(s);
    }
  }
  return out;
}

std::vector<SocialMessage> labeled_messages(const std::vector<std::string>& coins, std::size_t count,
                                            double pump_share, std::uint64_t seed) {
  if (coins.empty()) throw ValidationError("labeled_messages: no coins");
  Rng rng(seed);
  std::vector<SocialMessage> out;
  const auto pumps = static_cast<std::size_t>(std::llround(pump_share * static_cast<double>(count)));
  std::vector<bool> is_pump(count, false);
  std::fill(is_pump.begin(), is_pump.begin() + static_cast<std::ptrdiff_t>(std::min(pumps, count)), true);
  rng.shuffle(is_pump);
  Timestamp t = 1483228800;  // 2017-01-01
  for (std::size_t i = 0; i < count; ++i) {
    t += rng.between(60, 4 * kHour);
    const std::string& coin = coins[rng.below(coins.size())];
    const double sats = std::round(rng.uniform(200.0, 5000.0));
    SocialMessage m;
    m.index = i;
    m.channel_id = "channel_" + std::to_string(1 + rng.below(12));
    m.timestamp = t;
    if (is_pump[i]) {
      PriceSet p;
      p.buy = sats;
      p.targets.push_back(std::round(sats * rng.uniform(1.10, 1.30)));
      p.targets.push_back(std::round(p.targets[0] * rng.uniform(1.08, 1.15)));
      p.targets.push_back(std::round(p.targets[1] * rng.uniform(1.08, 1.15)));
      p.stop = std::round(sats * rng.uniform(0.85, 0.93));
      m.text = render_pump(rng, coin, p, rng.bernoulli(0.2));
      m.label = MessageLabel::pump;
    } else {
      m.text = render_news(rng, coin, sats);
      m.label = MessageLabel::not_pump;
    }
    out.push_back(std::move(m));
  }
  return out;
}

SynthOutput generate(const Scenario& scenario) {
  scenario.validate();
  SynthOutput out;
  out.scenario = scenario;
  const auto symbols = coin_symbols(scenario.coins);
  {
    std::map<std::string, std::string> aliases;
    for (const auto& s : symbols) aliases[lower(s) + "coin"] = s;
    out.registry = CoinRegistry(std::set<std::string>(symbols.begin(), symbols.end()), aliases);
  }
  const Timestamp start = scenario.start;
  const Timestamp end = start + scenario.duration_days * kDay;
  const std::size_t steps = static_cast<std::size_t>((end - start) / kStep) + 1;
  auto time_of = [&](std::size_t k) { return start + static_cast<Timestamp>(k) * kStep; };

  // Schedule.
  std::vector<PlannedPump> plan = scenario.plan;
  if (plan.empty()) {
    Rng rng(derive_seed(scenario.seed, "schedule"));
    // Three days of tail so every attempt is evaluable on the widest success window.
    const Timestamp lo = start + 2 * kDay;
    const Timestamp usable = end - 3 * kDay - lo;
    for (const auto& coin : symbols) {
      const std::size_t n = scenario.pumps_per_coin;
      if (n == 0) continue;
      const Timestamp slack = usable - static_cast<Timestamp>(n - 1) * scenario.min_spacing;
      std::vector<Timestamp> offsets;
      for (std::size_t i = 0; i < n; ++i) offsets.push_back(rng.between(0, slack));
      std::sort(offsets.begin(), offsets.end());
      const auto successes = static_cast<std::size_t>(std::llround(scenario.success_rate * static_cast<double>(n)));
      std::vector<bool> flags(n, false);
      std::fill(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(successes), true);
      rng.shuffle(flags);
      for (std::size_t i = 0; i < n; ++i) {
        const Timestamp anchor = floor_to(lo + offsets[i] + static_cast<Timestamp>(i) * scenario.min_spacing, kMinute);
        plan.push_back({coin, anchor, flags[i]});
      }
    }
  }
  std::sort(plan.begin(), plan.end(), [](const PlannedPump& a, const PlannedPump& b) {
    return a.anchor != b.anchor ? a.anchor < b.anchor : a.coin < b.coin;
  });

  // Shared BTC/USD rate.
  std::vector<double> btc_usd(steps);
  {
    Rng rng(derive_seed(scenario.seed, "btc-usd"));
    double lp = std::log(14000.0);
    for (std::size_t k = 0; k < steps; ++k) {
      btc_usd[k] = std::exp(lp);
      lp += 0.002 * rng.normal();
    }
  }

  const std::vector<std::string> pump_channels = {"pump_signals_1", "pump_signals_2", "pump_signals_3",
                                                  "pump_signals_4", "pump_signals_5", "pump_signals_6"};

  // Market paths with injected pumps.
  for (std::size_t ci = 0; ci < symbols.size(); ++ci) {
    const std::string& coin = symbols[ci];
    Rng rng(derive_seed(scenario.seed, "market:" + coin));
    const double p0_sats = rng.uniform(200.0, 5000.0);
    const double base_volume = rng.uniform(2e5, 5e6) / 288.0;  // USD per 5 minutes
    const double supply = rng.uniform(1e7, 1e9);
    std::vector<double> lp(steps);
    double cur = std::log(p0_sats * kSat);
    for (std::size_t k = 0; k < steps; ++k) {
      lp[k] = cur;
      cur += scenario.volatility * rng.normal();
    }
    std::vector<double> boost(steps, 1.0);

    std::vector<ScheduledPump> coin_pumps;
    Rng prng(derive_seed(scenario.seed, "pumps:" + coin));
    for (const auto& planned : plan) {
      if (planned.coin != coin) continue;
      ScheduledPump sp;
      sp.coin = coin;
      sp.anchor = planned.anchor;
      sp.succeed = planned.succeed;
      sp.channel_id = pump_channels[prng.below(pump_channels.size())];
      const std::size_t ka = index_at_or_before(start, sp.anchor);

      if (scenario.momentum && sp.succeed) {
        sp.momentum = true;
        const double ramp = std::log(1.0 + prng.uniform(0.04, 0.08));
        const Timestamp from = sp.anchor - scenario.momentum_hours * kHour;
        for (std::size_t k = index_at_or_before(start, from); k < steps; ++k) {
          const double frac = std::clamp(static_cast<double>(time_of(k) - from) /
                                             static_cast<double>(scenario.momentum_hours * kHour),
                                         0.0, 1.0);
          lp[k] += ramp * frac;
        }
      }

      const double p_anchor = std::exp(lp[ka]);
      PriceSet prices;
      prices.buy = std::max(1.0, std::round(p_anchor / kSat));
      prices.targets.push_back(std::round(prices.buy * prng.uniform(1.10, 1.30)));
      prices.targets.push_back(std::max(prices.targets[0] + 1, std::round(prices.targets[0] * prng.uniform(1.08, 1.15))));
      prices.targets.push_back(std::max(prices.targets[1] + 1, std::round(prices.targets[1] * prng.uniform(1.08, 1.15))));
      prices.stop = std::round(prices.buy * prng.uniform(0.85, 0.93));
      sp.buy = prices.buy * kSat;
      for (double t : prices.targets) sp.targets.push_back(t * kSat);
      sp.stop_loss = prices.stop * kSat;
      const double target = sp.targets.front();

      // Peak on a grid point 20 to 55 minutes after the anchor.
      std::vector<std::size_t> candidates;
      for (std::size_t k = ka + 1; k < steps && time_of(k) <= sp.anchor + 55 * kMinute; ++k) {
        if (time_of(k) >= sp.anchor + 20 * kMinute) candidates.push_back(k);
      }
      const std::size_t kp = candidates[prng.below(candidates.size())];
      sp.peak_time = time_of(kp);
      if (sp.succeed) {
        sp.peak_price = target * prng.uniform(1.03, 1.25);
      } else {
        const double base = std::min(p_anchor, 0.9 * target);
        sp.peak_price = std::min(base + prng.uniform(0.3, 0.7) * (target - base), 0.96 * target);
      }
      const double rise = std::log(sp.peak_price) - lp[kp];
      const double settle = std::log(0.97);
      const double rise_span = static_cast<double>(sp.peak_time - sp.anchor);
      for (std::size_t k = ka + 1; k < steps; ++k) {
        const Timestamp t = time_of(k);
        if (t <= sp.peak_time) {
          lp[k] += rise * static_cast<double>(t - sp.anchor) / rise_span;
        } else {
          lp[k] += settle + (rise - settle) * std::exp(-static_cast<double>(t - sp.peak_time) / (90.0 * kMinute));
        }
        if (t <= sp.anchor + 3 * kHour) {
          boost[k] += 5.0 * std::exp(-static_cast<double>(t - sp.anchor) / (45.0 * kMinute));
        }
      }
      coin_pumps.push_back(std::move(sp));
    }

    std::vector<double> price(steps);
    for (std::size_t k = 0; k < steps; ++k) price[k] = std::exp(lp[k]);
    for (const auto& sp : coin_pumps) {
      if (sp.succeed) continue;
      const double ceiling = kFailCeiling * sp.targets.front();
      for (std::size_t k = index_at_or_before(start, sp.anchor) + 1; k < steps && time_of(k) <= sp.anchor + kFailHold;
           ++k) {
        price[k] = std::min(price[k], ceiling);
      }
    }

    CoinSeries series;
    series.coin = coin;
    series.points.reserve(steps);
    Rng vrng(derive_seed(scenario.seed, "volume:" + coin));
    for (std::size_t k = 0; k < steps; ++k) {
      MarketPoint p;
      p.timestamp = time_of(k);
      p.price_btc = price[k];
      p.price_usd = price[k] * btc_usd[k];
      p.volume = base_volume * std::exp(0.4 * vrng.normal()) * boost[k];
      p.market_cap = p.price_usd * supply;
      series.points.push_back(p);
    }

    // The path must realize every flag: success iff the first target is hit
    // within an hour; failures stay below it for a day.
    for (const auto& sp : coin_pumps) {
      pumps::PumpAttempt a;
      a.id = sp.attempt_id();
      a.coin = coin;
      a.anchor_time = sp.anchor;
      a.target_prices = {sp.targets.front()};
      const bool hit_1h = pumps::evaluate_success(a, series, 1.0, 1).success;
      const int hold = static_cast<int>(std::min<Timestamp>(24, (end - sp.anchor) / kHour));
      const bool hit_day = hold >= 1 && pumps::evaluate_success(a, series, 1.0, hold).success;
      if (sp.succeed ? !hit_1h : hit_day) {
        throw ValidationError("infeasible schedule: the price path cannot realize the flag of " + a.id);
      }
    }

    out.market.emplace(coin, std::move(series));
    out.pumps.insert(out.pumps.end(), std::make_move_iterator(coin_pumps.begin()),
                     std::make_move_iterator(coin_pumps.end()));
  }
  std::sort(out.pumps.begin(), out.pumps.end(), [](const ScheduledPump& a, const ScheduledPump& b) {
    return a.anchor != b.anchor ? a.anchor < b.anchor : a.coin < b.coin;
  });

  // Channel messages.
  {
    Rng rng(derive_seed(scenario.seed, "messages"));
    struct Draft {
      Timestamp t;
      std::string channel;
      std::string text;
      MessageLabel label;
    };
    std::vector<Draft> drafts;
    for (const auto& sp : out.pumps) {
      PriceSet p;
      p.buy = std::round(sp.buy / kSat);
      for (double t : sp.targets) p.targets.push_back(std::round(t / kSat));
      p.stop = std::round(sp.stop_loss / kSat);
      drafts.push_back({sp.anchor, sp.channel_id, render_pump(rng, sp.coin, p, false), MessageLabel::pump});
      const std::size_t reminders = rng.below(3);
      for (std::size_t r = 0; r < reminders; ++r) {
        drafts.push_back({sp.anchor + rng.between(5 * kMinute, 100 * kMinute),
                          pump_channels[rng.below(pump_channels.size())], render_pump(rng, sp.coin, p, true),
                          MessageLabel::pump});
      }
    }
    const auto news = static_cast<std::size_t>(std::llround(scenario.news_per_day * scenario.duration_days));
    for (std::size_t i = 0; i < news; ++i) {
      const Timestamp t = rng.between(start, end);
      const std::string& coin = symbols[rng.below(symbols.size())];
      const auto* series_point = out.market.at(coin).at_or_before(t);
      const double sats = std::round(series_point->price_btc / kSat);
      const std::string channel = rng.bernoulli(0.3) ? pump_channels[rng.below(pump_channels.size())]
                                                     : "crypto_news_" + std::to_string(1 + rng.below(4));
      drafts.push_back({t, channel, render_news(rng, coin, sats), MessageLabel::not_pump});
    }
    std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return a.t < b.t; });
    for (std::size_t i = 0; i < drafts.size(); ++i) {
      out.messages.push_back({i, drafts[i].channel, drafts[i].t, drafts[i].text, drafts[i].label});
    }
  }
  out.labeled = labeled_messages(symbols, scenario.labeled_messages, scenario.labeled_pump_share,
                                 derive_seed(scenario.seed, "labeled"));

  // Tweets.
  {
    Rng rng(derive_seed(scenario.seed, "tweets"));
    struct Draft {
      Timestamp t;
      std::string user;
      std::string text;
      std::set<std::string> tags;
    };
    std::vector<Draft> drafts;
    const double hours = static_cast<double>(end - start) / kHour;
    for (const auto& coin : symbols) {
      const auto n = static_cast<std::size_t>(std::llround(scenario.human_tweets_per_hour * hours));
      for (std::size_t i = 0; i < n; ++i) {
        Draft d;
        d.t = rng.between(start, end);
        d.user = "user_" + std::to_string(1 + rng.below(std::max<std::size_t>(1, scenario.humans)));
        std::string other;
        if (symbols.size() > 1 && rng.bernoulli(scenario.co_mention_share)) {
          do {
            other = symbols[rng.below(symbols.size())];
          } while (other == coin);
        }
        d.text = render_human_tweet(rng, coin, other);
        d.tags = {coin};
        if (!other.empty()) d.tags.insert(other);
        drafts.push_back(std::move(d));
      }
    }
    for (std::size_t ci = 0; ci < symbols.size(); ++ci) {
      const std::string& coin = symbols[ci];
      std::vector<std::string> group;
      std::vector<bool> telegram;
      for (std::size_t b = 0; b < scenario.bots_per_coin; ++b) {
        char name[48];
        std::snprintf(name, sizeof name, "bot_%s_%02zu", lower(coin).c_str(), b + 1);
        group.emplace_back(name);
        telegram.push_back(rng.bernoulli(scenario.telegram_bot_share));
        out.bots.insert(name);
      }
      const std::string handle = lower(coin) + "_pumps";
      for (const auto& sp : out.pumps) {
        if (sp.coin != coin) continue;
        for (std::size_t b = 0; b < group.size(); ++b) {
          if (!rng.bernoulli(scenario.bot_participation)) continue;
          const auto n = rng.between(1, 2 * scenario.bot_degree_boost - 1);
          for (std::int64_t i = 0; i < n; ++i) {
            Draft d;
            d.t = rng.between(sp.anchor - 2 * kHour, sp.anchor + kHour);
            d.user = group[b];
            d.text = render_bot_tweet(rng, coin, handle, telegram[b]);
            d.tags = {coin};
            drafts.push_back(std::move(d));
          }
        }
      }
      out.bot_groups.push_back(std::move(group));
    }
    std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return a.t < b.t; });
    out.tweets.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
      char id[24];
      std::snprintf(id, sizeof id, "tw%07zu", i + 1);
      out.tweets.push_back({id, drafts[i].user, drafts[i].t, drafts[i].text, drafts[i].tags});
    }
  }

  // Account status for every user who tweeted.
  {
    Rng rng(derive_seed(scenario.seed, "statuses"));
    std::set<std::string> users;
    for (const auto& t : out.tweets) users.insert(t.user_id);
    for (const auto& u : users) {
      AccountStatus s;
      s.user_id = u;
      if (out.bots.count(u)) {
        if (rng.bernoulli(0.4)) s.status = AccountState::suspended;
        s.botometer_score = std::round(rng.uniform(0.6, 0.95) * 1000.0) / 1000.0;
      } else if (!rng.bernoulli(0.2)) {
        s.botometer_score = std::round(rng.uniform(0.05, 0.5) * 1000.0) / 1000.0;
      }
      out.statuses.emplace(u, std::move(s));
    }
  }
  return out;
}

void write_truth_json(std::ostream& out, const SynthOutput& output) {
  const auto& sc = output.scenario;
  nlohmann::ordered_json j;
  j["format"] = "pumpwatch-truth";
  j["version"] = 1;
  j["scenario"] = {{"seed", sc.seed},
                   {"coins", sc.coins},
                   {"duration_days", sc.duration_days},
                   {"start", sc.start},
                   {"pumps_per_coin", sc.pumps_per_coin},
                   {"success_rate", sc.success_rate},
                   {"momentum", sc.momentum},
                   {"bots_per_coin", sc.bots_per_coin},
                   {"humans", sc.humans},
                   {"bot_degree_boost", sc.bot_degree_boost}};
  auto pumps = nlohmann::ordered_json::array();
  for (const auto& p : output.pumps) {
    pumps.push_back({{"attempt_id", p.attempt_id()},
                     {"coin", p.coin},
                     {"anchor", p.anchor},
                     {"channel_id", p.channel_id},
                     {"buy", p.buy},
                     {"targets", p.targets},
                     {"stop_loss", p.stop_loss},
                     {"succeed", p.succeed},
                     {"momentum", p.momentum},
                     {"peak_time", p.peak_time},
                     {"peak_price", p.peak_price}});
  }
  j["pumps"] = std::move(pumps);
  j["successes"] = std::count_if(output.pumps.begin(), output.pumps.end(), [](const auto& p) { return p.succeed; });
  j["bot_groups"] = output.bot_groups;
  out << j.dump(1) << '\n';
}

void write_files(const SynthOutput& output, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw DataError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("market.csv");
    write_market(f, output.market);
  }
  {
    auto f = open("messages.jsonl");
    write_messages(f, output.messages);
  }
  {
    auto f = open("labeled.jsonl");
    write_messages(f, output.labeled);
  }
  {
    auto f = open("tweets.jsonl");
    write_tweets(f, output.tweets);
  }
  {
    auto f = open("statuses.csv");
    write_statuses(f, output.statuses);
  }
  {
    auto f = open("registry.txt");
    write_registry(f, output.registry);
  }
  {
    auto f = open("truth.json");
    write_truth_json(f, output);
  }
}

}  // namespace pumpwatch::synth
