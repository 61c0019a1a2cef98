#include "pumpwatch/pump_extract.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pumpwatch/csv.hpp"
#include "pumpwatch/textclf.hpp"

namespace pumpwatch::pumps {

std::string_view to_string(PriceUnit unit) { return unit == PriceUnit::btc ? "btc" : "usd"; }

std::set<std::string> extract_mentions(std::string_view text, const CoinRegistry& registry) {
  std::set<std::string> out;
  for (const auto& tok : text::split_words(text)) {
    if (auto sym = registry.resolve(tok.text)) out.insert(*sym);
  }
  return out;
}

namespace {

enum class Kind { word, number, punct };

struct PriceToken {
  Kind kind = Kind::word;
  std::string text;
  double value = 0.0;
  bool integral = false;
  bool percent = false;
  bool satoshi = false;
};

std::vector<PriceToken> lex_prices(std::string_view text) {
  std::vector<PriceToken> out;
  const std::size_t n = text.size();
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = at(i);
    if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(at(i + 1)))) {
      const std::size_t start = i;
      bool dot = false;
      while (i < n && (std::isdigit(at(i)) || (!dot && text[i] == '.' && i + 1 < n && std::isdigit(at(i + 1))))) {
        if (text[i] == '.') dot = true;
        ++i;
      }
      PriceToken t;
      t.kind = Kind::number;
      t.text = std::string(text.substr(start, i - start));
      std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      t.integral = !dot;
      std::size_t k = i;
      while (k < n && text[k] == ' ') ++k;
      if (k < n && text[k] == '%') {
        t.percent = true;
        i = k + 1;
      }
      out.push_back(std::move(t));
    } else if (std::isalpha(c)) {
      const std::size_t start = i;
      while (i < n && std::isalnum(at(i))) ++i;
      PriceToken t;
      t.kind = Kind::word;
      for (std::size_t k = start; k < i; ++k) t.text.push_back(static_cast<char>(std::tolower(at(k))));
      out.push_back(std::move(t));
    } else if (std::isspace(c) || c >= 0x80) {
      ++i;
    } else {
      PriceToken t;
      t.kind = Kind::punct;
      t.text = std::string(1, static_cast<char>(c));
      out.push_back(std::move(t));
      ++i;
    }
  }

  // Fold "<number> sat" into a satoshi-valued number.
  std::vector<PriceToken> folded;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].kind == Kind::number && !out[k].percent && k + 1 < out.size() && out[k + 1].kind == Kind::word) {
      const auto& w = out[k + 1].text;
      if (w == "sat" || w == "sats" || w == "satoshi" || w == "satoshis") {
        PriceToken t = out[k];
        t.value *= 1e-8;
        t.satoshi = true;
        t.integral = false;
        folded.push_back(std::move(t));
        ++k;
        continue;
      }
    }
    folded.push_back(out[k]);
  }
  return folded;
}

enum class Cue { none, buy, target, stop };

Cue classify_cue(const std::string& w, bool& ordinal_in_word) {
  ordinal_in_word = false;
  if (w == "buy" || w == "bid" || w == "entry" || w == "cp") return Cue::buy;
  if (w == "target" || w == "targets" || w == "tg" || w == "sell") return Cue::target;
  auto digit_suffix = [&](std::string_view prefix) {
    return w.size() == prefix.size() + 1 && w.compare(0, prefix.size(), prefix) == 0 && w.back() >= '1' &&
           w.back() <= '9';
  };
  if (digit_suffix("t") || digit_suffix("tg") || digit_suffix("target")) {
    ordinal_in_word = true;
    return Cue::target;
  }
  if (w == "stop" || w == "stoploss" || w == "sl") return Cue::stop;
  return Cue::none;
}

}  // namespace

ParsedPrices parse_prices(std::string_view text) {
  constexpr int kCueLifetime = 4;
  ParsedPrices out;
  const auto tokens = lex_prices(text);
  Cue mode = Cue::none;
  int idle_words = 0;
  bool any_satoshi = false;
  bool any_value = false;
  bool all_below_one = true;

  auto record = [&](const PriceToken& t) {
    any_value = true;
    any_satoshi = any_satoshi || t.satoshi;
    all_below_one = all_below_one && t.value < 1.0;
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind == Kind::word) {
      bool ordinal = false;
      const Cue cue = classify_cue(t.text, ordinal);
      if (cue != Cue::none) {
        mode = cue;
        idle_words = 0;
      } else if (mode != Cue::none && ++idle_words > kCueLifetime) {
        mode = Cue::none;
      }
      continue;
    }
    if (t.kind != Kind::number || t.percent) continue;
    switch (mode) {
      case Cue::none:
        break;
      case Cue::buy:
        if (!out.buy) {
          out.buy = t.value;
          record(t);
        }
        mode = Cue::none;
        break;
      case Cue::stop:
        if (!out.stop_loss) out.stop_loss = t.value;
        mode = Cue::none;
        break;
      case Cue::target: {
        // "target 1: 0.005" - a small integer right after the cue word and
        // followed by a separator is an ordinal, not a price.
        const bool after_cue = i > 0 && tokens[i - 1].kind == Kind::word;
        const bool separator_next = i + 1 < tokens.size() && tokens[i + 1].kind == Kind::punct &&
                                    std::string_view(":)-.").find(tokens[i + 1].text[0]) != std::string_view::npos;
        if (t.integral && t.value >= 1 && t.value <= 9 && after_cue && separator_next) break;
        out.targets.push_back(t.value);
        record(t);
        idle_words = 0;
        break;
      }
    }
  }
  std::sort(out.targets.begin(), out.targets.end());
  out.targets.erase(std::unique(out.targets.begin(), out.targets.end()), out.targets.end());
  out.unit = (any_satoshi || !any_value || all_below_one) ? PriceUnit::btc : PriceUnit::usd;
  return out;
}

std::vector<PumpAttempt> build_attempts(std::span<const SocialMessage> messages, const CoinRegistry& registry,
                                        const AttemptConfig& config) {
  std::map<std::string, std::vector<const SocialMessage*>> by_coin;
  for (const auto& m : messages) {
    if (m.label != MessageLabel::pump) continue;
    const auto coins = extract_mentions(m.text, registry);
    if (coins.empty() || coins.size() > config.max_coins) continue;
    for (const auto& c : coins) by_coin[c].push_back(&m);
  }

  std::vector<PumpAttempt> out;
  for (auto& [coin, msgs] : by_coin) {
    std::stable_sort(msgs.begin(), msgs.end(), [](const SocialMessage* a, const SocialMessage* b) {
      return a->timestamp < b->timestamp;
    });
    std::size_t i = 0;
    while (i < msgs.size()) {
      PumpAttempt a;
      a.coin = coin;
      a.anchor_time = msgs[i]->timestamp;
      a.id = coin + "-" + std::to_string(a.anchor_time);
      std::vector<const SocialMessage*> members;
      while (i < msgs.size() && msgs[i]->timestamp <= a.anchor_time + config.merge_window) {
        members.push_back(msgs[i]);
        a.message_ids.push_back(msgs[i]->index);
        a.channel_ids.insert(msgs[i]->channel_id);
        ++i;
      }

      std::vector<ParsedPrices> parsed;
      parsed.reserve(members.size());
      for (const auto* m : members) parsed.push_back(parse_prices(m->text));
      const ParsedPrices* chosen = nullptr;
      for (const auto& p : parsed) {
        if (!p.targets.empty()) {
          chosen = &p;
          break;
        }
      }
      if (!chosen) {
        for (const auto& p : parsed) {
          if (p.buy) {
            chosen = &p;
            break;
          }
        }
      }
      if (chosen) {
        a.buy_price = chosen->buy;
        a.stop_loss = chosen->stop_loss;
        a.unit = chosen->unit;
        for (double t : chosen->targets) {
          if (!a.buy_price || t > *a.buy_price) a.target_prices.push_back(t);
        }
        for (const auto& p : parsed) {
          if (&p != chosen && !p.targets.empty() && p.targets != chosen->targets) ++a.price_disagreements;
        }
      }
      out.push_back(std::move(a));
    }
  }
  std::sort(out.begin(), out.end(), [](const PumpAttempt& a, const PumpAttempt& b) {
    if (a.anchor_time != b.anchor_time) return a.anchor_time < b.anchor_time;
    return a.coin < b.coin;
  });
  return out;
}

SuccessVerdict evaluate_success(const PumpAttempt& attempt, const CoinSeries& series, double threshold,
                                int window_hours, TargetChoice choice) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in (0, 1]");
  if (window_hours < 1) throw ValidationError("window must be a positive number of hours");
  if (attempt.target_prices.empty()) throw UnpricedAttempt("unpriced attempt " + attempt.id);
  const Timestamp end = attempt.anchor_time + window_hours * kHour;
  if (series.empty() || series.first_time() > attempt.anchor_time || series.last_time() < end) {
    throw MarketGap("market gap: " + attempt.coin + " series does not cover [" + std::to_string(attempt.anchor_time) +
                    ", " + std::to_string(end) + "]");
  }

  SuccessVerdict v;
  v.attempt_id = attempt.id;
  v.threshold = threshold;
  v.window_hours = window_hours;
  v.unit = attempt.unit;
  v.target = choice == TargetChoice::first ? attempt.target_prices.front() : attempt.target_prices.back();

  auto it = std::upper_bound(series.points.begin(), series.points.end(), attempt.anchor_time,
                             [](Timestamp t, const MarketPoint& p) { return t < p.timestamp; });
  bool any = false;
  for (; it != series.points.end() && it->timestamp <= end; ++it) {
    const double price = attempt.unit == PriceUnit::btc ? it->price_btc : it->price_usd;
    if (!any || price > v.peak_price) {
      v.peak_price = price;
      v.peak_time = it->timestamp;
      any = true;
    }
  }
  if (!any) throw MarketGap("market gap: no " + attempt.coin + " observations after " + std::to_string(attempt.anchor_time));
  // Inclusive boundary; the relative slack absorbs rounding in threshold*target.
  v.success = v.peak_price >= threshold * v.target * (1.0 - 1e-12);
  return v;
}

std::vector<GridCell> success_ratio_grid(std::span<const PumpAttempt> attempts, const Market& market,
                                         std::span<const double> thresholds, std::span<const int> windows,
                                         TargetChoice choice) {
  std::vector<GridCell> grid;
  for (double thr : thresholds) {
    for (int w : windows) {
      GridCell cell;
      cell.threshold = thr;
      cell.window_hours = w;
      for (const auto& a : attempts) {
        auto it = market.find(a.coin);
        try {
          if (a.target_prices.empty()) throw UnpricedAttempt(a.id);
          if (it == market.end()) throw MarketGap(a.coin);
          const auto v = evaluate_success(a, it->second, thr, w, choice);
          ++cell.evaluable;
          cell.successes += v.success ? 1 : 0;
        } catch (const UnpricedAttempt&) {
          ++cell.unpriced;
        } catch (const MarketGap&) {
          ++cell.market_gap;
        }
      }
      if (cell.evaluable > 0) {
        cell.ratio = static_cast<double>(cell.successes) / static_cast<double>(cell.evaluable);
      }
      grid.push_back(cell);
    }
  }
  return grid;
}

void write_grid_csv(std::ostream& out, std::span<const GridCell> grid) {
  out << "threshold,window_hours,successes,evaluable,unpriced,market_gap,ratio\n";
  for (const auto& c : grid) {
    out << csv::format_double(c.threshold) << ',' << c.window_hours << ',' << c.successes << ',' << c.evaluable << ','
        << c.unpriced << ',' << c.market_gap << ',';
    if (c.ratio) out << csv::format_double(*c.ratio);
    out << '\n';
  }
}

void write_attempts(std::ostream& out, std::span<const PumpAttempt> attempts) {
  for (const auto& a : attempts) {
    nlohmann::ordered_json j;
    j["id"] = a.id;
    j["coin"] = a.coin;
    j["anchor_time"] = a.anchor_time;
    j["message_ids"] = a.message_ids;
    j["buy_price"] = a.buy_price ? nlohmann::ordered_json(*a.buy_price) : nlohmann::ordered_json(nullptr);
    j["target_prices"] = a.target_prices;
    j["stop_loss"] = a.stop_loss ? nlohmann::ordered_json(*a.stop_loss) : nlohmann::ordered_json(nullptr);
    j["unit"] = std::string(to_string(a.unit));
    j["channel_ids"] = a.channel_ids;
    j["price_disagreements"] = a.price_disagreements;
    out << j.dump() << '\n';
  }
}

std::vector<PumpAttempt> read_attempts(std::istream& in, std::string_view source) {
  std::vector<PumpAttempt> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      PumpAttempt a;
      a.coin = j.at("coin").get<std::string>();
      a.anchor_time = j.at("anchor_time").get<Timestamp>();
      a.id = j.contains("id") ? j.at("id").get<std::string>() : a.coin + "-" + std::to_string(a.anchor_time);
      if (j.contains("message_ids")) a.message_ids = j.at("message_ids").get<std::vector<std::size_t>>();
      if (j.contains("buy_price") && !j.at("buy_price").is_null()) a.buy_price = j.at("buy_price").get<double>();
      if (j.contains("target_prices")) a.target_prices = j.at("target_prices").get<std::vector<double>>();
      if (j.contains("stop_loss") && !j.at("stop_loss").is_null()) a.stop_loss = j.at("stop_loss").get<double>();
      if (j.contains("unit")) {
        const auto u = j.at("unit").get<std::string>();
        if (u != "btc" && u != "usd") throw DataError("unit must be btc or usd");
        a.unit = u == "btc" ? PriceUnit::btc : PriceUnit::usd;
      }
      if (j.contains("channel_ids")) a.channel_ids = j.at("channel_ids").get<std::set<std::string>>();
      if (j.contains("price_disagreements")) a.price_disagreements = j.at("price_disagreements").get<std::size_t>();
      if (!std::is_sorted(a.target_prices.begin(), a.target_prices.end()) ||
          std::adjacent_find(a.target_prices.begin(), a.target_prices.end()) != a.target_prices.end()) {
        throw DataError("target_prices must be strictly increasing");
      }
      out.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PumpAttempt> load_attempts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_attempts(in, path.string());
}

}  // namespace pumpwatch::pumps
