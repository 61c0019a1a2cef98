#include "pumpwatch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "pumpwatch/csv.hpp"
#include "pumpwatch/error.hpp"

namespace pumpwatch {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  throw DataError(os.str());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void expect_header(std::string_view source, std::string_view got, std::string_view want) {
  if (csv::trim(got) != want) {
    fail(source, 1, "expected header '" + std::string(want) + "'");
  }
}

double parse_nonnegative(std::string_view source, std::size_t line, std::string_view field,
                         std::string_view name) {
  auto v = csv::parse_double(field);
  if (!v || !std::isfinite(*v)) fail(source, line, "invalid " + std::string(name));
  if (*v < 0.0) fail(source, line, "negative " + std::string(name));
  return *v;
}

template <typename T>
T json_field(const ordered_json& obj, const char* key, std::string_view source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) fail(source, line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(source, line, std::string("wrong type for field '") + key + "'");
  }
}

Timestamp json_timestamp(const ordered_json& obj, std::string_view source, std::size_t line) {
  auto it = obj.find("timestamp");
  if (it == obj.end()) fail(source, line, "missing field 'timestamp'");
  if (!it->is_number_integer()) fail(source, line, "timestamp must be integer UTC seconds");
  return it->get<Timestamp>();
}

ordered_json parse_json_line(std::string_view source, std::size_t line, const std::string& text) {
  try {
    auto obj = ordered_json::parse(text);
    if (!obj.is_object()) fail(source, line, "expected a JSON object");
    return obj;
  } catch (const nlohmann::json::parse_error& e) {
    fail(source, line, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

const MarketPoint* CoinSeries::at_or_before(Timestamp t) const {
  auto it = std::upper_bound(points.begin(), points.end(), t,
                             [](Timestamp v, const MarketPoint& p) { return v < p.timestamp; });
  if (it == points.begin()) return nullptr;
  return &*std::prev(it);
}

std::string_view to_string(MessageLabel label) {
  return label == MessageLabel::pump ? "pump" : "not_pump";
}

std::optional<MessageLabel> parse_message_label(std::string_view text) {
  if (text == "pump") return MessageLabel::pump;
  if (text == "not_pump") return MessageLabel::not_pump;
  return std::nullopt;
}

CoinRegistry::CoinRegistry(std::set<std::string> symbols, std::map<std::string, std::string> aliases) {
  for (const auto& s : symbols) {
    const std::string sym = upper(s);
    symbols_.insert(sym);
    lookup_[lower(sym)] = sym;
  }
  for (const auto& [alias, target] : aliases) {
    const std::string sym = upper(target);
    if (!symbols_.count(sym)) throw ValidationError("alias '" + alias + "' maps to unknown symbol " + sym);
    aliases_[lower(alias)] = sym;
    lookup_[lower(alias)] = sym;
  }
}

std::optional<std::string> CoinRegistry::resolve(std::string_view token) const {
  auto it = lookup_.find(lower(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Market

Market read_market(std::istream& in, std::string_view source) {
  Market market;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return market;
  ++line_no;
  expect_header(source, line, "timestamp,coin,price_btc,price_usd,volume,market_cap");

  std::map<std::string, std::vector<std::pair<MarketPoint, std::size_t>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 6) fail(source, line_no, "expected 6 fields");
    auto ts = csv::parse_int(f[0]);
    if (!ts) fail(source, line_no, "invalid timestamp");
    const std::string coin = upper(csv::trim(f[1]));
    if (coin.empty()) fail(source, line_no, "empty coin symbol");
    MarketPoint p;
    p.timestamp = *ts;
    p.price_btc = parse_nonnegative(source, line_no, f[2], "price_btc");
    p.price_usd = parse_nonnegative(source, line_no, f[3], "price_usd");
    p.volume = parse_nonnegative(source, line_no, f[4], "volume");
    p.market_cap = parse_nonnegative(source, line_no, f[5], "market_cap");
    rows[coin].emplace_back(p, line_no);
  }

  for (auto& [coin, pts] : rows) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      return a.first.timestamp < b.first.timestamp;
    });
    CoinSeries series;
    series.coin = coin;
    series.points.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0 && pts[i].first.timestamp == pts[i - 1].first.timestamp) {
        fail(source, pts[i].second,
             "duplicate observation for " + coin + " at " + std::to_string(pts[i].first.timestamp));
      }
      series.points.push_back(pts[i].first);
    }
    market.emplace(coin, std::move(series));
  }
  return market;
}

Market load_market(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_market(in, path.string());
}

void write_market(std::ostream& out, const Market& market) {
  out << "timestamp,coin,price_btc,price_usd,volume,market_cap\n";
  std::vector<std::tuple<Timestamp, const std::string*, const MarketPoint*>> rows;
  for (const auto& [coin, series] : market) {
    for (const auto& p : series.points) rows.emplace_back(p.timestamp, &coin, &p);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return *std::get<1>(a) < *std::get<1>(b);
  });
  for (const auto& [ts, coin, p] : rows) {
    out << ts << ',' << *coin << ',' << csv::format_double(p->price_btc) << ','
        << csv::format_double(p->price_usd) << ',' << csv::format_double(p->volume) << ','
        << csv::format_double(p->market_cap) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Messages

std::vector<SocialMessage> read_messages(std::istream& in, std::string_view source) {
  std::vector<SocialMessage> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto obj = parse_json_line(source, line_no, line);
    SocialMessage m;
    m.index = out.size();
    m.channel_id = json_field<std::string>(obj, "channel_id", source, line_no);
    m.timestamp = json_timestamp(obj, source, line_no);
    m.text = json_field<std::string>(obj, "text", source, line_no);
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) fail(source, line_no, "label must be a string");
      auto label = parse_message_label(it->get<std::string>());
      if (!label) fail(source, line_no, "label must be \"pump\" or \"not_pump\"");
      if (csv::trim(m.text).empty()) fail(source, line_no, "labeled message has empty text");
      m.label = label;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<SocialMessage> load_messages(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_messages(in, path.string());
}

void write_messages(std::ostream& out, const std::vector<SocialMessage>& messages) {
  for (const auto& m : messages) {
    ordered_json obj;
    obj["channel_id"] = m.channel_id;
    obj["timestamp"] = m.timestamp;
    obj["text"] = m.text;
    if (m.label) obj["label"] = std::string(to_string(*m.label));
    out << obj.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Tweets

std::vector<Tweet> read_tweets(std::istream& in, std::string_view source) {
  std::vector<Tweet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto obj = parse_json_line(source, line_no, line);
    Tweet t;
    t.tweet_id = json_field<std::string>(obj, "tweet_id", source, line_no);
    t.user_id = json_field<std::string>(obj, "user_id", source, line_no);
    t.timestamp = json_timestamp(obj, source, line_no);
    t.text = json_field<std::string>(obj, "text", source, line_no);
    for (const auto& tag : json_field<std::vector<std::string>>(obj, "cashtags", source, line_no)) {
      std::string sym = upper(csv::trim(tag));
      if (!sym.empty() && sym.front() == '$') sym.erase(0, 1);
      if (sym.empty()) fail(source, line_no, "empty cashtag");
      t.cashtags.insert(std::move(sym));
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Tweet> load_tweets(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tweets(in, path.string());
}

void write_tweets(std::ostream& out, const std::vector<Tweet>& tweets) {
  for (const auto& t : tweets) {
    ordered_json obj;
    obj["tweet_id"] = t.tweet_id;
    obj["user_id"] = t.user_id;
    obj["timestamp"] = t.timestamp;
    obj["text"] = t.text;
    obj["cashtags"] = std::vector<std::string>(t.cashtags.begin(), t.cashtags.end());
    out << obj.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Statuses

StatusMap read_statuses(std::istream& in, std::string_view source) {
  StatusMap out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return out;
  ++line_no;
  expect_header(source, line, "user_id,status,botometer_score");
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 3) fail(source, line_no, "expected 3 fields");
    AccountStatus s;
    s.user_id = std::string(csv::trim(f[0]));
    if (s.user_id.empty()) fail(source, line_no, "missing user_id");
    const auto state = lower(csv::trim(f[1]));
    if (state == "active") {
      s.status = AccountState::active;
    } else if (state == "suspended") {
      s.status = AccountState::suspended;
    } else {
      fail(source, line_no, "status must be active or suspended");
    }
    if (!csv::trim(f[2]).empty()) {
      auto score = csv::parse_double(f[2]);
      if (!score || !std::isfinite(*score)) fail(source, line_no, "invalid botometer_score");
      if (*score < 0.0 || *score > 1.0) fail(source, line_no, "score out of range");
      s.botometer_score = *score;
    }
    if (out.count(s.user_id)) fail(source, line_no, "duplicate user_id " + s.user_id);
    out.emplace(s.user_id, std::move(s));
  }
  return out;
}

StatusMap load_statuses(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_statuses(in, path.string());
}

void write_statuses(std::ostream& out, const StatusMap& statuses) {
  out << "user_id,status,botometer_score\n";
  for (const auto& [id, s] : statuses) {
    out << csv::escape(id) << ',' << (s.status == AccountState::active ? "active" : "suspended") << ',';
    if (s.botometer_score) out << csv::format_double(*s.botometer_score);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Registry

CoinRegistry read_registry(std::istream& in, std::string_view source) {
  std::set<std::string> symbols;
  std::vector<std::pair<std::string, std::pair<std::string, std::size_t>>> alias_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (auto eq = t.find('='); eq != std::string_view::npos) {
      auto alias = csv::trim(t.substr(0, eq));
      auto target = csv::trim(t.substr(eq + 1));
      if (alias.empty() || target.empty()) fail(source, line_no, "malformed alias line");
      alias_lines.push_back({std::string(alias), {upper(target), line_no}});
    } else {
      if (t.find_first_of(" \t,$") != std::string_view::npos) fail(source, line_no, "invalid symbol");
      symbols.insert(upper(t));
    }
  }
  if (symbols.empty()) fail(source, line_no, "registry has no symbols");
  std::map<std::string, std::string> aliases;
  for (const auto& [alias, target] : alias_lines) {
    if (!symbols.count(target.first)) fail(source, target.second, "alias maps to unknown symbol " + target.first);
    aliases[alias] = target.first;
  }
  return CoinRegistry(std::move(symbols), std::move(aliases));
}

CoinRegistry load_registry(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_registry(in, path.string());
}

void write_registry(std::ostream& out, const CoinRegistry& registry) {
  for (const auto& s : registry.symbols()) out << s << '\n';
  for (const auto& [alias, sym] : registry.aliases()) out << alias << '=' << sym << '\n';
}

// ---------------------------------------------------------------------------
// TweetIndex

TweetIndex::TweetIndex(std::span<const Tweet> tweets) {
  all_.reserve(tweets.size());
  for (const auto& t : tweets) all_.push_back(&t);
  std::stable_sort(all_.begin(), all_.end(),
                   [](const Tweet* a, const Tweet* b) { return a->timestamp < b->timestamp; });
  for (const Tweet* t : all_) {
    for (const auto& tag : t->cashtags) by_coin_[tag].push_back(t);
  }
}

std::span<const Tweet* const> TweetIndex::slice(const std::vector<const Tweet*>& v, Timestamp from, Timestamp to) {
  auto lo = std::lower_bound(v.begin(), v.end(), from, [](const Tweet* t, Timestamp x) { return t->timestamp < x; });
  auto hi = std::upper_bound(v.begin(), v.end(), to, [](Timestamp x, const Tweet* t) { return x < t->timestamp; });
  if (hi <= lo) return {};
  return {&*lo, static_cast<std::size_t>(hi - lo)};
}

std::span<const Tweet* const> TweetIndex::mentions(std::string_view coin, Timestamp from, Timestamp to) const {
  auto it = by_coin_.find(coin);
  if (it == by_coin_.end()) return {};
  return slice(it->second, from, to);
}

std::span<const Tweet* const> TweetIndex::between(Timestamp from, Timestamp to) const {
  return slice(all_, from, to);
}

// ---------------------------------------------------------------------------
// Resampling

CoinSeries resample_hourly(const CoinSeries& series) {
  CoinSeries out;
  out.coin = series.coin;
  if (series.empty()) return out;
  const Timestamp first = ceil_to(series.first_time(), kHour);
  const Timestamp last = ceil_to(series.last_time(), kHour);
  out.points.reserve(static_cast<std::size_t>((last - first) / kHour + 1));
  std::size_t idx = 0;
  for (Timestamp h = first; h <= last; h += kHour) {
    while (idx + 1 < series.points.size() && series.points[idx + 1].timestamp <= h) ++idx;
    MarketPoint p = series.points[idx];
    p.timestamp = h;
    out.points.push_back(p);
  }
  return out;
}

std::vector<Timestamp> stale_hours(const CoinSeries& original, Timestamp max_age) {
  std::vector<Timestamp> out;
  if (original.empty()) return out;
  const Timestamp first = ceil_to(original.first_time(), kHour);
  const Timestamp last = ceil_to(original.last_time(), kHour);
  std::size_t idx = 0;
  for (Timestamp h = first; h <= last; h += kHour) {
    while (idx + 1 < original.points.size() && original.points[idx + 1].timestamp <= h) ++idx;
    if (h - original.points[idx].timestamp > max_age) out.push_back(h);
  }
  return out;
}

Market resample_hourly(const Market& market) {
  Market out;
  for (const auto& [coin, series] : market) {
    if (!series.empty()) out.emplace(coin, resample_hourly(series));
  }
  return out;
}

}  // namespace pumpwatch
