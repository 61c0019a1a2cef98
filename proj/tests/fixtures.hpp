#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pumpwatch/corpus.hpp"
#include "pumpwatch/graph.hpp"
#include "pumpwatch/pump_extract.hpp"
#include "pumpwatch/rng.hpp"

namespace fixtures {

using pumpwatch::Timestamp;

inline pumpwatch::MarketPoint point(Timestamp t, double price_btc, double volume = 1000.0) {
  return {t, price_btc, price_btc * 10000.0, volume, price_btc * 1e6};
}

// 5-minute series over [from, to] with price(t).
template <typename F>
pumpwatch::CoinSeries series(const std::string& coin, Timestamp from, Timestamp to, F&& price,
                             Timestamp step = pumpwatch::kMarketStep) {
  pumpwatch::CoinSeries s;
  s.coin = coin;
  for (Timestamp t = from; t <= to; t += step) s.points.push_back(point(t, price(t)));
  return s;
}

inline pumpwatch::CoinSeries flat(const std::string& coin, Timestamp from, Timestamp to, double price) {
  return series(coin, from, to, [price](Timestamp) { return price; });
}

// Geometric random walk with per-step log stddev sigma.
inline pumpwatch::CoinSeries walk(const std::string& coin, Timestamp from, Timestamp to, double start,
                                  double sigma, std::uint64_t seed) {
  pumpwatch::Rng rng(seed);
  double lp = std::log(start);
  return series(coin, from, to, [&](Timestamp) {
    const double p = std::exp(lp);
    lp += sigma * rng.normal();
    return p;
  });
}

inline pumpwatch::Tweet tweet(const std::string& id, const std::string& user, Timestamp t,
                              std::set<std::string> tags, const std::string& text = "") {
  std::string body = text;
  if (body.empty()) {
    for (const auto& c : tags) body += "$" + c + " ";
  }
  return {id, user, t, body, std::move(tags)};
}

inline pumpwatch::SocialMessage message(std::size_t index, Timestamp t, const std::string& text,
                                        std::optional<pumpwatch::MessageLabel> label = pumpwatch::MessageLabel::pump,
                                        const std::string& channel = "c1") {
  return {index, channel, t, text, label};
}

inline pumpwatch::pumps::PumpAttempt attempt(const std::string& coin, Timestamp anchor,
                                             std::vector<double> targets = {}) {
  pumpwatch::pumps::PumpAttempt a;
  a.id = coin + "-" + std::to_string(anchor);
  a.coin = coin;
  a.anchor_time = anchor;
  a.target_prices = std::move(targets);
  return a;
}

// Samples of two independent latent factors, each driving one block of
// variables: x = z_block + noise * e. Row-major n x (2 * block).
struct PlantedBlocks {
  std::vector<double> samples;
  std::vector<std::string> names;  // "a0".. then "b0"..
  std::size_t n = 0;
};

inline PlantedBlocks planted_blocks(std::size_t n, std::size_t block, double noise, std::uint64_t seed) {
  pumpwatch::Rng rng(seed);
  PlantedBlocks out;
  out.n = n;
  for (std::size_t j = 0; j < block; ++j) out.names.push_back("a" + std::to_string(j));
  for (std::size_t j = 0; j < block; ++j) out.names.push_back("b" + std::to_string(j));
  out.samples.reserve(n * 2 * block);
  for (std::size_t i = 0; i < n; ++i) {
    const double za = rng.normal();
    const double zb = rng.normal();
    for (std::size_t j = 0; j < 2 * block; ++j) out.samples.push_back((j < block ? za : zb) + noise * rng.normal());
  }
  return out;
}

// Share of variables whose cluster is the majority cluster of their block.
inline double block_purity(const std::map<std::string, std::size_t>& clusters) {
  std::map<char, std::map<std::size_t, std::size_t>> votes;
  for (const auto& [name, c] : clusters) ++votes[name[0]][c];
  std::size_t agree = 0;
  std::set<std::size_t> used;
  for (const auto& [block, counts] : votes) {
    std::size_t best = 0, best_c = 0;
    for (const auto& [c, k] : counts) {
      if (k > best && !used.count(c)) {
        best = k;
        best_c = c;
      }
    }
    used.insert(best_c);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(clusters.size());
}

// Six users with hand-checked degree-table ratios.
//   u1 600 suspended, score 0.9, telegram   u4 60 no status, telegram
//   u2 150 active, score 0.55, telegram     u5 40 active, score 0.1
//   u3 120 active, score 0.5500001          u6 1000 suspended, no score
struct SixUsers {
  pumpwatch::graph::AffiliationMatrix matrix;
  pumpwatch::StatusMap statuses;
  std::set<std::string> telegram;
};

inline SixUsers six_users() {
  using pumpwatch::AccountState;
  SixUsers f;
  f.matrix.row_ids = {"P-0"};
  f.matrix.col_ids = {"u1", "u2", "u3", "u4", "u5", "u6"};
  f.matrix.rows = {{{0, 600}, {1, 150}, {2, 120}, {3, 60}, {4, 40}, {5, 1000}}};
  f.statuses["u1"] = {"u1", AccountState::suspended, 0.9};
  f.statuses["u2"] = {"u2", AccountState::active, 0.55};
  f.statuses["u3"] = {"u3", AccountState::active, 0.5500001};
  f.statuses["u5"] = {"u5", AccountState::active, 0.1};
  f.statuses["u6"] = {"u6", AccountState::suspended, std::nullopt};
  f.telegram = {"u1", "u2", "u4"};
  return f;
}

inline pumpwatch::CoinRegistry registry(std::set<std::string> symbols) {
  return pumpwatch::CoinRegistry(std::move(symbols), {});
}

}  // namespace fixtures
