#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/pump_extract.hpp"
#include "pumpwatch/synth.hpp"

using namespace pumpwatch;
using namespace pumpwatch::synth;

namespace {

Scenario small() {
  Scenario s;
  s.coins = 3;
  s.duration_days = 20;
  s.pumps_per_coin = 6;
  s.bots_per_coin = 5;
  s.humans = 40;
  s.labeled_messages = 50;
  return s;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("scenario validation") {
    auto s = small();
    s.validate();
    s.coins = 0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small();
    s.duration_days = 4;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small();
    s.success_rate = 1.5;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small();
    s.pumps_per_coin = 100;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("infeasible schedule"), ValidationError);

    s = small();
    const auto coin = coin_symbols(1)[0];
    s.plan = {{coin, s.start + 3 * kDay, true}, {coin, s.start + 3 * kDay + kHour, false}};
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("infeasible schedule"), ValidationError);
    s.plan = {{"NOPE", s.start + 3 * kDay, true}};
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s.plan = {{coin, s.start + 3600, true}};
    CHECK_THROWS_AS(s.validate(), ValidationError);
  }

  TEST_CASE("planned schedule: 10 pumps, 7 succeed") {
    Scenario s = small();
    s.coins = 1;
    s.duration_days = 30;
    const auto coin = coin_symbols(1)[0];
    for (int i = 0; i < 10; ++i) s.plan.push_back({coin, s.start + 2 * kDay + i * 2 * kDay, i < 7});
    const auto out = generate(s);
    REQUIRE(out.pumps.size() == 10);
    std::size_t wins = 0;
    for (const auto& p : out.pumps) wins += p.succeed ? 1 : 0;
    CHECK(wins == 7);

    const auto attempts = pumps::build_attempts(out.messages, out.registry);
    REQUIRE(attempts.size() == 10);
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      const auto& p = out.pumps[i];
      CHECK(attempts[i].id == p.attempt_id());
      REQUIRE_FALSE(attempts[i].target_prices.empty());
      CHECK(attempts[i].target_prices.front() == doctest::Approx(p.targets.front()));
      const auto v = pumps::evaluate_success(attempts[i], out.market.at(coin), 1.0, 1);
      CHECK(v.success == p.succeed);
    }
  }

  TEST_CASE("zero pumps give no attempts") {
    Scenario s = small();
    s.pumps_per_coin = 0;
    const auto out = generate(s);
    CHECK(out.pumps.empty());
    CHECK(pumps::build_attempts(out.messages, out.registry).empty());
    CHECK_FALSE(out.messages.empty());
  }

  TEST_CASE("generation is deterministic in the seed") {
    const auto a = generate(small());
    const auto b = generate(small());
    CHECK(a.market == b.market);
    CHECK(a.messages == b.messages);
    CHECK(a.tweets == b.tweets);
    CHECK(a.statuses == b.statuses);
    auto other = small();
    other.seed = 8;
    CHECK_FALSE(generate(other).tweets == a.tweets);
  }

  TEST_CASE("generated corpus is well formed") {
    const auto out = generate(small());
    CHECK(out.market.size() == 3);
    for (const auto& [coin, series] : out.market) {
      for (std::size_t i = 1; i < series.points.size(); ++i) {
        CHECK(series.points[i].timestamp == series.points[i - 1].timestamp + kMarketStep);
      }
    }
    for (std::size_t i = 1; i < out.messages.size(); ++i) {
      CHECK(out.messages[i - 1].timestamp <= out.messages[i].timestamp);
      CHECK(out.messages[i].index == i);
    }
    for (const auto& bot : out.bots) CHECK(out.statuses.count(bot));
    CHECK(out.bot_groups.size() == 3);
    for (const auto& p : out.pumps) {
      CHECK(p.buy < p.targets.front());
      CHECK(std::is_sorted(p.targets.begin(), p.targets.end()));
      CHECK(p.stop_loss < p.buy);
    }
  }

  TEST_CASE("labeled messages use both classes") {
    const auto coins = coin_symbols(3);
    const auto msgs = labeled_messages(coins, 200, 0.6, 3);
    REQUIRE(msgs.size() == 200);
    std::size_t pump = 0;
    for (const auto& m : msgs) pump += m.label == MessageLabel::pump ? 1 : 0;
    CHECK(pump == 120);
    CHECK(labeled_messages(coins, 200, 0.6, 3) == msgs);
  }

  TEST_CASE("files land in the output directory") {
    const auto dir = std::filesystem::temp_directory_path() / "pumpwatch_synth_test";
    std::filesystem::remove_all(dir);
    write_files(generate(small()), dir);
    for (const char* name : {"market.csv", "messages.jsonl", "labeled.jsonl", "tweets.jsonl", "statuses.csv",
                             "registry.txt", "truth.json"}) {
      CHECK(std::filesystem::exists(dir / name));
    }
    const auto market = load_market(dir / "market.csv");
    CHECK(market.size() == 3);
    std::filesystem::remove_all(dir);
  }
}
