#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/forest.hpp"
#include "pumpwatch/predict.hpp"

using namespace pumpwatch;
using namespace pumpwatch::predict;
using features::FeatureRow;
using features::Variant;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

// Rows at t = 0, 1h, 2h, ... whose economic family is `values(i, label)`.
template <typename F>
Dataset synthetic_dataset(std::size_t n, std::uint64_t seed, F&& values) {
  Rng rng(seed);
  Dataset ds;
  ds.coin = "ABC";
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow r;
    r.coin = "ABC";
    r.timestamp = static_cast<Timestamp>(i) * kHour;
    const bool label = rng.bernoulli(0.5);
    r.label = label;
    r.economic = values(rng, label);
    ds.rows.push_back(std::move(r));
  }
  ds.split = split_index(n);
  return ds;
}

forest::ForestParams small_forest(std::uint64_t seed = 1) {
  forest::ForestParams p;
  p.n_trees = 30;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_SUITE("predict") {
  TEST_CASE("auc examples") {
    CHECK(roc_auc(std::vector<double>{0.8, 0.4, 0.6, 0.2}, std::vector<int>{1, 1, 0, 0}) == 0.75);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.1, 0.8, 0.9}, std::vector<int>{1, 0, 0}) == 0.0);
    CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0}) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ValidationError);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ValidationError);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{2, 0}), ValidationError);
  }

  TEST_CASE("property: auc equals pairwise counting and flips under negation") {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
      const auto n = static_cast<std::size_t>(rng.between(2, 60));
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng.between(0, 10)) / 10.0;  // coarse grid forces ties
        y[i] = rng.bernoulli(0.4) ? 1 : 0;
      }
      y[0] = 1;
      y[1] = 0;
      const double auc = roc_auc(s, y);
      CHECK(auc == pairwise_auc(s, y));
      std::vector<double> neg(n);
      std::transform(s.begin(), s.end(), neg.begin(), [](double v) { return -v; });
      CHECK(roc_auc(neg, y) == doctest::Approx(1.0 - auc));
    }
  }

  TEST_CASE("split keeps at least a quarter for testing") {
    CHECK(split_index(4) == 3);
    CHECK(split_index(10) == 7);
    CHECK(split_index(20) == 15);
    for (std::size_t n = 4; n < 500; ++n) {
      const auto s = split_index(n);
      CHECK(4 * (n - s) >= n);
      CHECK(4 * (n - s - 1) < n);
    }
  }

  TEST_CASE("forest fits separable data and is deterministic") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      const double a = rng.uniform(-1, 1);
      x.push_back({a, rng.uniform(-1, 1)});
      y.push_back(a > 0.1 ? 1 : 0);
    }
    forest::ForestParams p = small_forest();
    p.min_leaf = 1;
    p.bootstrap = false;
    p.features_per_split = 2;
    const auto f = forest::RandomForest::train(x, y, p);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(f.predict(x[i]) == y[i]);
    const auto g = forest::RandomForest::train(x, y, p);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(f.predict_proba(x[i]) == g.predict_proba(x[i]));
    CHECK(f.trees().size() == 30);
  }

  TEST_CASE("property: forest probabilities are valid and depth is bounded") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::vector<double>> x;
      std::vector<int> y;
      for (int i = 0; i < 60; ++i) {
        x.push_back({rng.normal(), rng.normal(), rng.normal()});
        y.push_back(i % 2);
      }
      forest::ForestParams p = small_forest(static_cast<std::uint64_t>(trial));
      p.max_depth = 3;
      const auto f = forest::RandomForest::train(x, y, p);
      for (const auto& t : f.trees()) CHECK(t.depth() <= 3);
      for (int i = 0; i < 50; ++i) {
        const std::vector<double> q = {rng.normal(), rng.normal(), rng.normal()};
        const double pr = f.predict_proba(q);
        CHECK(pr >= 0.0);
        CHECK(pr <= 1.0);
      }
    }
  }

  TEST_CASE("forest rejects bad input") {
    const std::vector<std::vector<double>> x = {{1.0}, {2.0}};
    CHECK_THROWS_AS(forest::RandomForest::train(x, std::vector<int>{1, 1}), DataError);
    CHECK_THROWS_AS(forest::RandomForest::train(x, std::vector<int>{1}), ValidationError);
    forest::ForestParams p;
    p.n_trees = 0;
    CHECK_THROWS_AS(forest::RandomForest::train(x, std::vector<int>{1, 0}, p), ValidationError);
    const auto f = forest::RandomForest::train(x, std::vector<int>{1, 0}, small_forest());
    CHECK_THROWS_AS(f.predict_proba(std::vector<double>{1.0, 2.0}), ValidationError);
  }

  TEST_CASE("walk-forward: label copy is perfect, retrains equal test size") {
    const auto ds = synthetic_dataset(40, 3, [](Rng& rng, bool label) {
      return std::vector<double>{label ? 1.0 : 0.0, rng.normal()};
    });
    const auto wf = walk_forward(ds, Variant::economic, small_forest());
    CHECK(wf.retrains == ds.test_size());
    CHECK(wf.steps == ds.test_size());
    CHECK(wf.leakage_checks == [&] {
      std::size_t s = 0;
      for (std::size_t i = ds.split; i < ds.rows.size(); ++i) s += i;
      return s;
    }());
    CHECK(roc_auc(wf.probabilities, wf.labels) == 1.0);
  }

  TEST_CASE("walk-forward: noise features hover around chance") {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto ds = synthetic_dataset(200, 50 + seed, [](Rng& rng, bool) {
        return std::vector<double>{rng.normal(), rng.normal(), rng.normal()};
      });
      const auto wf = walk_forward(ds, Variant::economic, small_forest(seed));
      total += roc_auc(wf.probabilities, wf.labels);
    }
    const double mean = total / 5;
    CHECK(mean >= 0.4);
    CHECK(mean <= 0.6);
  }

  TEST_CASE("walk-forward refuses out-of-order rows and single-class steps warn") {
    auto ds = synthetic_dataset(12, 3, [](Rng&, bool l) { return std::vector<double>{l ? 1.0 : 0.0}; });
    std::swap(ds.rows[1], ds.rows[11]);
    CHECK_THROWS_WITH_AS(walk_forward(ds, Variant::economic, small_forest()), doctest::Contains("temporal leakage"),
                         std::logic_error);

    Dataset one;
    one.coin = "ABC";
    for (int i = 0; i < 8; ++i) {
      FeatureRow r;
      r.timestamp = i;
      r.label = i == 7;
      r.economic = {static_cast<double>(i)};
      one.rows.push_back(r);
    }
    one.split = 6;
    const auto wf = walk_forward(one, Variant::economic, small_forest());
    CHECK(wf.retrains == 0);
    CHECK(wf.warnings.size() == 2);
    CHECK(wf.probabilities == std::vector<double>{0.0, 0.0});

    Dataset empty_test = one;
    empty_test.split = 8;
    CHECK_THROWS_AS(walk_forward(empty_test, Variant::economic, small_forest()), ValidationError);
  }

  TEST_CASE("summary and dollar-volume ranking") {
    const auto s = summarize(std::vector<double>{0.5, 0.7, 0.9});
    REQUIRE(s);
    CHECK(s->mean == doctest::Approx(0.7));
    CHECK(s->stddev == doctest::Approx(0.2));
    CHECK_FALSE(summarize(std::vector<double>{}).has_value());

    Market m;
    m.emplace("AAA", fixtures::series("AAA", 0, 600, [](Timestamp) { return 1.0; }));
    m.emplace("BBB", fixtures::series("BBB", 0, 600, [](Timestamp) { return 1.0; }));
    m.at("BBB").points[0].volume = 5000;
    m.emplace("CCC", fixtures::series("CCC", 0, 600, [](Timestamp) { return 1.0; }));
    CHECK(top_coins_by_dollar_volume(m, 2) == std::vector<std::string>{"BBB", "AAA"});
    CHECK(top_coins_by_dollar_volume(m, 10).size() == 3);
  }

  TEST_CASE("task builders: class counts") {
    Market market;
    std::vector<pumps::PumpAttempt> attempts;
    std::vector<Timestamp> anchors;
    for (int i = 0; i < 10; ++i) anchors.push_back(2 * kDay + i * 2 * kDay);
    market.emplace("ABC", fixtures::series("ABC", 0, 24 * kDay, [&](Timestamp t) {
                     for (int i = 0; i < 3; ++i) {
                       if (t == anchors[static_cast<std::size_t>(7 + i)] + 30 * kMinute) return 160.0;
                     }
                     return 100.0;
                   }));
    for (Timestamp a : anchors) attempts.push_back(fixtures::attempt("ABC", a, {150}));
    attempts.push_back(fixtures::attempt("ZZZ", 3 * kDay, {1}));
    const std::vector<Tweet> tweets;
    features::FeatureSources sources(market, tweets);
    TaskConfig cfg;
    cfg.features = {.w_econ = 3, .w_tw = 3};
    cfg.min_train_positives = 1;
    cfg.seed = 5;

    const auto t1 = build_task1(attempts, sources, cfg);
    REQUIRE(t1.datasets.count("ABC"));
    const auto& d1 = t1.datasets.at("ABC");
    CHECK(d1.rows.size() == 20);
    CHECK(d1.positives() == 10);
    CHECK(d1.split == 15);
    REQUIRE(t1.excluded.size() == 1);
    CHECK(t1.excluded[0].coin == "ZZZ");
    for (std::size_t i = 1; i < d1.rows.size(); ++i) CHECK(d1.rows[i - 1].timestamp < d1.rows[i].timestamp);

    const auto t2 = build_task2(attempts, sources, cfg);
    REQUIRE(t2.datasets.count("ABC"));
    const auto& d2 = t2.datasets.at("ABC");
    CHECK(d2.rows.size() == 20);
    CHECK(d2.positives() == 3);
    for (const auto& r : d2.rows) CHECK(r.target.has_value());

    TaskConfig strict = cfg;
    strict.min_attempts = 11;
    CHECK(build_task1(attempts, sources, strict).datasets.empty());
    strict = cfg;
    strict.min_train_positives = 4;
    CHECK(build_task2(attempts, sources, strict).datasets.empty());
    CHECK_THROWS_AS(build_task(3, attempts, sources, cfg), ValidationError);
  }

  TEST_CASE("window sweep finds a signal three hours out") {
    Market market;
    std::vector<pumps::PumpAttempt> attempts;
    std::vector<Tweet> tweets;
    const Timestamp spacing = 20 * kHour;
    for (int i = 0; i < 30; ++i) {
      const Timestamp a = kDay + i * spacing;
      attempts.push_back(fixtures::attempt("ABC", a));
      for (int k = 0; k < 5; ++k) {
        tweets.push_back(fixtures::tweet("t" + std::to_string(i * 10 + k), "u" + std::to_string(k),
                                         a - 3 * kHour + k * 60, {"ABC"}));
      }
    }
    market.emplace("ABC", fixtures::flat("ABC", 0, kDay + 31 * spacing, 100.0));
    features::FeatureSources sources(market, tweets);
    TaskConfig cfg;
    cfg.exclude_pump_windows = true;
    cfg.seed = 1;
    const std::vector<Variant> variants = {Variant::twitter};
    const auto rows = window_sweep(1, attempts, sources, cfg, small_forest(), variants, 1, 3);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].macro_auc);
    REQUIRE(rows[2].macro_auc);
    CHECK(*rows[2].macro_auc > *rows[0].macro_auc);
    CHECK(*rows[2].macro_auc >= 0.9);
    CHECK(best_window(rows, Variant::twitter)->w >= 3);
    CHECK_FALSE(best_window(rows, Variant::economic).has_value());

    std::ostringstream out;
    write_sweep_csv(out, rows);
    CHECK(out.str().rfind("w,variant,macro_auc\n1,twitter,", 0) == 0);
    CHECK_THROWS_AS(window_sweep(1, attempts, sources, cfg, small_forest(), variants, 0, 2), ValidationError);
  }
}
