#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pumpwatch/graph.hpp"

using namespace pumpwatch;
using namespace pumpwatch::graph;

namespace {

WeightedGraph random_graph(Rng& rng, std::size_t n, double p) {
  WeightedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(100 + i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) g.add_weight(i, j, static_cast<double>(rng.between(1, 5)));
    }
  }
  return g;
}

// Dense Google matrix with dangling columns spread uniformly.
Eigen::MatrixXd google_matrix(const WeightedGraph& g, double d) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    w(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = e.weight;
    w(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = e.weight;
  }
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = w.col(j).sum();
    p.col(j) = s > 0 ? Eigen::VectorXd(w.col(j) / s) : Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  }
  return d * p + Eigen::MatrixXd::Constant(n, n, (1 - d) / static_cast<double>(n));
}

std::vector<std::size_t> dfs_labels(const WeightedGraph& g) {
  const auto adj = g.adjacency();
  std::vector<std::size_t> label(g.node_count(), SIZE_MAX);
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    if (label[s] != SIZE_MAX) continue;
    std::vector<std::size_t> stack = {s};
    label[s] = s;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto& [v, w] : adj[u]) {
        if (label[v] == SIZE_MAX) {
          label[v] = s;
          stack.push_back(v);
        }
      }
    }
  }
  return label;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("weights accumulate on one undirected edge") {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("b", "a", 2.0);
    CHECK(g.edge_count() == 1);
    CHECK(g.weight(0, 1) == 3.0);
    CHECK(g.weight(1, 0) == 3.0);
    CHECK_THROWS(g.add_weight("a", "a", 1.0));
    CHECK_THROWS(g.add_weight("a", "c", 0.0));
  }

  TEST_CASE("co-mention weight sums per-user minima") {
    std::vector<Tweet> tw;
    for (const std::string u : {"u1", "u2"}) {
      tw.push_back(fixtures::tweet(u + "a", u, 10, {"ABC", "XYZ"}));
      tw.push_back(fixtures::tweet(u + "b", u, 20, {"ABC", "XYZ"}));
    }
    tw.push_back(fixtures::tweet("solo", "u3", 30, {"ABC"}));
    tw.push_back(fixtures::tweet("late", "u1", 999, {"QRS", "ABC"}));
    TweetIndex idx(tw);
    const auto g = coin_coin_graph(idx, 0, 100);
    CHECK(g.node_count() == 2);
    CHECK(g.weight(*g.index_of("ABC"), *g.index_of("XYZ")) == 4.0);

    // A user tagging ABC three times and XYZ once adds min(3, 1).
    tw.push_back(fixtures::tweet("x1", "u4", 40, {"ABC"}));
    tw.push_back(fixtures::tweet("x2", "u4", 41, {"ABC"}));
    tw.push_back(fixtures::tweet("x3", "u4", 42, {"ABC"}));
    tw.push_back(fixtures::tweet("x4", "u4", 43, {"XYZ"}));
    TweetIndex idx2(tw);
    CHECK(coin_coin_graph(idx2, 0, 100).weight(0, 1) == 5.0);
  }

  TEST_CASE("pagerank on a 3-cycle is uniform") {
    WeightedGraph g;
    g.add_weight("a", "b", 1);
    g.add_weight("b", "c", 1);
    g.add_weight("c", "a", 1);
    for (double s : pagerank_scores(g)) CHECK(std::abs(s - 1.0 / 3.0) <= 1e-9);
  }

  TEST_CASE("pagerank edge cases") {
    WeightedGraph empty;
    CHECK_THROWS_AS(pagerank_scores(empty), ValidationError);
    WeightedGraph lone;
    lone.add_node("x");
    CHECK(pagerank_scores(lone) == std::vector<double>{1.0});
    WeightedGraph g;
    g.add_weight("a", "b", 1);
    g.add_weight("a", "c", 1);
    PageRankParams p;
    p.max_iterations = 1;
    p.tolerance = 1e-300;
    CHECK_THROWS_AS(pagerank_scores(g, p), PageRankNotConverged);
    const auto m = pagerank(g);
    CHECK(m.at("a") > m.at("b"));
    CHECK(m.at("b") == doctest::Approx(m.at("c")));
  }

  TEST_CASE("property: pagerank matches dense solve and power iteration") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
      const auto g = random_graph(rng, 20, rng.uniform(0.05, 0.4));
      PageRankParams params;
      params.tolerance = 1e-14;
      params.max_iterations = 1000;
      const auto got = pagerank_scores(g, params);
      const auto G = google_matrix(g, params.damping);
      const Eigen::Index n = 20;

      Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
      for (int it = 0; it < 2000; ++it) x = G * x;

      Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - G;
      a.row(0).setOnes();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      rhs(0) = 1.0;
      const Eigen::VectorXd solved = a.fullPivLu().solve(rhs);

      const double sum = std::accumulate(got.begin(), got.end(), 0.0);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(std::abs(got[static_cast<std::size_t>(i)] - x(i)) <= 1e-8);
        CHECK(std::abs(got[static_cast<std::size_t>(i)] - solved(i)) <= 1e-8);
      }
    }
  }

  TEST_CASE("affiliation matrix counts tweets in the pre-anchor window") {
    std::vector<Tweet> tw = {
        fixtures::tweet("1", "bob", 10 * kHour - 6 * kHour, {"ABC"}),  // inclusive start
        fixtures::tweet("2", "bob", 10 * kHour, {"ABC"}),              // inclusive end
        fixtures::tweet("3", "amy", 10 * kHour + 1, {"ABC"}),          // after
        fixtures::tweet("4", "amy", 9 * kHour, {"XYZ"}),               // other coin
        fixtures::tweet("5", "amy", 9 * kHour, {"ABC"}),
    };
    TweetIndex idx(tw);
    std::vector<pumps::PumpAttempt> att = {fixtures::attempt("ABC", 10 * kHour), fixtures::attempt("XYZ", kDay)};
    const auto m = pump_user_matrix(att, idx);
    CHECK(m.col_ids == std::vector<std::string>{"amy", "bob"});
    CHECK(m.at(0, 1) == 2);
    CHECK(m.at(0, 0) == 1);
    CHECK(m.at(1, 0) == 0);
    CHECK(m.column_sums() == std::vector<double>{1, 2});
    CHECK(m.dense() == std::vector<double>{1, 2, 0, 0});

    std::ostringstream out;
    write_matrix_csv(out, m);
    std::istringstream in(out.str());
    const auto back = read_matrix_csv(in);
    CHECK(back.row_ids == m.row_ids);
    CHECK(back.col_ids == m.col_ids);
    CHECK(back.rows == m.rows);
  }

  TEST_CASE("property: affiliation matrix equals brute force") {
    Rng rng(8);
    const std::vector<std::string> coins = {"ABC", "XYZ", "QRS"};
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<Tweet> tw;
      for (int i = 0; i < 200; ++i) {
        std::set<std::string> tags = {coins[rng.below(3)]};
        if (rng.bernoulli(0.3)) tags.insert(coins[rng.below(3)]);
        tw.push_back(fixtures::tweet(std::to_string(i), "u" + std::to_string(rng.below(15)),
                                     rng.between(0, 3 * kDay), tags));
      }
      std::vector<pumps::PumpAttempt> att;
      for (int i = 0; i < 10; ++i) att.push_back(fixtures::attempt(coins[rng.below(3)], rng.between(0, 3 * kDay)));
      TweetIndex idx(tw);
      const auto m = pump_user_matrix(att, idx);
      for (std::size_t r = 0; r < att.size(); ++r) {
        for (std::size_t c = 0; c < m.col_count(); ++c) {
          std::uint32_t want = 0;
          for (const auto& t : tw) {
            if (t.user_id == m.col_ids[c] && t.cashtags.count(att[r].coin) &&
                t.timestamp >= att[r].anchor_time - 6 * kHour && t.timestamp <= att[r].anchor_time)
              ++want;
          }
          CHECK(m.at(r, c) == want);
        }
      }
    }
  }

  TEST_CASE("property: components match depth-first search") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      const auto n = static_cast<std::size_t>(rng.between(1, 40));
      const auto g = random_graph(rng, n, rng.uniform(0.0, 0.15));
      const auto k = static_cast<std::size_t>(rng.between(1, 3));
      const auto sparse = sparsify_top_k(g, k);
      CHECK(connected_components(sparse) == dfs_labels(sparse));
      CHECK(connected_components(g) == dfs_labels(g));
      CHECK(sparse.edge_count() <= g.edge_count());
    }
  }

  TEST_CASE("top-k keeps each node's heaviest edges") {
    WeightedGraph g;
    g.add_weight("a", "b", 5);
    g.add_weight("a", "c", 4);
    g.add_weight("a", "d", 1);
    g.add_weight("c", "d", 1);
    const auto s = sparsify_top_k(g, 1);
    // a keeps b, b keeps a, c keeps a, d ties between a and c and takes the lower id.
    CHECK(s.edge_count() == 3);
    const auto ia = *s.index_of("a");
    CHECK(s.weight(ia, *s.index_of("b")) == 5);
    CHECK(s.weight(ia, *s.index_of("c")) == 4);
    CHECK(s.weight(ia, *s.index_of("d")) == 1);
  }

  TEST_CASE("min-size filter drops small components") {
    WeightedGraph g;
    auto chain = [&](const std::string& prefix, int n) {
      for (int i = 1; i < n; ++i) g.add_weight(prefix + std::to_string(i - 1), prefix + std::to_string(i), 1);
    };
    chain("a", 30);
    chain("b", 25);
    chain("c", 24);
    const auto asg = assign_components(g, 25);
    CHECK(asg.sizes == std::vector<std::size_t>{30, 25});
    CHECK(asg.component_of.size() == 55);
    CHECK(asg.component_of.at("a0") == 0);
    CHECK(asg.component_of.at("b7") == 1);
    CHECK(asg.component_of.count("c0") == 0);
  }

  TEST_CASE("user projection, components and activity features") {
    std::vector<Tweet> tw;
    std::vector<pumps::PumpAttempt> att;
    for (int i = 0; i < 3; ++i) {
      const Timestamp a = (i + 1) * kDay;
      att.push_back(fixtures::attempt("ABC", a));
      for (int u = 0; u < 4; ++u) {
        tw.push_back(fixtures::tweet("g" + std::to_string(i * 10 + u), "grp" + std::to_string(u), a - kHour, {"ABC"}));
      }
    }
    tw.push_back(fixtures::tweet("lone", "loner", kDay - kHour, {"ABC"}));
    TweetIndex idx(tw);
    const auto g = user_user_graph("ABC", att, idx);
    CHECK(g.weight(*g.index_of("grp0"), *g.index_of("grp1")) == 3.0);
    CHECK(g.weight(*g.index_of("grp0"), *g.index_of("loner")) == 1.0);

    ComponentParams p;
    p.min_size = 2;
    const auto asg = user_user_components("ABC", att, idx, p);
    REQUIRE(asg.component_count() == 1);
    CHECK(asg.sizes[0] == 5);
    const auto f = component_activity_features(asg, idx, "ABC", kDay - 2 * kHour, kDay);
    CHECK(f == std::vector<double>{5.0});
    CHECK(component_activity_features(asg, idx, "ABC", 0, kHour) == std::vector<double>{0.0});
  }
}
