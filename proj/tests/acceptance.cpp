// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "pumpwatch/botwatch.hpp"
#include "pumpwatch/corex.hpp"
#include "pumpwatch/graph.hpp"
#include "pumpwatch/predict.hpp"
#include "pumpwatch/pump_extract.hpp"
#include "pumpwatch/signature.hpp"
#include "pumpwatch/synth.hpp"
#include "pumpwatch/textclf.hpp"

using namespace pumpwatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed condition; the first few failures end up in the detail.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || std::count(detail.begin(), detail.end(), ';') < 3) {
      if (!pass) detail += "; ";
      detail += what;
    }
    pass = false;
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_seconds) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time limit");
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (id < 10 ? " " : "") << id << "  " << name << "  ("
            << fmt(secs, 2) << "s of " << limit_seconds << "s)" << (o.detail.empty() ? "" : "  " + o.detail)
            << std::endl;
}

text::SparseVector sparse(const std::vector<double>& x) {
  text::SparseVector v;
  v.dim = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(i), x[i]});
  }
  return v;
}

// ---------------------------------------------------------------- 1-4

Outcome tfidf_oracle() {
  Outcome o;
  const std::vector<std::vector<std::string>> docs = {
      {"buy", "target"}, {"buy", "target", "moon"}, {"target", "moon", "lambo"}, {"target"}};
  text::TfidfParams p;
  p.ngram_max = 1;
  p.min_df = 0.0;
  p.max_df = 1.0;
  const auto m = text::TfidfModel::fit(docs, p);
  const std::vector<std::string> query = {"buy", "buy", "moon", "lambo", "target", "unknown"};
  // df: buy 2, moon 2, lambo 1, target 4 of N = 4.
  std::map<std::string, double> want = {{"buy", 2 * std::log(3.0)},
                                        {"moon", std::log(3.0)},
                                        {"lambo", std::log(5.0)},
                                        {"target", std::log(2.0)}};
  double norm = 0;
  for (const auto& [t, v] : want) norm += v * v;
  norm = std::sqrt(norm);
  const auto dense = m.transform(query).dense();
  double worst = 0;
  for (const auto& [t, v] : want) {
    const auto idx = m.index_of(t);
    o.require(idx >= 0, "missing term " + t);
    if (idx >= 0) worst = std::max(worst, std::abs(dense[static_cast<std::size_t>(idx)] - v / norm));
  }
  o.require(worst <= 1e-9, "max error " + std::to_string(worst));
  o.detail = o.pass ? "max abs error " + fmt(worst, 12) : o.detail;
  return o;
}

Outcome svm_separable() {
  Outcome o;
  Rng rng(17);
  std::vector<text::SparseVector> rows;
  std::vector<int> y;
  while (rows.size() < 50) {
    const double a = rng.uniform(-1, 1);
    const double b = rng.uniform(-1, 1);
    const double s = a + 0.5 * b - 0.1;
    if (std::abs(s) < 0.15) continue;  // keep a margin
    rows.push_back(sparse({a, b}));
    y.push_back(s > 0 ? 1 : -1);
  }
  text::SvmParams p;
  p.epochs = 20;
  p.l2_lambda = 1e-3;
  p.seed = 5;
  const auto s1 = text::LinearSvm::train(rows, y, p);
  const auto s2 = text::LinearSvm::train(rows, y, p);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) correct += (s1.margin(rows[i]) > 0) == (y[i] > 0) ? 1 : 0;
  const double acc = static_cast<double>(correct) / 50.0;
  o.require(acc == 1.0, "training accuracy " + fmt(acc));
  o.require(s1.weights() == s2.weights() && s1.bias() == s2.bias(), "weights differ between runs");
  if (o.pass) o.detail = "training accuracy 1.0 after 20 epochs, identical weights";
  return o;
}

Outcome classifier_metrics() {
  Outcome o;
  using L = MessageLabel;
  auto confusion = [](int tp, int fp, int fn, int tn) {
    std::pair<std::vector<L>, std::vector<L>> pt;
    auto add = [&](L p, L t, int n) {
      for (int i = 0; i < n; ++i) {
        pt.first.push_back(p);
        pt.second.push_back(t);
      }
    };
    add(L::pump, L::pump, tp);
    add(L::pump, L::not_pump, fp);
    add(L::not_pump, L::pump, fn);
    add(L::not_pump, L::not_pump, tn);
    return pt;
  };
  const auto [p, t] = confusion(9, 1, 1, 9);
  const auto m = text::evaluate(p, t);
  o.require(m.accuracy == 0.9 && m.precision == 0.9 && m.recall == 0.9, "accuracy/precision/recall not 0.9");
  o.require(std::abs(m.f1 - 0.9) <= 1e-15, "f1 " + fmt(m.f1, 17));
  // Base rate = positives / total on three fixtures.
  const std::vector<std::tuple<int, int, int, int, double>> fixtures = {
      {9, 1, 1, 9, 0.5}, {3, 0, 0, 0, 1.0}, {1, 2, 2, 3, 3.0 / 8.0}};
  for (const auto& [tp, fp, fn, tn, want] : fixtures) {
    const auto [pp, tt] = confusion(tp, fp, fn, tn);
    const auto mm = text::evaluate(pp, tt);
    o.require(mm.base_rate == want, "base rate " + fmt(mm.base_rate) + " != " + fmt(want));
  }
  if (o.pass) o.detail = "(0.9, 0.9, 0.9, 0.9); base rates 0.5, 1, 0.375";
  return o;
}

Outcome synthetic_classifier() {
  Outcome o;
  const auto coins = synth::coin_symbols(12);
  const auto all = synth::labeled_messages(coins, 600, 0.6, derive_seed(7, "acceptance-labeled"));
  const std::vector<SocialMessage> train(all.begin(), all.begin() + 400);
  const std::vector<SocialMessage> test(all.begin() + 400, all.end());
  const auto registry = fixtures::registry({coins.begin(), coins.end()});
  const auto clf = text::PumpClassifier::train(train, registry);
  std::vector<MessageLabel> pred, truth;
  for (const auto& m : test) {
    pred.push_back(clf.classify(m.text).label);
    truth.push_back(*m.label);
  }
  const auto metrics = text::evaluate(pred, truth);
  o.require(metrics.accuracy >= 0.95, "accuracy " + fmt(metrics.accuracy));
  o.detail = o.pass ? "test accuracy " + fmt(metrics.accuracy) : o.detail;
  return o;
}

// ---------------------------------------------------------------- 5-7

std::vector<pumps::PumpAttempt> truth_attempts(const synth::SynthOutput& out) {
  return pumps::build_attempts(out.messages, out.registry);
}

Outcome attempt_aggregation() {
  Outcome o;
  const auto reg = fixtures::registry({"ABC", "XYZ", "QRS"});
  std::vector<SocialMessage> msgs;
  std::size_t i = 0;
  for (double h : {0.0, 2.0, 2.5, 6.0}) {
    msgs.push_back(fixtures::message(i++, static_cast<Timestamp>(h * kHour), "$ABC buy 100 sats target 120 sats"));
  }
  const auto a = pumps::build_attempts(msgs, reg);
  o.require(a.size() == 2, "got " + std::to_string(a.size()) + " attempts");
  if (a.size() == 2) o.require(a[0].anchor_time == 0 && a[1].anchor_time == 6 * kHour, "wrong anchors");

  Rng rng(1000);
  const std::vector<std::string> coins = {"ABC", "XYZ", "QRS"};
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<SocialMessage> stream;
    const auto n = rng.between(1, 40);
    std::vector<Timestamp> times;
    for (std::int64_t k = 0; k < n; ++k) times.push_back(rng.between(0, 72 * kHour));
    std::sort(times.begin(), times.end());
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::string text = "$" + coins[rng.below(3)];
      if (rng.bernoulli(0.3)) text += " $" + coins[rng.below(3)];
      stream.push_back(fixtures::message(k, times[k], text));
    }
    for (const auto& at : pumps::build_attempts(stream, reg)) {
      for (auto id : at.message_ids) {
        const Timestamp t = stream[id].timestamp;
        if (t < at.anchor_time || t > at.anchor_time + 3 * kHour) ++violations;
      }
    }
  }
  o.require(violations == 0, std::to_string(violations) + " members outside anchor + 3h");
  if (o.pass) o.detail = "anchors {0, 6h}; invariant held on 1000 fixtures";
  return o;
}

Outcome grid_monotonicity() {
  Outcome o;
  synth::Scenario s;
  s.coins = 5;
  s.pumps_per_coin = 10;
  s.duration_days = 40;
  s.seed = 61;
  const auto out = synth::generate(s);
  const auto attempts = truth_attempts(out);
  o.require(attempts.size() == 50, std::to_string(attempts.size()) + " attempts");
  const std::vector<double> thr = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<int> win = {1, 3, 6, 12, 24, 48, 72};
  const auto grid = pumps::success_ratio_grid(attempts, out.market, thr, win);
  auto ratio = [&](double t, int w) {
    for (const auto& c : grid) {
      if (c.threshold == t && c.window_hours == w) return c.ratio.value_or(-1.0);
    }
    return -1.0;
  };
  for (std::size_t i = 0; i < thr.size(); ++i) {
    for (std::size_t j = 0; j < win.size(); ++j) {
      if (i + 1 < thr.size()) o.require(ratio(thr[i], win[j]) >= ratio(thr[i + 1], win[j]), "not monotone in threshold");
      if (j + 1 < win.size()) o.require(ratio(thr[i], win[j]) <= ratio(thr[i], win[j + 1]), "not monotone in window");
    }
  }
  std::map<std::string, const pumps::PumpAttempt*> by_id;
  for (const auto& a : attempts) by_id[a.id] = &a;
  std::size_t agree = 0;
  for (const auto& p : out.pumps) {
    auto it = by_id.find(p.attempt_id());
    if (it == by_id.end()) continue;
    const auto v = pumps::evaluate_success(*it->second, out.market.at(p.coin), 1.0, 1);
    agree += v.success == p.succeed ? 1 : 0;
  }
  o.require(agree == out.pumps.size(), std::to_string(agree) + "/" + std::to_string(out.pumps.size()) + " flags agree");
  if (o.pass) o.detail = "42 cells monotone; " + std::to_string(agree) + "/" + std::to_string(out.pumps.size()) +
                         " flags agree; ratio(1.0, 1h) " + fmt(ratio(1.0, 1), 2);
  return o;
}

Outcome signature_shape() {
  Outcome o;
  synth::Scenario s;
  s.coins = 2;
  s.pumps_per_coin = 10;
  s.duration_days = 30;
  s.seed = 23;
  const auto out = synth::generate(s);
  const auto attempts = truth_attempts(out);
  o.require(attempts.size() == 20, std::to_string(attempts.size()) + " attempts");
  signature::SignatureConfig cfg;
  cfg.seed = 3;
  const auto report = signature::aggregate_signatures(attempts, out.market, out.tweets, cfg);
  const signature::AggregateCurve* pump = nullptr;
  const signature::AggregateCurve* random = nullptr;
  for (const auto& c : report.curves) {
    if (c.kind != signature::SegmentKind::price) continue;
    (c.baseline == signature::Baseline::pump ? pump : random) = &c;
  }
  o.require(pump && random, "missing price curves");
  if (!pump || !random) return o;
  const auto peak = static_cast<std::size_t>(
      std::max_element(pump->mean_values.begin(), pump->mean_values.end()) - pump->mean_values.begin());
  const auto offset = pump->offsets_minutes[peak];
  o.require(offset >= 0 && offset <= 60, "peak at offset " + std::to_string(offset) + " min");
  const double gap = pump->mean_values[peak] - random->mean_values[peak];
  o.require(gap >= 0.2, "gap over random " + fmt(gap));
  if (o.pass) o.detail = "peak at +" + std::to_string(offset) + " min, " + fmt(gap, 3) + " above random";
  return o;
}

// ---------------------------------------------------------------- 8-12

std::vector<double> dense_pagerank(const graph::WeightedGraph& g, double d) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) w[e.u][e.v] = w[e.v][e.u] = e.weight;
  std::vector<double> out_weight(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) out_weight[j] = std::accumulate(w[j].begin(), w[j].end(), 0.0);
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> next(n, (1 - d) / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = out_weight[j] > 0 ? w[j][i] / out_weight[j] : 1.0 / static_cast<double>(n);
        next[i] += d * p * x[j];
      }
    }
    x = std::move(next);
  }
  return x;
}

Outcome pagerank_checks() {
  Outcome o;
  graph::WeightedGraph cycle;
  cycle.add_weight("a", "b", 1);
  cycle.add_weight("b", "c", 1);
  cycle.add_weight("c", "a", 1);
  for (double s : graph::pagerank_scores(cycle)) o.require(std::abs(s - 1.0 / 3.0) <= 1e-9, "3-cycle not uniform");

  Rng rng(8);
  double worst = 0, worst_sum = 0;
  graph::PageRankParams params;
  params.tolerance = 1e-14;
  params.max_iterations = 2000;
  for (int trial = 0; trial < 50; ++trial) {
    graph::WeightedGraph g;
    for (int i = 0; i < 20; ++i) g.add_node("n" + std::to_string(i));
    const double p = rng.uniform(0.05, 0.4);
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = i + 1; j < 20; ++j) {
        if (rng.bernoulli(p)) g.add_weight(i, j, rng.uniform(0.5, 5.0));
      }
    }
    const auto got = graph::pagerank_scores(g, params);
    const auto want = dense_pagerank(g, params.damping);
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(got.begin(), got.end(), 0.0) - 1.0));
  }
  o.require(worst <= 1e-8, "max deviation " + std::to_string(worst));
  o.require(worst_sum <= 1e-9, "sum off by " + std::to_string(worst_sum));
  if (o.pass) o.detail = "50 random graphs, max deviation " + fmt(worst, 12);
  return o;
}

Outcome corex_checks() {
  Outcome o;
  std::string tc_detail;
  for (double tc : {0.5, 1.0, 2.0}) {
    const double rho = std::sqrt(1 - std::exp(-2 * tc));
    Rng rng(derive_seed(9, static_cast<std::uint64_t>(tc * 10)));
    std::vector<double> x;
    for (int i = 0; i < 10000; ++i) {
      const double a = rng.normal();
      x.push_back(a);
      x.push_back(rho * a + std::sqrt(1 - rho * rho) * rng.normal());
    }
    const std::vector<std::string> names = {"x", "y"};
    const auto model = corex::linear_corex(x, 10000, names, {.k = 1, .max_iterations = 100});
    const double rel = std::abs(model.data_tc - tc) / tc;
    o.require(rel <= 0.02, "TC " + fmt(tc, 1) + " relative error " + fmt(rel));
    tc_detail += (tc_detail.empty() ? "" : "/") + fmt(100 * rel, 2);
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
      o.require(model.objective_trace[i] <= model.objective_trace[i - 1], "objective increased");
    }
  }
  double min_purity = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto blocks = fixtures::planted_blocks(500, 10, 1.0, 300 + seed);
    const auto model = corex::linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 2, .seed = seed});
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
      o.require(model.objective_trace[i] <= model.objective_trace[i - 1], "objective increased");
    }
    min_purity = std::min(min_purity, fixtures::block_purity(bots::cluster_users(model)));
  }
  o.require(min_purity >= 0.9, "purity " + fmt(min_purity));
  if (o.pass) o.detail = "TC rel. error % " + tc_detail + "; min purity " + fmt(min_purity, 2);
  return o;
}

Outcome component_checks() {
  Outcome o;
  Rng rng(200);
  for (int trial = 0; trial < 200; ++trial) {
    graph::WeightedGraph g;
    const auto n = static_cast<std::size_t>(rng.between(1, 60));
    for (std::size_t i = 0; i < n; ++i) g.add_node("u" + std::to_string(i));
    const double p = rng.uniform(0.0, 0.1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.bernoulli(p)) g.add_weight(i, j, static_cast<double>(rng.between(1, 4)));
      }
    }
    const auto sparse = graph::sparsify_top_k(g, static_cast<std::size_t>(rng.between(1, 3)));
    const auto adj = sparse.adjacency();
    std::vector<std::size_t> label(n, SIZE_MAX);
    for (std::size_t s = 0; s < n; ++s) {
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
    o.require(graph::connected_components(sparse) == label, "components differ from DFS");
  }
  graph::WeightedGraph g;
  for (const auto& [prefix, size] : std::vector<std::pair<std::string, int>>{{"a", 25}, {"b", 24}, {"c", 40}}) {
    for (int i = 1; i < size; ++i) g.add_weight(prefix + std::to_string(i - 1), prefix + std::to_string(i), 1);
  }
  const auto asg = graph::assign_components(g, 25);
  o.require(asg.sizes == std::vector<std::size_t>{40, 25}, "min-size filter kept the wrong components");
  o.require(asg.component_of.count("b0") == 0, "24-user component survived");
  if (o.pass) o.detail = "200 fixtures equal DFS; sizes {40, 25} kept, 24 dropped";
  return o;
}

Outcome auc_checks() {
  Outcome o;
  Rng rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(2, 80));
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.between(0, 20));
      y[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    o.require(predict::roc_auc(s, y) == wins / pairs, "disagrees with pairwise counting");
  }
  o.require(predict::roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) == 1.0,
            "perfect separation");
  o.require(predict::roc_auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 0}) == 0.5, "all ties");
  if (o.pass) o.detail = "500 sets exact; perfect 1.0; ties 0.5";
  return o;
}

template <typename F>
predict::Dataset make_dataset(std::size_t n, std::uint64_t seed, F&& values) {
  Rng rng(seed);
  predict::Dataset ds;
  ds.coin = "SYN";
  for (std::size_t i = 0; i < n; ++i) {
    features::FeatureRow r;
    r.coin = "SYN";
    r.timestamp = static_cast<Timestamp>(i) * kHour;
    const bool label = rng.bernoulli(0.5);
    r.label = label;
    r.economic = values(rng, label);
    ds.rows.push_back(std::move(r));
  }
  ds.split = predict::split_index(n);
  return ds;
}

Outcome walk_forward_checks() {
  Outcome o;
  forest::ForestParams fp;
  fp.n_trees = 100;
  auto audit = [&](const predict::Dataset& ds, const predict::WalkForwardResult& wf) {
    std::size_t expected_checks = 0;
    for (std::size_t i = ds.split; i < ds.rows.size(); ++i) expected_checks += i;
    o.require(wf.leakage_checks == expected_checks, "leakage checks skipped");
    o.require(wf.retrains == ds.test_size(), "retrains " + std::to_string(wf.retrains) + " != |Test| " +
                                                 std::to_string(ds.test_size()));
  };
  const auto copy = make_dataset(200, 1, [](Rng& rng, bool l) {
    return std::vector<double>{l ? 1.0 : 0.0, rng.normal(), rng.normal()};
  });
  fp.seed = 1;
  const auto wf = predict::walk_forward(copy, features::Variant::economic, fp);
  audit(copy, wf);
  const double copy_auc = predict::roc_auc(wf.probabilities, wf.labels);
  o.require(copy_auc == 1.0, "label copy AUC " + fmt(copy_auc));

  double lo = 1, hi = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto noise = make_dataset(200, 100 + seed, [](Rng& rng, bool) {
      return std::vector<double>{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    });
    fp.seed = seed;
    const auto r = predict::walk_forward(noise, features::Variant::economic, fp);
    audit(noise, r);
    const double auc = predict::roc_auc(r.probabilities, r.labels);
    lo = std::min(lo, auc);
    hi = std::max(hi, auc);
    total += auc;
  }
  const double mean = total / 10;
  o.require(mean >= 0.4 && mean <= 0.6, "noise mean AUC " + fmt(mean));
  if (o.pass) {
    o.detail = "copy AUC 1.0; noise mean AUC " + fmt(mean, 3) + " over 10 seeds (range " + fmt(lo, 3) + ".." +
               fmt(hi, 3) + "); retrains = |Test|";
  }
  return o;
}

// ---------------------------------------------------------------- 13-16

struct PipelineRun {
  fs::path dir;
  std::map<std::string, double> macro;  // "<task>/<variant>" -> mean AUC over all coins
};

void cli_or_throw(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) throw std::runtime_error("pumpwatch " + args.at(args.size() > 4 ? 4 : 0) + " exited " +
                                          std::to_string(code) + ": " + err.str());
}

PipelineRun pipeline(const std::string& name, std::uint64_t seed, bool momentum, const std::string& tasks) {
  PipelineRun run;
  run.dir = fs::temp_directory_path() / ("pumpwatch_acceptance_" + name);
  fs::remove_all(run.dir);
  const auto data = run.dir / "data";
  const auto reports = run.dir / "reports";
  std::vector<std::string> synth_args = {"--seed", std::to_string(seed), "--out-dir", data.string(), "synth"};
  if (!momentum) synth_args.push_back("--no-momentum");
  cli_or_throw(synth_args);
  cli_or_throw({"--seed", std::to_string(seed), "--out-dir", reports.string(), "report", "--data-dir", data.string(),
                "--tasks", tasks});
  std::ifstream in(reports / "predict_summary.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() >= 5 && f[2] == "all" && !f[4].empty()) run.macro[f[0] + "/" + f[1]] = std::stod(f[4]);
  }
  return run;
}

double macro(const PipelineRun& run, const std::string& key) {
  auto it = run.macro.find(key);
  if (it == run.macro.end()) throw std::runtime_error("no macro AUC for " + key);
  return it->second;
}

Outcome task1_end_to_end() {
  Outcome o;
  const auto run = pipeline("task1", 7, false, "1");
  const double tw = macro(run, "1/twitter");
  const double econ = macro(run, "1/economic");
  o.require(tw >= 0.80, "twitter AUC " + fmt(tw));
  o.require(tw > econ, "twitter " + fmt(tw) + " <= economic " + fmt(econ));
  o.detail = (o.pass ? "" : o.detail + "; ") + "twitter " + fmt(tw, 3) + ", economic " + fmt(econ, 3) + ", both " +
             fmt(macro(run, "1/both"), 3);
  fs::remove_all(run.dir);
  return o;
}

Outcome task2_end_to_end() {
  Outcome o;
  const auto run = pipeline("task2", 7, true, "2");
  const double tw = macro(run, "2/twitter");
  const double econ = macro(run, "2/economic");
  o.require(econ > tw, "economic " + fmt(econ) + " <= twitter " + fmt(tw));
  o.detail = (o.pass ? "" : o.detail + "; ") + "economic " + fmt(econ, 3) + ", twitter " + fmt(tw, 3) + ", both " +
             fmt(macro(run, "2/both"), 3);
  fs::remove_all(run.dir);
  return o;
}

Outcome bot_tables() {
  Outcome o;
  const auto f = fixtures::six_users();
  const auto profiles = bots::build_profiles(f.matrix, f.statuses, f.telegram);
  const std::vector<double> th = {50, 100, 500};
  const auto rows = bots::degree_table(profiles, th);
  struct Want {
    std::size_t users;
    double suspended, telegram, botometer;
  };
  const std::vector<Want> want = {{5, 2.0 / 5, 3.0 / 5, 2.0 / 5}, {4, 0.5, 0.5, 0.5}, {2, 1.0, 0.5, 0.5}};
  for (std::size_t i = 0; i < want.size(); ++i) {
    o.require(rows[i].users == want[i].users && rows[i].suspended_ratio == want[i].suspended &&
                  rows[i].telegram_active_ratio == want[i].telegram && rows[i].botometer_ratio == want[i].botometer,
              "row D=" + fmt(th[i], 0) + " differs");
  }
  const std::vector<double> many = {0, 1, 40, 60, 120, 150, 600, 1000, 1001};
  const auto mono = bots::degree_table(profiles, many);
  for (std::size_t i = 1; i < mono.size(); ++i) o.require(mono[i].users <= mono[i - 1].users, "counts not monotone");
  o.require(!bots::is_bot({"x", AccountState::active, 0.55}), "0.55 labeled bot");
  o.require(bots::is_bot({"x", AccountState::active, 0.5500001}), "0.5500001 not labeled bot");
  if (o.pass) o.detail = "ratios exact at D = 50/100/500; boundary holds";
  return o;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = s.str();
  }
  return files;
}

Outcome determinism() {
  Outcome o;
  const auto a = pipeline("det_a", 11, true, "1,2");
  const auto b = pipeline("det_b", 11, true, "1,2");
  const auto fa = read_tree(a.dir);
  const auto fb = read_tree(b.dir);
  o.require(fa.size() == fb.size(), "different file sets");
  std::size_t same = 0;
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    if (it != fb.end() && it->second == bytes) {
      ++same;
    } else {
      o.require(false, name + " differs");
    }
  }
  o.require(fa.count("reports/predict_summary.csv") == 1, "no prediction summary written");
  if (o.pass) o.detail = std::to_string(same) + " files byte-identical";
  fs::remove_all(a.dir);
  fs::remove_all(b.dir);
  return o;
}

}  // namespace

int main() {
  criterion(1, "TF-IDF oracle", 1, tfidf_oracle);
  criterion(2, "SVM separability and determinism", 1, svm_separable);
  criterion(3, "classifier metrics", 1, classifier_metrics);
  criterion(4, "synthetic classifier quality", 10, synthetic_classifier);
  criterion(5, "attempt aggregation", 5, attempt_aggregation);
  criterion(6, "success-grid monotonicity and ground truth", 10, grid_monotonicity);
  criterion(7, "signature shape", 20, signature_shape);
  criterion(8, "PageRank", 2, pagerank_checks);
  criterion(9, "CorEx", 60, corex_checks);
  criterion(10, "components", 10, component_checks);
  criterion(11, "ROC-AUC", 5, auc_checks);
  criterion(12, "walk-forward soundness", 60, walk_forward_checks);
  criterion(13, "end-to-end task I", 300, task1_end_to_end);
  criterion(14, "end-to-end task II", 300, task2_end_to_end);
  criterion(15, "bot tables", 1, bot_tables);
  criterion(16, "determinism", 600, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
