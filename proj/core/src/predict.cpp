#include "pumpwatch/predict.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "pumpwatch/csv.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/rng.hpp"

namespace pumpwatch::predict {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the rank sum of positives, with tied groups at their average rank,
  // keeps every intermediate an integer.
  std::uint64_t pos = 0;
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t a = 0; a < order.size();) {
    if (std::isnan(scores[order[a]])) throw ValidationError("roc_auc: NaN score");
    std::size_t b = a + 1;
    while (b < order.size() && scores[order[b]] == scores[order[a]]) ++b;
    const std::uint64_t doubled_rank = a + 1 + b;
    for (std::size_t i = a; i < b; ++i) {
      const int y = labels[order[i]];
      if (y != 0 && y != 1) throw ValidationError("roc_auc: labels must be 0 or 1");
      if (y == 1) {
        ++pos;
        doubled_rank_sum += doubled_rank;
      }
    }
    a = b;
  }
  const std::uint64_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ValidationError("roc_auc: both classes are required");
  const std::uint64_t doubled_u = doubled_rank_sum - pos * (pos + 1);
  return static_cast<double>(doubled_u) / static_cast<double>(2 * pos * neg);
}

std::size_t split_index(std::size_t n) { return (3 * n) / 4; }

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.label.value_or(false); }));
}

std::size_t Dataset::train_positives() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(split),
                                                [](const auto& r) { return r.label.value_or(false); }));
}

void TaskConfig::validate() const {
  features.validate();
  if (min_attempts < 1) throw ValidationError("min_attempts must be at least 1");
  if (success_window_hours < 1) throw ValidationError("success window must be at least 1 hour");
  if (!(success_threshold > 0.0 && success_threshold <= 1.0)) throw ValidationError("success threshold must lie in (0, 1]");
}

namespace {

std::map<std::string, std::vector<const pumps::PumpAttempt*>> by_coin(std::span<const pumps::PumpAttempt> attempts) {
  std::map<std::string, std::vector<const pumps::PumpAttempt*>> out;
  for (const auto& a : attempts) out[a.coin].push_back(&a);
  return out;
}

using RowBuilder = std::function<features::FeatureRow(Timestamp)>;

// Draws `count` distinct random timestamps whose rows build, skipping taken
// timestamps and (optionally) pump windows.
std::optional<std::vector<features::FeatureRow>> draw_negatives(const std::string& coin, std::size_t count,
                                                                const features::FeatureSources& sources,
                                                                const TaskConfig& config, std::set<Timestamp> taken,
                                                                const std::vector<Timestamp>& anchors,
                                                                const RowBuilder& build) {
  const auto& hourly = sources.hourly(coin);
  const Timestamp lo = hourly.first_hour() + config.features.w_econ * kHour;
  const Timestamp hi = hourly.last_hour() + kHour - 1;
  if (hi < lo) return std::nullopt;
  const Timestamp guard = std::max(config.features.w_econ, config.features.w_tw) * kHour;

  Rng rng(derive_seed(config.seed, "negatives:" + coin));
  std::vector<features::FeatureRow> out;
  const std::size_t max_draws = 50 * count + 1000;
  for (std::size_t draw = 0; draw < max_draws && out.size() < count; ++draw) {
    const Timestamp t = rng.between(lo, hi);
    if (taken.count(t)) continue;
    if (config.exclude_pump_windows &&
        std::any_of(anchors.begin(), anchors.end(), [&](Timestamp a) { return t >= a - guard && t <= a + guard; })) {
      continue;
    }
    try {
      out.push_back(build(t));
      taken.insert(t);
    } catch (const DataError&) {
    }
  }
  if (out.size() < count) return std::nullopt;
  return out;
}

Dataset finish(const std::string& coin, std::vector<features::FeatureRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  Dataset ds;
  ds.coin = coin;
  ds.rows = std::move(rows);
  ds.split = split_index(ds.rows.size());
  return ds;
}

std::string too_few(std::size_t got, std::size_t total, std::size_t need) {
  return std::to_string(got) + " of " + std::to_string(total) + " attempts have computable features (need " +
         std::to_string(need) + ")";
}

}  // namespace

TaskData build_task1(std::span<const pumps::PumpAttempt> attempts, const features::FeatureSources& sources,
                     const TaskConfig& config) {
  config.validate();
  TaskData data;
  data.task = 1;
  for (const auto& [coin, list] : by_coin(attempts)) {
    if (!sources.has_coin(coin)) {
      data.excluded.push_back({coin, "no market data"});
      continue;
    }
    std::vector<features::FeatureRow> rows;
    std::set<Timestamp> taken;
    std::vector<Timestamp> anchors;
    for (const auto* a : list) {
      anchors.push_back(a->anchor_time);
      if (taken.count(a->anchor_time)) continue;
      try {
        rows.push_back(features::assemble_row(coin, a->anchor_time, true, sources, config.features));
        taken.insert(a->anchor_time);
      } catch (const DataError&) {
      }
    }
    if (rows.size() < config.min_attempts) {
      data.excluded.push_back({coin, too_few(rows.size(), list.size(), config.min_attempts)});
      continue;
    }
    auto negatives = draw_negatives(coin, rows.size(), sources, config, taken, anchors, [&](Timestamp t) {
      return features::assemble_row(coin, t, false, sources, config.features);
    });
    if (!negatives) {
      data.excluded.push_back({coin, "not enough computable random timestamps"});
      continue;
    }
    rows.insert(rows.end(), std::make_move_iterator(negatives->begin()), std::make_move_iterator(negatives->end()));
    data.datasets.emplace(coin, finish(coin, std::move(rows)));
  }
  return data;
}

TaskData build_task2(std::span<const pumps::PumpAttempt> attempts, const features::FeatureSources& sources,
                     const TaskConfig& config) {
  config.validate();
  TaskData data;
  data.task = 2;
  const Market& market = sources.market();
  for (const auto& [coin, list] : by_coin(attempts)) {
    auto series = market.find(coin);
    if (!sources.has_coin(coin) || series == market.end()) {
      data.excluded.push_back({coin, "no market data"});
      continue;
    }
    const auto& hourly = sources.hourly(coin);
    std::vector<features::FeatureRow> rows;
    std::set<Timestamp> taken;
    std::vector<Timestamp> anchors;
    std::vector<double> markups;  // first target over the price one hour before the anchor
    std::vector<pumps::PriceUnit> units;
    for (const auto* a : list) {
      anchors.push_back(a->anchor_time);
      if (taken.count(a->anchor_time)) continue;
      try {
        const auto verdict = pumps::evaluate_success(*a, series->second, config.success_threshold,
                                                     config.success_window_hours, pumps::TargetChoice::first);
        const features::TargetSpec target{a->target_prices.front(), a->unit};
        rows.push_back(features::assemble_row(coin, a->anchor_time, verdict.success, sources, config.features, target));
        taken.insert(a->anchor_time);
        const MarketPoint* p = hourly.at(features::reference_hour(a->anchor_time) - kHour);
        const double base = a->unit == pumps::PriceUnit::btc ? p->price_btc : p->price_usd;
        if (base > 0.0) {
          markups.push_back(target.price / base);
          units.push_back(a->unit);
        }
      } catch (const DataError&) {
      }
    }
    if (rows.size() < config.min_attempts || markups.empty()) {
      data.excluded.push_back({coin, too_few(rows.size(), list.size(), config.min_attempts)});
      continue;
    }
    Rng pick(derive_seed(config.seed, "pseudo-target:" + coin));
    auto negatives = draw_negatives(coin, rows.size(), sources, config, taken, anchors, [&](Timestamp t) {
      const std::size_t k = pick.below(markups.size());
      const MarketPoint* p = hourly.at(features::reference_hour(t) - kHour);
      if (!p) throw pumps::MarketGap("market gap at t-1h");
      const double base = units[k] == pumps::PriceUnit::btc ? p->price_btc : p->price_usd;
      const features::TargetSpec target{base * markups[k], units[k]};
      return features::assemble_row(coin, t, false, sources, config.features, target);
    });
    if (!negatives) {
      data.excluded.push_back({coin, "not enough computable random timestamps"});
      continue;
    }
    rows.insert(rows.end(), std::make_move_iterator(negatives->begin()), std::make_move_iterator(negatives->end()));
    Dataset ds = finish(coin, std::move(rows));
    const std::size_t train_pos = ds.train_positives();
    if (train_pos < config.min_train_positives) {
      data.excluded.push_back({coin, std::to_string(train_pos) + " positives in train (need " +
                                         std::to_string(config.min_train_positives) + ")"});
      continue;
    }
    data.datasets.emplace(coin, std::move(ds));
  }
  return data;
}

TaskData build_task(int task, std::span<const pumps::PumpAttempt> attempts, const features::FeatureSources& sources,
                    const TaskConfig& config) {
  if (task == 1) return build_task1(attempts, sources, config);
  if (task == 2) return build_task2(attempts, sources, config);
  throw ValidationError("task must be 1 or 2");
}

WalkForwardResult walk_forward(const Dataset& dataset, features::Variant variant, const forest::ForestParams& params) {
  const auto& rows = dataset.rows;
  if (dataset.split == 0 || dataset.split >= rows.size()) {
    throw ValidationError("walk_forward: " + dataset.coin + " needs nonempty train and test parts");
  }
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  x.reserve(rows.size());
  y.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.label) throw ValidationError("walk_forward: unlabeled row for " + dataset.coin);
    x.push_back(r.values(variant));
    y.push_back(*r.label ? 1 : 0);
  }

  WalkForwardResult result;
  std::optional<forest::RandomForest> model;
  for (std::size_t i = dataset.split; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (!(rows[j].timestamp < rows[i].timestamp)) {
        throw std::logic_error("temporal leakage: training row at " + std::to_string(rows[j].timestamp) +
                               " is not earlier than test row at " + std::to_string(rows[i].timestamp));
      }
      ++result.leakage_checks;
    }
    const std::span<const std::vector<double>> train_x(x.data(), i);
    const std::span<const int> train_y(y.data(), i);
    const auto pos = static_cast<std::size_t>(std::count(train_y.begin(), train_y.end(), 1));
    double p = 0.0;
    if (pos > 0 && pos < i) {
      forest::ForestParams step = params;
      step.seed = derive_seed(params.seed, static_cast<std::uint64_t>(i));
      model = forest::RandomForest::train(train_x, train_y, step);
      ++result.retrains;
      p = model->predict_proba(x[i]);
    } else if (model) {
      result.warnings.push_back(dataset.coin + ": single-class training set at step " + std::to_string(i) +
                                "; reusing the previous model");
      p = model->predict_proba(x[i]);
    } else {
      result.warnings.push_back(dataset.coin + ": single-class training set at step " + std::to_string(i) +
                                "; scoring with the base rate");
      p = static_cast<double>(pos) / static_cast<double>(i);
    }
    result.probabilities.push_back(p);
    result.labels.push_back(y[i]);
    ++result.steps;
  }
  return result;
}

std::optional<Summary> summarize(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  Summary s;
  s.coins = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<std::string> top_coins_by_dollar_volume(const Market& market, std::size_t count) {
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [coin, series] : market) {
    double total = 0.0;
    for (const auto& p : series.points) total += p.volume;
    ranked.emplace_back(total, coin);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(count, ranked.size()); ++i) out.push_back(ranked[i].second);
  return out;
}

EvalReport evaluate(const TaskData& data, features::Variant variant, const forest::ForestParams& params,
                    const Market& market) {
  EvalReport report;
  report.task = data.task;
  report.variant = variant;
  report.excluded = data.excluded;
  const auto top = top_coins_by_dollar_volume(market, 20);
  const std::set<std::string> top_set(top.begin(), top.end());
  std::vector<double> all;
  std::vector<double> top_values;
  for (const auto& [coin, ds] : data.datasets) {
    forest::ForestParams p = params;
    p.seed = derive_seed(params.seed, "forest:" + coin);
    const auto wf = walk_forward(ds, variant, p);
    report.warnings.insert(report.warnings.end(), wf.warnings.begin(), wf.warnings.end());
    CoinResult r;
    r.coin = coin;
    r.n_train = ds.split;
    r.n_test = ds.test_size();
    const auto pos = std::count(wf.labels.begin(), wf.labels.end(), 1);
    if (pos > 0 && static_cast<std::size_t>(pos) < wf.labels.size()) {
      r.auc = roc_auc(wf.probabilities, wf.labels);
      all.push_back(*r.auc);
      if (top_set.count(coin)) top_values.push_back(*r.auc);
    } else {
      report.warnings.push_back(coin + ": test part has a single class; AUC undefined");
    }
    report.coins.push_back(std::move(r));
  }
  report.all = summarize(all);
  report.top20 = summarize(top_values);
  return report;
}

std::vector<EvalReport> feature_ablation(int task, std::span<const pumps::PumpAttempt> attempts,
                                         const features::FeatureSources& sources, const TaskConfig& config,
                                         const forest::ForestParams& params,
                                         std::span<const features::Variant> variants) {
  const TaskData data = build_task(task, attempts, sources, config);
  std::vector<EvalReport> out;
  for (auto v : variants) out.push_back(evaluate(data, v, params, sources.market()));
  return out;
}

std::vector<SweepRow> window_sweep(int task, std::span<const pumps::PumpAttempt> attempts,
                                   const features::FeatureSources& sources, const TaskConfig& config,
                                   const forest::ForestParams& params, std::span<const features::Variant> variants,
                                   int w_from, int w_to) {
  if (w_from < 1 || w_to < w_from) throw ValidationError("window sweep range must satisfy 1 <= from <= to");
  std::vector<SweepRow> out;
  for (int w = w_from; w <= w_to; ++w) {
    TaskConfig cfg = config;
    cfg.features.w_econ = w;
    cfg.features.w_tw = w;
    try {
      const TaskData data = build_task(task, attempts, sources, cfg);
      for (auto v : variants) {
        SweepRow row{w, v, std::nullopt, {}};
        const auto report = evaluate(data, v, params, sources.market());
        if (report.all) {
          row.macro_auc = report.all->mean;
        } else {
          row.error = "no coin with a two-class test part";
        }
        out.push_back(std::move(row));
      }
    } catch (const std::runtime_error& e) {
      for (auto v : variants) out.push_back({w, v, std::nullopt, e.what()});
    }
  }
  return out;
}

std::optional<SweepRow> best_window(std::span<const SweepRow> rows, features::Variant variant) {
  std::optional<SweepRow> best;
  for (const auto& r : rows) {
    if (r.variant != variant || !r.macro_auc) continue;
    if (!best || *r.macro_auc > *best->macro_auc) best = r;
  }
  return best;
}

std::vector<double> repeated_macro_auc(int task, std::span<const pumps::PumpAttempt> attempts,
                                       const features::FeatureSources& sources, const TaskConfig& config,
                                       const forest::ForestParams& params, features::Variant variant,
                                       std::size_t repeats) {
  std::vector<double> out;
  for (std::size_t r = 0; r < repeats; ++r) {
    TaskConfig cfg = config;
    cfg.seed = derive_seed(config.seed, "repeat:" + std::to_string(r));
    const auto report = evaluate(build_task(task, attempts, sources, cfg), variant, params, sources.market());
    if (report.all) out.push_back(report.all->mean);
  }
  return out;
}

namespace {

std::string optional_double(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

}  // namespace

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "coin,n_train,n_test,auc,variant\n";
  for (const auto& rep : reports) {
    for (const auto& c : rep.coins) {
      out << csv::escape(c.coin) << ',' << c.n_train << ',' << c.n_test << ',' << optional_double(c.auc) << ','
          << features::to_string(rep.variant) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "task,variant,scope,coins,mean_auc,std_auc\n";
  for (const auto& rep : reports) {
    auto row = [&](const char* scope, const std::optional<Summary>& s) {
      out << rep.task << ',' << features::to_string(rep.variant) << ',' << scope << ',';
      if (s) {
        out << s->coins << ',' << csv::format_double(s->mean) << ',' << csv::format_double(s->stddev) << '\n';
      } else {
        out << "0,,\n";
      }
    };
    row("all", rep.all);
    row("top20", rep.top20);
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "w,variant,macro_auc\n";
  for (const auto& r : rows) {
    out << r.w << ',' << features::to_string(r.variant) << ',' << optional_double(r.macro_auc) << '\n';
  }
}

}  // namespace pumpwatch::predict
