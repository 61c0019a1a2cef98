#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pumpwatch/features.hpp"
#include "pumpwatch/forest.hpp"
#include "pumpwatch/pump_extract.hpp"

namespace pumpwatch::predict {

// Mann-Whitney AUC with half credit for ties. Throws ValidationError unless
// both classes are present. labels are 0 or 1.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Training-set size of a chronological 75/25 split: floor(0.75 n), so the
// test part is the smallest one holding at least a quarter of the rows.
std::size_t split_index(std::size_t n);

struct Dataset {
  std::string coin;
  std::vector<features::FeatureRow> rows;  // strictly increasing timestamps
  std::size_t split = 0;                   // rows[0, split) train, rest test

  std::size_t positives() const;
  std::size_t train_positives() const;
  std::size_t test_size() const { return rows.size() - split; }
};

struct ExcludedCoin {
  std::string coin;
  std::string reason;
};

struct TaskData {
  int task = 1;
  std::map<std::string, Dataset> datasets;
  std::vector<ExcludedCoin> excluded;
};

struct TaskConfig {
  features::FeatureConfig features;
  std::size_t min_attempts = 8;         // feature-computable attempts per coin
  std::size_t min_train_positives = 5;  // Task II
  int success_window_hours = 6;         // Task II
  double success_threshold = 1.0;       // Task II
  bool exclude_pump_windows = false;    // keep random negatives out of [a - w, a + w]
  std::uint64_t seed = 0;

  void validate() const;
};

// Positives are attempt anchors; negatives an equal number of random
// timestamps inside the coin's feature-computable extent.
TaskData build_task1(std::span<const pumps::PumpAttempt> attempts, const features::FeatureSources& sources,
                     const TaskConfig& config);

// Positives are attempts that reached their first target within the success
// window; negatives are the Task I random timestamps plus failed attempts.
// Every row carries the target family: random negatives borrow the target
// markup of a random priced attempt of the same coin.
TaskData build_task2(std::span<const pumps::PumpAttempt> attempts, const features::FeatureSources& sources,
                     const TaskConfig& config);

struct WalkForwardResult {
  std::vector<double> probabilities;  // test order
  std::vector<int> labels;
  std::size_t retrains = 0;        // models fitted
  std::size_t steps = 0;           // test rows scored
  std::size_t leakage_checks = 0;  // training rows verified as strictly earlier
  std::vector<std::string> warnings;
};

// Scores each test row with a forest trained on every earlier row, then
// moves the row into the training set. A step whose training set has one
// class reuses the previous model (or the training base rate) and warns.
WalkForwardResult walk_forward(const Dataset& dataset, features::Variant variant, const forest::ForestParams& params);

struct CoinResult {
  std::string coin;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<double> auc;  // absent when the test part has one class
};

struct Summary {
  std::size_t coins = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across coins
};

struct EvalReport {
  int task = 1;
  features::Variant variant = features::Variant::both;
  std::vector<CoinResult> coins;
  std::optional<Summary> all;
  std::optional<Summary> top20;  // 20 coins with the highest dollar volume
  std::vector<ExcludedCoin> excluded;
  std::vector<std::string> warnings;
};

std::optional<Summary> summarize(std::span<const double> values);

// Coins ranked by total volume (quoted in USD), descending, ties by symbol.
std::vector<std::string> top_coins_by_dollar_volume(const Market& market, std::size_t count);

EvalReport evaluate(const TaskData& data, features::Variant variant, const forest::ForestParams& params,
                    const Market& market);

TaskData build_task(int task, std::span<const pumps::PumpAttempt> attempts, const features::FeatureSources& sources,
                    const TaskConfig& config);

std::vector<EvalReport> feature_ablation(int task, std::span<const pumps::PumpAttempt> attempts,
                                         const features::FeatureSources& sources, const TaskConfig& config,
                                         const forest::ForestParams& params,
                                         std::span<const features::Variant> variants);

struct SweepRow {
  int w = 1;
  features::Variant variant = features::Variant::both;
  std::optional<double> macro_auc;
  std::string error;  // set when the pipeline failed for this w
};

// Re-runs the pipeline with w_econ = w_tw = w for every w in [w_from, w_to].
std::vector<SweepRow> window_sweep(int task, std::span<const pumps::PumpAttempt> attempts,
                                   const features::FeatureSources& sources, const TaskConfig& config,
                                   const forest::ForestParams& params, std::span<const features::Variant> variants,
                                   int w_from, int w_to);

std::optional<SweepRow> best_window(std::span<const SweepRow> rows, features::Variant variant);

// Macro AUC under `repeats` negative-sampling seeds derived from config.seed.
std::vector<double> repeated_macro_auc(int task, std::span<const pumps::PumpAttempt> attempts,
                                       const features::FeatureSources& sources, const TaskConfig& config,
                                       const forest::ForestParams& params, features::Variant variant,
                                       std::size_t repeats);

// coin,n_train,n_test,auc,variant; auc is empty for single-class tests.
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
// task,variant,scope,coins,mean_auc,std_auc with scope "all" or "top20".
void write_summary_csv(std::ostream& out, std::span<const EvalReport> reports);
// w,variant,macro_auc
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace pumpwatch::predict
