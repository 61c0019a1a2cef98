#include "pumpwatch/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pumpwatch/error.hpp"
#include "pumpwatch/rng.hpp"

namespace pumpwatch::forest {

void ForestParams::validate() const {
  if (n_trees < 1) throw ValidationError("forest needs at least one tree");
  if (min_leaf < 1) throw ValidationError("min_leaf must be at least 1");
  if (max_depth && *max_depth < 1) throw ValidationError("max_depth must be at least 1");
  if (features_per_split && *features_per_split < 1) throw ValidationError("features_per_split must be at least 1");
}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ValidationError("decision tree needs a root");
}

double DecisionTree::predict_proba(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].positive;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.feature < 0) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini, lower is better
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const std::vector<double>> rows, std::span<const int> labels, const ForestParams& params,
              std::size_t mtry, Rng& rng)
      : rows_(rows), labels_(labels), params_(params), mtry_(mtry), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> samples) {
    std::vector<DecisionTree::Node> nodes;
    grow(nodes, samples, 0);
    return DecisionTree(std::move(nodes));
  }

 private:
  std::int32_t grow(std::vector<DecisionTree::Node>& tree, std::vector<std::size_t>& samples, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree.size());
    tree.emplace_back();
    std::size_t pos = 0;
    for (auto s : samples) pos += static_cast<std::size_t>(labels_[s]);
    const double p = static_cast<double>(pos) / static_cast<double>(samples.size());

    const bool pure = pos == 0 || pos == samples.size();
    const bool too_small = samples.size() < 2 * params_.min_leaf;
    const bool too_deep = params_.max_depth && depth >= *params_.max_depth;
    std::optional<Split> split;
    if (!pure && !too_small && !too_deep) split = best_split(samples);
    if (!split) {
      tree[static_cast<std::size_t>(id)].positive = p;
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto s : samples) {
      (rows_[s][static_cast<std::size_t>(split->feature)] <= split->threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const auto l = grow(tree, left, depth + 1);
    const auto r = grow(tree, right, depth + 1);
    auto& node = tree[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    node.positive = p;
    return id;
  }

  // Examines mtry random features; keeps drawing while none splits.
  std::optional<Split> best_split(const std::vector<std::size_t>& samples) {
    const std::size_t f = rows_[0].size();
    std::vector<std::size_t> order(f);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::optional<Split> best;
    std::vector<std::pair<double, int>> column(samples.size());
    std::size_t total_pos = 0;
    for (auto s : samples) total_pos += static_cast<std::size_t>(labels_[s]);
    const double n = static_cast<double>(samples.size());

    for (std::size_t tried = 0; tried < f; ++tried) {
      if (tried >= mtry_ && best) break;
      const std::size_t j = tried + rng_.below(f - tried);
      std::swap(order[tried], order[j]);
      const std::size_t feat = order[tried];

      for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {rows_[samples[i]][feat], labels_[samples[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += static_cast<std::size_t>(column[i].second);
        const std::size_t nl = i + 1;
        const std::size_t nr = column.size() - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        if (!(column[i].first < column[i + 1].first)) continue;
        const double lp = static_cast<double>(left_pos);
        const double rp = static_cast<double>(total_pos - left_pos);
        const double dl = static_cast<double>(nl);
        const double dr = static_cast<double>(nr);
        const double impurity = (2.0 * lp * (dl - lp) / dl + 2.0 * rp * (dr - rp) / dr) / n;
        if (!best || impurity < best->impurity) {
          double t = 0.5 * (column[i].first + column[i + 1].first);
          // Keep the threshold strictly below the right value.
          if (!(t < column[i + 1].first)) t = column[i].first;
          best = Split{static_cast<int>(feat), t, impurity};
        }
      }
    }
    return best;
  }

  std::span<const std::vector<double>> rows_;
  std::span<const int> labels_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng& rng_;
};

}  // namespace

RandomForest RandomForest::train(std::span<const std::vector<double>> rows, std::span<const int> labels,
                                 const ForestParams& params) {
  params.validate();
  if (rows.empty() || rows.size() != labels.size()) throw ValidationError("forest: rows and labels must match");
  const std::size_t f = rows.front().size();
  if (f == 0) throw ValidationError("forest: rows have no features");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != f) throw ValidationError("forest: rows differ in length");
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("forest: labels must be 0 or 1");
    pos += static_cast<std::size_t>(labels[i]);
  }
  if (pos == 0 || pos == rows.size()) throw DataError("forest: training data has a single class");

  RandomForest forest;
  forest.params_ = params;
  forest.feature_count_ = f;
  const std::size_t mtry = std::min(
      f, params.features_per_split.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(f))))));
  forest.trees_.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> samples(rows.size());
    if (params.bootstrap) {
      for (auto& s : samples) s = rng.below(rows.size());
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    TreeBuilder builder(rows, labels, params, mtry, rng);
    forest.trees_.push_back(builder.build(std::move(samples)));
  }
  return forest;
}

double RandomForest::predict_proba(std::span<const double> x) const {
  if (x.size() != feature_count_) {
    throw ValidationError("forest: expected " + std::to_string(feature_count_) + " features, got " +
                          std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict_proba(x);
  return sum / static_cast<double>(trees_.size());
}

}  // namespace pumpwatch::forest
