#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pumpwatch::forest {

struct ForestParams {
  std::size_t n_trees = 200;
  std::optional<std::size_t> max_depth;           // unbounded when empty
  std::size_t min_leaf = 2;
  std::optional<std::size_t> features_per_split;  // ceil(sqrt(F)) when empty
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Binary classification tree. Samples with x[feature] <= threshold go left.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double positive = 0.0;  // leaf probability of class 1
  };

  DecisionTree() = default;
  // nodes[0] is the root; children follow their parent.
  explicit DecisionTree(std::vector<Node> nodes);

  double predict_proba(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  // rows: samples with equal length; labels: 0 or 1. Both classes required.
  static RandomForest train(std::span<const std::vector<double>> rows, std::span<const int> labels,
                            const ForestParams& params = {});

  // Mean leaf probability of class 1 across trees.
  double predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t feature_count() const { return feature_count_; }
  const ForestParams& params() const { return params_; }

 private:
  std::vector<DecisionTree> trees_;
  std::size_t feature_count_ = 0;
  ForestParams params_;
};

}  // namespace pumpwatch::forest
