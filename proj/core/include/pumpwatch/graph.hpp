#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pumpwatch/corpus.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/pump_extract.hpp"

namespace pumpwatch::graph {

// Undirected weighted graph over string ids. No self-loops, positive
// weights, at most one edge per unordered pair.
class WeightedGraph {
 public:
  struct Edge {
    std::size_t u = 0;  // u < v
    std::size_t v = 0;
    double weight = 0.0;
  };

  std::size_t add_node(std::string_view id);
  // Adds `weight` to the (u, v) edge, creating nodes and the edge as needed.
  void add_weight(std::string_view u, std::string_view v, double weight);
  void add_weight(std::size_t u, std::size_t v, double weight);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::optional<std::size_t> index_of(std::string_view id) const;
  double weight(std::size_t u, std::size_t v) const;

  // Edges sorted by (u, v).
  std::vector<Edge> edges() const;
  // Neighbor lists sorted by neighbor index.
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency() const;

 private:
  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::pair<std::size_t, std::size_t>, double> edges_;
};

// Coin co-mention graph over tweets in [from, to]. Nodes are every coin
// tagged in the window; edge (c1, c2) weighs sum over users of
// min(#tweets of the user tagging c1, #tweets tagging c2), counted only for
// users tagging both.
WeightedGraph coin_coin_graph(const TweetIndex& tweets, Timestamp from, Timestamp to);

struct PageRankParams {
  double damping = 0.85;
  double tolerance = 1e-10;  // L1 change between iterations
  int max_iterations = 200;
};

class PageRankNotConverged : public DataError {
 public:
  PageRankNotConverged(double residual, int iterations);
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Power iteration on the weight-normalized transition matrix with uniform
// teleport. Nodes without edges only receive teleport mass; their own mass is
// spread uniformly. Scores sum to 1.
std::vector<double> pagerank_scores(const WeightedGraph& graph, const PageRankParams& params = {});
std::map<std::string, double> pagerank(const WeightedGraph& graph, const PageRankParams& params = {});

// Pump-attempt x user count matrix: entry (i, j) counts tweets by user j
// tagging coin c_i with timestamp in [t_i - window, t_i].
struct AffiliationMatrix {
  std::vector<std::string> row_ids;  // attempt ids, input order
  std::vector<std::string> col_ids;  // user ids, sorted
  // Sparse rows: (column, count), sorted by column.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> rows;

  std::size_t row_count() const { return row_ids.size(); }
  std::size_t col_count() const { return col_ids.size(); }
  std::uint32_t at(std::size_t r, std::size_t c) const;
  // Per-user degree: sum of the user's edge weights.
  std::vector<double> column_sums() const;
  // Row-major dense copy.
  std::vector<double> dense() const;
};

AffiliationMatrix pump_user_matrix(std::span<const pumps::PumpAttempt> attempts, const TweetIndex& tweets,
                                   Timestamp window = 6 * kHour);

// CSV: attempt_id,user_id,count. Attempts without any entry appear once with
// an empty user and count 0 so their row survives a round trip.
void write_matrix_csv(std::ostream& out, const AffiliationMatrix& matrix);
AffiliationMatrix read_matrix_csv(std::istream& in, std::string_view source = "matrix");

// Union-find over dense indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
};

// Keeps, for every node, its `top_k` heaviest incident edges (ties broken by
// neighbor id); the result is the union over all nodes.
WeightedGraph sparsify_top_k(const WeightedGraph& graph, std::size_t top_k);

// Component label per node; labels are the smallest node index in the
// component.
std::vector<std::size_t> connected_components(const WeightedGraph& graph);

// User-user projection for one coin: users tweeting the coin in [t_i -
// window, t_i] of an attempt are linked with weight = number of attempts
// they share.
WeightedGraph user_user_graph(std::string_view coin, std::span<const pumps::PumpAttempt> attempts,
                              const TweetIndex& tweets, Timestamp window = 6 * kHour);

struct ComponentParams {
  std::size_t top_k = 2;
  std::size_t min_size = 25;
  Timestamp window = 6 * kHour;
};

struct ComponentAssignment {
  std::map<std::string, std::size_t, std::less<>> component_of;  // user -> component id
  std::vector<std::size_t> sizes;                                 // by id, non-increasing

  std::size_t component_count() const { return sizes.size(); }
};

// Components of the sparsified user-user graph with fewer than min_size users
// dropped. Ids follow decreasing size, ties by smallest user id.
ComponentAssignment user_user_components(std::string_view coin, std::span<const pumps::PumpAttempt> attempts,
                                         const TweetIndex& tweets, const ComponentParams& params = {});

ComponentAssignment assign_components(const WeightedGraph& sparsified, std::size_t min_size);

// Per component: distinct assigned users tweeting `coin` in [from, to].
std::vector<double> component_activity_features(const ComponentAssignment& assignment, const TweetIndex& tweets,
                                                 std::string_view coin, Timestamp from, Timestamp to);

}  // namespace pumpwatch::graph
