#include "pumpwatch/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "pumpwatch/csv.hpp"

namespace pumpwatch::graph {

std::size_t WeightedGraph::add_node(std::string_view id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  const std::size_t idx = nodes_.size();
  nodes_.emplace_back(id);
  index_.emplace(std::string(id), idx);
  return idx;
}

void WeightedGraph::add_weight(std::string_view u, std::string_view v, double weight) {
  const std::size_t a = add_node(u);
  const std::size_t b = add_node(v);
  add_weight(a, b, weight);
}

void WeightedGraph::add_weight(std::size_t u, std::size_t v, double weight) {
  if (u == v) throw ValidationError("self-loop on node " + nodes_.at(u));
  if (!(weight > 0.0)) throw ValidationError("edge weights must be positive");
  if (u >= nodes_.size() || v >= nodes_.size()) throw ValidationError("edge references unknown node");
  edges_[{std::min(u, v), std::max(u, v)}] += weight;
}

std::optional<std::size_t> WeightedGraph::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double WeightedGraph::weight(std::size_t u, std::size_t v) const {
  auto it = edges_.find({std::min(u, v), std::max(u, v)});
  return it == edges_.end() ? 0.0 : it->second;
}

std::vector<WeightedGraph::Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [key, w] : edges_) out.push_back({key.first, key.second, w});
  return out;
}

std::vector<std::vector<std::pair<std::size_t, double>>> WeightedGraph::adjacency() const {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(nodes_.size());
  for (const auto& [key, w] : edges_) {
    adj[key.first].emplace_back(key.second, w);
    adj[key.second].emplace_back(key.first, w);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

WeightedGraph coin_coin_graph(const TweetIndex& tweets, Timestamp from, Timestamp to) {
  // user -> coin -> tweet count
  std::map<std::string, std::map<std::string, std::size_t>> per_user;
  std::set<std::string> coins;
  for (const Tweet* t : tweets.between(from, to)) {
    for (const auto& c : t->cashtags) {
      ++per_user[t->user_id][c];
      coins.insert(c);
    }
  }
  WeightedGraph g;
  for (const auto& c : coins) g.add_node(c);
  for (const auto& [user, counts] : per_user) {
    for (auto a = counts.begin(); a != counts.end(); ++a) {
      for (auto b = std::next(a); b != counts.end(); ++b) {
        g.add_weight(a->first, b->first, static_cast<double>(std::min(a->second, b->second)));
      }
    }
  }
  return g;
}

PageRankNotConverged::PageRankNotConverged(double residual, int iterations)
    : DataError("pagerank did not converge after " + std::to_string(iterations) +
                " iterations (residual " + csv::format_double(residual) + ")"),
      residual_(residual) {}

std::vector<double> pagerank_scores(const WeightedGraph& graph, const PageRankParams& params) {
  const std::size_t n = graph.node_count();
  if (n == 0) throw ValidationError("pagerank: empty graph");
  if (!(params.damping >= 0.0 && params.damping < 1.0)) throw ValidationError("pagerank: damping must lie in [0, 1)");

  const auto adj = graph.adjacency();
  std::vector<double> out_weight(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : adj[i]) out_weight[i] += w;
  }

  const double nn = static_cast<double>(n);
  std::vector<double> p(n, 1.0 / nn);
  std::vector<double> next(n);
  double residual = 0.0;
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out_weight[i] == 0.0) dangling += p[i];
    }
    const double base = (1.0 - params.damping) / nn + params.damping * dangling / nn;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t j = 0; j < n; ++j) {
      if (out_weight[j] == 0.0) continue;
      const double share = params.damping * p[j] / out_weight[j];
      for (const auto& [i, w] : adj[j]) next[i] += share * w;
    }
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(next[i] - p[i]);
    p.swap(next);
    if (residual < params.tolerance) {
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (auto& x : p) x /= total;
      return p;
    }
  }
  throw PageRankNotConverged(residual, params.max_iterations);
}

std::map<std::string, double> pagerank(const WeightedGraph& graph, const PageRankParams& params) {
  const auto scores = pagerank_scores(graph, params);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[graph.nodes()[i]] = scores[i];
  return out;
}

// ---------------------------------------------------------------------------
// Affiliation matrix

std::uint32_t AffiliationMatrix::at(std::size_t r, std::size_t c) const {
  const auto& row = rows.at(r);
  auto it = std::lower_bound(row.begin(), row.end(), std::pair<std::uint32_t, std::uint32_t>(static_cast<std::uint32_t>(c), 0));
  return (it != row.end() && it->first == c) ? it->second : 0;
}

std::vector<double> AffiliationMatrix::column_sums() const {
  std::vector<double> sums(col_ids.size(), 0.0);
  for (const auto& row : rows) {
    for (const auto& [c, v] : row) sums[c] += v;
  }
  return sums;
}

std::vector<double> AffiliationMatrix::dense() const {
  std::vector<double> out(row_count() * col_count(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, v] : rows[r]) out[r * col_count() + c] = v;
  }
  return out;
}

AffiliationMatrix pump_user_matrix(std::span<const pumps::PumpAttempt> attempts, const TweetIndex& tweets,
                                   Timestamp window) {
  std::vector<std::map<std::string, std::uint32_t>> counts(attempts.size());
  std::set<std::string> users;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& a = attempts[i];
    for (const Tweet* t : tweets.mentions(a.coin, a.anchor_time - window, a.anchor_time)) {
      ++counts[i][t->user_id];
      users.insert(t->user_id);
    }
  }
  AffiliationMatrix m;
  m.col_ids.assign(users.begin(), users.end());
  std::map<std::string, std::uint32_t> col;
  for (std::size_t j = 0; j < m.col_ids.size(); ++j) col[m.col_ids[j]] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    m.row_ids.push_back(attempts[i].id);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> row;
    for (const auto& [user, n] : counts[i]) row.emplace_back(col[user], n);
    std::sort(row.begin(), row.end());
    m.rows.push_back(std::move(row));
  }
  return m;
}

void write_matrix_csv(std::ostream& out, const AffiliationMatrix& matrix) {
  out << "attempt_id,user_id,count\n";
  for (std::size_t r = 0; r < matrix.row_count(); ++r) {
    if (matrix.rows[r].empty()) {
      out << csv::escape(matrix.row_ids[r]) << ",,0\n";
      continue;
    }
    for (const auto& [c, v] : matrix.rows[r]) {
      out << csv::escape(matrix.row_ids[r]) << ',' << csv::escape(matrix.col_ids[c]) << ',' << v << '\n';
    }
  }
}

AffiliationMatrix read_matrix_csv(std::istream& in, std::string_view source) {
  auto fail = [&](std::size_t line, const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> row_order;
  std::map<std::string, std::map<std::string, std::uint32_t>> entries;
  std::set<std::string> users;
  if (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line) != "attempt_id,user_id,count") fail(1, "expected header 'attempt_id,user_id,count'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto f = csv::split(line);
    if (f.size() != 3) fail(line_no, "expected 3 fields");
    auto count = csv::parse_int(f[2]);
    if (!count || *count < 0) fail(line_no, "count must be a nonnegative integer");
    if (!entries.count(f[0])) {
      row_order.push_back(f[0]);
      entries[f[0]];
    }
    if (f[1].empty()) continue;
    if (*count == 0) continue;
    auto& slot = entries[f[0]][f[1]];
    if (slot != 0) fail(line_no, "duplicate entry for " + f[0] + "/" + f[1]);
    slot = static_cast<std::uint32_t>(*count);
    users.insert(f[1]);
  }
  AffiliationMatrix m;
  m.col_ids.assign(users.begin(), users.end());
  std::map<std::string, std::uint32_t> col;
  for (std::size_t j = 0; j < m.col_ids.size(); ++j) col[m.col_ids[j]] = static_cast<std::uint32_t>(j);
  for (const auto& id : row_order) {
    m.row_ids.push_back(id);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> row;
    for (const auto& [user, n] : entries[id]) row.emplace_back(col[user], n);
    std::sort(row.begin(), row.end());
    m.rows.push_back(std::move(row));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Components

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  return true;
}

WeightedGraph sparsify_top_k(const WeightedGraph& graph, std::size_t top_k) {
  WeightedGraph out;
  for (const auto& id : graph.nodes()) out.add_node(id);
  const auto adj = graph.adjacency();
  const auto& names = graph.nodes();
  std::set<std::pair<std::size_t, std::size_t>> kept;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    auto list = adj[u];
    std::sort(list.begin(), list.end(), [&](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return names[a.first] < names[b.first];
    });
    for (std::size_t i = 0; i < std::min(top_k, list.size()); ++i) {
      kept.insert({std::min(u, list[i].first), std::max(u, list[i].first)});
    }
  }
  for (const auto& [u, v] : kept) out.add_weight(u, v, graph.weight(u, v));
  return out;
}

std::vector<std::size_t> connected_components(const WeightedGraph& graph) {
  DisjointSets sets(graph.node_count());
  for (const auto& e : graph.edges()) sets.unite(e.u, e.v);
  std::vector<std::size_t> root_min(graph.node_count(), graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    auto& m = root_min[sets.find(i)];
    m = std::min(m, i);
  }
  std::vector<std::size_t> label(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) label[i] = root_min[sets.find(i)];
  return label;
}

WeightedGraph user_user_graph(std::string_view coin, std::span<const pumps::PumpAttempt> attempts,
                              const TweetIndex& tweets, Timestamp window) {
  WeightedGraph g;
  for (const auto& a : attempts) {
    if (a.coin != coin) continue;
    std::set<std::string> users;
    for (const Tweet* t : tweets.mentions(coin, a.anchor_time - window, a.anchor_time)) users.insert(t->user_id);
    std::vector<std::size_t> idx;
    for (const auto& u : users) idx.push_back(g.add_node(u));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = i + 1; j < idx.size(); ++j) g.add_weight(idx[i], idx[j], 1.0);
    }
  }
  return g;
}

ComponentAssignment assign_components(const WeightedGraph& sparsified, std::size_t min_size) {
  const auto labels = connected_components(sparsified);
  const auto& names = sparsified.nodes();
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  struct Group {
    std::vector<std::size_t> nodes;
    std::string min_id;
  };
  std::vector<Group> groups;
  for (auto& [label, nodes] : members) {
    if (nodes.size() < min_size) continue;
    Group g;
    g.nodes = std::move(nodes);
    g.min_id = names[g.nodes.front()];
    for (auto n : g.nodes) g.min_id = std::min(g.min_id, names[n]);
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
    return a.min_id < b.min_id;
  });
  ComponentAssignment out;
  for (std::size_t id = 0; id < groups.size(); ++id) {
    out.sizes.push_back(groups[id].nodes.size());
    for (auto n : groups[id].nodes) out.component_of[names[n]] = id;
  }
  return out;
}

ComponentAssignment user_user_components(std::string_view coin, std::span<const pumps::PumpAttempt> attempts,
                                         const TweetIndex& tweets, const ComponentParams& params) {
  const auto projected = user_user_graph(coin, attempts, tweets, params.window);
  return assign_components(sparsify_top_k(projected, params.top_k), params.min_size);
}

std::vector<double> component_activity_features(const ComponentAssignment& assignment, const TweetIndex& tweets,
                                                 std::string_view coin, Timestamp from, Timestamp to) {
  std::vector<std::set<std::string_view>> active(assignment.component_count());
  for (const Tweet* t : tweets.mentions(coin, from, to)) {
    auto it = assignment.component_of.find(t->user_id);
    if (it != assignment.component_of.end()) active[it->second].insert(t->user_id);
  }
  std::vector<double> out;
  out.reserve(active.size());
  for (const auto& s : active) out.push_back(static_cast<double>(s.size()));
  return out;
}

}  // namespace pumpwatch::graph
