#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "venuestab/corpus.hpp"
#include "venuestab/errors.hpp"

namespace venuestab {

// Undirected co-authorship graph. Each unordered author pair is stored once
// with weight = number of papers they co-authored; solo authors appear as
// isolated nodes. No self-loops.
class WeightedGraph {
 public:
  void add_node(const std::string& a) { adj_.try_emplace(a); }

  void add_coauthorship(const std::string& a, const std::string& b, long long count = 1) {
    if (a == b) return;
    long long& w_ab = adj_[a][b];
    long long& w_ba = adj_[b][a];
    w_ab += count;
    w_ba += count;
    if (w_ab == count) ++edge_count_;
  }

  bool has_node(const std::string& a) const { return adj_.count(a) > 0; }
  std::size_t node_count() const { return adj_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  long long edge_weight(const std::string& a, const std::string& b) const {
    auto it = adj_.find(a);
    if (it == adj_.end()) return 0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 0 : jt->second;
  }

  const std::unordered_map<std::string, long long>* neighbors(const std::string& a) const {
    auto it = adj_.find(a);
    return it == adj_.end() ? nullptr : &it->second;
  }

  std::vector<std::string> nodes_sorted() const {
    std::vector<std::string> out;
    out.reserve(adj_.size());
    for (const auto& [node, nbrs] : adj_) out.push_back(node);
    std::sort(out.begin(), out.end());
    return out;
  }

  // `author_a<TAB>author_b<TAB>weight`, a < b, sorted lexicographically.
  std::string edge_list_text() const {
    std::vector<std::pair<std::pair<std::string, std::string>, long long>> edges;
    for (const auto& [a, nbrs] : adj_)
      for (const auto& [b, w] : nbrs)
        if (a < b) edges.push_back({{a, b}, w});
    std::sort(edges.begin(), edges.end());
    std::ostringstream out;
    for (const auto& [pair, w] : edges) out << pair.first << '\t' << pair.second << '\t' << w << '\n';
    return out.str();
  }

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, long long>> adj_;
  std::size_t edge_count_ = 0;
};

// Feeds papers into a growing co-authorship graph one year at a time, so a
// sweep over ascending years reuses one accumulated graph instead of
// rebuilding the full prefix per year.
class GraphAccumulator {
 public:
  explicit GraphAccumulator(const Corpus& corpus) : corpus_(&corpus) {}

  // Adds all papers published in `year`.
  void add_year(int year) {
    for (std::size_t i = 0; i < corpus_->papers().size(); ++i) {
      const PaperRecord& p = corpus_->paper(i);
      if (p.year != year) continue;
      for (const std::string& a : p.author_ids) graph_.add_node(a);
      for (std::size_t x = 0; x < p.author_ids.size(); ++x)
        for (std::size_t y = x + 1; y < p.author_ids.size(); ++y)
          graph_.add_coauthorship(p.author_ids[x], p.author_ids[y]);
    }
  }

  const WeightedGraph& graph() const { return graph_; }

 private:
  const Corpus* corpus_;
  WeightedGraph graph_;
};

// Co-authorship graph over all papers published before `year` (and at or
// after the corpus min year).
inline WeightedGraph build_global_graph(const Corpus& corpus, int year) {
  GraphAccumulator acc(corpus);
  for (int y = corpus.min_year(); y < year; ++y) acc.add_year(y);
  return acc.graph();
}

// Restriction of a parent graph to a node subset: the subset's nodes (authors
// absent from the parent become isolated) plus every parent edge with both
// endpoints in the subset. Nodes are indexed in sorted order.
class InducedSubgraph {
 public:
  InducedSubgraph(const WeightedGraph& parent, const std::set<std::string>& authors)
      : parent_(&parent), nodes_(authors.begin(), authors.end()) {
    adjacency_.resize(nodes_.size());
    std::unordered_map<std::string, int> index;
    index.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) index[nodes_[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto* nbrs = parent.neighbors(nodes_[i]);
      if (!nbrs) continue;
      for (const auto& [b, w] : *nbrs) {
        auto it = index.find(b);
        if (it != index.end()) adjacency_[i].push_back({it->second, w});
      }
      std::sort(adjacency_[i].begin(), adjacency_[i].end());
      edge_count_accum_ += adjacency_[i].size();
    }
  }

  const WeightedGraph& parent() const { return *parent_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_accum_ / 2; }

  // Neighbors of node `i` as (node index, edge weight), ascending by index.
  std::span<const std::pair<int, long long>> neighbors(int i) const { return adjacency_[i]; }

  int index_of(const std::string& node) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node);
    if (it == nodes_.end() || *it != node) return -1;
    return static_cast<int>(it - nodes_.begin());
  }

  long long weighted_degree(int i) const {
    long long sum = 0;
    for (const auto& [j, w] : adjacency_[i]) sum += w;
    return sum;
  }

  WeightedGraph as_graph() const {
    WeightedGraph g;
    for (const std::string& n : nodes_) g.add_node(n);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (const auto& [j, w] : adjacency_[i])
        if (static_cast<int>(i) < j) g.add_coauthorship(nodes_[i], nodes_[j], w);
    return g;
  }

 private:
  const WeightedGraph* parent_;
  std::vector<std::string> nodes_;
  std::vector<std::vector<std::pair<int, long long>>> adjacency_;
  std::size_t edge_count_accum_ = 0;
};

inline InducedSubgraph induce(const WeightedGraph& graph, const std::set<std::string>& authors) {
  return InducedSubgraph(graph, authors);
}

inline long long weighted_degree(const InducedSubgraph& g, const std::string& node) {
  int i = g.index_of(node);
  if (i < 0) throw ValidationError("node '" + node + "' is not in the subgraph");
  return g.weighted_degree(i);
}

// Closeness as inverse farness over the node's reachable set, with distances
// as unweighted hop counts. Nodes that reach nothing get 0.
inline std::vector<double> closeness_centrality(const InducedSubgraph& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<double> out(n, 0.0);
  std::vector<int> dist(n);
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    queue.clear();
    queue.push_back(s);
    long long farness = 0;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      farness += dist[v];
      for (const auto& [w, weight] : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    if (farness > 0) out[s] = 1.0 / static_cast<double>(farness);
  }
  return out;
}

// Unnormalized shortest-path betweenness on the unweighted graph, one
// contribution per unordered pair (Brandes accumulation, halved because each
// pair is visited from both endpoints).
inline std::vector<double> betweenness_centrality(const InducedSubgraph& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<double> out(n, 0.0);
  std::vector<int> dist(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<int> order;
  order.reserve(n);
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    queue.clear();
    queue.push_back(s);
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (const auto& [w, weight] : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int w = *it;
      for (const auto& [v, weight] : g.neighbors(w)) {
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) out[w] += delta[w];
    }
  }
  for (double& v : out) v *= 0.5;
  return out;
}

// Mean over strictly positive values; 0 when nothing qualifies. The paper's
// averaging rule: the denominator counts only nodes with non-zero centrality.
inline double average_centrality(std::span<const double> values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (v > 0.0) {
      sum += v;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace venuestab
