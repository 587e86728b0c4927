#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "oracles.hpp"
#include "venuestab/corpus.hpp"
#include "venuestab/graph.hpp"

using namespace venuestab;

namespace {

Corpus make_corpus(std::vector<PaperRecord> records) {
  return Corpus(std::move(records), std::nullopt, std::nullopt);
}

// Small named-edge graph builder for hand cases.
WeightedGraph graph_of(const std::vector<std::tuple<std::string, std::string, long long>>& edges,
                       const std::vector<std::string>& extra_nodes = {}) {
  WeightedGraph g;
  for (const auto& [a, b, w] : edges) g.add_coauthorship(a, b, w);
  for (const std::string& n : extra_nodes) g.add_node(n);
  return g;
}

std::set<std::string> names(std::initializer_list<const char*> list) {
  std::set<std::string> out;
  for (const char* s : list) out.insert(s);
  return out;
}

}  // namespace

TEST_CASE("build_global_graph uses papers strictly before the year") {
  std::vector<PaperRecord> records;
  records.push_back({"p1", "V", 2000, {"a", "b"}, {}, {}, {}});
  Corpus corpus = make_corpus(records);

  WeightedGraph g = build_global_graph(corpus, 2001);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_weight("a", "b") == 1);

  // Window empty at the corpus min year.
  CHECK(build_global_graph(corpus, 2000).node_count() == 0);
}

TEST_CASE("edge weight counts co-authored papers") {
  std::vector<PaperRecord> records;
  for (int i = 0; i < 3; ++i)
    records.push_back({"p" + std::to_string(i), "V", 2000 + i, {"a", "b"}, {}, {}, {}});
  records.push_back({"solo", "V", 2000, {"loner"}, {}, {}, {}});
  Corpus corpus = make_corpus(records);

  WeightedGraph g = build_global_graph(corpus, 2005);
  CHECK(g.edge_weight("a", "b") == 3);
  CHECK(g.edge_weight("b", "a") == 3);
  CHECK(g.has_node("loner"));
  CHECK(g.edge_count() == 1);
}

TEST_CASE("global graph weights accumulate monotonically over years") {
  std::vector<PaperRecord> records;
  std::mt19937_64 rng(7);
  for (int y = 2000; y < 2008; ++y)
    for (int p = 0; p < 6; ++p) {
      std::vector<std::string> authors;
      int k = 2 + static_cast<int>(rng() % 2);
      while (static_cast<int>(authors.size()) < k) {
        std::string a = "a" + std::to_string(rng() % 8);
        if (std::find(authors.begin(), authors.end(), a) == authors.end()) authors.push_back(a);
      }
      records.push_back(
          {"p" + std::to_string(y) + "_" + std::to_string(p), "V", y, authors, {}, {}, {}});
    }
  Corpus corpus = make_corpus(records);
  for (int y = 2001; y <= 2008; ++y) {
    WeightedGraph prev = build_global_graph(corpus, y);
    WeightedGraph next = build_global_graph(corpus, y + 1);
    for (const std::string& a : prev.nodes_sorted()) {
      const auto* nbrs = prev.neighbors(a);
      if (!nbrs) continue;
      for (const auto& [b, w] : *nbrs) CHECK(next.edge_weight(a, b) >= w);
    }
  }
}

TEST_CASE("induce keeps edges with both endpoints in the subset") {
  WeightedGraph g = graph_of({{"a", "b", 2}, {"b", "c", 1}});
  InducedSubgraph sub = induce(g, names({"a", "b"}));
  CHECK(sub.node_count() == 2);
  CHECK(sub.edge_count() == 1);
  CHECK(weighted_degree(sub, "a") == 2);

  InducedSubgraph disjoint = induce(g, names({"x", "y"}));
  CHECK(disjoint.edge_count() == 0);
  CHECK(weighted_degree(disjoint, "x") == 0);

  InducedSubgraph full = induce(g, names({"a", "b", "c"}));
  CHECK(full.edge_count() == 2);
  CHECK(weighted_degree(full, "b") == 3);
}

TEST_CASE("induce is idempotent") {
  WeightedGraph g = graph_of({{"a", "b", 2}, {"b", "c", 1}, {"c", "d", 4}, {"a", "c", 1}});
  auto subset = names({"a", "b", "c", "ghost"});
  InducedSubgraph once = induce(g, subset);
  WeightedGraph as_graph = once.as_graph();
  InducedSubgraph twice = induce(as_graph, subset);
  REQUIRE(once.nodes() == twice.nodes());
  for (std::size_t i = 0; i < once.node_count(); ++i) {
    auto a = once.neighbors(static_cast<int>(i));
    auto b = twice.neighbors(static_cast<int>(i));
    REQUIRE(std::vector(a.begin(), a.end()) == std::vector(b.begin(), b.end()));
  }
}

TEST_CASE("weighted_degree on hand cases") {
  WeightedGraph star = graph_of({{"x", "l1", 1}, {"x", "l2", 1}, {"x", "l3", 1}});
  InducedSubgraph sub = induce(star, names({"x", "l1", "l2", "l3", "iso"}));
  CHECK(weighted_degree(sub, "x") == 3);
  CHECK(weighted_degree(sub, "iso") == 0);
  CHECK_THROWS_AS(weighted_degree(sub, "missing"), ValidationError);

  WeightedGraph pair_weights = graph_of({{"n", "u", 2}, {"n", "v", 5}});
  CHECK(weighted_degree(induce(pair_weights, names({"n", "u", "v"})), "n") == 7);
}

TEST_CASE("closeness on a path graph") {
  WeightedGraph g = graph_of({{"a", "b", 1}, {"b", "c", 1}});
  InducedSubgraph sub = induce(g, names({"a", "b", "c"}));
  auto values = closeness_centrality(sub);
  // nodes() is sorted: a, b, c
  CHECK(values[sub.index_of("b")] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(values[sub.index_of("a")] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(values[sub.index_of("c")] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

  InducedSubgraph iso = induce(g, names({"a", "zzz"}));
  auto iso_values = closeness_centrality(iso);
  CHECK(iso_values[iso.index_of("zzz")] == 0.0);
}

TEST_CASE("betweenness on hand cases") {
  WeightedGraph path = graph_of({{"a", "b", 1}, {"b", "c", 1}});
  auto bc = betweenness_centrality(induce(path, names({"a", "b", "c"})));
  InducedSubgraph sub = induce(path, names({"a", "b", "c"}));
  CHECK(bc[sub.index_of("b")] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(bc[sub.index_of("a")] == Catch::Approx(0.0).margin(1e-12));

  WeightedGraph star = graph_of({{"x", "l1", 1}, {"x", "l2", 1}, {"x", "l3", 1}});
  InducedSubgraph star_sub = induce(star, names({"x", "l1", "l2", "l3"}));
  CHECK(betweenness_centrality(star_sub)[star_sub.index_of("x")] ==
        Catch::Approx(3.0).epsilon(1e-12));

  WeightedGraph k4;
  std::vector<std::string> vs{"a", "b", "c", "d"};
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) k4.add_coauthorship(vs[i], vs[j]);
  for (double v : betweenness_centrality(induce(k4, names({"a", "b", "c", "d"}))))
    CHECK(v == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("average_centrality ignores zeros") {
  CHECK(average_centrality(std::vector<double>{0.5, 0.0, 0.5}) == Catch::Approx(0.5));
  CHECK(average_centrality(std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK(average_centrality(std::vector<double>{1.0, 3.0}) == Catch::Approx(2.0));
}

TEST_CASE("centralities match brute-force enumeration on random graphs") {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 120; ++trial) {
    int n = 2 + static_cast<int>(rng() % 11);  // up to 12 nodes
    double p = 0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0;
    WeightedGraph g;
    std::set<std::string> subset;
    for (int i = 0; i < n; ++i) {
      std::string node = "n" + std::to_string(i);
      subset.insert(node);
      g.add_node(node);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (static_cast<double>(rng() % 1000) / 1000.0 < p)
          g.add_coauthorship("n" + std::to_string(i), "n" + std::to_string(j),
                             1 + static_cast<long long>(rng() % 4));
    InducedSubgraph sub = induce(g, subset);

    auto fast_cc = closeness_centrality(sub);
    auto slow_cc = oracles::brute_closeness(sub);
    auto fast_bc = betweenness_centrality(sub);
    auto slow_bc = oracles::brute_betweenness(sub);
    double total_bc = 0.0, total_brute = 0.0;
    for (std::size_t i = 0; i < sub.node_count(); ++i) {
      CHECK(fast_cc[i] == Catch::Approx(slow_cc[i]).margin(1e-9));
      CHECK(fast_bc[i] == Catch::Approx(slow_bc[i]).margin(1e-9));
      total_bc += fast_bc[i];
      total_brute += slow_bc[i];
    }
    CHECK(total_bc == Catch::Approx(total_brute).margin(1e-9));
  }
}

TEST_CASE("adding an edge never decreases closeness") {
  WeightedGraph g = graph_of({{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}});
  auto subset = names({"a", "b", "c", "d"});
  auto before = closeness_centrality(induce(g, subset));
  g.add_coauthorship("a", "d");
  auto after = closeness_centrality(induce(g, subset));
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] >= before[i] - 1e-12);
  for (double v : after) CHECK(v > 0.0);  // connected graph
}

TEST_CASE("edge list export is sorted and tab-separated") {
  WeightedGraph g = graph_of({{"b", "c", 1}, {"a", "b", 2}});
  CHECK(g.edge_list_text() == "a\tb\t2\nb\tc\t1\n");
}
