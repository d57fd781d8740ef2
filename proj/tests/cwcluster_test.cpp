// Copyright 2026 The dtsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dtsense/cwcluster.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "dtsense/error.hpp"

namespace cwcluster = dtsense::cwcluster;
namespace dtgraph = dtsense::dtgraph;
using dtsense::Error;
using Edge = std::tuple<std::string, std::string, std::uint32_t>;

namespace {

dtgraph::InducedSubgraph make_graph(std::vector<std::string> words,
                                    std::vector<Edge> edges) {
  return dtgraph::InducedSubgraph::from_edges(std::move(words), edges);
}

std::vector<Edge> clique(const std::vector<std::string>& words, std::uint32_t weight) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = i + 1; j < words.size(); ++j)
      edges.emplace_back(words[i], words[j], weight);
  return edges;
}

// Which cluster (by index) holds `word`?
std::size_t cluster_of(const cwcluster::SenseClustering& clustering,
                       const std::string& word) {
  for (std::size_t i = 0; i < clustering.clusters.size(); ++i)
    if (std::binary_search(clustering.clusters[i].begin(), clustering.clusters[i].end(),
                           word))
      return i;
  REQUIRE(false);
  return 0;
}

bool is_partition(const cwcluster::SenseClustering& clustering,
                  const std::vector<std::string>& words) {
  std::set<std::string> seen;
  for (const auto& cluster : clustering.clusters) {
    if (cluster.empty()) return false;
    for (const auto& word : cluster)
      if (!seen.insert(word).second) return false;
  }
  return seen == std::set<std::string>(words.begin(), words.end());
}

dtgraph::InducedSubgraph random_graph(std::mt19937_64& rng, std::size_t n,
                                      double edge_prob) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("n" + std::to_string(i));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((rng() % 1000) < edge_prob * 1000)
        edges.emplace_back(words[i], words[j], 1 + rng() % 5);
  return make_graph(words, edges);
}

}  // namespace

TEST_SUITE("cwcluster") {

TEST_CASE("single node forms a singleton cluster") {
  auto g = make_graph({"solo"}, {});
  auto clustering = cwcluster::chinese_whispers(g, 1);
  REQUIRE(clustering.clusters.size() == 1);
  CHECK(clustering.clusters[0] == std::vector<std::string>{"solo"});
  CHECK_THROWS_AS(cwcluster::chinese_whispers(make_graph({}, {}), 1), Error);
}

TEST_CASE("two disjoint triangles always split into two clusters") {
  std::vector<std::string> words = {"a", "b", "c", "d", "e", "f"};
  auto edges = clique({"a", "b", "c"}, 1);
  auto more = clique({"d", "e", "f"}, 1);
  edges.insert(edges.end(), more.begin(), more.end());
  auto g = make_graph(words, edges);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto clustering = cwcluster::chinese_whispers(g, seed);
    REQUIRE(clustering.clusters.size() == 2);
    CHECK(clustering.clusters[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(clustering.clusters[1] == std::vector<std::string>{"d", "e", "f"});
  }
}

TEST_CASE("complete graph collapses to one cluster") {
  std::vector<std::string> words = {"p", "q", "r", "s", "t"};
  auto g = make_graph(words, clique(words, 3));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto clustering = cwcluster::chinese_whispers(g, seed);
    REQUIRE(clustering.clusters.size() == 1);
    CHECK(clustering.clusters[0].size() == 5);
  }
}

TEST_CASE("partition invariant and determinism on random graphs") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 60; ++round) {
    auto g = random_graph(rng, 2 + rng() % 24, 0.2);
    std::uint64_t seed = rng();
    auto c1 = cwcluster::chinese_whispers(g, seed);
    CHECK(is_partition(c1, g.words()));
    auto c2 = cwcluster::chinese_whispers(g, seed);
    CHECK(c1.clusters == c2.clusters);  // bit-identical rerun
  }
}

TEST_CASE("different components never share a cluster") {
  std::mt19937_64 rng(555);
  for (int round = 0; round < 20; ++round) {
    // Two random halves with no cross edges.
    auto left = random_graph(rng, 6, 0.5);
    std::vector<std::string> words = left.words();
    std::vector<Edge> edges;
    for (auto [u, v] : left.edges()) edges.emplace_back(words[u], words[v], 1);
    std::vector<std::string> right_words;
    for (int i = 0; i < 6; ++i) right_words.push_back("m" + std::to_string(i));
    for (std::size_t i = 0; i < right_words.size(); ++i)
      for (std::size_t j = i + 1; j < right_words.size(); ++j)
        if (rng() % 2) edges.emplace_back(right_words[i], right_words[j], 1);
    words.insert(words.end(), right_words.begin(), right_words.end());
    auto g = make_graph(words, edges);

    auto clustering = cwcluster::chinese_whispers(g, rng());
    for (const auto& cluster : clustering.clusters) {
      bool has_left = false, has_right = false;
      for (const auto& word : cluster)
        (word[0] == 'n' ? has_left : has_right) = true;
      CHECK(!(has_left && has_right));
    }
  }
}

TEST_CASE("weights dominate label adoption") {
  // x is pulled by one heavy edge against two light ones.
  auto g = make_graph({"a", "b", "c", "x", "y"},
                      {{"a", "b", 1}, {"a", "x", 1}, {"b", "x", 1},
                       {"x", "y", 10}, {"c", "y", 1}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto clustering = cwcluster::chinese_whispers(g, seed);
    CHECK(cluster_of(clustering, "x") == cluster_of(clustering, "y"));
  }
}

TEST_CASE("stable_clusters keeps agreement and drops flippers") {
  // Two triangles plus a hinge node g tied to one node of each with equal
  // weight. The triangles' node names interleave in sort order, so either
  // triangle can converge to the smaller surviving label and g's tie-break
  // lands on different sides for different visit orders.
  std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g"};
  std::vector<Edge> edges = clique({"a", "c", "e"}, 2);
  auto t2 = clique({"b", "d", "f"}, 2);
  edges.insert(edges.end(), t2.begin(), t2.end());
  edges.emplace_back("g", "c", 1);
  edges.emplace_back("g", "d", 1);
  auto g = make_graph(words, edges);

  // Find seeds that witness both outcomes for the hinge node.
  std::optional<std::uint64_t> seed_left, seed_right;
  for (std::uint64_t seed = 0; seed < 200 && !(seed_left && seed_right); ++seed) {
    auto clustering = cwcluster::chinese_whispers(g, seed);
    if (cluster_of(clustering, "g") == cluster_of(clustering, "c")) {
      if (!seed_left) seed_left = seed;
    } else if (cluster_of(clustering, "g") == cluster_of(clustering, "d")) {
      if (!seed_right) seed_right = seed;
    }
  }
  REQUIRE(seed_left.has_value());
  REQUIRE(seed_right.has_value());

  std::array<std::uint64_t, 3> seeds = {*seed_left, *seed_right,
                                        std::max(*seed_left, *seed_right) + 1};
  auto stable = cwcluster::stable_clusters(g, seeds, 2);

  // Oracle: intersect the three same-cluster relations directly and take the
  // components of the intersection.
  std::array<cwcluster::SenseClustering, 3> runs = {
      cwcluster::chinese_whispers(g, seeds[0]),
      cwcluster::chinese_whispers(g, seeds[1]),
      cwcluster::chinese_whispers(g, seeds[2]),
  };
  const auto& nodes = g.words();
  const std::size_t n = nodes.size();
  std::vector<std::vector<bool>> together(n, std::vector<bool>(n, true));
  for (const auto& run : runs)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (cluster_of(run, nodes[i]) != cluster_of(run, nodes[j]))
          together[i][j] = false;
  std::vector<std::vector<std::string>> oracle;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::vector<std::string> group;
    for (std::size_t j = 0; j < n; ++j)
      if (together[i][j] && !used[j]) {
        group.push_back(nodes[j]);
        used[j] = true;
      }
    if (group.size() >= 2) oracle.push_back(group);
  }
  std::sort(oracle.begin(), oracle.end());

  CHECK(stable.clusters == oracle);
  // The hinge node flipped between runs, so it is excluded from both sides.
  for (const auto& cluster : stable.clusters)
    CHECK(!std::binary_search(cluster.begin(), cluster.end(), std::string("g")));
  CHECK(stable.clusters.size() == 2);
}

TEST_CASE("stable_clusters idempotent when runs agree, empty when all undersized") {
  std::vector<std::string> words = {"a", "b", "c", "d", "e", "f"};
  auto edges = clique({"a", "b", "c"}, 5);
  auto more = clique({"d", "e", "f"}, 5);
  edges.insert(edges.end(), more.begin(), more.end());
  auto g = make_graph(words, edges);

  auto stable = cwcluster::stable_clusters(g, {1, 2, 3}, 3);
  REQUIRE(stable.clusters.size() == 2);
  CHECK(stable.clusters[0] == std::vector<std::string>{"a", "b", "c"});

  // min_cluster_size above every cluster: empty clustering.
  auto none = cwcluster::stable_clusters(g, {1, 2, 3}, 4);
  CHECK(none.clusters.empty());

  CHECK_THROWS_AS(cwcluster::stable_clusters(g, {1, 1, 2}, 2), Error);
}

TEST_CASE("every stable cluster refines each individual run") {
  std::mt19937_64 rng(31337);
  for (int round = 0; round < 25; ++round) {
    auto g = random_graph(rng, 4 + rng() % 16, 0.3);
    std::array<std::uint64_t, 3> seeds = {rng(), rng(), rng()};
    if (seeds[0] == seeds[1] || seeds[1] == seeds[2] || seeds[0] == seeds[2]) continue;
    auto stable = cwcluster::stable_clusters(g, seeds, 1);
    for (auto seed : seeds) {
      auto run = cwcluster::chinese_whispers(g, seed);
      for (const auto& cluster : stable.clusters) {
        // All members of a stable cluster share a cluster in this run too.
        auto where = cluster_of(run, cluster.front());
        for (const auto& word : cluster) CHECK(cluster_of(run, word) == where);
      }
    }
  }
}

}  // TEST_SUITE
