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

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::cwcluster {

namespace {

// Groups node indices by label and emits the canonical cluster form.
std::vector<std::vector<std::string>> labels_to_clusters(
    const dtgraph::InducedSubgraph& g, const std::vector<std::uint32_t>& labels) {
  std::map<std::uint32_t, std::vector<std::string>> by_label;
  for (std::uint32_t v = 0; v < labels.size(); ++v)
    by_label[labels[v]].push_back(g.words()[v]);

  std::vector<std::vector<std::string>> clusters;
  clusters.reserve(by_label.size());
  for (auto& [label, members] : by_label) {
    (void)label;
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

std::vector<std::uint32_t> propagate_labels(const dtgraph::InducedSubgraph& g,
                                            std::uint64_t seed, std::size_t max_iters) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> labels(n);
  std::iota(labels.begin(), labels.end(), 0u);

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);

  // Total incident weight per neighboring label; reused across nodes.
  std::map<std::uint32_t, std::uint64_t> weight_by_label;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    util::shuffle(order, rng);
    bool changed = false;
    for (std::uint32_t v : order) {
      const auto& nbrs = g.neighbors(v);
      if (nbrs.empty()) continue;  // isolated nodes keep their own label
      weight_by_label.clear();
      for (const auto& nbr : nbrs) weight_by_label[labels[nbr.id]] += nbr.weight;
      // Strongest label wins; ties go to the smallest label id. std::map
      // iterates in ascending label order, so `>` keeps the first maximum.
      std::uint32_t best = labels[v];
      std::uint64_t best_weight = 0;
      for (const auto& [label, weight] : weight_by_label) {
        if (weight > best_weight) {
          best = label;
          best_weight = weight;
        }
      }
      if (best != labels[v]) {
        labels[v] = best;  // asynchronous update within the sweep
        changed = true;
      }
    }
    if (!changed) break;
  }
  return labels;
}

}  // namespace

bool SenseClustering::contains(const std::string& word) const {
  for (const auto& cluster : clusters)
    if (std::binary_search(cluster.begin(), cluster.end(), word)) return true;
  return false;
}

SenseClustering chinese_whispers(const dtgraph::InducedSubgraph& g, std::uint64_t seed,
                                 std::size_t max_iters) {
  if (g.size() == 0) throw Error("chinese_whispers: empty graph");
  SenseClustering out;
  out.target = g.target().value_or("");
  out.epoch_label = g.epoch_label();
  out.run_seed = seed;
  out.clusters = labels_to_clusters(g, propagate_labels(g, seed, max_iters));
  return out;
}

SenseClustering stable_clusters(const dtgraph::InducedSubgraph& g,
                                const std::array<std::uint64_t, 3>& seeds,
                                std::size_t min_cluster_size, std::size_t max_iters) {
  if (seeds[0] == seeds[1] || seeds[0] == seeds[2] || seeds[1] == seeds[2])
    throw Error("stable_clusters: seeds must be distinct");

  SenseClustering out;
  out.target = g.target().value_or("");
  out.epoch_label = g.epoch_label();
  out.run_seed = util::splitmix64(seeds[0] ^ util::splitmix64(seeds[1] ^ seeds[2]));
  if (g.size() == 0) return out;

  // Two nodes stay together iff they share a cluster in every run, i.e. their
  // per-run label triples are equal. Grouping by triple is exactly the
  // intersection of the three same-cluster equivalence relations.
  std::array<std::vector<std::uint32_t>, 3> runs;
  for (std::size_t r = 0; r < 3; ++r) runs[r] = propagate_labels(g, seeds[r], max_iters);

  std::map<std::array<std::uint32_t, 3>, std::vector<std::string>> groups;
  for (std::uint32_t v = 0; v < g.size(); ++v)
    groups[{runs[0][v], runs[1][v], runs[2][v]}].push_back(g.words()[v]);

  for (auto& [key, members] : groups) {
    (void)key;
    if (members.size() < min_cluster_size) continue;
    std::sort(members.begin(), members.end());
    out.clusters.push_back(std::move(members));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace dtsense::cwcluster
