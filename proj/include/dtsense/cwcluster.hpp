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

#ifndef DTSENSE_CWCLUSTER_HPP_
#define DTSENSE_CWCLUSTER_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtsense/dtgraph.hpp"

namespace dtsense::cwcluster {

// Partition of a target word's ego-network neighbors into sense clusters.
// Clusters hold sorted word lists and are themselves sorted by first member,
// so equal clusterings compare equal structurally and serialize identically.
struct SenseClustering {
  std::string target;
  std::vector<std::vector<std::string>> clusters;
  std::uint64_t run_seed = 0;
  std::string epoch_label;

  bool contains(const std::string& word) const;
};

// Chinese Whispers label propagation. Every node starts with its own label;
// each iteration visits the nodes in a fresh seeded random order and each
// node adopts the label with the largest total edge weight among its
// neighbors (ties go to the smallest label id). Stops at a fixed point or
// after max_iters. Deterministic given (g, seed); isolated nodes end up as
// singleton clusters. Throws on an empty graph.
SenseClustering chinese_whispers(const dtgraph::InducedSubgraph& g, std::uint64_t seed,
                                 std::size_t max_iters = 20);

// Agreement filter over three independent runs: keeps the maximal word sets
// that are co-clustered in all three (the intersection of the same-cluster
// relations), then drops sets smaller than min_cluster_size. Empty input
// yields an empty clustering.
SenseClustering stable_clusters(const dtgraph::InducedSubgraph& g,
                                const std::array<std::uint64_t, 3>& seeds,
                                std::size_t min_cluster_size = 4,
                                std::size_t max_iters = 20);

}  // namespace dtsense::cwcluster

#endif  // DTSENSE_CWCLUSTER_HPP_
