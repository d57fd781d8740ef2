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

#ifndef DTSENSE_DTGRAPH_HPP_
#define DTSENSE_DTGRAPH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtsense/corpus.hpp"

namespace dtsense::dtgraph {

// Construction parameters carried with the network so runs are reproducible.
struct DtMeta {
  std::string epoch_label;
  std::size_t top_k = 1000;    // features per word used during construction
  std::size_t ego_n = 200;     // default ego-network size for this run
  std::uint32_t min_shared = 1;  // minimum shared-feature count for an edge
};

struct Neighbor {
  std::uint32_t id = 0;
  std::uint32_t weight = 0;
};

// Distributional thesaurus network for one epoch: nodes are words, the weight
// of an edge is the number of top-ranked context features the two words
// share. Immutable once built; all readers may run concurrently.
class DtNetwork {
 public:
  DtNetwork() = default;
  DtNetwork(DtMeta meta, std::vector<std::string> words,
            std::vector<std::vector<Neighbor>> adjacency);

  const DtMeta& meta() const { return meta_; }
  std::size_t node_count() const { return words_.size(); }
  std::size_t edge_count() const;

  const std::string& word(std::uint32_t id) const { return words_[id]; }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<std::uint32_t> find(const std::string& word) const;

  // Sorted by weight descending, then word text ascending, so a prefix is the
  // deterministic top-N neighborhood.
  const std::vector<Neighbor>& neighbors(std::uint32_t id) const { return adj_[id]; }

 private:
  DtMeta meta_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<Neighbor>> adj_;
};

// Restriction of a DtNetwork to a node set. Edge weights are retained for
// label-propagation clustering; the cohesion metrics ignore them.
class InducedSubgraph {
 public:
  InducedSubgraph() = default;

  // Words are deduplicated and sorted; edges must reference listed words.
  static InducedSubgraph from_edges(
      std::vector<std::string> words,
      const std::vector<std::tuple<std::string, std::string, std::uint32_t>>& edges,
      std::optional<std::string> target = std::nullopt,
      std::string epoch_label = {});

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::string& epoch_label() const { return epoch_label_; }

  // The target word this subgraph was built around, if any. For ego networks
  // the target is recorded but deliberately not part of the node set.
  const std::optional<std::string>& target() const { return target_; }
  std::optional<std::uint32_t> target_index() const;

  const std::vector<Neighbor>& neighbors(std::uint32_t id) const { return adj_[id]; }
  bool has_edge(std::uint32_t u, std::uint32_t v) const;
  std::optional<std::uint32_t> find(const std::string& word) const;

  // Unordered unweighted edge list (u < v), for dumps and tests.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

 private:
  friend InducedSubgraph induced_subgraph(const DtNetwork&, const std::vector<std::string>&,
                                          const std::optional<std::string>&);
  friend InducedSubgraph ego_network(const DtNetwork&, const std::string&, std::size_t);

  void build(std::vector<std::string> words,
             const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>& edges,
             std::optional<std::string> target, std::string epoch_label);

  std::vector<std::string> words_;  // sorted lexicographically
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<Neighbor>> adj_;  // sorted by neighbor id
  std::size_t edge_count_ = 0;
  std::optional<std::string> target_;
  std::string epoch_label_;
};

// Builds the DT network: weight(u, v) = |top_features(u) ∩ top_features(v)|,
// keeping pairs with weight >= min_shared. Uses an inverted feature index, so
// cost scales with feature co-occurrence rather than vocabulary squared.
// meta.min_shared is overwritten with the argument. Throws on empty input.
DtNetwork build_dt(const std::vector<corpus::RankedFeatures>& ranked,
                   std::uint32_t min_shared, DtMeta meta);

// Top-n neighborhood of `word` (word itself excluded) with the DT edges among
// those neighbors. A word with no neighbors yields an empty subgraph.
InducedSubgraph ego_network(const DtNetwork& dt, const std::string& word, std::size_t n);

// Exact edge restriction of the DT to `node_set` (plus `target` if given).
// Words missing from the DT become isolated nodes.
InducedSubgraph induced_subgraph(const DtNetwork& dt, const std::vector<std::string>& node_set,
                                 const std::optional<std::string>& target = std::nullopt);

// Text persistence: `path` holds the edge list, `path` + ".vocab" the full
// vocabulary (isolated words included). load_dt(save_dt(g)) is the identity.
// extra_comments become '#'-prefixed lines after the header; loaders skip
// any comment line.
void save_dt(const DtNetwork& dt, const std::filesystem::path& path,
             const std::vector<std::string>& extra_comments = {});
DtNetwork load_dt(const std::filesystem::path& path);

}  // namespace dtsense::dtgraph

#endif  // DTSENSE_DTGRAPH_HPP_
