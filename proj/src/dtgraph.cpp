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

#include "dtsense/dtgraph.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::dtgraph {

namespace {

constexpr char kDtHeaderTag[] = "#dtgraph v1";
constexpr char kVocabHeaderTag[] = "#dtgraph-vocab v1";

// Neighbor ordering used throughout: weight descending, word text ascending.
void sort_neighbors(std::vector<Neighbor>* nbrs, const std::vector<std::string>& words) {
  std::sort(nbrs->begin(), nbrs->end(), [&words](const Neighbor& a, const Neighbor& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return words[a.id] < words[b.id];
  });
}

}  // namespace

DtNetwork::DtNetwork(DtMeta meta, std::vector<std::string> words,
                     std::vector<std::vector<Neighbor>> adjacency)
    : meta_(std::move(meta)), words_(std::move(words)), adj_(std::move(adjacency)) {
  index_.reserve(words_.size());
  for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  for (auto& nbrs : adj_) sort_neighbors(&nbrs, words_);
}

std::size_t DtNetwork::edge_count() const {
  std::size_t degree_sum = 0;
  for (const auto& nbrs : adj_) degree_sum += nbrs.size();
  return degree_sum / 2;
}

std::optional<std::uint32_t> DtNetwork::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DtNetwork build_dt(const std::vector<corpus::RankedFeatures>& ranked,
                   std::uint32_t min_shared, DtMeta meta) {
  if (ranked.empty()) throw Error("build_dt: empty input");
  if (min_shared == 0) throw Error("build_dt: min_shared must be positive");
  meta.min_shared = min_shared;

  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (const auto& rf : ranked) words.push_back(rf.word);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  if (words.size() != ranked.size()) throw Error("build_dt: duplicate word in input");

  std::unordered_map<std::string, std::uint32_t> index;
  index.reserve(words.size());
  for (std::uint32_t i = 0; i < words.size(); ++i) index.emplace(words[i], i);

  // Inverted index: feature -> ids of words carrying it.
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_feature;
  for (const auto& rf : ranked) {
    const std::uint32_t id = index.at(rf.word);
    for (const auto& [feature, score] : rf.features) {
      (void)score;
      auto& list = by_feature[feature];
      if (!list.empty() && list.back() == id)
        throw Error("build_dt: duplicate feature '" + feature + "' for word " + rf.word);
      list.push_back(id);
    }
  }

  // Shared-feature count per word pair, keyed as (lo << 32) | hi.
  std::unordered_map<std::uint64_t, std::uint32_t> shared;
  for (auto& [feature, list] : by_feature) {
    (void)feature;
    std::sort(list.begin(), list.end());
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j)
        ++shared[(static_cast<std::uint64_t>(list[i]) << 32) | list[j]];
  }

  std::vector<std::vector<Neighbor>> adj(words.size());
  for (const auto& [key, weight] : shared) {
    if (weight < min_shared) continue;
    auto u = static_cast<std::uint32_t>(key >> 32);
    auto v = static_cast<std::uint32_t>(key & 0xffffffffu);
    adj[u].push_back(Neighbor{v, weight});
    adj[v].push_back(Neighbor{u, weight});
  }
  return DtNetwork(std::move(meta), std::move(words), std::move(adj));
}

void InducedSubgraph::build(
    std::vector<std::string> words,
    const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>& edges,
    std::optional<std::string> target, std::string epoch_label) {
  words_ = std::move(words);
  target_ = std::move(target);
  epoch_label_ = std::move(epoch_label);
  index_.reserve(words_.size());
  for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  adj_.assign(words_.size(), {});
  for (const auto& [u, v, w] : edges) {
    adj_[u].push_back(Neighbor{v, w});
    adj_[v].push_back(Neighbor{u, w});
  }
  for (auto& nbrs : adj_)
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  edge_count_ = edges.size();
}

InducedSubgraph InducedSubgraph::from_edges(
    std::vector<std::string> words,
    const std::vector<std::tuple<std::string, std::string, std::uint32_t>>& edges,
    std::optional<std::string> target, std::string epoch_label) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < words.size(); ++i) index.emplace(words[i], i);

  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> id_edges;
  id_edges.reserve(edges.size());
  for (const auto& [u, v, w] : edges) {
    auto iu = index.find(u), iv = index.find(v);
    if (iu == index.end() || iv == index.end())
      throw Error("from_edges: edge endpoint not in word list");
    if (iu->second == iv->second) throw Error("from_edges: self loop on " + u);
    id_edges.emplace_back(iu->second, iv->second, w);
  }
  InducedSubgraph g;
  g.build(std::move(words), id_edges, std::move(target), std::move(epoch_label));
  return g;
}

std::optional<std::uint32_t> InducedSubgraph::target_index() const {
  if (!target_.has_value()) return std::nullopt;
  return find(*target_);
}

std::optional<std::uint32_t> InducedSubgraph::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool InducedSubgraph::has_edge(std::uint32_t u, std::uint32_t v) const {
  const auto& nbrs = adj_[u];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                             [](const Neighbor& n, std::uint32_t id) { return n.id < id; });
  return it != nbrs.end() && it->id == v;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> InducedSubgraph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_count_);
  for (std::uint32_t u = 0; u < adj_.size(); ++u)
    for (const auto& nbr : adj_[u])
      if (u < nbr.id) out.emplace_back(u, nbr.id);
  return out;
}

InducedSubgraph ego_network(const DtNetwork& dt, const std::string& word, std::size_t n) {
  if (n == 0) throw Error("ego_network: n must be positive");
  auto id = dt.find(word);
  if (!id.has_value()) throw Error("ego_network: unknown word " + word);

  // Adjacency is presorted by (weight desc, text asc); a prefix is the top-n.
  const auto& nbrs = dt.neighbors(*id);
  const std::size_t take = std::min(n, nbrs.size());
  std::vector<std::string> members;
  members.reserve(take);
  for (std::size_t i = 0; i < take; ++i) members.push_back(dt.word(nbrs[i].id));

  InducedSubgraph g = induced_subgraph(dt, members, std::nullopt);
  g.target_ = word;  // recorded, but not a node of the ego network
  return g;
}

InducedSubgraph induced_subgraph(const DtNetwork& dt, const std::vector<std::string>& node_set,
                                 const std::optional<std::string>& target) {
  std::vector<std::string> words(node_set.begin(), node_set.end());
  if (target.has_value()) words.push_back(*target);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());

  std::unordered_map<std::string, std::uint32_t> index;
  index.reserve(words.size());
  for (std::uint32_t i = 0; i < words.size(); ++i) index.emplace(words[i], i);

  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t local = 0; local < words.size(); ++local) {
    auto dt_id = dt.find(words[local]);
    if (!dt_id.has_value()) continue;  // absent from this epoch: isolated
    for (const auto& nbr : dt.neighbors(*dt_id)) {
      auto it = index.find(dt.word(nbr.id));
      if (it == index.end() || it->second <= local) continue;  // keep each pair once
      edges.emplace_back(local, it->second, nbr.weight);
    }
  }
  InducedSubgraph g;
  g.build(std::move(words), edges, target, dt.meta().epoch_label);
  return g;
}

void save_dt(const DtNetwork& dt, const std::filesystem::path& path,
             const std::vector<std::string>& extra_comments) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << kDtHeaderTag << " k=" << dt.meta().top_k << " n=" << dt.meta().ego_n
        << " min_shared=" << dt.meta().min_shared << " epoch=" << dt.meta().epoch_label
        << "\n";
    for (const auto& comment : extra_comments) out << '#' << comment << '\n';
    for (std::uint32_t u = 0; u < dt.node_count(); ++u) {
      for (const auto& nbr : dt.neighbors(u)) {
        if (dt.word(u) < dt.word(nbr.id))
          out << dt.word(u) << '\t' << dt.word(nbr.id) << '\t' << nbr.weight << '\n';
      }
    }
    if (!out) throw Error("write failed: " + path.string());
  }
  std::filesystem::path vocab_path = path;
  vocab_path += ".vocab";
  std::ofstream out(vocab_path, std::ios::binary);
  if (!out) throw Error("cannot write " + vocab_path.string());
  out << kVocabHeaderTag << " epoch=" << dt.meta().epoch_label << "\n";
  for (const auto& word : dt.words()) out << word << '\n';
  if (!out) throw Error("write failed: " + vocab_path.string());
}

DtNetwork load_dt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header) || header.rfind(kDtHeaderTag, 0) != 0)
    throw FormatError("not a dtgraph v1 file: " + path.string() +
                      " (found '" + header.substr(0, 32) + "')");

  DtMeta meta;
  for (const auto& field : util::split(header.substr(sizeof(kDtHeaderTag)), ' ')) {
    auto kv = util::split(field, '=');
    if (kv.size() != 2) continue;
    std::uint64_t v = 0;
    if (kv[0] == "k" && util::parse_u64(kv[1], &v)) meta.top_k = v;
    else if (kv[0] == "n" && util::parse_u64(kv[1], &v)) meta.ego_n = v;
    else if (kv[0] == "min_shared" && util::parse_u64(kv[1], &v))
      meta.min_shared = static_cast<std::uint32_t>(v);
    else if (kv[0] == "epoch") meta.epoch_label = kv[1];
  }

  std::filesystem::path vocab_path = path;
  vocab_path += ".vocab";
  std::ifstream vin(vocab_path, std::ios::binary);
  if (!vin) throw Error("cannot open " + vocab_path.string());
  std::string vheader;
  if (!std::getline(vin, vheader) || vheader.rfind(kVocabHeaderTag, 0) != 0)
    throw FormatError("not a dtgraph-vocab v1 file: " + vocab_path.string());

  std::vector<std::string> words;
  std::unordered_map<std::string, std::uint32_t> index;
  std::string line;
  while (std::getline(vin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    index.emplace(line, static_cast<std::uint32_t>(words.size()));
    words.push_back(line);
  }

  std::vector<std::vector<Neighbor>> adj(words.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = util::split(line, '\t');
    std::uint64_t weight = 0;
    if (fields.size() != 3 || !util::parse_u64(fields[2], &weight) || weight == 0)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad edge line");
    auto iu = index.find(fields[0]), iv = index.find(fields[1]);
    if (iu == index.end() || iv == index.end())
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": edge references unknown word");
    adj[iu->second].push_back(Neighbor{iv->second, static_cast<std::uint32_t>(weight)});
    adj[iv->second].push_back(Neighbor{iu->second, static_cast<std::uint32_t>(weight)});
  }
  if (in.bad()) throw Error("I/O error while reading " + path.string());
  return DtNetwork(std::move(meta), std::move(words), std::move(adj));
}

}  // namespace dtsense::dtgraph
