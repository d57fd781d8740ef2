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

#include "dtsense/sensediff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dtsense/error.hpp"

namespace dtsense::sensediff {

std::vector<BirthCandidate> detect_births(const cwcluster::SenseClustering& old_clustering,
                                          const cwcluster::SenseClustering& new_clustering,
                                          double threshold) {
  if (old_clustering.target != new_clustering.target)
    throw Error("detect_births: target mismatch ('" + old_clustering.target + "' vs '" +
                new_clustering.target + "')");

  std::unordered_set<std::string> old_words;
  for (const auto& cluster : old_clustering.clusters)
    old_words.insert(cluster.begin(), cluster.end());

  std::vector<BirthCandidate> births;
  for (const auto& cluster : new_clustering.clusters) {
    if (cluster.empty()) continue;
    std::size_t novel = 0;
    for (const auto& word : cluster)
      if (!old_words.count(word)) ++novel;
    double ratio = static_cast<double>(novel) / static_cast<double>(cluster.size());
    if (ratio >= threshold) {
      BirthCandidate cand;
      cand.target = new_clustering.target;
      cand.birth_cluster = cluster;
      cand.novelty_ratio = ratio;
      cand.old_epoch = old_clustering.epoch_label;
      cand.new_epoch = new_clustering.epoch_label;
      births.push_back(std::move(cand));
    }
  }
  return births;
}

namespace {

// Percentile of `word` in the marginal-frequency order (ascending count,
// ties by word text), scaled to [0, 1]. nullopt when the word is unknown.
std::optional<double> frequency_percentile(const corpus::TimeSliceCounts& counts,
                                           const std::string& word) {
  auto it = counts.word_marginals.find(word);
  if (it == counts.word_marginals.end()) return std::nullopt;
  const std::uint64_t freq = it->second;

  std::size_t below = 0;
  for (const auto& [other, count] : counts.word_marginals) {
    if (count < freq || (count == freq && other < word)) ++below;
  }
  const std::size_t n = counts.word_marginals.size();
  if (n <= 1) return 0.5;
  return static_cast<double>(below) / static_cast<double>(n - 1);
}

}  // namespace

std::vector<BirthCandidate> filter_candidates(const std::vector<BirthCandidate>& candidates,
                                              const corpus::TimeSliceCounts& counts_new,
                                              const FilterOptions& options) {
  std::vector<BirthCandidate> kept;
  kept.reserve(candidates.size());
  for (const auto& cand : candidates) {
    if (!options.pos_allow.empty()) {
      auto tag = counts_new.pos_tags.find(cand.target);
      if (tag != counts_new.pos_tags.end() &&
          std::find(options.pos_allow.begin(), options.pos_allow.end(), tag->second) ==
              options.pos_allow.end())
        continue;
    }
    auto pct = frequency_percentile(counts_new, cand.target);
    if (pct.has_value() && (*pct < options.band_low || *pct > options.band_high)) continue;
    kept.push_back(cand);
  }
  return kept;
}

double js_similarity(const std::map<std::string, double>& p,
                     const std::map<std::string, double>& q) {
  double sum_p = 0.0, sum_q = 0.0;
  for (const auto& [word, prob] : p) {
    if (prob < 0.0) throw Error("js_similarity: negative probability for " + word);
    sum_p += prob;
  }
  for (const auto& [word, prob] : q) {
    if (prob < 0.0) throw Error("js_similarity: negative probability for " + word);
    sum_q += prob;
  }
  if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9)
    throw Error("js_similarity: distributions must sum to 1");

  // JS(p||q) = 0.5 KL(p||m) + 0.5 KL(q||m), m = (p+q)/2, logs base 2.
  double js = 0.0;
  auto accumulate_kl = [&js](const std::map<std::string, double>& a,
                             const std::map<std::string, double>& b) {
    for (const auto& [word, pa] : a) {
      if (pa <= 0.0) continue;
      auto it = b.find(word);
      double m = (pa + (it != b.end() ? it->second : 0.0)) / 2.0;
      js += 0.5 * pa * std::log2(pa / m);
    }
  };
  accumulate_kl(p, q);
  accumulate_kl(q, p);
  return std::clamp(1.0 - js, 0.0, 1.0);
}

std::map<std::string, double> uniform_distribution(const std::vector<std::string>& cluster) {
  if (cluster.empty()) throw Error("uniform_distribution: empty cluster");
  std::map<std::string, double> dist;
  for (const auto& word : cluster) dist[word] = 0.0;
  const double mass = 1.0 / static_cast<double>(dist.size());
  for (auto& [word, prob] : dist) {
    (void)word;
    prob = mass;
  }
  return dist;
}

bool js_birth_check(const std::vector<std::string>& new_cluster,
                    const std::vector<std::vector<std::string>>& old_clusters,
                    double threshold) {
  auto new_dist = uniform_distribution(new_cluster);
  double best = 0.0;
  for (const auto& old_cluster : old_clusters)
    best = std::max(best, js_similarity(new_dist, uniform_distribution(old_cluster)));
  return best < threshold;
}

}  // namespace dtsense::sensediff
