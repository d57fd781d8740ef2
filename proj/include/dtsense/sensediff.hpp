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

#ifndef DTSENSE_SENSEDIFF_HPP_
#define DTSENSE_SENSEDIFF_HPP_

#include <map>
#include <string>
#include <vector>

#include "dtsense/corpus.hpp"
#include "dtsense/cwcluster.hpp"

namespace dtsense::sensediff {

// A later-epoch sense cluster whose words are mostly absent from every
// earlier-epoch cluster of the same target.
struct BirthCandidate {
  std::string target;
  std::vector<std::string> birth_cluster;  // sorted
  double novelty_ratio = 0.0;              // novel words / cluster size
  std::string old_epoch;
  std::string new_epoch;
};

// Flags one candidate per new-epoch cluster whose share of words absent from
// the union of the old-epoch clusters reaches `threshold`. A target with no
// old clusters makes every new cluster fully novel. Throws on target
// mismatch.
std::vector<BirthCandidate> detect_births(const cwcluster::SenseClustering& old_clustering,
                                          const cwcluster::SenseClustering& new_clustering,
                                          double threshold = 0.8);

struct FilterOptions {
  // Keep candidates whose target carries one of these tags. Words without a
  // tag (or corpora without tags) skip the check. Empty list disables it.
  std::vector<std::string> pos_allow = {"NN", "NNS"};
  // Keep targets whose frequency percentile lies in [band_low, band_high].
  // The default keeps the middle 60% of the frequency-sorted vocabulary;
  // (0, 1) disables the band.
  double band_low = 0.2;
  double band_high = 0.8;
};

// The staged candidate filter: part-of-speech allow-list, then frequency
// band. Percentiles are over new-epoch word marginals (ascending, ties by
// word text). Targets missing from the marginals skip the band check.
std::vector<BirthCandidate> filter_candidates(const std::vector<BirthCandidate>& candidates,
                                              const corpus::TimeSliceCounts& counts_new,
                                              const FilterOptions& options = {});

// 1 - JS(p || q) with base-2 logs, so the result lies in [0, 1]: 1 iff the
// distributions are equal, 0 iff their supports are disjoint. Both inputs
// must sum to 1 within 1e-9.
double js_similarity(const std::map<std::string, double>& p,
                     const std::map<std::string, double>& q);

// Alignment-style check: treats each cluster as a uniform distribution over
// its words and reports true iff the new cluster's best similarity against
// the old clusters stays below `threshold`. Throws on an empty cluster.
bool js_birth_check(const std::vector<std::string>& new_cluster,
                    const std::vector<std::vector<std::string>>& old_clusters,
                    double threshold = 0.35);

// Uniform distribution over a cluster's (deduplicated) words.
std::map<std::string, double> uniform_distribution(const std::vector<std::string>& cluster);

}  // namespace dtsense::sensediff

#endif  // DTSENSE_SENSEDIFF_HPP_
