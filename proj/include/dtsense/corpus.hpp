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

#ifndef DTSENSE_CORPUS_HPP_
#define DTSENSE_CORPUS_HPP_

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dtsense::corpus {

enum class CountsFormat {
  kPairTsv,      // word<TAB>feature<TAB>count
  kSynNgramTsv,  // head_word<TAB>ngram<TAB>total_count<TAB>year,count ...
};

// Inclusive year interval used to slice per-year counts of the n-gram format.
struct YearRange {
  int from = 0;
  int to = 0;
};

struct IngestOptions {
  // Abort when more than this fraction of non-blank lines fails to parse.
  double malformed_tolerance = 0.01;
  std::optional<YearRange> years;  // kSynNgramTsv only; absent = all years
};

struct IngestStats {
  std::uint64_t lines = 0;      // non-blank, non-comment lines seen
  std::uint64_t malformed = 0;  // lines rejected by the parser
  std::uint64_t skipped = 0;    // valid lines with no count in the year range
};

// Word/feature co-occurrence counts for one time slice. Marginals and total
// are always recomputed from pair_counts, so the consistency invariants hold
// by construction. Treat as immutable once built; concurrent readers are fine.
struct TimeSliceCounts {
  std::string epoch_label;
  // word -> feature -> count; keys exist only for strictly positive counts.
  std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>> pair_counts;
  std::unordered_map<std::string, std::uint64_t> word_marginals;
  std::unordered_map<std::string, std::uint64_t> feature_marginals;
  std::uint64_t total = 0;
  // Optional; populated by the n-gram format, consumed only by the
  // part-of-speech candidate filter.
  std::unordered_map<std::string, std::string> pos_tags;
  IngestStats stats;

  // Adds `count` to (word, feature). Throws on zero count or overflow.
  void add(const std::string& word, const std::string& feature, std::uint64_t count);
};

// Parses a line-oriented count stream. Malformed lines are tallied and the
// whole ingest fails if they exceed options.malformed_tolerance.
TimeSliceCounts ingest_counts(std::istream& in, CountsFormat format,
                              const std::string& epoch_label,
                              const IngestOptions& options = {});
TimeSliceCounts ingest_counts_file(const std::string& path, CountsFormat format,
                                   const std::string& epoch_label,
                                   const IngestOptions& options = {});

// Lexicographer's mutual information:
//   count * log2(count * total / (word_marginal * feature_marginal)).
// All arguments must be positive. The total factor makes scores invariant
// under uniform corpus scaling.
double lmi_score(std::uint64_t pair_count, std::uint64_t word_marginal,
                 std::uint64_t feature_marginal, std::uint64_t total);

// A word's context features ranked by association score, strongest first.
struct RankedFeatures {
  std::string word;
  // Sorted by score descending, ties by feature text ascending; length <= k.
  std::vector<std::pair<std::string, double>> features;
};

// Top-k features of `word` by lmi_score. Throws on unknown word.
RankedFeatures top_features(const TimeSliceCounts& counts, const std::string& word,
                            std::size_t k);

// top_features for every word, sorted by word text. Distinct words are
// independent, so this is safe to parallelize externally if ever needed.
std::vector<RankedFeatures> rank_all_features(const TimeSliceCounts& counts, std::size_t k);

}  // namespace dtsense::corpus

#endif  // DTSENSE_CORPUS_HPP_
