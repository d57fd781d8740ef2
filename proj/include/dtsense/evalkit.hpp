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

#ifndef DTSENSE_EVALKIT_HPP_
#define DTSENSE_EVALKIT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtsense/corpus.hpp"

namespace dtsense::evalkit {

// Recipe for a pair of synthetic epochs with planted sense changes.
//
// Words belong to sense communities; every community shares a block of
// features, which is what makes its members mutual thesaurus neighbors and a
// single ego-network cluster. Births are planted as cohorts of words that
// jointly gain a fresh feature block in the second epoch only; each cohort
// member then sees the others as a brand-new cluster. Drift words instead
// join an existing community in the second epoch while keeping a small
// feature overlap with one of its members in the first: the detector flags
// them as births, but the cluster was already dense before, which is exactly
// the false-positive signature the classifier must reject.
struct SynthSpec {
  std::size_t vocabulary_size = 200;
  std::size_t features_per_sense = 12;
  std::size_t senses_min = 1;  // senses per word ~ uniform[senses_min, senses_max]
  std::size_t senses_max = 3;
  std::size_t community_size = 8;
  std::size_t births = 10;        // total planted birth words
  std::size_t birth_cohort = 5;   // birth words per cohort; must divide births
  std::size_t drifts = 0;         // planted false births
  std::size_t drift_ties = 2;     // epoch-1 overlap features per drift word
  double noise_rate = 0.0;        // noise pairs per structural pair
  std::uint64_t base_count = 10;  // count for each structural (word, feature)
  std::size_t noise_pool = 0;     // distinct noise features; 0 = 10x vocabulary
  std::string word_prefix = "w";
  std::string epoch1_label = "t1";
  std::string epoch2_label = "t2";
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError on an infeasible spec

  // key=value lines; '#' comments. Keys match the field names above.
  static SynthSpec from_stream(std::istream& in);
  static SynthSpec from_file(const std::filesystem::path& path);
  std::string to_config() const;
};

struct SynthCorpus {
  corpus::TimeSliceCounts epoch1;
  corpus::TimeSliceCounts epoch2;
  std::vector<std::string> birth_words;  // sorted; the ground truth
  std::vector<std::string> drift_words;  // sorted; planted false positives
};

// Deterministic under spec.seed.
SynthCorpus generate_corpus(const SynthSpec& spec);

// Writes epoch1.tsv / epoch2.tsv (pair format), truth.txt, drift.txt and
// spec.conf under `dir`.
void write_corpus(const SynthCorpus& corpus, const SynthSpec& spec,
                  const std::filesystem::path& dir);

struct EvalReport {
  std::optional<double> precision;  // empty when no word was flagged (0/0)
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  // word -> one of "tp", "fp", "fn", "tn", for every pool word.
  std::vector<std::pair<std::string, std::string>> verdicts;
  std::string metadata;

  std::string to_text() const;
  std::string to_tsv() const;
  std::string to_json_lines() const;
};

// Standard precision/recall/F1 of `detected` against the ground truth
// restricted to the candidate pool. detected must be a subset of the pool.
EvalReport score(const std::set<std::string>& detected,
                 const std::set<std::string>& ground_truth,
                 const std::set<std::string>& candidate_pool);

struct ShiftCheck {
  double fraction = 0.0;  // share of reference words flagged as true births
  std::vector<std::pair<std::string, bool>> verdicts;
};

// Reference-list protocol: how many known-shift words does the full pipeline
// flag as true births? The reference list must be non-empty and disjoint
// from the classifier's training words.
ShiftCheck known_shift_check(const std::set<std::string>& flagged_true_births,
                             const std::set<std::string>& reference_list,
                             const std::set<std::string>& training_words);

}  // namespace dtsense::evalkit

#endif  // DTSENSE_EVALKIT_HPP_
