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

#include "dtsense/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::corpus {

namespace {

void checked_add(std::uint64_t* acc, std::uint64_t v, const char* what) {
  if (*acc > UINT64_MAX - v) throw Error(std::string("count overflow in ") + what);
  *acc += v;
}

// One (word, feature, count) record extracted from an input line.
struct PairRecord {
  std::string word;
  std::string feature;
  std::uint64_t count;
};

bool parse_pair_line(const std::string& line, PairRecord* rec) {
  auto fields = util::split(line, '\t');
  if (fields.size() != 3) return false;
  rec->word = util::trim(fields[0]);
  rec->feature = util::trim(fields[1]);
  if (rec->word.empty() || rec->feature.empty()) return false;
  if (!util::parse_u64(util::trim(fields[2]), &rec->count)) return false;
  return rec->count > 0;
}

// Token of a syntactic n-gram: word/pos/deplabel/headindex. Words may contain
// '/' themselves, so the last three fields are taken from the right.
struct NgramToken {
  std::string word;
  std::string pos;
  std::string dep;
};

bool parse_token(const std::string& tok, NgramToken* out) {
  auto parts = util::split(tok, '/');
  if (parts.size() < 4) return false;
  std::size_t n = parts.size();
  out->dep = parts[n - 2];
  out->pos = parts[n - 3];
  std::string word = parts[0];
  for (std::size_t i = 1; i + 3 < n; ++i) word += "/" + parts[i];
  out->word = word;
  return !out->word.empty() && !out->dep.empty();
}

// head_word<TAB>ngram<TAB>total_count<TAB>counts_by_year. The per-year counts
// are year,count items, either space-separated inside the fourth field or as
// further tab-separated fields. Each co-token contributes the feature
// dep:word; the head token itself supplies the part-of-speech tag.
bool parse_ngram_line(const std::string& line, const std::optional<YearRange>& years,
                      std::vector<PairRecord>* recs, std::string* head_out,
                      std::string* pos_out, bool* out_of_range) {
  auto fields = util::split(line, '\t');
  if (fields.size() < 3) return false;
  const std::string head = util::trim(fields[0]);
  if (head.empty()) return false;

  std::uint64_t total_count = 0;
  if (!util::parse_u64(util::trim(fields[2]), &total_count) || total_count == 0) return false;

  std::uint64_t epoch_count = 0;
  if (!years.has_value()) {
    epoch_count = total_count;
  } else {
    std::vector<std::string> items;
    for (std::size_t i = 3; i < fields.size(); ++i) {
      for (auto& piece : util::split(fields[i], ' '))
        if (!piece.empty()) items.push_back(piece);
    }
    if (items.empty()) return false;
    for (const auto& item : items) {
      auto yc = util::split(item, ',');
      if (yc.size() != 2) return false;
      std::uint64_t year = 0, cnt = 0;
      if (!util::parse_u64(yc[0], &year) || !util::parse_u64(yc[1], &cnt) || cnt == 0)
        return false;
      int y = static_cast<int>(year);
      if (y >= years->from && y <= years->to)
        checked_add(&epoch_count, cnt, "year counts");
    }
  }
  if (epoch_count == 0) {
    *out_of_range = true;  // valid line, nothing in this epoch
    return true;
  }

  bool pos_taken = false;
  for (const auto& tok : util::split(fields[1], ' ')) {
    if (tok.empty()) continue;
    NgramToken t;
    if (!parse_token(tok, &t)) return false;
    if (!pos_taken && t.word == head) {
      *pos_out = t.pos;
      pos_taken = true;
      continue;  // the head itself is not a context feature
    }
    recs->push_back(PairRecord{head, t.dep + ":" + t.word, epoch_count});
  }
  *head_out = head;
  return !recs->empty() || pos_taken;
}

}  // namespace

void TimeSliceCounts::add(const std::string& word, const std::string& feature,
                          std::uint64_t count) {
  if (count == 0) throw Error("zero count for (" + word + ", " + feature + ")");
  checked_add(&pair_counts[word][feature], count, "pair counts");
  checked_add(&word_marginals[word], count, "word marginals");
  checked_add(&feature_marginals[feature], count, "feature marginals");
  checked_add(&total, count, "total");
}

TimeSliceCounts ingest_counts(std::istream& in, CountsFormat format,
                              const std::string& epoch_label,
                              const IngestOptions& options) {
  if (!in) throw Error("unreadable count source for epoch " + epoch_label);
  TimeSliceCounts counts;
  counts.epoch_label = epoch_label;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ++counts.stats.lines;

    if (format == CountsFormat::kPairTsv) {
      PairRecord rec;
      if (!parse_pair_line(line, &rec)) {
        ++counts.stats.malformed;
        continue;
      }
      counts.add(rec.word, rec.feature, rec.count);
    } else {
      std::vector<PairRecord> recs;
      std::string head, pos;
      bool out_of_range = false;
      if (!parse_ngram_line(line, options.years, &recs, &head, &pos, &out_of_range)) {
        ++counts.stats.malformed;
        continue;
      }
      if (out_of_range) {
        ++counts.stats.skipped;
        continue;
      }
      for (const auto& rec : recs) counts.add(rec.word, rec.feature, rec.count);
      if (!pos.empty()) counts.pos_tags.emplace(head, pos);
    }
  }
  if (in.bad()) throw Error("I/O error while reading epoch " + epoch_label);

  if (counts.stats.lines > 0) {
    double ratio = static_cast<double>(counts.stats.malformed) /
                   static_cast<double>(counts.stats.lines);
    if (ratio > options.malformed_tolerance) {
      throw FormatError("epoch " + epoch_label + ": " +
                        std::to_string(counts.stats.malformed) + " of " +
                        std::to_string(counts.stats.lines) +
                        " lines malformed (tolerance " +
                        util::format_double(options.malformed_tolerance) + ")");
    }
  }
  return counts;
}

TimeSliceCounts ingest_counts_file(const std::string& path, CountsFormat format,
                                   const std::string& epoch_label,
                                   const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open count file: " + path);
  return ingest_counts(in, format, epoch_label, options);
}

double lmi_score(std::uint64_t pair_count, std::uint64_t word_marginal,
                 std::uint64_t feature_marginal, std::uint64_t total) {
  if (pair_count == 0 || word_marginal == 0 || feature_marginal == 0 || total == 0)
    throw Error("lmi_score requires positive arguments");
  double ratio = (static_cast<double>(pair_count) * static_cast<double>(total)) /
                 (static_cast<double>(word_marginal) * static_cast<double>(feature_marginal));
  return static_cast<double>(pair_count) * std::log2(ratio);
}

RankedFeatures top_features(const TimeSliceCounts& counts, const std::string& word,
                            std::size_t k) {
  auto it = counts.pair_counts.find(word);
  if (it == counts.pair_counts.end()) throw Error("unknown word: " + word);
  const std::uint64_t wm = counts.word_marginals.at(word);

  RankedFeatures ranked;
  ranked.word = word;
  ranked.features.reserve(it->second.size());
  for (const auto& [feature, count] : it->second) {
    double score = lmi_score(count, wm, counts.feature_marginals.at(feature), counts.total);
    ranked.features.emplace_back(feature, score);
  }
  std::sort(ranked.features.begin(), ranked.features.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (ranked.features.size() > k) ranked.features.resize(k);
  return ranked;
}

std::vector<RankedFeatures> rank_all_features(const TimeSliceCounts& counts, std::size_t k) {
  std::vector<std::string> words;
  words.reserve(counts.pair_counts.size());
  for (const auto& [word, _] : counts.pair_counts) words.push_back(word);
  std::sort(words.begin(), words.end());

  std::vector<RankedFeatures> out;
  out.reserve(words.size());
  for (const auto& word : words) out.push_back(top_features(counts, word, k));
  return out;
}

}  // namespace dtsense::corpus
