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

#include "dtsense/evalkit.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::evalkit {

namespace {

std::string word_name(const std::string& prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", i);
  return prefix + buf;
}

struct Community {
  std::vector<std::uint32_t> members;
  std::vector<std::string> features;
};

std::vector<std::string> fresh_block(std::size_t* feature_counter, std::size_t block_size,
                                     const char* kind) {
  std::vector<std::string> block;
  block.reserve(block_size);
  for (std::size_t j = 0; j < block_size; ++j)
    block.push_back(std::string(kind) + std::to_string((*feature_counter)++));
  return block;
}

}  // namespace

void SynthSpec::validate() const {
  if (vocabulary_size < 2) throw ConfigError("synth: vocabulary_size must be at least 2");
  if (features_per_sense == 0) throw ConfigError("synth: features_per_sense must be positive");
  if (senses_min == 0 || senses_min > senses_max)
    throw ConfigError("synth: need 1 <= senses_min <= senses_max");
  if (community_size < 2) throw ConfigError("synth: community_size must be at least 2");
  if (noise_rate < 0.0 || noise_rate >= 1.0)
    throw ConfigError("synth: noise_rate must lie in [0, 1)");
  if (base_count == 0) throw ConfigError("synth: base_count must be positive");
  if (births > 0) {
    if (birth_cohort < 2) throw ConfigError("synth: birth_cohort must be at least 2");
    if (births % birth_cohort != 0)
      throw ConfigError("synth: births must be a multiple of birth_cohort");
  }
  if (births + drifts > vocabulary_size)
    throw ConfigError("synth: more planted changes than vocabulary words");

}

SynthSpec SynthSpec::from_stream(std::istream& in) {
  SynthSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = util::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw FormatError("synth spec line " + std::to_string(lineno) + ": expected key=value");
    std::string key = util::trim(trimmed.substr(0, eq));
    std::string value = util::trim(trimmed.substr(eq + 1));

    auto as_u64 = [&]() {
      std::uint64_t v = 0;
      if (!util::parse_u64(value, &v))
        throw FormatError("synth spec: bad integer for " + key + ": " + value);
      return v;
    };
    if (key == "vocabulary_size") spec.vocabulary_size = as_u64();
    else if (key == "features_per_sense") spec.features_per_sense = as_u64();
    else if (key == "senses_min") spec.senses_min = as_u64();
    else if (key == "senses_max") spec.senses_max = as_u64();
    else if (key == "community_size") spec.community_size = as_u64();
    else if (key == "births") spec.births = as_u64();
    else if (key == "birth_cohort") spec.birth_cohort = as_u64();
    else if (key == "drifts") spec.drifts = as_u64();
    else if (key == "drift_ties") spec.drift_ties = as_u64();
    else if (key == "base_count") spec.base_count = as_u64();
    else if (key == "noise_pool") spec.noise_pool = as_u64();
    else if (key == "seed") spec.seed = as_u64();
    else if (key == "noise_rate") {
      if (!util::parse_double(value, &spec.noise_rate))
        throw FormatError("synth spec: bad number for noise_rate: " + value);
    } else if (key == "word_prefix") spec.word_prefix = value;
    else if (key == "epoch1_label") spec.epoch1_label = value;
    else if (key == "epoch2_label") spec.epoch2_label = value;
    else throw FormatError("synth spec: unknown key '" + key + "'");
  }
  spec.validate();
  return spec;
}

SynthSpec SynthSpec::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synth spec: " + path.string());
  return from_stream(in);
}

std::string SynthSpec::to_config() const {
  std::ostringstream out;
  out << "vocabulary_size=" << vocabulary_size << "\n"
      << "features_per_sense=" << features_per_sense << "\n"
      << "senses_min=" << senses_min << "\n"
      << "senses_max=" << senses_max << "\n"
      << "community_size=" << community_size << "\n"
      << "births=" << births << "\n"
      << "birth_cohort=" << birth_cohort << "\n"
      << "drifts=" << drifts << "\n"
      << "drift_ties=" << drift_ties << "\n"
      << "noise_rate=" << util::format_double(noise_rate) << "\n"
      << "base_count=" << base_count << "\n"
      << "noise_pool=" << noise_pool << "\n"
      << "word_prefix=" << word_prefix << "\n"
      << "epoch1_label=" << epoch1_label << "\n"
      << "epoch2_label=" << epoch2_label << "\n"
      << "seed=" << seed << "\n";
  return out.str();
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.vocabulary_size;

  std::vector<std::string> words(n);
  for (std::size_t i = 0; i < n; ++i) words[i] = word_name(spec.word_prefix, i);

  // Sense counts per word.
  std::mt19937_64 senses_rng(util::derive_seed(spec.seed, "senses"));
  std::vector<std::size_t> sense_count(n);
  for (std::size_t i = 0; i < n; ++i)
    sense_count[i] =
        spec.senses_min + util::bounded(senses_rng, spec.senses_max - spec.senses_min + 1);

  // Base communities, layer by layer: layer L groups the words that still
  // want an (L+1)-th sense.
  std::size_t feature_counter = 0;
  std::vector<Community> communities;
  std::vector<std::vector<std::uint32_t>> communities_of(n);
  std::mt19937_64 layer_rng(util::derive_seed(spec.seed, "layers"));
  for (std::size_t layer = 0; layer < spec.senses_max; ++layer) {
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t i = 0; i < n; ++i)
      if (sense_count[i] > layer) eligible.push_back(i);
    if (eligible.size() < 2) break;
    util::shuffle(eligible, layer_rng);

    for (std::size_t start = 0; start < eligible.size(); start += spec.community_size) {
      std::size_t end = std::min(start + spec.community_size, eligible.size());
      if (end - start < 2) {
        if (communities.empty()) break;
        // Tail word too lonely for a community of its own: append to the
        // previous group.
        for (std::size_t i = start; i < end; ++i) {
          communities.back().members.push_back(eligible[i]);
          communities_of[eligible[i]].push_back(
              static_cast<std::uint32_t>(communities.size() - 1));
        }
        break;
      }
      Community c;
      c.members.assign(eligible.begin() + start, eligible.begin() + end);
      c.features = fresh_block(&feature_counter, spec.features_per_sense, "b");
      for (std::uint32_t m : c.members)
        communities_of[m].push_back(static_cast<std::uint32_t>(communities.size()));
      communities.push_back(std::move(c));
    }
  }
  if (communities.empty()) throw ConfigError("synth: spec yields no communities");

  // Closed co-membership neighborhoods: a word, plus everyone it shares any
  // community with.
  std::vector<std::unordered_set<std::uint32_t>> co_members(n);
  for (std::uint32_t i = 0; i < n; ++i) co_members[i].insert(i);
  for (const auto& community : communities)
    for (std::uint32_t a : community.members)
      for (std::uint32_t b : community.members) co_members[a].insert(b);

  // Birth cohorts: each cohort gains a fresh feature block in epoch 2 only.
  // Members must have pairwise disjoint co-membership neighborhoods; a mere
  // shared acquaintance would bridge the new cluster into a member's old
  // cluster inside its ego network and dilute the novelty below threshold.
  auto neighborhoods_clash = [&](std::uint32_t a, std::uint32_t b) {
    const auto& small = co_members[a].size() <= co_members[b].size() ? co_members[a]
                                                                     : co_members[b];
    const auto& large = co_members[a].size() <= co_members[b].size() ? co_members[b]
                                                                     : co_members[a];
    for (std::uint32_t x : small)
      if (large.count(x)) return true;
    return false;
  };

  std::mt19937_64 birth_rng(util::derive_seed(spec.seed, "births"));
  std::vector<std::uint32_t> candidates(n);
  std::iota(candidates.begin(), candidates.end(), 0u);

  std::vector<std::vector<std::uint32_t>> cohorts;
  std::unordered_set<std::uint32_t> changed;  // birth or drift words
  {
    const std::size_t n_cohorts = spec.births == 0 ? 0 : spec.births / spec.birth_cohort;
    for (std::size_t k = 0; k < n_cohorts; ++k) {
      // Greedy over a shuffled order; a fresh shuffle on failure (the order
      // matters because large neighborhoods crowd out later picks).
      std::vector<std::uint32_t> cohort;
      for (int attempt = 0; attempt < 64 && cohort.size() < spec.birth_cohort; ++attempt) {
        cohort.clear();
        util::shuffle(candidates, birth_rng);
        for (std::uint32_t cand : candidates) {
          if (cohort.size() == spec.birth_cohort) break;
          if (changed.count(cand)) continue;
          bool clash = false;
          for (std::uint32_t member : cohort)
            if (neighborhoods_clash(cand, member)) { clash = true; break; }
          if (!clash) cohort.push_back(cand);
        }
      }
      if (cohort.size() < spec.birth_cohort)
        throw ConfigError("synth: could not place a birth cohort with disjoint "
                          "neighborhoods; enlarge the vocabulary or shrink the cohorts");
      for (std::uint32_t m : cohort) changed.insert(m);
      cohorts.push_back(std::move(cohort));
    }
  }

  // Drift words and their adopted communities.
  std::mt19937_64 drift_rng(util::derive_seed(spec.seed, "drifts"));
  struct Drift {
    std::uint32_t word;
    std::uint32_t community;
    std::uint32_t tie_partner;
    std::vector<std::string> tie_features;
  };
  std::vector<Drift> drift_plan;
  {
    std::vector<std::uint32_t> pool;
    for (std::uint32_t i = 0; i < n; ++i)
      if (!changed.count(i)) pool.push_back(i);
    util::shuffle(pool, drift_rng);
    if (pool.size() < spec.drifts)
      throw ConfigError("synth: not enough untouched words for the drift plan");
    for (std::size_t d = 0; d < spec.drifts; ++d) {
      std::uint32_t word = pool[d];
      std::optional<std::uint32_t> adopted;
      for (int attempt = 0; attempt < 256; ++attempt) {
        auto cid = static_cast<std::uint32_t>(util::bounded(drift_rng, communities.size()));
        const auto& members = communities[cid].members;
        if (members.size() < 4) continue;  // needs to surface as a cluster later
        if (std::find(members.begin(), members.end(), word) != members.end()) continue;
        adopted = cid;
        break;
      }
      if (!adopted)
        throw ConfigError("synth: could not find an adoptable community for a drift word");
      const auto& members = communities[*adopted].members;
      Drift drift;
      drift.word = word;
      drift.community = *adopted;
      drift.tie_partner = members[util::bounded(drift_rng, members.size())];
      drift.tie_features = fresh_block(&feature_counter, spec.drift_ties, "t");
      changed.insert(word);
      drift_plan.push_back(std::move(drift));
    }
  }

  // Structural counts.
  SynthCorpus out;
  out.epoch1.epoch_label = spec.epoch1_label;
  out.epoch2.epoch_label = spec.epoch2_label;

  std::size_t structural_pairs1 = 0, structural_pairs2 = 0;
  auto add_block = [&](corpus::TimeSliceCounts& counts, std::size_t* pair_tally,
                       std::uint32_t word, const std::vector<std::string>& block) {
    for (const auto& feature : block) {
      counts.add(words[word], feature, spec.base_count);
      ++*pair_tally;
    }
  };

  for (const auto& community : communities) {
    for (std::uint32_t m : community.members) {
      add_block(out.epoch1, &structural_pairs1, m, community.features);
      add_block(out.epoch2, &structural_pairs2, m, community.features);
    }
  }
  for (const auto& cohort : cohorts) {
    auto block = fresh_block(&feature_counter, spec.features_per_sense, "b");
    for (std::uint32_t m : cohort) add_block(out.epoch2, &structural_pairs2, m, block);
  }
  for (const auto& drift : drift_plan) {
    add_block(out.epoch2, &structural_pairs2, drift.word,
              communities[drift.community].features);
    add_block(out.epoch1, &structural_pairs1, drift.word, drift.tie_features);
    add_block(out.epoch1, &structural_pairs1, drift.tie_partner, drift.tie_features);
  }

  // Noise, drawn independently per epoch.
  const std::size_t noise_pool = spec.noise_pool ? spec.noise_pool : 10 * n;
  auto sprinkle = [&](corpus::TimeSliceCounts& counts, std::size_t structural_pairs,
                      const char* tag) {
    if (spec.noise_rate <= 0.0) return;
    std::mt19937_64 rng(util::derive_seed(spec.seed, tag));
    auto n_noise = static_cast<std::size_t>(spec.noise_rate *
                                            static_cast<double>(structural_pairs));
    for (std::size_t i = 0; i < n_noise; ++i) {
      std::uint32_t word = static_cast<std::uint32_t>(util::bounded(rng, n));
      std::string feature = "n" + std::to_string(util::bounded(rng, noise_pool));
      counts.add(words[word], feature, 1 + util::bounded(rng, 3));
    }
  };
  sprinkle(out.epoch1, structural_pairs1, "noise1");
  sprinkle(out.epoch2, structural_pairs2, "noise2");

  for (const auto& cohort : cohorts)
    for (std::uint32_t m : cohort) out.birth_words.push_back(words[m]);
  for (const auto& drift : drift_plan) out.drift_words.push_back(words[drift.word]);
  std::sort(out.birth_words.begin(), out.birth_words.end());
  std::sort(out.drift_words.begin(), out.drift_words.end());
  return out;
}

namespace {

void write_counts_tsv(const corpus::TimeSliceCounts& counts,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# epoch=" << counts.epoch_label << " format=pair-tsv\n";
  std::vector<std::string> words;
  words.reserve(counts.pair_counts.size());
  for (const auto& [word, _] : counts.pair_counts) words.push_back(word);
  std::sort(words.begin(), words.end());
  for (const auto& word : words) {
    const auto& features = counts.pair_counts.at(word);
    std::vector<std::string> names;
    names.reserve(features.size());
    for (const auto& [feature, _] : features) names.push_back(feature);
    std::sort(names.begin(), names.end());
    for (const auto& feature : names)
      out << word << '\t' << feature << '\t' << features.at(feature) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_word_list(const std::vector<std::string>& words,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& word : words) out << word << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void write_corpus(const SynthCorpus& corpus, const SynthSpec& spec,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_counts_tsv(corpus.epoch1, dir / "epoch1.tsv");
  write_counts_tsv(corpus.epoch2, dir / "epoch2.tsv");
  write_word_list(corpus.birth_words, dir / "truth.txt");
  write_word_list(corpus.drift_words, dir / "drift.txt");
  std::ofstream conf(dir / "spec.conf", std::ios::binary);
  if (!conf) throw Error("cannot write spec.conf");
  conf << spec.to_config();
}

EvalReport score(const std::set<std::string>& detected,
                 const std::set<std::string>& ground_truth,
                 const std::set<std::string>& candidate_pool) {
  for (const auto& word : detected)
    if (!candidate_pool.count(word))
      throw Error("score: detected word '" + word + "' outside the candidate pool");

  EvalReport report;
  for (const auto& word : candidate_pool) {
    const bool det = detected.count(word) > 0;
    const bool truth = ground_truth.count(word) > 0;
    const char* kind = det ? (truth ? "tp" : "fp") : (truth ? "fn" : "tn");
    if (det && truth) ++report.tp;
    else if (det) ++report.fp;
    else if (truth) ++report.fn;
    else ++report.tn;
    report.verdicts.emplace_back(word, kind);
  }
  if (report.tp + report.fp > 0)
    report.precision =
        static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp);
  if (report.tp + report.fn > 0)
    report.recall =
        static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn);
  if (report.precision && report.recall && (*report.precision + *report.recall) > 0.0)
    report.f1 = 2.0 * *report.precision * *report.recall /
                (*report.precision + *report.recall);
  return report;
}

namespace {

std::string metric_or_undefined(const std::optional<double>& v) {
  return v ? util::format_fixed(*v, 4) : "undefined";
}

}  // namespace

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "precision " << metric_or_undefined(precision) << "\n"
      << "recall    " << metric_or_undefined(recall) << "\n"
      << "f1        " << metric_or_undefined(f1) << "\n"
      << "confusion tp=" << tp << " fp=" << fp << " fn=" << fn << " tn=" << tn << "\n";
  if (!metadata.empty()) out << "meta      " << metadata << "\n";
  return out.str();
}

std::string EvalReport::to_tsv() const {
  std::ostringstream out;
  out << "#metric\tvalue\n"
      << "precision\t" << metric_or_undefined(precision) << "\n"
      << "recall\t" << metric_or_undefined(recall) << "\n"
      << "f1\t" << metric_or_undefined(f1) << "\n"
      << "tp\t" << tp << "\nfp\t" << fp << "\nfn\t" << fn << "\ntn\t" << tn << "\n";
  for (const auto& [word, kind] : verdicts) out << word << '\t' << kind << '\n';
  return out.str();
}

std::string EvalReport::to_json_lines() const {
  nlohmann::json summary;
  if (precision) summary["precision"] = *precision;
  else summary["precision"] = nullptr;
  if (recall) summary["recall"] = *recall;
  else summary["recall"] = nullptr;
  if (f1) summary["f1"] = *f1;
  else summary["f1"] = nullptr;
  summary["tp"] = tp;
  summary["fp"] = fp;
  summary["fn"] = fn;
  summary["tn"] = tn;
  if (!metadata.empty()) summary["meta"] = metadata;

  std::ostringstream out;
  out << summary.dump() << "\n";
  for (const auto& [word, kind] : verdicts) {
    nlohmann::json row;
    row["word"] = word;
    row["verdict"] = kind;
    out << row.dump() << "\n";
  }
  return out.str();
}

ShiftCheck known_shift_check(const std::set<std::string>& flagged_true_births,
                             const std::set<std::string>& reference_list,
                             const std::set<std::string>& training_words) {
  if (reference_list.empty()) throw Error("known_shift_check: empty reference list");
  for (const auto& word : reference_list)
    if (training_words.count(word))
      throw Error("known_shift_check: reference word '" + word +
                  "' appears in the training set");

  ShiftCheck check;
  std::size_t hits = 0;
  for (const auto& word : reference_list) {
    const bool hit = flagged_true_births.count(word) > 0;
    if (hit) ++hits;
    check.verdicts.emplace_back(word, hit);
  }
  check.fraction = static_cast<double>(hits) / static_cast<double>(reference_list.size());
  return check;
}

}  // namespace dtsense::evalkit
