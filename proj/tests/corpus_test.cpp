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

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dtsense/error.hpp"

namespace corpus = dtsense::corpus;
using dtsense::Error;
using dtsense::FormatError;

namespace {

corpus::TimeSliceCounts ingest_pairs(const std::string& text,
                                     const corpus::IngestOptions& options = {}) {
  std::istringstream in(text);
  return corpus::ingest_counts(in, corpus::CountsFormat::kPairTsv, "test", options);
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("ingest sums marginals and total") {
  auto counts = ingest_pairs("cat\tsubj:purr\t2\ncat\tobj:feed\t1\ndog\tsubj:bark\t4\n");
  CHECK(counts.total == 7);
  CHECK(counts.word_marginals.at("cat") == 3);
  CHECK(counts.word_marginals.at("dog") == 4);
  CHECK(counts.feature_marginals.at("subj:purr") == 2);
  CHECK(counts.pair_counts.at("cat").at("obj:feed") == 1);
  CHECK(counts.stats.malformed == 0);
}

TEST_CASE("empty stream yields empty counts") {
  auto counts = ingest_pairs("");
  CHECK(counts.total == 0);
  CHECK(counts.pair_counts.empty());
  CHECK(counts.word_marginals.empty());
}

TEST_CASE("negative and zero counts are malformed") {
  // A single bad line among three blows past the 1% default tolerance.
  CHECK_THROWS_AS(ingest_pairs("cat\tsubj:purr\t-1\n"), FormatError);
  CHECK_THROWS_AS(ingest_pairs("cat\tsubj:purr\t0\n"), FormatError);
  CHECK_THROWS_AS(ingest_pairs("cat\tsubj:purr\n"), FormatError);

  corpus::IngestOptions lenient;
  lenient.malformed_tolerance = 0.5;
  auto counts = ingest_pairs("cat\tsubj:purr\t-1\ncat\tobj:feed\t2\n", lenient);
  CHECK(counts.stats.malformed == 1);
  CHECK(counts.total == 2);
}

TEST_CASE("marginal consistency holds for random tables") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 20; ++round) {
    std::ostringstream text;
    for (int i = 0; i < 60; ++i) {
      text << "w" << rng() % 15 << "\tf" << rng() % 20 << "\t" << 1 + rng() % 9 << "\n";
    }
    auto counts = ingest_pairs(text.str());

    std::uint64_t total = 0;
    std::unordered_map<std::string, std::uint64_t> wm, fm;
    for (const auto& [word, features] : counts.pair_counts) {
      for (const auto& [feature, count] : features) {
        wm[word] += count;
        fm[feature] += count;
        total += count;
      }
    }
    CHECK(counts.total == total);
    CHECK(counts.word_marginals == wm);
    CHECK(counts.feature_marginals == fm);
  }
}

TEST_CASE("syntactic ngram lines decompose into dep:word features") {
  std::istringstream in(
      "cat\tcat/NN/nsubj/0 purrs/VBZ/ccomp/1 the/DT/det/1\t9\t1950,3 1990,6\n"
      "cat\tcat/NN/nsubj/0 sleeps/VBZ/ccomp/1\t4\t1990,4\n");
  corpus::IngestOptions options;
  options.years = corpus::YearRange{1980, 2000};
  auto counts =
      corpus::ingest_counts(in, corpus::CountsFormat::kSynNgramTsv, "t2", options);

  CHECK(counts.pair_counts.at("cat").at("ccomp:purrs") == 6);  // 1950 filtered out
  CHECK(counts.pair_counts.at("cat").at("det:the") == 6);
  CHECK(counts.pair_counts.at("cat").at("ccomp:sleeps") == 4);
  CHECK(counts.pos_tags.at("cat") == "NN");

  // Out-of-range lines are skipped, not malformed.
  std::istringstream in2("cat\tcat/NN/nsubj/0 purrs/VBZ/ccomp/1\t3\t1950,3\n");
  auto counts2 =
      corpus::ingest_counts(in2, corpus::CountsFormat::kSynNgramTsv, "t2", options);
  CHECK(counts2.total == 0);
  CHECK(counts2.stats.skipped == 1);
  CHECK(counts2.stats.malformed == 0);
}

TEST_CASE("lmi exact values") {
  CHECK(corpus::lmi_score(4, 8, 8, 64) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(corpus::lmi_score(1, 77, 1, 77) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(corpus::lmi_score(2, 4, 4, 8) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(corpus::lmi_score(0, 1, 1, 1), Error);
}

TEST_CASE("lmi monotone in pair count above independence") {
  // With marginals and total fixed and count*total > wm*fm, a bigger count
  // scores strictly higher.
  double prev = corpus::lmi_score(3, 10, 10, 40);
  for (std::uint64_t count = 4; count <= 10; ++count) {
    double cur = corpus::lmi_score(count, 10, 10, 40);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("top_features matches brute-force oracle on random tables") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 25; ++round) {
    std::ostringstream text;
    for (int i = 0; i < 80; ++i)
      text << "w" << rng() % 10 << "\tf" << rng() % 50 << "\t" << 1 + rng() % 6 << "\n";
    auto counts = ingest_pairs(text.str());

    for (const auto& [word, features] : counts.pair_counts) {
      // Oracle: score every feature, sort, truncate.
      std::vector<std::pair<std::string, double>> oracle;
      for (const auto& [feature, count] : features)
        oracle.emplace_back(feature,
                            corpus::lmi_score(count, counts.word_marginals.at(word),
                                              counts.feature_marginals.at(feature),
                                              counts.total));
      std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      const std::size_t k = 1 + round % 8;
      if (oracle.size() > k) oracle.resize(k);

      auto ranked = corpus::top_features(counts, word, k);
      REQUIRE(ranked.features.size() == oracle.size());
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(ranked.features[i].first == oracle[i].first);
        CHECK(ranked.features[i].second == doctest::Approx(oracle[i].second));
      }
    }
  }
}

TEST_CASE("top_features edge cases") {
  auto counts = ingest_pairs("w\ta\t4\nw\tb\t4\nw\tc\t1\nv\ta\t2\n");
  // k larger than the feature count returns everything.
  CHECK(corpus::top_features(counts, "w", 100).features.size() == 3);
  // Tie between a and b: same pair count but different feature marginals, so
  // craft a genuinely tied pair instead: b and c for word v... use w's a/b
  // with equal marginals by adding v\tb\t2.
  auto tied = ingest_pairs("w\ta\t4\nw\tb\t4\nv\ta\t2\nv\tb\t2\n");
  auto ranked = corpus::top_features(tied, "w", 1);
  REQUIRE(ranked.features.size() == 1);
  CHECK(ranked.features[0].first == "a");  // lexicographic tie-break

  CHECK_THROWS_AS(corpus::top_features(counts, "absent", 5), Error);
}

}  // TEST_SUITE
