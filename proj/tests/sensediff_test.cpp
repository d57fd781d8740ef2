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

#include <doctest.h>

#include <random>
#include <sstream>

#include "dtsense/error.hpp"

namespace sensediff = dtsense::sensediff;
namespace cwcluster = dtsense::cwcluster;
namespace corpus = dtsense::corpus;
using dtsense::Error;

namespace {

cwcluster::SenseClustering clustering_of(std::string target,
                                         std::vector<std::vector<std::string>> clusters,
                                         std::string epoch = "t") {
  cwcluster::SenseClustering c;
  c.target = std::move(target);
  for (auto& cluster : clusters) {
    std::sort(cluster.begin(), cluster.end());
    c.clusters.push_back(std::move(cluster));
  }
  c.epoch_label = std::move(epoch);
  return c;
}

std::map<std::string, double> dist(std::vector<std::pair<std::string, double>> entries) {
  return {entries.begin(), entries.end()};
}

corpus::TimeSliceCounts counts_from(const std::string& text) {
  std::istringstream in(text);
  return corpus::ingest_counts(in, corpus::CountsFormat::kPairTsv, "new");
}

}  // namespace

TEST_SUITE("sensediff") {

TEST_CASE("birth rule boundary at 80 percent") {
  auto old_c = clustering_of("w", {{"a"}}, "t1");
  auto new_c = clustering_of("w", {{"a", "b", "c", "d", "e"}}, "t2");
  // 4 of 5 words novel: exactly at the threshold, inclusive.
  auto births = sensediff::detect_births(old_c, new_c, 0.8);
  REQUIRE(births.size() == 1);
  CHECK(births[0].novelty_ratio == doctest::Approx(0.8));
  CHECK(births[0].target == "w");
  CHECK(births[0].old_epoch == "t1");
  CHECK(births[0].new_epoch == "t2");

  // 3 of 5 novel: rejected.
  auto old2 = clustering_of("w", {{"a", "b"}}, "t1");
  CHECK(sensediff::detect_births(old2, new_c, 0.8).empty());
}

TEST_CASE("empty old clustering makes every new cluster a birth") {
  auto old_c = clustering_of("w", {}, "t1");
  auto new_c = clustering_of("w", {{"a", "b"}, {"c", "d"}}, "t2");
  auto births = sensediff::detect_births(old_c, new_c);
  REQUIRE(births.size() == 2);
  CHECK(births[0].novelty_ratio == doctest::Approx(1.0));
  CHECK(births[1].novelty_ratio == doctest::Approx(1.0));
}

TEST_CASE("threshold extremes and target mismatch") {
  auto old_c = clustering_of("w", {{"a", "b", "c"}}, "t1");
  auto new_c = clustering_of("w", {{"a", "b", "c"}, {"x", "y"}}, "t2");
  CHECK(sensediff::detect_births(old_c, new_c, 0.0).size() == 2);
  CHECK(sensediff::detect_births(old_c, new_c, 1.1).empty());
  auto other = clustering_of("v", {}, "t1");
  CHECK_THROWS_AS(sensediff::detect_births(other, new_c), Error);
}

TEST_CASE("novelty ratios always clear the threshold") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 40; ++round) {
    std::vector<std::vector<std::string>> old_clusters, new_clusters;
    for (int c = 0; c < 3; ++c) {
      std::vector<std::string> cluster;
      for (int i = 0; i < 4; ++i) cluster.push_back("w" + std::to_string(rng() % 20));
      std::sort(cluster.begin(), cluster.end());
      cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
      (c < 2 ? old_clusters : new_clusters).push_back(cluster);
    }
    new_clusters.push_back(old_clusters[0]);
    double threshold = (rng() % 100) / 100.0;
    auto births = sensediff::detect_births(clustering_of("t", old_clusters),
                                           clustering_of("t", new_clusters), threshold);
    for (const auto& birth : births) {
      CHECK(birth.novelty_ratio >= threshold);
      CHECK(birth.novelty_ratio <= 1.0);
    }
  }
}

TEST_CASE("filter: pos allow-list with skip rule") {
  auto counts = counts_from("w\tf\t5\nv\tf\t5\n");
  counts.pos_tags["w"] = "VB";

  sensediff::BirthCandidate wb{"w", {"a"}, 1.0, "t1", "t2"};
  sensediff::BirthCandidate vb{"v", {"a"}, 1.0, "t1", "t2"};
  sensediff::FilterOptions options;
  options.band_low = 0.0;
  options.band_high = 1.0;

  auto kept = sensediff::filter_candidates({wb, vb}, counts, options);
  // w is tagged VB: dropped. v has no tag: the check is skipped.
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].target == "v");

  counts.pos_tags["w"] = "NN";
  CHECK(sensediff::filter_candidates({wb}, counts, options).size() == 1);
}

TEST_CASE("filter: frequency band keeps the middle") {
  // Ten words with strictly increasing marginals w0 < w1 < ... < w9.
  std::ostringstream text;
  for (int i = 0; i < 10; ++i) text << "w" << i << "\tf\t" << (i + 1) * 10 << "\n";
  auto counts = counts_from(text.str());

  auto candidate = [](const std::string& word) {
    return sensediff::BirthCandidate{word, {"x"}, 1.0, "t1", "t2"};
  };
  sensediff::FilterOptions options;  // band [0.2, 0.8]
  options.pos_allow.clear();

  // Percentiles run 0/9 .. 9/9, so w2..w7 stay inside [0.2, 0.8].
  auto kept = sensediff::filter_candidates(
      {candidate("w0"), candidate("w1"), candidate("w2"), candidate("w7"),
       candidate("w8"), candidate("w9")},
      counts, options);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].target == "w2");
  CHECK(kept[1].target == "w7");

  // A word missing from the marginals skips the band check.
  CHECK(sensediff::filter_candidates({candidate("ghost")}, counts, options).size() == 1);
}

TEST_CASE("js similarity unit values") {
  auto p = dist({{"a", 0.5}, {"b", 0.5}});
  CHECK(sensediff::js_similarity(p, p) == doctest::Approx(1.0).epsilon(1e-12));

  auto q = dist({{"c", 0.5}, {"d", 0.5}});
  CHECK(sensediff::js_similarity(p, q) == doctest::Approx(0.0).epsilon(1e-12));

  auto r = dist({{"b", 0.5}, {"c", 0.5}});
  CHECK(sensediff::js_similarity(p, r) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(sensediff::js_similarity(dist({{"a", 0.7}}), p), Error);
}

TEST_CASE("js similarity symmetry and bounds on random distributions") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 50; ++round) {
    auto random_dist = [&rng]() {
      std::map<std::string, double> d;
      double total = 0.0;
      int support = 1 + rng() % 8;
      for (int i = 0; i < support; ++i) {
        double mass = 1 + rng() % 1000;
        d["w" + std::to_string(rng() % 12)] += mass;
        total += mass;
      }
      for (auto& [w, v] : d) v /= total;
      return d;
    };
    auto p = random_dist();
    auto q = random_dist();
    double pq = sensediff::js_similarity(p, q);
    double qp = sensediff::js_similarity(q, p);
    CHECK(pq == doctest::Approx(qp).epsilon(1e-12));
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
  }
}

TEST_CASE("js birth check applies the 0.35 threshold") {
  std::vector<std::string> fresh = {"x", "y"};
  std::vector<std::vector<std::string>> old_clusters = {{"a", "b"}, {"c", "d"}};
  CHECK(sensediff::js_birth_check(fresh, old_clusters));        // max sim 0 < 0.35
  CHECK(!sensediff::js_birth_check({"a", "b"}, old_clusters));  // identical: sim 1
  // Half overlap scores 0.5, at least 0.35: not a birth.
  CHECK(!sensediff::js_birth_check({"b", "x"}, {{"b", "c"}}));
  // No old clusters at all: trivially novel.
  CHECK(sensediff::js_birth_check(fresh, {}));
  CHECK_THROWS_AS(sensediff::js_birth_check({}, old_clusters), Error);
}

}  // TEST_SUITE
