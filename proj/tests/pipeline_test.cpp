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

#include "dtsense/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dtsense/error.hpp"

namespace pipeline = dtsense::pipeline;
namespace evalkit = dtsense::evalkit;
using dtsense::ConfigError;

namespace {

namespace fs = std::filesystem;

const fs::path kDataDir = DTSENSE_DATA_DIR;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("dtsense_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A small planted corpus written to disk, plus a matching run config.
pipeline::RunConfig synth_config(const TempDir& dir, std::uint64_t seed) {
  evalkit::SynthSpec spec;
  spec.vocabulary_size = 90;
  spec.community_size = 6;
  spec.features_per_sense = 8;
  spec.senses_max = 2;
  spec.births = 5;
  spec.birth_cohort = 5;
  spec.drifts = 2;
  spec.noise_rate = 0.05;
  spec.seed = seed;
  auto corpus = evalkit::generate_corpus(spec);
  evalkit::write_corpus(corpus, spec, dir.path / "corpus");

  pipeline::RunConfig config;
  config.epoch1.path = dir.path / "corpus" / "epoch1.tsv";
  config.epoch1.label = "t1";
  config.epoch2.path = dir.path / "corpus" / "epoch2.tsv";
  config.epoch2.label = "t2";
  config.filter.band_low = 0.0;  // synthetic frequencies are near-uniform
  config.filter.band_high = 1.0;
  config.train_data = kDataDir / "seed_labeled.tsv";
  config.truth_path = dir.path / "corpus" / "truth.txt";
  config.output_dir = dir.path / "out";
  config.seed = seed;
  return config;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config validation rejects bad input") {
  TempDir dir("pipeline_config");
  auto config = synth_config(dir, 1);
  CHECK_NOTHROW(config.validate());

  auto missing = config;
  missing.epoch1.path = dir.path / "nope.tsv";
  CHECK_THROWS_AS(missing.validate(), ConfigError);

  auto threshold = config;
  threshold.birth_threshold = 1.1;
  CHECK_THROWS_AS(threshold.validate(), ConfigError);

  auto both = config;
  both.model_path = kDataDir / "seed_labeled.tsv";  // train_data also set
  CHECK_THROWS_AS(both.validate(), ConfigError);

  auto neither = config;
  neither.train_data.clear();
  CHECK_THROWS_AS(neither.validate(), ConfigError);

  auto band = config;
  band.filter.band_low = 0.9;
  band.filter.band_high = 0.1;
  CHECK_THROWS_AS(band.validate(), ConfigError);
}

TEST_CASE("config file parsing with overrides") {
  TempDir dir("pipeline_conf_file");
  {
    std::ofstream conf(dir.path / "run.conf");
    conf << "# comment\n"
         << "epoch1.path=e1.tsv\nepoch1.label=t1\n"
         << "epoch2.path=e2.tsv\nepoch2.label=t2\n"
         << "top_k=500\nego_n=100\nbirth_threshold=0.75\n"
         << "apl_mode=fractional\nseed=9\n"
         << "band_low=0.1\nband_high=0.9\npos_allow=NN\n";
  }
  auto config = pipeline::RunConfig::from_file(dir.path / "run.conf");
  CHECK(config.epoch1.path == dir.path / "e1.tsv");  // relative to the config
  CHECK(config.top_k == 500);
  CHECK(config.ego_n == 100);
  CHECK(config.birth_threshold == 0.75);
  CHECK(config.apl_mode == dtsense::netfeat::AplMode::kFractional);
  CHECK(config.seed == 9);
  CHECK(config.filter.pos_allow == std::vector<std::string>{"NN"});

  config.apply_override("seed", "11", {});
  CHECK(config.seed == 11);
  CHECK_THROWS_AS(config.apply_override("no_such_key", "1", {}), ConfigError);

  // Config hash tracks semantic changes.
  auto h1 = config.config_hash();
  config.apply_override("birth_threshold", "0.8", {});
  CHECK(config.config_hash() != h1);
}

TEST_CASE("full run recovers planted births and reports them") {
  TempDir dir("pipeline_run");
  auto config = synth_config(dir, 42);
  auto result = pipeline::run_pipeline(config);

  CHECK(result.targets > 0);
  REQUIRE(result.report.has_value());
  // Noise-free-ish small corpus: every planted birth is found and the drift
  // decoys are rejected by the classifier.
  CHECK(result.report->fn == 0);
  CHECK(result.report->fp == 0);
  REQUIRE(result.report->precision.has_value());
  CHECK(*result.report->precision == doctest::Approx(1.0));
  CHECK(*result.report->recall == doctest::Approx(1.0));

  for (const char* name :
       {"run_meta.txt", "dt_old.tsv", "dt_old.tsv.vocab", "dt_new.tsv", "targets.txt",
        "clusters_old.tsv", "clusters_new.tsv", "candidates.tsv", "features.tsv",
        "model.txt", "verdicts.tsv", "report.txt", "report.json"})
    CHECK(fs::exists(dir.path / "out" / name));

  // The unfiltered detector saw the drift decoys too.
  auto candidates = pipeline::read_candidates(dir.path / "out" / "candidates.tsv");
  CHECK(candidates.size() > result.report->tp);
}

TEST_CASE("rerun with the same config and seed is byte-identical") {
  TempDir dir("pipeline_rerun");
  auto config = synth_config(dir, 7);
  config.output_dir = dir.path / "out1";
  pipeline::run_pipeline(config);
  config.output_dir = dir.path / "out2";
  pipeline::run_pipeline(config);

  for (const char* name : {"candidates.tsv", "features.tsv", "verdicts.tsv", "model.txt",
                           "clusters_old.tsv", "clusters_new.tsv", "targets.txt"})
    CHECK(slurp(dir.path / "out1" / name) == slurp(dir.path / "out2" / name));
}

TEST_CASE("stage-by-stage composition equals the orchestrated run") {
  TempDir dir("pipeline_stages");
  auto config = synth_config(dir, 13);
  config.output_dir = dir.path / "ref";
  pipeline::run_pipeline(config);

  // Same stages, driven by hand through the file interfaces.
  fs::path out = dir.path / "manual";
  fs::create_directories(out);
  auto dt_old = pipeline::stage_build_dt(config.epoch1, config.top_k, config.min_shared,
                                         config.ego_n, config.seed, out / "dt_old.tsv");
  auto dt_new = pipeline::stage_build_dt(config.epoch2, config.top_k, config.min_shared,
                                         config.ego_n, config.seed, out / "dt_new.tsv");
  auto targets = pipeline::derive_targets(dt_old, dt_new);
  pipeline::write_targets(targets, config.seed, out / "targets.txt");

  pipeline::ClusterStageOptions cluster_options;
  cluster_options.ego_n = config.ego_n;
  cluster_options.min_cluster_size = config.min_cluster_size;
  cluster_options.max_iters = config.cw_max_iters;
  pipeline::stage_cluster(dt_old, targets, cluster_options, config.seed,
                          out / "clusters_old.tsv");
  pipeline::stage_cluster(dt_new, targets, cluster_options, config.seed,
                          out / "clusters_new.tsv");

  auto counts_new = dtsense::corpus::ingest_counts_file(
      config.epoch2.path.string(), config.epoch2.format, config.epoch2.label, {});
  pipeline::DiffOptions diff_options;
  diff_options.threshold = config.birth_threshold;
  diff_options.filter = config.filter;
  pipeline::stage_diff(out / "clusters_old.tsv", out / "clusters_new.tsv", &counts_new,
                       diff_options, config.seed, out / "candidates.tsv");

  pipeline::stage_featurize(out / "candidates.tsv", dt_old, dt_new, config.apl_mode,
                            config.seed, out / "features.tsv");
  auto model = pipeline::stage_train(config.train_data, config.svm_c, config.svm_tol,
                                     config.seed, out / "model.txt");
  pipeline::stage_predict(model, out / "features.tsv", config.seed, out / "verdicts.tsv");

  for (const char* name : {"dt_old.tsv", "dt_new.tsv", "targets.txt", "clusters_old.tsv",
                           "clusters_new.tsv", "candidates.tsv", "features.tsv",
                           "model.txt", "verdicts.tsv"})
    CHECK(slurp(dir.path / "ref" / name) == slurp(out / name));
}

TEST_CASE("bundled toy corpus run matches its shipped ground truth") {
  TempDir dir("pipeline_toy");
  auto config = pipeline::RunConfig::from_file(kDataDir / "toy" / "toy.conf");
  config.output_dir = dir.path / "out";
  auto result = pipeline::run_pipeline(config);

  auto truth = pipeline::read_word_set(kDataDir / "toy" / "truth.txt");
  std::set<std::string> flagged(result.flagged_words.begin(), result.flagged_words.end());
  CHECK(flagged == truth);
  REQUIRE(result.report.has_value());
  CHECK(*result.report->f1 == doctest::Approx(1.0));
}

TEST_CASE("stage file readers reject foreign files") {
  TempDir dir("pipeline_readers");
  {
    std::ofstream bad(dir.path / "bad.tsv");
    bad << "#dtsense verdicts v1 params=0 seed=0\nw\ttrue_birth\t0.5\n";
  }
  CHECK_THROWS_AS(pipeline::read_candidates(dir.path / "bad.tsv"), dtsense::FormatError);
  auto verdicts = pipeline::read_verdicts(dir.path / "bad.tsv");
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].target == "w");
  CHECK(verdicts[0].label == dtsense::classify::Label::kTrueBirth);
}

}  // TEST_SUITE
