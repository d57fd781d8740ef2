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

#include <CLI11.hpp>

#include <iostream>
#include <set>
#include <string>

#include "dtsense/error.hpp"
#include "dtsense/pipeline.hpp"
#include "dtsense/util.hpp"

namespace {

using dtsense::ConfigError;
using dtsense::Error;
namespace corpus = dtsense::corpus;
namespace classify = dtsense::classify;
namespace evalkit = dtsense::evalkit;
namespace netfeat = dtsense::netfeat;
namespace pipeline = dtsense::pipeline;

corpus::CountsFormat parse_format(const std::string& name) {
  if (name == "pair-tsv") return corpus::CountsFormat::kPairTsv;
  if (name == "syn-ngram-tsv") return corpus::CountsFormat::kSynNgramTsv;
  throw ConfigError("unknown corpus format: " + name);
}

netfeat::AplMode parse_apl_mode(const std::string& name) {
  if (name == "absolute") return netfeat::AplMode::kAbsolute;
  if (name == "fractional") return netfeat::AplMode::kFractional;
  throw ConfigError("apl mode must be absolute or fractional");
}

struct EpochCli {
  std::string path;
  std::string format = "pair-tsv";
  std::string label;
  int year_from = -1;
  int year_to = -1;

  pipeline::EpochConfig to_config() const {
    pipeline::EpochConfig config;
    config.path = path;
    config.format = parse_format(format);
    config.label = label;
    if (year_from >= 0 || year_to >= 0) {
      if (year_from < 0 || year_to < 0)
        throw ConfigError("set both --year-from and --year-to, or neither");
      config.years = corpus::YearRange{year_from, year_to};
    }
    return config;
  }
};

void add_epoch_options(CLI::App* cmd, EpochCli* epoch) {
  cmd->add_option("--input", epoch->path, "count file")->required();
  cmd->add_option("--format", epoch->format, "pair-tsv or syn-ngram-tsv");
  cmd->add_option("--epoch", epoch->label, "epoch label")->required();
  cmd->add_option("--year-from", epoch->year_from, "first year of the slice");
  cmd->add_option("--year-to", epoch->year_to, "last year of the slice");
}

// Builds the subcommand tree and parses; option storage must stay alive
// until the callbacks have run, so parsing happens in this scope.
void dispatch(CLI::App& app, int argc, char** argv) {
  // ---- run ----
  auto* run = app.add_subcommand("run", "run the full detection pipeline from a config");
  std::string run_config_path;
  std::vector<std::string> run_overrides;
  run->add_option("--config", run_config_path, "key=value run config")->required();
  run->add_option("--set", run_overrides, "override a config key, e.g. --set seed=7");
  run->callback([&] {
    auto config = pipeline::RunConfig::from_file(run_config_path);
    for (const auto& kv : run_overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + kv);
      config.apply_override(kv.substr(0, eq), kv.substr(eq + 1),
                            std::filesystem::current_path());
    }
    auto result = pipeline::run_pipeline(config);
    std::cout << "targets " << result.targets << ", candidates " << result.candidates
              << ", births flagged " << result.births_flagged << "\n";
    if (result.report) std::cout << result.report->to_text();
    std::cout << "outputs in " << result.output_dir.string() << "\n";
  });

  // ---- build-dt ----
  auto* build = app.add_subcommand("build-dt", "ingest one epoch and build its DT network");
  EpochCli build_epoch;
  std::size_t build_k = 1000, build_ego_n = 200;
  std::uint32_t build_min_shared = 1;
  std::uint64_t build_seed = 1;
  std::string build_out;
  add_epoch_options(build, &build_epoch);
  build->add_option("--top-k", build_k, "features kept per word");
  build->add_option("--min-shared", build_min_shared, "minimum shared features per edge");
  build->add_option("--ego-n", build_ego_n, "default ego-network size recorded in the file");
  build->add_option("--seed", build_seed, "seed recorded in the file");
  build->add_option("-o,--output", build_out, "output DT path")->required();
  build->callback([&] {
    auto dt = pipeline::stage_build_dt(build_epoch.to_config(), build_k, build_min_shared,
                                       build_ego_n, build_seed, build_out);
    std::cout << "dt " << build_out << ": " << dt.node_count() << " words, "
              << dt.edge_count() << " edges\n";
  });

  // ---- targets ----
  auto* targets_cmd = app.add_subcommand(
      "targets", "derive the default target list from a DT pair");
  std::string targets_dt_old, targets_dt_new, targets_out;
  std::uint64_t targets_seed = 1;
  targets_cmd->add_option("--dt-old", targets_dt_old, "old-epoch DT")->required();
  targets_cmd->add_option("--dt-new", targets_dt_new, "new-epoch DT")->required();
  targets_cmd->add_option("--seed", targets_seed, "seed recorded in the file");
  targets_cmd->add_option("-o,--output", targets_out, "targets path")->required();
  targets_cmd->callback([&] {
    auto dt_old = dtsense::dtgraph::load_dt(targets_dt_old);
    auto dt_new = dtsense::dtgraph::load_dt(targets_dt_new);
    auto targets = pipeline::derive_targets(dt_old, dt_new);
    pipeline::write_targets(targets, targets_seed, targets_out);
    std::cout << targets.size() << " targets written to " << targets_out << "\n";
  });

  // ---- cluster ----
  auto* cluster = app.add_subcommand("cluster", "sense-cluster target ego networks");
  std::string cluster_dt, cluster_targets, cluster_out;
  pipeline::ClusterStageOptions cluster_options;
  bool cluster_ego_set = false;
  std::uint64_t cluster_seed = 1;
  cluster->add_option("--dt", cluster_dt, "DT network file")->required();
  cluster->add_option("--targets", cluster_targets, "targets file (default: all words)");
  cluster->add_option("--ego-n", cluster_options.ego_n, "ego-network size")
      ->each([&](const std::string&) { cluster_ego_set = true; });
  cluster->add_option("--min-cluster-size", cluster_options.min_cluster_size,
                      "drop smaller clusters");
  cluster->add_option("--max-iters", cluster_options.max_iters, "propagation cap");
  cluster->add_option("--seed", cluster_seed, "run seed")->required();
  cluster->add_option("-o,--output", cluster_out, "cluster dump path")->required();
  cluster->callback([&] {
    auto dt = dtsense::dtgraph::load_dt(cluster_dt);
    if (!cluster_ego_set) cluster_options.ego_n = dt.meta().ego_n;
    std::vector<std::string> targets;
    if (!cluster_targets.empty()) {
      targets = pipeline::read_targets(cluster_targets);
    } else {
      targets = dt.words();
      std::sort(targets.begin(), targets.end());
    }
    pipeline::stage_cluster(dt, targets, cluster_options, cluster_seed, cluster_out);
    std::cout << "clusters written to " << cluster_out << "\n";
  });

  // ---- diff ----
  auto* diff = app.add_subcommand("diff", "emit birth candidates from two cluster dumps");
  std::string diff_old, diff_new, diff_out;
  EpochCli diff_counts;
  bool diff_has_counts = false;
  pipeline::DiffOptions diff_options;
  std::string diff_pos = "NN,NNS";
  double diff_js = -1.0;
  std::uint64_t diff_seed = 1;
  diff->add_option("--old", diff_old, "old-epoch cluster dump")->required();
  diff->add_option("--new", diff_new, "new-epoch cluster dump")->required();
  diff->add_option("--counts", diff_counts.path,
                   "new-epoch count file enabling the POS/frequency filters")
      ->each([&](const std::string&) { diff_has_counts = true; });
  diff->add_option("--format", diff_counts.format, "count file format");
  diff->add_option("--epoch", diff_counts.label, "count file epoch label");
  diff->add_option("--year-from", diff_counts.year_from, "first year of the slice");
  diff->add_option("--year-to", diff_counts.year_to, "last year of the slice");
  diff->add_option("--threshold", diff_options.threshold, "novelty threshold");
  diff->add_option("--pos-allow", diff_pos, "comma list of kept tags; empty disables");
  diff->add_option("--band-low", diff_options.filter.band_low, "frequency band lower edge");
  diff->add_option("--band-high", diff_options.filter.band_high, "frequency band upper edge");
  diff->add_option("--js-threshold", diff_js, "enable the similarity alignment filter");
  diff->add_option("--seed", diff_seed, "seed recorded in the file");
  diff->add_option("-o,--output", diff_out, "candidates path")->required();
  diff->callback([&] {
    diff_options.filter.pos_allow.clear();
    for (const auto& tag : dtsense::util::split(diff_pos, ','))
      if (!dtsense::util::trim(tag).empty())
        diff_options.filter.pos_allow.push_back(dtsense::util::trim(tag));
    if (diff_js >= 0.0) diff_options.js_threshold = diff_js;

    std::optional<corpus::TimeSliceCounts> counts;
    if (diff_has_counts) {
      if (diff_counts.label.empty()) diff_counts.label = "new";
      auto epoch = diff_counts.to_config();
      corpus::IngestOptions ingest_options;
      ingest_options.years = epoch.years;
      counts = corpus::ingest_counts_file(epoch.path.string(), epoch.format, epoch.label,
                                          ingest_options);
    }
    pipeline::stage_diff(diff_old, diff_new, counts ? &*counts : nullptr, diff_options,
                         diff_seed, diff_out);
    std::cout << "candidates written to " << diff_out << "\n";
  });

  // ---- featurize ----
  auto* feat = app.add_subcommand("featurize", "compute delta features for candidates");
  std::string feat_candidates, feat_dt_old, feat_dt_new, feat_out;
  std::string feat_mode = "absolute";
  std::uint64_t feat_seed = 1;
  feat->add_option("--candidates", feat_candidates, "candidates file")->required();
  feat->add_option("--dt-old", feat_dt_old, "old-epoch DT")->required();
  feat->add_option("--dt-new", feat_dt_new, "new-epoch DT")->required();
  feat->add_option("--apl-mode", feat_mode, "absolute or fractional");
  feat->add_option("--seed", feat_seed, "seed recorded in the file");
  feat->add_option("-o,--output", feat_out, "features path")->required();
  feat->callback([&] {
    auto dt_old = dtsense::dtgraph::load_dt(feat_dt_old);
    auto dt_new = dtsense::dtgraph::load_dt(feat_dt_new);
    pipeline::stage_featurize(feat_candidates, dt_old, dt_new, parse_apl_mode(feat_mode),
                              feat_seed, feat_out);
    std::cout << "features written to " << feat_out << "\n";
  });

  // ---- train ----
  auto* train = app.add_subcommand("train", "train the birth classifier");
  std::string train_data, train_out;
  double train_c = 1.0, train_tol = 1e-6;
  std::uint64_t train_seed = 1;
  train->add_option("--data", train_data, "labeled TSV")->required();
  train->add_option("--c", train_c, "soft-margin cost");
  train->add_option("--tol", train_tol, "duality-gap tolerance");
  train->add_option("--seed", train_seed, "training seed")->required();
  train->add_option("-o,--output", train_out, "model path")->required();
  train->callback([&] {
    auto model = pipeline::stage_train(train_data, train_c, train_tol, train_seed, train_out);
    std::cout << "model written to " << train_out << " (passes " << model.meta.passes
              << ", gap " << model.meta.gap << ")\n";
  });

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "classify candidate feature rows");
  std::string predict_model, predict_features, predict_out;
  std::uint64_t predict_seed = 1;
  predict->add_option("--model", predict_model, "model file")->required();
  predict->add_option("--features", predict_features, "features file")->required();
  predict->add_option("--seed", predict_seed, "seed recorded in the file");
  predict->add_option("-o,--output", predict_out, "verdicts path")->required();
  predict->callback([&] {
    auto model = classify::load_model(predict_model);
    pipeline::stage_predict(model, predict_features, predict_seed, predict_out);
    std::cout << "verdicts written to " << predict_out << "\n";
  });

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "score detected words against ground truth");
  std::string eval_detected, eval_verdicts, eval_truth, eval_pool, eval_out;
  eval->add_option("--detected", eval_detected, "file of detected words");
  eval->add_option("--verdicts", eval_verdicts, "verdicts file (true births = detected)");
  eval->add_option("--truth", eval_truth, "ground-truth word file")->required();
  eval->add_option("--pool", eval_pool, "candidate pool word file")->required();
  eval->add_option("-o,--output", eval_out, "report prefix (.txt/.tsv/.json)");
  eval->callback([&] {
    if (eval_detected.empty() == eval_verdicts.empty())
      throw ConfigError("eval: set exactly one of --detected / --verdicts");
    std::set<std::string> detected;
    if (!eval_detected.empty()) {
      detected = pipeline::read_word_set(eval_detected);
    } else {
      for (const auto& row : pipeline::read_verdicts(eval_verdicts))
        if (row.label == classify::Label::kTrueBirth) detected.insert(row.target);
    }
    auto report = evalkit::score(detected, pipeline::read_word_set(eval_truth),
                                 pipeline::read_word_set(eval_pool));
    std::cout << report.to_text();
    if (!eval_out.empty()) {
      std::ofstream(eval_out + ".txt") << report.to_text();
      std::ofstream(eval_out + ".tsv") << report.to_tsv();
      std::ofstream(eval_out + ".json") << report.to_json_lines();
    }
  });

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic diachronic corpus pair");
  std::string synth_spec, synth_out;
  synth->add_option("--spec", synth_spec, "synth spec (key=value)")->required();
  synth->add_option("-o,--output", synth_out, "output directory")->required();
  synth->callback([&] {
    auto spec = evalkit::SynthSpec::from_file(synth_spec);
    auto corpus_pair = evalkit::generate_corpus(spec);
    evalkit::write_corpus(corpus_pair, spec, synth_out);
    std::cout << "synthetic corpus in " << synth_out << " ("
              << corpus_pair.birth_words.size() << " births, "
              << corpus_pair.drift_words.size() << " drifts)\n";
  });

  app.require_subcommand(1);
  app.parse(argc, argv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtsense: novel word sense detection over distributional thesaurus networks"};
  try {
    dispatch(app, argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a validation failure
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
