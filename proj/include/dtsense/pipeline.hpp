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

#ifndef DTSENSE_PIPELINE_HPP_
#define DTSENSE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtsense/classify.hpp"
#include "dtsense/corpus.hpp"
#include "dtsense/cwcluster.hpp"
#include "dtsense/dtgraph.hpp"
#include "dtsense/evalkit.hpp"
#include "dtsense/netfeat.hpp"
#include "dtsense/sensediff.hpp"

namespace dtsense::pipeline {

struct EpochConfig {
  std::filesystem::path path;
  corpus::CountsFormat format = corpus::CountsFormat::kPairTsv;
  std::string label;
  std::optional<corpus::YearRange> years;
};

// Full-run configuration. Knob defaults follow the module contracts; the
// config file is key=value with '#' comments, and relative paths resolve
// against the config file's directory.
struct RunConfig {
  EpochConfig epoch1;
  EpochConfig epoch2;
  std::size_t top_k = 1000;
  std::size_t ego_n = 200;
  std::uint32_t min_shared = 1;
  std::size_t min_cluster_size = 4;
  std::size_t cw_max_iters = 20;
  double birth_threshold = 0.8;
  sensediff::FilterOptions filter;
  std::optional<double> js_threshold;  // optional alignment filter stage
  netfeat::AplMode apl_mode = netfeat::AplMode::kAbsolute;
  std::filesystem::path model_path;    // exactly one of model_path /
  std::filesystem::path train_data;    // train_data must be set
  double svm_c = 1.0;
  double svm_tol = 1e-6;
  std::optional<std::filesystem::path> targets_path;
  std::optional<std::filesystem::path> truth_path;
  std::filesystem::path output_dir;
  std::uint64_t seed = 1;

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_kv(const std::map<std::string, std::string>& kv,
                           const std::filesystem::path& base_dir);
  void apply_override(const std::string& key, const std::string& value,
                      const std::filesystem::path& base_dir);
  void validate() const;  // throws ConfigError

  // Stable textual form of every semantic knob (paths of inputs included,
  // output_dir excluded); its FNV-1a hash identifies the run.
  std::string canonical_text() const;
  std::uint64_t config_hash() const;
};

struct PipelineResult {
  std::size_t targets = 0;
  std::size_t candidates = 0;
  std::size_t births_flagged = 0;
  std::vector<std::string> flagged_words;  // sorted, deduplicated
  std::optional<evalkit::EvalReport> report;
  std::filesystem::path output_dir;
};

// Runs every stage in order, persisting each stage's output under
// config.output_dir. A failing stage aborts with its name in the error;
// earlier outputs stay on disk.
PipelineResult run_pipeline(const RunConfig& config);

// ---------------------------------------------------------------------------
// Stage functions. run_pipeline is exactly this sequence, and each CLI
// subcommand wraps exactly one of them, so a stage-by-stage run reproduces
// the pipeline's files byte for byte. Every output embeds a hash of the
// producing stage's semantic parameters plus the seed.

struct ClusterStageOptions {
  std::size_t ego_n = 200;
  std::size_t min_cluster_size = 4;
  std::size_t max_iters = 20;
};

struct DiffOptions {
  double threshold = 0.8;
  sensediff::FilterOptions filter;
  std::optional<double> js_threshold;
};

// Ingests one epoch and writes its DT network (plus .vocab sidecar).
dtgraph::DtNetwork stage_build_dt(const EpochConfig& epoch, std::size_t top_k,
                                  std::uint32_t min_shared, std::size_t ego_n,
                                  std::uint64_t seed, const std::filesystem::path& out);

// Derives the default target list: words present in both DTs with at least
// one neighbor in the new epoch.
std::vector<std::string> derive_targets(const dtgraph::DtNetwork& dt_old,
                                        const dtgraph::DtNetwork& dt_new);

void write_targets(const std::vector<std::string>& targets, std::uint64_t seed,
                   const std::filesystem::path& out);
std::vector<std::string> read_targets(const std::filesystem::path& path);

// Stable sense clusters per target on one DT. Targets missing from the DT
// (or with empty ego networks) simply produce no clusters.
void stage_cluster(const dtgraph::DtNetwork& dt, const std::vector<std::string>& targets,
                   const ClusterStageOptions& options, std::uint64_t seed,
                   const std::filesystem::path& out);

// Compares the two cluster dumps and writes birth candidates. counts_new, if
// given, enables the part-of-speech and frequency-band filters.
void stage_diff(const std::filesystem::path& clusters_old,
                const std::filesystem::path& clusters_new,
                const corpus::TimeSliceCounts* counts_new, const DiffOptions& options,
                std::uint64_t seed, const std::filesystem::path& out);

void stage_featurize(const std::filesystem::path& candidates,
                     const dtgraph::DtNetwork& dt_old, const dtgraph::DtNetwork& dt_new,
                     netfeat::AplMode mode, std::uint64_t seed,
                     const std::filesystem::path& out);

classify::LinearModel stage_train(const std::filesystem::path& labeled_tsv, double c,
                                  double tol, std::uint64_t seed,
                                  const std::filesystem::path& out);

void stage_predict(const classify::LinearModel& model,
                   const std::filesystem::path& features, std::uint64_t seed,
                   const std::filesystem::path& out);

// Readers for the stage file formats ('#' lines are comments everywhere).
struct ClusterDump {
  std::string epoch_label;
  // target -> clusters, targets in file order (sorted by the writer).
  std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> entries;
};
ClusterDump read_clusters(const std::filesystem::path& path);

std::vector<sensediff::BirthCandidate> read_candidates(const std::filesystem::path& path);

struct FeatureRow {
  std::string target;
  std::array<double, 3> deltas{};
  std::uint32_t flags = netfeat::kNone;
};
std::vector<FeatureRow> read_features(const std::filesystem::path& path);

struct VerdictRow {
  std::string target;
  classify::Label label = classify::Label::kFalseBirth;
  double margin = 0.0;
};
std::vector<VerdictRow> read_verdicts(const std::filesystem::path& path);

std::set<std::string> read_word_set(const std::filesystem::path& path);

}  // namespace dtsense::pipeline

#endif  // DTSENSE_PIPELINE_HPP_
