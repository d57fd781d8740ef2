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

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::pipeline {

namespace {

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// Provenance line for a stage output: hash of the stage's semantic
// parameters (never file paths) and the seed in effect.
std::string provenance(const std::string& type, const std::string& params,
                       std::uint64_t seed, const std::string& extra = {}) {
  std::string line = "#dtsense " + type + " v1 params=" + hex64(util::fnv1a64(params)) +
                     " seed=" + std::to_string(seed);
  if (!extra.empty()) line += " " + extra;
  return line;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Reads a stage file: returns the header line (first line, which must carry
// the given type tag) and hands every data line to the callback.
void read_stage_file(const std::filesystem::path& path, const std::string& type,
                     std::string* header_out,
                     const std::function<void(const std::string&, std::size_t)>& on_line) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  const std::string tag = "#dtsense " + type + " v1";
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!saw_header) {
        if (line.rfind(tag, 0) != 0)
          throw FormatError(path.string() + ": expected a '" + tag + "' header, found '" +
                            line.substr(0, 40) + "'");
        saw_header = true;
        if (header_out) *header_out = line;
      }
      continue;
    }
    if (!saw_header)
      throw FormatError(path.string() + ": missing '" + tag + "' header");
    on_line(line, lineno);
  }
  if (!saw_header) throw FormatError(path.string() + ": missing '" + tag + "' header");
}

std::string header_field(const std::string& header, const std::string& key) {
  for (const auto& piece : util::split(header, ' ')) {
    auto kv = util::split(piece, '=');
    if (kv.size() == 2 && kv[0] == key) return kv[1];
  }
  return {};
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ',';
    out += words[i];
  }
  return out;
}

// Three distinct clustering seeds for the run.
std::array<std::uint64_t, 3> cw_seeds(std::uint64_t seed) {
  std::array<std::uint64_t, 3> out{};
  for (std::size_t r = 0; r < 3; ++r)
    out[r] = util::derive_seed(seed, "cw:" + std::to_string(r));
  // fnv/splitmix collisions are fantastically unlikely; keep the clustering
  // precondition airtight anyway.
  if (out[0] == out[1] || out[1] == out[2] || out[0] == out[2]) {
    out[1] += 1;
    out[2] += 2;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = util::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected key=value");
    kv[util::trim(trimmed.substr(0, eq))] = util::trim(trimmed.substr(eq + 1));
  }
  return from_kv(kv, path.parent_path());
}

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& kv,
                             const std::filesystem::path& base_dir) {
  RunConfig config;
  for (const auto& [key, value] : kv) config.apply_override(key, value, base_dir);
  return config;
}

void RunConfig::apply_override(const std::string& key, const std::string& value,
                               const std::filesystem::path& base_dir) {
  auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  auto as_u64 = [&]() {
    std::uint64_t v = 0;
    if (!util::parse_u64(value, &v))
      throw ConfigError("config: bad integer for " + key + ": " + value);
    return v;
  };
  auto as_double = [&]() {
    double v = 0.0;
    if (!util::parse_double(value, &v))
      throw ConfigError("config: bad number for " + key + ": " + value);
    return v;
  };
  auto as_format = [&]() {
    if (value == "pair-tsv") return corpus::CountsFormat::kPairTsv;
    if (value == "syn-ngram-tsv") return corpus::CountsFormat::kSynNgramTsv;
    throw ConfigError("config: unknown format '" + value + "' for " + key);
  };
  auto epoch_key = [&](EpochConfig* epoch, const std::string& field) {
    if (field == "path") epoch->path = resolve(value);
    else if (field == "format") epoch->format = as_format();
    else if (field == "label") epoch->label = value;
    else if (field == "year_from" || field == "year_to") {
      if (!epoch->years) epoch->years = corpus::YearRange{};
      (field == "year_from" ? epoch->years->from : epoch->years->to) =
          static_cast<int>(as_u64());
    } else {
      throw ConfigError("config: unknown key " + key);
    }
  };

  if (key.rfind("epoch1.", 0) == 0) epoch_key(&epoch1, key.substr(7));
  else if (key.rfind("epoch2.", 0) == 0) epoch_key(&epoch2, key.substr(7));
  else if (key == "top_k") top_k = as_u64();
  else if (key == "ego_n") ego_n = as_u64();
  else if (key == "min_shared") min_shared = static_cast<std::uint32_t>(as_u64());
  else if (key == "min_cluster_size") min_cluster_size = as_u64();
  else if (key == "cw_max_iters") cw_max_iters = as_u64();
  else if (key == "birth_threshold") birth_threshold = as_double();
  else if (key == "pos_allow") {
    filter.pos_allow.clear();
    for (const auto& tag : util::split(value, ','))
      if (!util::trim(tag).empty()) filter.pos_allow.push_back(util::trim(tag));
  } else if (key == "band_low") filter.band_low = as_double();
  else if (key == "band_high") filter.band_high = as_double();
  else if (key == "js_threshold") {
    if (value.empty() || value == "off") js_threshold.reset();
    else js_threshold = as_double();
  } else if (key == "apl_mode") {
    if (value == "absolute") apl_mode = netfeat::AplMode::kAbsolute;
    else if (value == "fractional") apl_mode = netfeat::AplMode::kFractional;
    else throw ConfigError("config: apl_mode must be absolute or fractional");
  } else if (key == "model") model_path = resolve(value);
  else if (key == "train_data") train_data = resolve(value);
  else if (key == "svm_c") svm_c = as_double();
  else if (key == "svm_tol") svm_tol = as_double();
  else if (key == "targets") targets_path = resolve(value);
  else if (key == "truth") truth_path = resolve(value);
  else if (key == "output_dir") output_dir = resolve(value);
  else if (key == "seed") seed = as_u64();
  else throw ConfigError("config: unknown key " + key);
}

void RunConfig::validate() const {
  auto check_epoch = [](const EpochConfig& epoch, const char* name) {
    if (epoch.path.empty())
      throw ConfigError(std::string("config: ") + name + ".path is required");
    if (!std::filesystem::exists(epoch.path))
      throw ConfigError(std::string("config: ") + name + ".path does not exist: " +
                        epoch.path.string());
    if (epoch.label.empty())
      throw ConfigError(std::string("config: ") + name + ".label is required");
    if (epoch.years && epoch.years->from > epoch.years->to)
      throw ConfigError(std::string("config: ") + name + " year range is inverted");
  };
  check_epoch(epoch1, "epoch1");
  check_epoch(epoch2, "epoch2");
  if (epoch1.label == epoch2.label)
    throw ConfigError("config: epoch labels must differ");
  if (top_k == 0) throw ConfigError("config: top_k must be positive");
  if (ego_n == 0) throw ConfigError("config: ego_n must be positive");
  if (min_shared == 0) throw ConfigError("config: min_shared must be positive");
  if (min_cluster_size == 0) throw ConfigError("config: min_cluster_size must be positive");
  if (cw_max_iters == 0) throw ConfigError("config: cw_max_iters must be positive");
  if (birth_threshold < 0.0 || birth_threshold > 1.0)
    throw ConfigError("config: birth_threshold must lie in [0, 1]");
  if (filter.band_low < 0.0 || filter.band_high > 1.0 ||
      filter.band_low > filter.band_high)
    throw ConfigError("config: frequency band must satisfy 0 <= low <= high <= 1");
  if (js_threshold && (*js_threshold < 0.0 || *js_threshold > 1.0))
    throw ConfigError("config: js_threshold must lie in [0, 1]");
  if (svm_c <= 0.0) throw ConfigError("config: svm_c must be positive");
  if (svm_tol <= 0.0) throw ConfigError("config: svm_tol must be positive");
  const bool has_model = !model_path.empty();
  const bool has_train = !train_data.empty();
  if (has_model == has_train)
    throw ConfigError("config: set exactly one of model / train_data");
  if (has_model && !std::filesystem::exists(model_path))
    throw ConfigError("config: model does not exist: " + model_path.string());
  if (has_train && !std::filesystem::exists(train_data))
    throw ConfigError("config: train_data does not exist: " + train_data.string());
  if (targets_path && !std::filesystem::exists(*targets_path))
    throw ConfigError("config: targets file does not exist: " + targets_path->string());
  if (truth_path && !std::filesystem::exists(*truth_path))
    throw ConfigError("config: truth file does not exist: " + truth_path->string());
  if (output_dir.empty()) throw ConfigError("config: output_dir is required");
}

std::string RunConfig::canonical_text() const {
  auto format_name = [](corpus::CountsFormat f) {
    return f == corpus::CountsFormat::kPairTsv ? "pair-tsv" : "syn-ngram-tsv";
  };
  std::ostringstream out;
  auto epoch_text = [&](const EpochConfig& epoch, const char* name) {
    out << name << ".path=" << epoch.path.string() << "\n"
        << name << ".format=" << format_name(epoch.format) << "\n"
        << name << ".label=" << epoch.label << "\n";
    if (epoch.years)
      out << name << ".year_from=" << epoch.years->from << "\n"
          << name << ".year_to=" << epoch.years->to << "\n";
  };
  epoch_text(epoch1, "epoch1");
  epoch_text(epoch2, "epoch2");
  out << "top_k=" << top_k << "\n"
      << "ego_n=" << ego_n << "\n"
      << "min_shared=" << min_shared << "\n"
      << "min_cluster_size=" << min_cluster_size << "\n"
      << "cw_max_iters=" << cw_max_iters << "\n"
      << "birth_threshold=" << util::format_double(birth_threshold) << "\n"
      << "pos_allow=" << join_words(filter.pos_allow) << "\n"
      << "band_low=" << util::format_double(filter.band_low) << "\n"
      << "band_high=" << util::format_double(filter.band_high) << "\n"
      << "js_threshold="
      << (js_threshold ? util::format_double(*js_threshold) : std::string("off")) << "\n"
      << "apl_mode="
      << (apl_mode == netfeat::AplMode::kAbsolute ? "absolute" : "fractional") << "\n"
      << "model=" << model_path.string() << "\n"
      << "train_data=" << train_data.string() << "\n"
      << "svm_c=" << util::format_double(svm_c) << "\n"
      << "svm_tol=" << util::format_double(svm_tol) << "\n"
      << "targets=" << (targets_path ? targets_path->string() : std::string()) << "\n"
      << "truth=" << (truth_path ? truth_path->string() : std::string()) << "\n"
      << "seed=" << seed << "\n";
  return out.str();
}

std::uint64_t RunConfig::config_hash() const { return util::fnv1a64(canonical_text()); }

// ---------------------------------------------------------------------------
// Stages

dtgraph::DtNetwork stage_build_dt(const EpochConfig& epoch, std::size_t top_k,
                                  std::uint32_t min_shared, std::size_t ego_n,
                                  std::uint64_t seed, const std::filesystem::path& out) {
  corpus::IngestOptions options;
  options.years = epoch.years;
  auto counts = corpus::ingest_counts_file(epoch.path.string(), epoch.format, epoch.label,
                                           options);
  auto ranked = corpus::rank_all_features(counts, top_k);

  dtgraph::DtMeta meta;
  meta.epoch_label = epoch.label;
  meta.top_k = top_k;
  meta.ego_n = ego_n;
  auto dt = dtgraph::build_dt(ranked, min_shared, meta);

  std::string params = "build-dt epoch=" + epoch.label + " k=" + std::to_string(top_k) +
                       " min_shared=" + std::to_string(min_shared) +
                       " ego_n=" + std::to_string(ego_n);
  std::string ingest_stats = "ingest lines=" + std::to_string(counts.stats.lines) +
                             " malformed=" + std::to_string(counts.stats.malformed) +
                             " skipped=" + std::to_string(counts.stats.skipped);
  save_dt(dt, out, {provenance("dt", params, seed).substr(1), ingest_stats});
  return dt;
}

std::vector<std::string> derive_targets(const dtgraph::DtNetwork& dt_old,
                                        const dtgraph::DtNetwork& dt_new) {
  std::vector<std::string> targets;
  for (const auto& word : dt_new.words()) {
    auto id = dt_new.find(word);
    if (dt_new.neighbors(*id).empty()) continue;
    if (!dt_old.find(word).has_value()) continue;
    targets.push_back(word);
  }
  std::sort(targets.begin(), targets.end());
  return targets;
}

void write_targets(const std::vector<std::string>& targets, std::uint64_t seed,
                   const std::filesystem::path& out_path) {
  auto out = open_out(out_path);
  out << provenance("targets", "targets", seed) << "\n";
  for (const auto& word : targets) out << word << '\n';
  if (!out) throw Error("write failed: " + out_path.string());
}

std::vector<std::string> read_targets(const std::filesystem::path& path) {
  std::vector<std::string> targets;
  read_stage_file(path, "targets", nullptr,
                  [&targets](const std::string& line, std::size_t) {
                    targets.push_back(line);
                  });
  return targets;
}

void stage_cluster(const dtgraph::DtNetwork& dt, const std::vector<std::string>& targets,
                   const ClusterStageOptions& options, std::uint64_t seed,
                   const std::filesystem::path& out_path) {
  const auto seeds = cw_seeds(seed);
  auto out = open_out(out_path);
  std::string params = "cluster ego_n=" + std::to_string(options.ego_n) +
                       " min_cluster_size=" + std::to_string(options.min_cluster_size) +
                       " max_iters=" + std::to_string(options.max_iters);
  out << provenance("clusters", params, seed, "epoch=" + dt.meta().epoch_label) << "\n";

  for (const auto& target : targets) {
    if (!dt.find(target).has_value()) continue;
    auto ego = dtgraph::ego_network(dt, target, options.ego_n);
    if (ego.size() == 0) continue;
    auto clustering = cwcluster::stable_clusters(ego, seeds, options.min_cluster_size,
                                                 options.max_iters);
    for (std::size_t i = 0; i < clustering.clusters.size(); ++i)
      out << target << '\t' << i << '\t' << join_words(clustering.clusters[i]) << '\n';
  }
  if (!out) throw Error("write failed: " + out_path.string());
}

ClusterDump read_clusters(const std::filesystem::path& path) {
  ClusterDump dump;
  std::string header;
  read_stage_file(path, "clusters", &header,
                  [&dump, &path](const std::string& line, std::size_t lineno) {
                    auto fields = util::split(line, '\t');
                    std::uint64_t index = 0;
                    if (fields.size() != 3 || !util::parse_u64(fields[1], &index))
                      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                        ": bad cluster line");
                    if (dump.entries.empty() || dump.entries.back().first != fields[0])
                      dump.entries.emplace_back(fields[0],
                                                std::vector<std::vector<std::string>>{});
                    auto& clusters = dump.entries.back().second;
                    if (index != clusters.size())
                      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                        ": cluster indices out of order");
                    clusters.push_back(util::split(fields[2], ','));
                  });
  dump.epoch_label = header_field(header, "epoch");
  return dump;
}

void stage_diff(const std::filesystem::path& clusters_old,
                const std::filesystem::path& clusters_new,
                const corpus::TimeSliceCounts* counts_new, const DiffOptions& options,
                std::uint64_t seed, const std::filesystem::path& out_path) {
  ClusterDump old_dump = read_clusters(clusters_old);
  ClusterDump new_dump = read_clusters(clusters_new);

  std::map<std::string, const std::vector<std::vector<std::string>>*> old_by_target;
  for (const auto& [target, clusters] : old_dump.entries)
    old_by_target.emplace(target, &clusters);

  std::string params = "diff threshold=" + util::format_double(options.threshold) +
                       " pos_allow=" + join_words(options.filter.pos_allow) +
                       " band_low=" + util::format_double(options.filter.band_low) +
                       " band_high=" + util::format_double(options.filter.band_high) +
                       " js=" +
                       (options.js_threshold ? util::format_double(*options.js_threshold)
                                             : std::string("off")) +
                       " filters=" + (counts_new ? "on" : "off");
  auto out = open_out(out_path);
  out << provenance("candidates", params, seed,
                    "old=" + old_dump.epoch_label + " new=" + new_dump.epoch_label)
      << "\n";

  for (const auto& [target, new_clusters] : new_dump.entries) {
    cwcluster::SenseClustering old_clustering;
    old_clustering.target = target;
    old_clustering.epoch_label = old_dump.epoch_label;
    if (auto it = old_by_target.find(target); it != old_by_target.end())
      old_clustering.clusters = *it->second;

    cwcluster::SenseClustering new_clustering;
    new_clustering.target = target;
    new_clustering.epoch_label = new_dump.epoch_label;
    new_clustering.clusters = new_clusters;

    auto candidates = sensediff::detect_births(old_clustering, new_clustering,
                                               options.threshold);
    if (counts_new != nullptr)
      candidates = sensediff::filter_candidates(candidates, *counts_new, options.filter);
    if (options.js_threshold) {
      std::vector<sensediff::BirthCandidate> kept;
      for (auto& cand : candidates)
        if (sensediff::js_birth_check(cand.birth_cluster, old_clustering.clusters,
                                      *options.js_threshold))
          kept.push_back(std::move(cand));
      candidates = std::move(kept);
    }
    for (const auto& cand : candidates)
      out << cand.target << '\t' << util::format_double(cand.novelty_ratio) << '\t'
          << join_words(cand.birth_cluster) << '\n';
  }
  if (!out) throw Error("write failed: " + out_path.string());
}

std::vector<sensediff::BirthCandidate> read_candidates(const std::filesystem::path& path) {
  std::vector<sensediff::BirthCandidate> candidates;
  std::string header;
  read_stage_file(path, "candidates", &header,
                  [&candidates, &path](const std::string& line, std::size_t lineno) {
                    auto fields = util::split(line, '\t');
                    sensediff::BirthCandidate cand;
                    if (fields.size() != 3 ||
                        !util::parse_double(fields[1], &cand.novelty_ratio))
                      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                        ": bad candidate line");
                    cand.target = fields[0];
                    cand.birth_cluster = util::split(fields[2], ',');
                    candidates.push_back(std::move(cand));
                  });
  for (auto& cand : candidates) {
    cand.old_epoch = header_field(header, "old");
    cand.new_epoch = header_field(header, "new");
  }
  return candidates;
}

void stage_featurize(const std::filesystem::path& candidates_path,
                     const dtgraph::DtNetwork& dt_old, const dtgraph::DtNetwork& dt_new,
                     netfeat::AplMode mode, std::uint64_t seed,
                     const std::filesystem::path& out_path) {
  auto candidates = read_candidates(candidates_path);
  const char* mode_name = mode == netfeat::AplMode::kAbsolute ? "absolute" : "fractional";
  auto out = open_out(out_path);
  out << provenance("features", std::string("featurize apl_mode=") + mode_name, seed,
                    std::string("apl_mode=") + mode_name + " old=" +
                        dt_old.meta().epoch_label + " new=" + dt_new.meta().epoch_label)
      << "\n";
  for (const auto& cand : candidates) {
    auto features = netfeat::delta_features(dt_old, dt_new, cand, mode);
    out << cand.target << '\t' << util::format_double(features.d_ed) << '\t'
        << util::format_double(features.d_ss) << '\t'
        << util::format_double(features.d_apl) << '\t'
        << netfeat::flags_to_string(features.flags) << '\n';
  }
  if (!out) throw Error("write failed: " + out_path.string());
}

std::vector<FeatureRow> read_features(const std::filesystem::path& path) {
  std::vector<FeatureRow> rows;
  read_stage_file(path, "features", nullptr,
                  [&rows, &path](const std::string& line, std::size_t lineno) {
                    auto fields = util::split(line, '\t');
                    FeatureRow row;
                    if (fields.size() != 5)
                      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                        ": bad feature line");
                    row.target = fields[0];
                    for (int j = 0; j < 3; ++j)
                      if (!util::parse_double(fields[j + 1], &row.deltas[j]))
                        throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                          ": bad feature value");
                    row.flags = netfeat::flags_from_string(fields[4]);
                    rows.push_back(std::move(row));
                  });
  return rows;
}

classify::LinearModel stage_train(const std::filesystem::path& labeled_tsv, double c,
                                  double tol, std::uint64_t seed,
                                  const std::filesystem::path& out) {
  auto examples = classify::load_labeled_tsv(labeled_tsv);
  auto model = classify::train(examples, c, tol, seed);
  classify::save_model(model, out);
  return model;
}

void stage_predict(const classify::LinearModel& model,
                   const std::filesystem::path& features_path, std::uint64_t seed,
                   const std::filesystem::path& out_path) {
  auto rows = read_features(features_path);
  auto out = open_out(out_path);
  out << provenance("verdicts", "predict", seed) << "\n";
  for (const auto& row : rows) {
    auto prediction = classify::predict(model, row.deltas);
    out << row.target << '\t' << classify::label_name(prediction.label) << '\t'
        << util::format_double(prediction.margin) << '\n';
  }
  if (!out) throw Error("write failed: " + out_path.string());
}

std::vector<VerdictRow> read_verdicts(const std::filesystem::path& path) {
  std::vector<VerdictRow> rows;
  read_stage_file(path, "verdicts", nullptr,
                  [&rows, &path](const std::string& line, std::size_t lineno) {
                    auto fields = util::split(line, '\t');
                    VerdictRow row;
                    if (fields.size() != 3 || !util::parse_double(fields[2], &row.margin))
                      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                        ": bad verdict line");
                    row.target = fields[0];
                    row.label = classify::label_from_name(fields[1]);
                    rows.push_back(std::move(row));
                  });
  return rows;
}

std::set<std::string> read_word_set(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string word = util::trim(line);
    if (word.empty() || word[0] == '#') continue;
    words.insert(word);
  }
  return words;
}

// ---------------------------------------------------------------------------
// Orchestration

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw Error("cannot create output dir " + config.output_dir.string());

  const auto out = [&config](const char* name) { return config.output_dir / name; };
  auto run_stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw Error("stage " + std::string(name) + ": " + e.what());
    }
  };

  {
    auto meta = open_out(out("run_meta.txt"));
    meta << "#dtsense run_meta v1 config=" << hex64(config.config_hash())
         << " seed=" << config.seed << "\n"
         << config.canonical_text();
  }

  auto dt_old = run_stage("build-dt(old)", [&] {
    return stage_build_dt(config.epoch1, config.top_k, config.min_shared, config.ego_n,
                          config.seed, out("dt_old.tsv"));
  });
  auto dt_new = run_stage("build-dt(new)", [&] {
    return stage_build_dt(config.epoch2, config.top_k, config.min_shared, config.ego_n,
                          config.seed, out("dt_new.tsv"));
  });

  auto targets = run_stage("targets", [&] {
    std::vector<std::string> list;
    if (config.targets_path) {
      auto requested = read_word_set(*config.targets_path);
      for (const auto& word : requested)
        if (dt_new.find(word).has_value()) list.push_back(word);
      std::sort(list.begin(), list.end());
    } else {
      list = derive_targets(dt_old, dt_new);
    }
    write_targets(list, config.seed, out("targets.txt"));
    return list;
  });

  ClusterStageOptions cluster_options;
  cluster_options.ego_n = config.ego_n;
  cluster_options.min_cluster_size = config.min_cluster_size;
  cluster_options.max_iters = config.cw_max_iters;
  run_stage("cluster(old)", [&] {
    stage_cluster(dt_old, targets, cluster_options, config.seed, out("clusters_old.tsv"));
    return 0;
  });
  run_stage("cluster(new)", [&] {
    stage_cluster(dt_new, targets, cluster_options, config.seed, out("clusters_new.tsv"));
    return 0;
  });

  run_stage("diff", [&] {
    corpus::IngestOptions ingest_options;
    ingest_options.years = config.epoch2.years;
    auto counts_new = corpus::ingest_counts_file(config.epoch2.path.string(),
                                                 config.epoch2.format, config.epoch2.label,
                                                 ingest_options);
    DiffOptions diff_options;
    diff_options.threshold = config.birth_threshold;
    diff_options.filter = config.filter;
    diff_options.js_threshold = config.js_threshold;
    stage_diff(out("clusters_old.tsv"), out("clusters_new.tsv"), &counts_new,
               diff_options, config.seed, out("candidates.tsv"));
    return 0;
  });

  run_stage("featurize", [&] {
    stage_featurize(out("candidates.tsv"), dt_old, dt_new, config.apl_mode, config.seed,
                    out("features.tsv"));
    return 0;
  });

  auto model = run_stage("model", [&] {
    if (!config.model_path.empty()) return classify::load_model(config.model_path);
    return stage_train(config.train_data, config.svm_c, config.svm_tol, config.seed,
                       out("model.txt"));
  });

  run_stage("predict", [&] {
    stage_predict(model, out("features.tsv"), config.seed, out("verdicts.tsv"));
    return 0;
  });

  PipelineResult result;
  result.output_dir = config.output_dir;
  result.targets = targets.size();
  run_stage("report", [&] {
    auto verdicts = read_verdicts(out("verdicts.tsv"));
    result.candidates = verdicts.size();
    std::set<std::string> flagged;
    for (const auto& row : verdicts)
      if (row.label == classify::Label::kTrueBirth) flagged.insert(row.target);
    result.births_flagged = flagged.size();
    result.flagged_words.assign(flagged.begin(), flagged.end());

    std::ostringstream summary;
    summary << "targets\t" << result.targets << "\ncandidates\t" << result.candidates
            << "\nbirths_flagged\t" << result.births_flagged << "\n";
    for (const auto& word : result.flagged_words) summary << "birth\t" << word << '\n';

    if (config.truth_path) {
      auto truth = read_word_set(*config.truth_path);
      std::set<std::string> pool(targets.begin(), targets.end());
      auto report = evalkit::score(flagged, truth, pool);
      report.metadata = "config=" + hex64(config.config_hash()) + " seed=" +
                        std::to_string(config.seed);
      result.report = report;
      summary << report.to_text();
      auto json_out = open_out(out("report.json"));
      json_out << report.to_json_lines();
    }
    auto text_out = open_out(out("report.txt"));
    text_out << provenance("report", "report", config.seed) << "\n" << summary.str();
    return 0;
  });
  return result;
}

}  // namespace dtsense::pipeline
