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

#ifndef DTSENSE_NETFEAT_HPP_
#define DTSENSE_NETFEAT_HPP_

#include <cstdint>
#include <string>

#include "dtsense/dtgraph.hpp"
#include "dtsense/sensediff.hpp"

namespace dtsense::netfeat {

// Diagnostic flags carried alongside metric and delta values. Batch runs
// never abort on degenerate clusters; they flag them instead.
enum Flags : std::uint32_t {
  kNone = 0,
  kDegenerateOld = 1u << 0,   // old-epoch cluster too small for the metric
  kDegenerateNew = 1u << 1,
  kUnreachableOld = 1u << 2,  // some cluster word unreachable from the target
  kUnreachableNew = 1u << 3,
  kSentinelEd = 1u << 4,      // fractional change from a zero baseline
  kSentinelSs = 1u << 5,
  kSentinelApl = 1u << 6,
  kClamped = 1u << 7,         // a delta exceeded the cap and was clamped
};

std::string flags_to_string(std::uint32_t flags);
std::uint32_t flags_from_string(const std::string& text);

// Deltas are confined to [-kDeltaCap, kDeltaCap]; a metric appearing from a
// zero baseline gets the full positive cap (maximal evidence of change).
inline constexpr double kDeltaCap = 10.0;

struct MetricResult {
  double value = 0.0;
  std::uint32_t flags = kNone;
};

// The three unweighted cohesion metrics of one epoch, plus diagnostics.
struct MetricValues {
  double ed = 0.0;   // edge density
  double ss = 0.0;   // mean pairwise structural similarity
  double apl = 0.0;  // mean shortest path length from the target
  std::uint32_t flags = kNone;
};

// Edges among the cluster words over the maximum possible n(n-1)/2. The
// target word, when present in the subgraph, is excluded from the count.
// Fewer than two cluster words yields 0 with kDegenerate*.
MetricResult edge_density(const dtgraph::InducedSubgraph& g);

// Mean over all unordered cluster pairs of |common neighbors| divided by the
// geometric mean of the endpoint degrees, all within the target-free cluster
// subgraph. Pairs touching a degree-zero word contribute 0.
MetricResult structural_similarity(const dtgraph::InducedSubgraph& g);

// Mean BFS distance from the target to each cluster word; an unreachable
// word counts as |cluster| + 1 and raises kUnreachable*. The target must be
// a node of the subgraph.
MetricResult avg_path_length(const dtgraph::InducedSubgraph& g);

// (p_new - p_old) / p_old. Throws when p_old is 0; batch paths use the
// sentinel rules in delta_features instead.
double fractional_change(double p_old, double p_new);

enum class AplMode {
  kAbsolute,    // delta = APL(new) - APL(old); matches observed reporting
  kFractional,  // delta = (APL(new) - APL(old)) / APL(old)
};

// The classifier's feature triple with full provenance.
struct DeltaFeatures {
  double d_ed = 0.0;
  double d_ss = 0.0;
  double d_apl = 0.0;
  MetricValues old_metrics;
  MetricValues new_metrics;
  AplMode apl_mode = AplMode::kAbsolute;
  std::uint32_t flags = kNone;

  std::array<double, 3> triple() const { return {d_ed, d_ss, d_apl}; }
};

// Deltas from precomputed per-epoch metric values. Edge density and
// structural similarity always change fractionally; the path-length delta
// follows `mode`. Zero baselines produce the capped sentinel with a flag,
// except that 0 -> 0 is reported as no change.
DeltaFeatures delta_features(const MetricValues& old_metrics, const MetricValues& new_metrics,
                             AplMode mode = AplMode::kAbsolute);

// Full computation for one birth candidate: induces the cluster-plus-target
// subgraph from each epoch's DT, measures both, and takes deltas.
DeltaFeatures delta_features(const dtgraph::DtNetwork& dt_old,
                             const dtgraph::DtNetwork& dt_new,
                             const sensediff::BirthCandidate& candidate,
                             AplMode mode = AplMode::kAbsolute);

// Metrics of one epoch for a candidate's cluster (plus target, for the path
// metric).
MetricValues cluster_metrics(const dtgraph::DtNetwork& dt,
                             const std::vector<std::string>& cluster,
                             const std::string& target);

}  // namespace dtsense::netfeat

#endif  // DTSENSE_NETFEAT_HPP_
