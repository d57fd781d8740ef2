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

#include "dtsense/netfeat.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::netfeat {

namespace {

struct FlagName {
  std::uint32_t bit;
  const char* name;
};

constexpr FlagName kFlagNames[] = {
    {kDegenerateOld, "degenerate_old"},   {kDegenerateNew, "degenerate_new"},
    {kUnreachableOld, "unreachable_old"}, {kUnreachableNew, "unreachable_new"},
    {kSentinelEd, "ed_sentinel"},         {kSentinelSs, "ss_sentinel"},
    {kSentinelApl, "apl_sentinel"},       {kClamped, "clamped"},
};

// Cluster-word indices: all nodes except the target.
std::vector<std::uint32_t> cluster_indices(const dtgraph::InducedSubgraph& g) {
  auto target = g.target_index();
  std::vector<std::uint32_t> ids;
  ids.reserve(g.size());
  for (std::uint32_t v = 0; v < g.size(); ++v)
    if (!target.has_value() || v != *target) ids.push_back(v);
  return ids;
}

}  // namespace

std::string flags_to_string(std::uint32_t flags) {
  if (flags == kNone) return "-";
  std::string out;
  for (const auto& fn : kFlagNames) {
    if (flags & fn.bit) {
      if (!out.empty()) out += ',';
      out += fn.name;
    }
  }
  return out;
}

std::uint32_t flags_from_string(const std::string& text) {
  if (text.empty() || text == "-") return kNone;
  std::uint32_t flags = kNone;
  for (const auto& piece : util::split(text, ',')) {
    bool known = false;
    for (const auto& fn : kFlagNames) {
      if (piece == fn.name) {
        flags |= fn.bit;
        known = true;
        break;
      }
    }
    if (!known) throw FormatError("unknown diagnostic flag: " + piece);
  }
  return flags;
}

MetricResult edge_density(const dtgraph::InducedSubgraph& g) {
  auto target = g.target_index();
  const auto ids = cluster_indices(g);
  const std::size_t n = ids.size();
  if (n < 2) return {0.0, kDegenerateNew};

  std::size_t actual = 0;
  for (std::uint32_t v : ids)
    for (const auto& nbr : g.neighbors(v))
      if (v < nbr.id && (!target.has_value() || nbr.id != *target)) ++actual;

  const double possible = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return {static_cast<double>(actual) / possible, kNone};
}

MetricResult structural_similarity(const dtgraph::InducedSubgraph& g) {
  auto target = g.target_index();
  const auto ids = cluster_indices(g);
  const std::size_t n = ids.size();
  if (n < 2) return {0.0, kDegenerateNew};

  // Degrees and neighbor sets within the target-free cluster subgraph.
  std::vector<std::vector<std::uint32_t>> nbrs(g.size());
  for (std::uint32_t v : ids) {
    for (const auto& nbr : g.neighbors(v))
      if (!target.has_value() || nbr.id != *target) nbrs[v].push_back(nbr.id);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = nbrs[ids[i]];
      const auto& b = nbrs[ids[j]];
      if (a.empty() || b.empty()) continue;  // degree-zero guard
      std::size_t common = 0;
      auto ia = a.begin();
      auto ib = b.begin();
      while (ia != a.end() && ib != b.end()) {  // both sorted by id
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else { ++common; ++ia; ++ib; }
      }
      sum += static_cast<double>(common) /
             std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return {sum / pairs, kNone};
}

MetricResult avg_path_length(const dtgraph::InducedSubgraph& g) {
  auto target = g.target_index();
  if (!target.has_value())
    throw Error("avg_path_length: target word missing from subgraph");
  const auto ids = cluster_indices(g);
  const std::size_t n = ids.size();
  if (n == 0) return {0.0, kDegenerateNew};

  // Unweighted BFS from the target over the full subgraph.
  std::vector<std::int64_t> dist(g.size(), -1);
  std::deque<std::uint32_t> queue;
  dist[*target] = 0;
  queue.push_back(*target);
  while (!queue.empty()) {
    std::uint32_t v = queue.front();
    queue.pop_front();
    for (const auto& nbr : g.neighbors(v)) {
      if (dist[nbr.id] < 0) {
        dist[nbr.id] = dist[v] + 1;
        queue.push_back(nbr.id);
      }
    }
  }

  const double penalty = static_cast<double>(n) + 1.0;  // finite > any real path
  std::uint32_t flags = kNone;
  double sum = 0.0;
  for (std::uint32_t v : ids) {
    if (dist[v] < 0) {
      sum += penalty;
      flags |= kUnreachableNew;
    } else {
      sum += static_cast<double>(dist[v]);
    }
  }
  return {sum / static_cast<double>(n), flags};
}

double fractional_change(double p_old, double p_new) {
  if (p_old == 0.0) throw Error("fractional_change: zero baseline");
  return (p_new - p_old) / p_old;
}

namespace {

// As old-epoch values, the per-metric flags shift from *New to *Old.
std::uint32_t as_old(std::uint32_t flags) {
  std::uint32_t out = kNone;
  if (flags & kDegenerateNew) out |= kDegenerateOld;
  if (flags & kUnreachableNew) out |= kUnreachableOld;
  return out;
}

double fractional_delta(double p_old, double p_new, std::uint32_t sentinel_bit,
                        std::uint32_t* flags) {
  if (p_old == 0.0) {
    if (p_new == 0.0) return 0.0;  // nothing appeared, nothing changed
    *flags |= sentinel_bit;
    return kDeltaCap;
  }
  double delta = (p_new - p_old) / p_old;
  if (delta > kDeltaCap || delta < -kDeltaCap) {
    *flags |= kClamped;
    delta = std::clamp(delta, -kDeltaCap, kDeltaCap);
  }
  return delta;
}

}  // namespace

DeltaFeatures delta_features(const MetricValues& old_metrics, const MetricValues& new_metrics,
                             AplMode mode) {
  DeltaFeatures out;
  out.old_metrics = old_metrics;
  out.new_metrics = new_metrics;
  out.apl_mode = mode;
  out.flags = old_metrics.flags | new_metrics.flags;

  out.d_ed = fractional_delta(old_metrics.ed, new_metrics.ed, kSentinelEd, &out.flags);
  out.d_ss = fractional_delta(old_metrics.ss, new_metrics.ss, kSentinelSs, &out.flags);
  if (mode == AplMode::kAbsolute) {
    double delta = new_metrics.apl - old_metrics.apl;
    if (delta > kDeltaCap || delta < -kDeltaCap) {
      out.flags |= kClamped;
      delta = std::clamp(delta, -kDeltaCap, kDeltaCap);
    }
    out.d_apl = delta;
  } else {
    out.d_apl = fractional_delta(old_metrics.apl, new_metrics.apl, kSentinelApl, &out.flags);
  }
  return out;
}

MetricValues cluster_metrics(const dtgraph::DtNetwork& dt,
                             const std::vector<std::string>& cluster,
                             const std::string& target) {
  // One subgraph serves all three metrics: edge density and structural
  // similarity skip the target, the path metric starts from it.
  std::vector<std::string> nodes(cluster.begin(), cluster.end());
  nodes.erase(std::remove(nodes.begin(), nodes.end(), target), nodes.end());
  auto g = dtgraph::induced_subgraph(dt, nodes, target);

  MetricValues m;
  auto ed = edge_density(g);
  auto ss = structural_similarity(g);
  auto apl = avg_path_length(g);
  m.ed = ed.value;
  m.ss = ss.value;
  m.apl = apl.value;
  m.flags = ed.flags | ss.flags | apl.flags;
  return m;
}

DeltaFeatures delta_features(const dtgraph::DtNetwork& dt_old,
                             const dtgraph::DtNetwork& dt_new,
                             const sensediff::BirthCandidate& candidate, AplMode mode) {
  if (candidate.birth_cluster.empty())
    throw Error("delta_features: empty birth cluster for " + candidate.target);

  MetricValues old_m = cluster_metrics(dt_old, candidate.birth_cluster, candidate.target);
  old_m.flags = as_old(old_m.flags);
  MetricValues new_m = cluster_metrics(dt_new, candidate.birth_cluster, candidate.target);
  return delta_features(old_m, new_m, mode);
}

}  // namespace dtsense::netfeat
