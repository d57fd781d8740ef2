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

#ifndef DTSENSE_CLASSIFY_HPP_
#define DTSENSE_CLASSIFY_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtsense/netfeat.hpp"

namespace dtsense::classify {

enum class Label { kFalseBirth = 0, kTrueBirth = 1 };

const char* label_name(Label label);
Label label_from_name(const std::string& name);

// One training point: the delta triple (edge density, structural similarity,
// path length) with its human judgment and the word it came from.
struct LabeledExample {
  std::array<double, 3> features{};
  Label label = Label::kFalseBirth;
  std::string word;

  LabeledExample() = default;
  LabeledExample(std::array<double, 3> f, Label l, std::string w)
      : features(f), label(l), word(std::move(w)) {}
};

struct TrainingMeta {
  double c = 1.0;       // soft-margin cost (scaled per example internally)
  double tol = 1e-6;    // relative duality-gap stopping threshold
  std::uint64_t seed = 0;
  std::size_t passes = 0;  // coordinate sweeps actually used
  double gap = 0.0;        // final duality gap
  std::string kernel = "linear";
};

// Linear maximum-margin model over standardized features:
//   decision(x) = weights . ((x - mean) / std) + bias
// A non-positive decision value means false birth (ties resolve against
// declaring a birth).
struct LinearModel {
  std::array<double, 3> weights{};
  double bias = 0.0;
  std::array<double, 3> scaler_mean{};
  std::array<double, 3> scaler_std{};
  TrainingMeta meta;

  double decision(const std::array<double, 3>& features) const;
};

struct Prediction {
  Label label = Label::kFalseBirth;
  double margin = 0.0;  // signed decision value
};

// Trains the soft-margin classifier by dual coordinate descent on
//   0.5 ||w||^2 + (c/N) * sum_i hinge(y_i * decision(x_i)),
// stopping once the duality gap falls below tol (relative). The per-example
// cost c/N makes the learned boundary invariant under dataset duplication.
// Features are standardized first; a constant feature column or a
// single-class input is an error. Deterministic given (examples, c, tol,
// seed).
LinearModel train(const std::vector<LabeledExample>& examples, double c = 1.0,
                  double tol = 1e-6, std::uint64_t seed = 1);

// Pass a delta triple directly or DeltaFeatures::triple().
Prediction predict(const LinearModel& model, const std::array<double, 3>& features);

// Per-fold quality of the true-birth class. A fold with no positive
// prediction has undefined precision (left empty, never reported as 0).
struct FoldMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

struct CvReport {
  std::vector<FoldMetrics> folds;
  FoldMetrics mean;  // averaged over folds where the value is defined
};

// Stratified k-fold cross-validation, deterministic under `seed`. The
// feature mask selects which of the three deltas participate (at least one);
// this reproduces leave-one-feature-out ablations.
CvReport cross_validate(const std::vector<LabeledExample>& examples, std::size_t folds,
                        std::uint64_t seed, std::array<bool, 3> feature_mask = {true, true, true},
                        double c = 1.0, double tol = 1e-6);

// Versioned text model file; save/load round-trips exactly (shortest
// round-trip decimal representation).
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

// word<TAB>d_ed<TAB>d_ss<TAB>d_apl<TAB>label rows; '#' lines are comments.
std::vector<LabeledExample> load_labeled_tsv(const std::filesystem::path& path);
void save_labeled_tsv(const std::vector<LabeledExample>& examples,
                      const std::filesystem::path& path);

}  // namespace dtsense::classify

#endif  // DTSENSE_CLASSIFY_HPP_
