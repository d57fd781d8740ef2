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

#include "dtsense/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "dtsense/error.hpp"
#include "dtsense/util.hpp"

namespace dtsense::classify {

namespace {

constexpr char kModelHeaderTag[] = "#dtsense-model v1";
constexpr std::size_t kMaxPasses = 200000;

// Dense row-major training matrix with a trailing constant-1 column, so the
// bias rides along as an ordinary (regularized) weight.
struct Problem {
  std::size_t n = 0;
  std::size_t dim = 0;  // including the bias column
  std::vector<double> x;
  std::vector<double> y;  // +1 true birth, -1 false birth

  const double* row(std::size_t i) const { return &x[i * dim]; }
};

struct RawModel {
  std::vector<double> w;  // dim entries; last one is the bias
  std::size_t passes = 0;
  double gap = 0.0;
};

// Dual coordinate descent for the L1-loss SVM: maximize
//   sum_i a_i - 0.5 ||sum_i a_i y_i x_i||^2   s.t. 0 <= a_i <= U,
// sweeping coordinates in a seeded random order until the relative duality
// gap drops under tol. The primal optimum is unique, so the permutation seed
// affects only the path, never the converged model.
RawModel solve_dual_cd(const Problem& prob, double cost_per_example, double tol,
                       std::uint64_t seed) {
  const std::size_t n = prob.n;
  const std::size_t dim = prob.dim;
  const double U = cost_per_example;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(dim, 0.0);
  std::vector<double> qii(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = prob.row(i);
    qii[i] = std::inner_product(xi, xi + dim, xi, 0.0);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  RawModel out;
  for (std::size_t pass = 1; pass <= kMaxPasses; ++pass) {
    util::shuffle(order, rng);
    for (std::size_t i : order) {
      if (qii[i] <= 0.0) continue;
      const double* xi = prob.row(i);
      const double grad = prob.y[i] * std::inner_product(xi, xi + dim, w.begin(), 0.0) - 1.0;
      const double old_alpha = alpha[i];
      const double new_alpha = std::clamp(old_alpha - grad / qii[i], 0.0, U);
      if (new_alpha != old_alpha) {
        const double step = (new_alpha - old_alpha) * prob.y[i];
        for (std::size_t d = 0; d < dim; ++d) w[d] += step * xi[d];
        alpha[i] = new_alpha;
      }
    }

    const double wtw = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    double hinge_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = prob.row(i);
      const double margin =
          1.0 - prob.y[i] * std::inner_product(xi, xi + dim, w.begin(), 0.0);
      hinge_sum += std::max(0.0, margin);
    }
    const double primal = 0.5 * wtw + U * hinge_sum;
    const double dual = std::accumulate(alpha.begin(), alpha.end(), 0.0) - 0.5 * wtw;
    out.passes = pass;
    out.gap = primal - dual;
    if (out.gap <= tol * std::max(1.0, std::abs(primal))) break;
  }
  out.w = std::move(w);
  return out;
}

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.front().size();
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& row : rows)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(n);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = row[j] - s.mean[j];
      s.stddev[j] += diff * diff;
    }
  for (std::size_t j = 0; j < d; ++j) {
    s.stddev[j] = std::sqrt(s.stddev[j] / static_cast<double>(n));
    if (s.stddev[j] <= 0.0)
      throw Error("train: feature column " + std::to_string(j) + " is constant");
  }
  return s;
}

struct GenericModel {
  Standardizer scaler;
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t passes = 0;
  double gap = 0.0;
};

// Dimension-generic training core shared by the public 3-feature API and the
// masked cross-validation path.
GenericModel train_generic(const std::vector<std::vector<double>>& rows,
                           const std::vector<double>& labels, double c, double tol,
                           std::uint64_t seed) {
  const std::size_t n = rows.size();
  std::size_t pos = 0, neg = 0;
  for (double y : labels) (y > 0 ? pos : neg)++;
  if (pos < 2 || neg < 2)
    throw Error("train: need at least two examples of each class (got " +
                std::to_string(pos) + " true, " + std::to_string(neg) + " false)");
  if (c <= 0.0) throw Error("train: regularization constant must be positive");
  for (const auto& row : rows)
    for (double v : row)
      if (!std::isfinite(v)) throw Error("train: non-finite feature value");

  GenericModel model;
  model.scaler = fit_standardizer(rows);
  const std::size_t d = rows.front().size();

  Problem prob;
  prob.n = n;
  prob.dim = d + 1;
  prob.x.resize(prob.n * prob.dim);
  prob.y = labels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      prob.x[i * prob.dim + j] =
          (rows[i][j] - model.scaler.mean[j]) / model.scaler.stddev[j];
    prob.x[i * prob.dim + d] = 1.0;
  }

  RawModel raw = solve_dual_cd(prob, c / static_cast<double>(n), tol, seed);
  model.weights.assign(raw.w.begin(), raw.w.begin() + d);
  model.bias = raw.w[d];
  model.passes = raw.passes;
  model.gap = raw.gap;
  return model;
}

}  // namespace

const char* label_name(Label label) {
  return label == Label::kTrueBirth ? "true_birth" : "false_birth";
}

Label label_from_name(const std::string& name) {
  if (name == "true_birth") return Label::kTrueBirth;
  if (name == "false_birth") return Label::kFalseBirth;
  throw FormatError("unknown label: " + name);
}

double LinearModel::decision(const std::array<double, 3>& features) const {
  double acc = bias;
  for (std::size_t j = 0; j < 3; ++j)
    acc += weights[j] * (features[j] - scaler_mean[j]) / scaler_std[j];
  return acc;
}

LinearModel train(const std::vector<LabeledExample>& examples, double c, double tol,
                  std::uint64_t seed) {
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  rows.reserve(examples.size());
  labels.reserve(examples.size());
  for (const auto& ex : examples) {
    rows.push_back({ex.features[0], ex.features[1], ex.features[2]});
    labels.push_back(ex.label == Label::kTrueBirth ? 1.0 : -1.0);
  }
  GenericModel g = train_generic(rows, labels, c, tol, seed);

  LinearModel model;
  for (std::size_t j = 0; j < 3; ++j) {
    model.weights[j] = g.weights[j];
    model.scaler_mean[j] = g.scaler.mean[j];
    model.scaler_std[j] = g.scaler.stddev[j];
  }
  model.bias = g.bias;
  model.meta.c = c;
  model.meta.tol = tol;
  model.meta.seed = seed;
  model.meta.passes = g.passes;
  model.meta.gap = g.gap;
  return model;
}

Prediction predict(const LinearModel& model, const std::array<double, 3>& features) {
  const double margin = model.decision(features);
  // margin == 0 resolves to false birth: ambiguity never declares a birth.
  return {margin > 0.0 ? Label::kTrueBirth : Label::kFalseBirth, margin};
}

CvReport cross_validate(const std::vector<LabeledExample>& examples, std::size_t folds,
                        std::uint64_t seed, std::array<bool, 3> feature_mask, double c,
                        double tol) {
  std::size_t active = 0;
  for (bool keep : feature_mask)
    if (keep) ++active;
  if (active == 0) throw Error("cross_validate: feature mask excludes every feature");
  if (folds < 2) throw Error("cross_validate: need at least two folds");

  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < examples.size(); ++i)
    (examples[i].label == Label::kTrueBirth ? pos_idx : neg_idx).push_back(i);
  if (pos_idx.size() < folds || neg_idx.size() < folds)
    throw Error("cross_validate: fewer examples per class than folds");

  std::mt19937_64 rng(seed);
  util::shuffle(pos_idx, rng);
  util::shuffle(neg_idx, rng);

  // Round-robin assignment keeps the folds stratified.
  std::vector<std::size_t> fold_of(examples.size(), 0);
  for (std::size_t i = 0; i < pos_idx.size(); ++i) fold_of[pos_idx[i]] = i % folds;
  for (std::size_t i = 0; i < neg_idx.size(); ++i) fold_of[neg_idx[i]] = i % folds;

  auto masked_row = [&feature_mask](const LabeledExample& ex) {
    std::vector<double> row;
    for (std::size_t j = 0; j < 3; ++j)
      if (feature_mask[j]) row.push_back(ex.features[j]);
    return row;
  };

  CvReport report;
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  std::size_t n_p = 0, n_r = 0, n_f = 0;
  for (std::size_t fold = 0; fold < folds; ++fold) {
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold_of[i] == fold) continue;
      rows.push_back(masked_row(examples[i]));
      labels.push_back(examples[i].label == Label::kTrueBirth ? 1.0 : -1.0);
    }
    GenericModel g = train_generic(rows, labels, c, tol,
                                   util::splitmix64(seed ^ (fold + 1)));

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold_of[i] != fold) continue;
      auto row = masked_row(examples[i]);
      double acc = g.bias;
      for (std::size_t j = 0; j < row.size(); ++j)
        acc += g.weights[j] * (row[j] - g.scaler.mean[j]) / g.scaler.stddev[j];
      const bool predicted_true = acc > 0.0;
      const bool actually_true = examples[i].label == Label::kTrueBirth;
      if (predicted_true && actually_true) ++tp;
      else if (predicted_true) ++fp;
      else if (actually_true) ++fn;
    }

    FoldMetrics m;
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
      m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    if (m.precision) { sum_p += *m.precision; ++n_p; }
    if (m.recall) { sum_r += *m.recall; ++n_r; }
    if (m.f1) { sum_f += *m.f1; ++n_f; }
    report.folds.push_back(m);
  }
  if (n_p) report.mean.precision = sum_p / static_cast<double>(n_p);
  if (n_r) report.mean.recall = sum_r / static_cast<double>(n_r);
  if (n_f) report.mean.f1 = sum_f / static_cast<double>(n_f);
  return report;
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << kModelHeaderTag << "\n";
  out << "kernel\t" << model.meta.kernel << "\n";
  out << "weights\t" << util::format_double(model.weights[0]) << '\t'
      << util::format_double(model.weights[1]) << '\t'
      << util::format_double(model.weights[2]) << "\n";
  out << "bias\t" << util::format_double(model.bias) << "\n";
  out << "scaler_mean\t" << util::format_double(model.scaler_mean[0]) << '\t'
      << util::format_double(model.scaler_mean[1]) << '\t'
      << util::format_double(model.scaler_mean[2]) << "\n";
  out << "scaler_std\t" << util::format_double(model.scaler_std[0]) << '\t'
      << util::format_double(model.scaler_std[1]) << '\t'
      << util::format_double(model.scaler_std[2]) << "\n";
  out << "c\t" << util::format_double(model.meta.c) << "\n";
  out << "tol\t" << util::format_double(model.meta.tol) << "\n";
  out << "seed\t" << model.meta.seed << "\n";
  out << "passes\t" << model.meta.passes << "\n";
  out << "gap\t" << util::format_double(model.meta.gap) << "\n";
  if (!out) throw Error("write failed: " + path.string());
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header) || header != kModelHeaderTag)
    throw FormatError("not a dtsense-model v1 file: " + path.string());

  LinearModel model;
  std::string line;
  auto need = [&path](bool ok, const char* what) {
    if (!ok) throw FormatError(path.string() + ": bad " + std::string(what) + " line");
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = util::split(line, '\t');
    const std::string& key = fields[0];
    if (key == "kernel") {
      need(fields.size() == 2, "kernel");
      model.meta.kernel = fields[1];
    } else if (key == "weights" || key == "scaler_mean" || key == "scaler_std") {
      need(fields.size() == 4, key.c_str());
      std::array<double, 3> v{};
      for (int j = 0; j < 3; ++j) need(util::parse_double(fields[j + 1], &v[j]), key.c_str());
      if (key == "weights") model.weights = v;
      else if (key == "scaler_mean") model.scaler_mean = v;
      else model.scaler_std = v;
    } else if (key == "bias" || key == "c" || key == "tol" || key == "gap") {
      need(fields.size() == 2, key.c_str());
      double v = 0.0;
      need(util::parse_double(fields[1], &v), key.c_str());
      if (key == "bias") model.bias = v;
      else if (key == "c") model.meta.c = v;
      else if (key == "tol") model.meta.tol = v;
      else model.meta.gap = v;
    } else if (key == "seed" || key == "passes") {
      need(fields.size() == 2, key.c_str());
      std::uint64_t v = 0;
      need(util::parse_u64(fields[1], &v), key.c_str());
      if (key == "seed") model.meta.seed = v;
      else model.meta.passes = v;
    } else {
      throw FormatError(path.string() + ": unknown model field '" + key + "'");
    }
  }
  for (double s : model.scaler_std)
    if (s <= 0.0) throw FormatError(path.string() + ": non-positive scaler std");
  return model;
}

std::vector<LabeledExample> load_labeled_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<LabeledExample> examples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = util::split(line, '\t');
    if (fields.size() != 5)
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 5 tab-separated fields");
    LabeledExample ex;
    ex.word = fields[0];
    for (int j = 0; j < 3; ++j)
      if (!util::parse_double(fields[j + 1], &ex.features[j]))
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number");
    ex.label = label_from_name(fields[4]);
    examples.push_back(std::move(ex));
  }
  return examples;
}

void save_labeled_tsv(const std::vector<LabeledExample>& examples,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& ex : examples) {
    out << ex.word << '\t' << util::format_double(ex.features[0]) << '\t'
        << util::format_double(ex.features[1]) << '\t'
        << util::format_double(ex.features[2]) << '\t' << label_name(ex.label) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace dtsense::classify
