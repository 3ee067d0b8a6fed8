/*
 * Copyright 2026 The ipweval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Weighted binary classification metrics.
//
// Every estimator here consumes a list of WeightedSample. With all weights
// equal to 1 the results coincide exactly with the textbook unweighted
// definitions. With weights set to 1/selection_prob (see ipw_weights) they
// are inverse-probability-weighted estimates that correct for non-random
// label selection; normalization by total weight happens inside each
// estimator, so only relative weights matter.
//
// Conventions:
//   - A sample is predicted positive at threshold t iff score >= t.
//   - Tied scores form a single ROC/PR vertex.
//   - ROC area uses trapezoidal integration; PR area uses step
//     (average-precision) integration.
//   - Metrics with a zero denominator return an empty optional, never 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ipweval {

/// One evaluation unit: a model score with an optionally observed label.
///
/// `selected` marks whether the label was observed; the label must be
/// present whenever a sample reaches a metric computation. `selection_prob`
/// is the probability that this sample's label was selected for
/// observation, and `weight` is the sample's mass in weighted estimates
/// (1/selection_prob for IPW use, 1 otherwise).
struct WeightedSample {
  double score = 0.0;
  std::optional<int> label;
  bool selected = true;
  double selection_prob = 1.0;
  double weight = 1.0;
};

/// Weighted confusion matrix at a fixed threshold.
struct WeightedConfusion {
  double wtp = 0.0;
  double wfp = 0.0;
  double wtn = 0.0;
  double wfn = 0.0;
  double threshold = 0.5;

  double total() const { return wtp + wfp + wtn + wfn; }
};

namespace detail {

inline void require_valid_sample(const WeightedSample& s) {
  if (!(s.score >= 0.0 && s.score <= 1.0))
    throw std::invalid_argument("sample score outside [0, 1]");
  if (!(s.weight > 0.0)) throw std::invalid_argument("sample weight must be positive");
  if (!s.label.has_value())
    throw std::invalid_argument("unlabeled sample in metric computation");
}

}  // namespace detail

/// Accumulate the weighted confusion matrix at `threshold` (score >= t
/// counts as a positive prediction).
inline WeightedConfusion weighted_confusion(std::span<const WeightedSample> samples,
                                            double threshold) {
  if (samples.empty()) throw std::invalid_argument("empty population");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("threshold outside [0, 1]");
  WeightedConfusion c;
  c.threshold = threshold;
  for (const auto& s : samples) {
    detail::require_valid_sample(s);
    const bool predicted = s.score >= threshold;
    const bool actual = *s.label != 0;
    if (predicted) {
      (actual ? c.wtp : c.wfp) += s.weight;
    } else {
      (actual ? c.wfn : c.wtn) += s.weight;
    }
  }
  return c;
}

inline std::optional<double> sensitivity(const WeightedConfusion& c) {
  const double d = c.wtp + c.wfn;
  if (d <= 0.0) return std::nullopt;
  return c.wtp / d;
}

inline std::optional<double> specificity(const WeightedConfusion& c) {
  const double d = c.wtn + c.wfp;
  if (d <= 0.0) return std::nullopt;
  return c.wtn / d;
}

inline std::optional<double> ppv(const WeightedConfusion& c) {
  const double d = c.wtp + c.wfp;
  if (d <= 0.0) return std::nullopt;
  return c.wtp / d;
}

inline std::optional<double> accuracy(const WeightedConfusion& c) {
  const double d = c.total();
  if (d <= 0.0) return std::nullopt;
  return (c.wtp + c.wtn) / d;
}

enum class CurveKind { Roc, Pr, Calibration };

/// One curve vertex. `has_data` is false only for calibration bins that
/// received no samples; such points carry no (x, y).
struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  bool has_data = true;
};

/// An estimated ROC, PR, or calibration curve.
///
/// `area` is present for ROC (trapezoidal) and PR (step integration),
/// absent for calibration. `bin_mass` is the weighted sample mass per bin,
/// filled for calibration curves only.
struct CurveEstimate {
  CurveKind kind = CurveKind::Roc;
  std::vector<CurvePoint> points;
  std::optional<double> area;
  std::vector<double> bin_mass;
};

namespace detail {

/// Positive and negative weight mass sharing one distinct score value.
struct ScoredMass {
  double score = 0.0;
  double wpos = 0.0;
  double wneg = 0.0;
};

/// Group samples by distinct score, descending. Validates every sample.
inline std::vector<ScoredMass> tie_groups(std::span<const WeightedSample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty population");
  std::vector<std::pair<double, double>> scored;  // (score, signed mass: +pos / -neg)
  scored.reserve(samples.size());
  for (const auto& s : samples) {
    require_valid_sample(s);
    scored.emplace_back(s.score, *s.label != 0 ? s.weight : -s.weight);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<ScoredMass> groups;
  for (const auto& [score, mass] : scored) {
    if (groups.empty() || groups.back().score != score)
      groups.push_back(ScoredMass{score, 0.0, 0.0});
    if (mass > 0.0)
      groups.back().wpos += mass;
    else
      groups.back().wneg -= mass;
  }
  return groups;
}

/// Trapezoidal ROC area accumulator over descending-score tie groups.
/// Keeps 2x the unnormalized area so tie diagonals stay exact.
struct RocAccumulator {
  double tp = 0.0;
  double fp = 0.0;
  double area2 = 0.0;

  void add_group(double dpos, double dneg) {
    area2 += dneg * (2.0 * tp + dpos);
    tp += dpos;
    fp += dneg;
  }
};

/// Step-integration (average precision) accumulator over descending-score
/// tie groups.
struct PrAccumulator {
  double tp = 0.0;
  double fp = 0.0;
  double ap_unnorm = 0.0;

  void add_group(double dpos, double dneg) {
    tp += dpos;
    fp += dneg;
    if (dpos > 0.0) ap_unnorm += dpos * (tp / (tp + fp));
  }
};

}  // namespace detail

/// Weighted ROC curve with trapezoidal area.
///
/// Thresholds sweep the distinct scores descending; tied scores form one
/// vertex. The area equals the weighted Mann-Whitney statistic with ties
/// counted as one half.
inline CurveEstimate weighted_roc(std::span<const WeightedSample> samples) {
  const auto groups = detail::tie_groups(samples);
  double wpos = 0.0;
  double wneg = 0.0;
  for (const auto& g : groups) {
    wpos += g.wpos;
    wneg += g.wneg;
  }
  if (wpos <= 0.0 || wneg <= 0.0)
    throw std::runtime_error("degenerate ROC: one class absent");

  CurveEstimate curve;
  curve.kind = CurveKind::Roc;
  curve.points.reserve(groups.size() + 2);
  curve.points.push_back(CurvePoint{0.0, 0.0, true});
  detail::RocAccumulator acc;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    acc.add_group(groups[i].wpos, groups[i].wneg);
    if (i + 1 == groups.size())
      curve.points.push_back(CurvePoint{1.0, 1.0, true});
    else
      curve.points.push_back(CurvePoint{acc.fp / wneg, acc.tp / wpos, true});
  }
  curve.area = acc.area2 / (2.0 * wpos * wneg);
  return curve;
}

/// Weighted precision-recall curve with step-integrated (average
/// precision) area. Points are (recall, precision) in descending-threshold
/// order, anchored at recall 0 with the precision of the first vertex.
inline CurveEstimate weighted_pr(std::span<const WeightedSample> samples) {
  const auto groups = detail::tie_groups(samples);
  double wpos = 0.0;
  for (const auto& g : groups) wpos += g.wpos;
  if (wpos <= 0.0) throw std::runtime_error("degenerate PR: no positives");

  CurveEstimate curve;
  curve.kind = CurveKind::Pr;
  curve.points.reserve(groups.size() + 1);
  detail::PrAccumulator acc;
  bool anchored = false;
  for (const auto& g : groups) {
    acc.add_group(g.wpos, g.wneg);
    const double precision = acc.tp / (acc.tp + acc.fp);
    if (!anchored) {
      curve.points.push_back(CurvePoint{0.0, precision, true});
      anchored = true;
    }
    curve.points.push_back(CurvePoint{acc.tp / wpos, precision, true});
  }
  curve.area = acc.ap_unnorm / wpos;
  return curve;
}

/// Weighted calibration curve over `n_bins` equal-width score bins.
///
/// Per nonempty bin, x is the weighted mean score and y the weighted label
/// prevalence; empty bins are emitted with `has_data = false`. The last
/// bin is right-closed so score 1.0 lands in it.
inline CurveEstimate calibration_curve(std::span<const WeightedSample> samples,
                                       int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("calibration needs at least one bin");
  if (samples.empty()) throw std::invalid_argument("empty population");
  std::vector<double> mass(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> score_sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> label_sum(static_cast<std::size_t>(n_bins), 0.0);
  for (const auto& s : samples) {
    detail::require_valid_sample(s);
    auto bin = static_cast<std::size_t>(s.score * n_bins);
    if (bin >= static_cast<std::size_t>(n_bins)) bin = static_cast<std::size_t>(n_bins) - 1;
    mass[bin] += s.weight;
    score_sum[bin] += s.weight * s.score;
    label_sum[bin] += s.weight * (*s.label != 0 ? 1.0 : 0.0);
  }
  CurveEstimate curve;
  curve.kind = CurveKind::Calibration;
  curve.points.reserve(static_cast<std::size_t>(n_bins));
  for (std::size_t b = 0; b < static_cast<std::size_t>(n_bins); ++b) {
    if (mass[b] > 0.0)
      curve.points.push_back(CurvePoint{score_sum[b] / mass[b], label_sum[b] / mass[b], true});
    else
      curve.points.push_back(CurvePoint{0.0, 0.0, false});
  }
  curve.bin_mass = std::move(mass);
  return curve;
}

/// Inverse-probability weights: keep the selected samples, each weighted
/// by the reciprocal of its selection probability.
inline std::vector<WeightedSample> ipw_weights(std::span<const WeightedSample> samples) {
  std::vector<WeightedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.selected) continue;
    if (!(s.selection_prob > 0.0)) throw std::runtime_error("positivity violation");
    WeightedSample w = s;
    w.weight = 1.0 / s.selection_prob;
    out.push_back(w);
  }
  return out;
}

}  // namespace ipweval
