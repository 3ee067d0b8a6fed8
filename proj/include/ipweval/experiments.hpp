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

// Monte Carlo scenario study.
//
// For each selection scenario, replicates are drawn independently and every
// metric is computed three ways:
//   actual     full population, unit weights (the ground-truth benchmark)
//   observed   selected subpopulation, unit weights (the naive estimate)
//   weighted   selected subpopulation, inverse-probability weights from the
//              true selection probabilities
// Replicate values are aggregated into means with 2.5/97.5 percentile
// intervals. A replicate on which a metric is undefined (for example a
// single-class observed subpopulation) is counted and excluded from the
// aggregate; triplets with more than 10% such replicates are flagged.
//
// Replicates run in parallel; each uses a seed derived from the root seed
// and its replicate index, so results do not depend on thread count, and
// each scenario uses a stream derived from the scenario's enum value, so a
// subset run reproduces the corresponding rows of a full run.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipweval/metrics.hpp"
#include "ipweval/parallel.hpp"
#include "ipweval/rng.hpp"
#include "ipweval/stats.hpp"
#include "ipweval/synthetic.hpp"

namespace ipweval {

enum class MetricName { Sensitivity, Specificity, Ppv, Accuracy, Auroc, Auprc };

inline constexpr int kNumMetrics = 6;

inline constexpr std::array<MetricName, kNumMetrics> kAllMetrics = {
    MetricName::Sensitivity, MetricName::Specificity, MetricName::Ppv,
    MetricName::Accuracy,    MetricName::Auroc,       MetricName::Auprc};

inline const char* to_string(MetricName m) {
  switch (m) {
    case MetricName::Sensitivity: return "sensitivity";
    case MetricName::Specificity: return "specificity";
    case MetricName::Ppv: return "ppv";
    case MetricName::Accuracy: return "accuracy";
    case MetricName::Auroc: return "auroc";
    case MetricName::Auprc: return "auprc";
  }
  return "?";
}

inline MetricName parse_metric(const std::string& name) {
  for (MetricName m : kAllMetrics)
    if (name == to_string(m)) return m;
  throw std::invalid_argument(
      "unknown metric \"" + name +
      "\" (expected sensitivity, specificity, ppv, accuracy, auroc, or auprc)");
}

/// Actual/observed/weighted summaries of one metric.
struct MetricTriplet {
  MetricName metric = MetricName::Sensitivity;
  EstimateSummary actual;
  EstimateSummary observed;
  EstimateSummary weighted;

  const EstimateSummary& get(EstimatorKind e) const {
    switch (e) {
      case EstimatorKind::Actual: return actual;
      case EstimatorKind::Observed: return observed;
      case EstimatorKind::Weighted: return weighted;
    }
    throw std::invalid_argument("unknown estimator");
  }

  EstimateSummary& get(EstimatorKind e) {
    return const_cast<EstimateSummary&>(
        static_cast<const MetricTriplet&>(*this).get(e));
  }
};

/// Replicate-aggregated calibration values for one score bin.
///
/// `n_defined` counts replicates on which the bin held samples; the
/// summaries are over those replicates only and absent when the bin was
/// always empty. `mean_mass` averages the bin's weighted sample mass over
/// all replicates, counting empty ones as zero.
struct CalibrationBinBand {
  double lo = 0.0;
  double hi = 0.0;
  int n_defined = 0;
  std::optional<double> mean_pred;
  std::optional<double> prevalence;
  std::optional<double> prev_lo;
  std::optional<double> prev_hi;
  double mean_mass = 0.0;
};

/// Calibration curve of one estimator: one band per bin.
struct CalibrationBand {
  std::vector<CalibrationBinBand> bins;
};

/// Everything computed for one scenario.
struct ScenarioResult {
  ScenarioSpec spec;
  int n = 0;
  int n_reps = 0;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  int n_bins = 5;
  std::vector<MetricTriplet> triplets;
  std::array<CalibrationBand, kNumEstimators> calibration;
};

/// Samples a dataset exposes to one estimator.
///
/// Actual keeps every example at unit weight; observed keeps the selected
/// subpopulation at unit weight; weighted keeps the selected subpopulation
/// at weight 1/selection_prob.
inline std::vector<WeightedSample> estimator_view(std::span<const SimulatedExample> data,
                                                  EstimatorKind estimator) {
  std::vector<WeightedSample> view;
  view.reserve(data.size());
  switch (estimator) {
    case EstimatorKind::Actual:
      for (const auto& e : data)
        view.push_back(WeightedSample{e.score, e.label, true, 1.0, 1.0});
      return view;
    case EstimatorKind::Observed:
      for (const auto& e : data)
        if (e.selected)
          view.push_back(WeightedSample{e.score, e.label, true, 1.0, 1.0});
      return view;
    case EstimatorKind::Weighted:
      for (const auto& e : data)
        view.push_back(WeightedSample{e.score, e.label, e.selected, e.selection_prob, 1.0});
      return ipw_weights(view);
  }
  throw std::invalid_argument("unknown estimator");
}

struct RunOptions {
  int n_bins = 5;
  int n_threads = 0;
};

namespace detail {

/// Raw per-replicate values for one estimator of one scenario.
struct ReplicateSlice {
  std::array<std::optional<double>, kNumMetrics> metrics;
  std::vector<std::optional<double>> bin_pred;
  std::vector<std::optional<double>> bin_prev;
  std::vector<double> bin_mass;
};

inline ReplicateSlice evaluate_view(std::span<const WeightedSample> view,
                                    double threshold, int n_bins) {
  ReplicateSlice slice;
  if (!view.empty()) {
    const WeightedConfusion conf = weighted_confusion(view, threshold);
    slice.metrics[0] = sensitivity(conf);
    slice.metrics[1] = specificity(conf);
    slice.metrics[2] = ppv(conf);
    slice.metrics[3] = accuracy(conf);
    try {
      slice.metrics[4] = weighted_roc(view).area;
    } catch (const std::runtime_error&) {
    }
    try {
      slice.metrics[5] = weighted_pr(view).area;
    } catch (const std::runtime_error&) {
    }
    const CurveEstimate cal = calibration_curve(view, n_bins);
    slice.bin_pred.resize(static_cast<std::size_t>(n_bins));
    slice.bin_prev.resize(static_cast<std::size_t>(n_bins));
    slice.bin_mass = cal.bin_mass;
    for (std::size_t b = 0; b < cal.points.size(); ++b) {
      if (cal.points[b].has_data) {
        slice.bin_pred[b] = cal.points[b].x;
        slice.bin_prev[b] = cal.points[b].y;
      }
    }
  } else {
    slice.bin_pred.resize(static_cast<std::size_t>(n_bins));
    slice.bin_prev.resize(static_cast<std::size_t>(n_bins));
    slice.bin_mass.assign(static_cast<std::size_t>(n_bins), 0.0);
  }
  return slice;
}

}  // namespace detail

/// Run one scenario: n_reps independent datasets of size n, each metric
/// computed with all three estimators, aggregated into percentile
/// intervals. Replicate r uses seed derive_seed(seed, r).
inline ScenarioResult run_scenario(const ScenarioSpec& spec, int n, int n_reps,
                                   double threshold, std::uint64_t seed,
                                   const RunOptions& opts = {}) {
  if (n < 2) throw std::invalid_argument("scenario needs a population of at least 2");
  if (n_reps < 1) throw std::invalid_argument("at least one replicate required");
  if (opts.n_bins < 1) throw std::invalid_argument("calibration needs at least one bin");

  const auto reps = static_cast<std::size_t>(n_reps);
  std::array<std::vector<detail::ReplicateSlice>, kNumEstimators> slices;
  for (auto& s : slices) s.resize(reps);

  parallel_for(reps, opts.n_threads, [&](std::size_t r) {
    const auto data = sample_dataset(spec, n, derive_seed(seed, r));
    for (int e = 0; e < kNumEstimators; ++e) {
      const auto view = estimator_view(data, static_cast<EstimatorKind>(e));
      slices[static_cast<std::size_t>(e)][r] =
          detail::evaluate_view(view, threshold, opts.n_bins);
    }
  });

  ScenarioResult result;
  result.spec = spec;
  result.n = n;
  result.n_reps = n_reps;
  result.threshold = threshold;
  result.seed = seed;
  result.n_bins = opts.n_bins;

  result.triplets.reserve(kNumMetrics);
  for (int m = 0; m < kNumMetrics; ++m) {
    MetricTriplet triplet;
    triplet.metric = kAllMetrics[static_cast<std::size_t>(m)];
    for (int e = 0; e < kNumEstimators; ++e) {
      std::vector<std::optional<double>> values(reps);
      for (std::size_t r = 0; r < reps; ++r)
        values[r] = slices[static_cast<std::size_t>(e)][r].metrics[static_cast<std::size_t>(m)];
      triplet.get(static_cast<EstimatorKind>(e)) = summarize_replicates(values);
    }
    result.triplets.push_back(triplet);
  }

  for (int e = 0; e < kNumEstimators; ++e) {
    CalibrationBand& band = result.calibration[static_cast<std::size_t>(e)];
    band.bins.resize(static_cast<std::size_t>(opts.n_bins));
    for (std::size_t b = 0; b < band.bins.size(); ++b) {
      CalibrationBinBand& bin = band.bins[b];
      bin.lo = static_cast<double>(b) / opts.n_bins;
      bin.hi = static_cast<double>(b + 1) / opts.n_bins;
      std::vector<double> preds;
      std::vector<double> prevs;
      double mass_sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& slice = slices[static_cast<std::size_t>(e)][r];
        if (slice.bin_pred[b].has_value()) {
          preds.push_back(*slice.bin_pred[b]);
          prevs.push_back(*slice.bin_prev[b]);
        }
        mass_sum += slice.bin_mass[b];
      }
      bin.n_defined = static_cast<int>(preds.size());
      bin.mean_mass = mass_sum / static_cast<double>(reps);
      if (!preds.empty()) {
        const PointInterval pred = percentile_interval(preds);
        const PointInterval prev = percentile_interval(prevs);
        bin.mean_pred = pred.mean;
        bin.prevalence = prev.mean;
        bin.prev_lo = prev.lo;
        bin.prev_hi = prev.hi;
      }
    }
  }
  return result;
}

/// Run several scenarios with one root seed. Scenario streams derive from
/// the scenario enum value, so running a subset yields the same numbers as
/// the corresponding rows of a full run.
inline std::vector<ScenarioResult> run_scenarios(std::span<const ScenarioSpec> specs,
                                                 int n, int n_reps, double threshold,
                                                 std::uint64_t seed,
                                                 const RunOptions& opts = {}) {
  std::vector<ScenarioResult> results;
  results.reserve(specs.size());
  for (const auto& spec : specs) {
    const std::uint64_t stream =
        derive_seed(seed, static_cast<std::uint64_t>(spec.scenario));
    results.push_back(run_scenario(spec, n, n_reps, threshold, stream, opts));
  }
  return results;
}

}  // namespace ipweval
