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

// Shared summary types: percentile intervals over replicate values and the
// actual/observed/weighted estimator vocabulary.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipweval {

/// Mean plus a [lo, hi] percentile interval across replicates.
struct PointInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// A point-interval summary with bookkeeping for replicates on which the
/// underlying metric was undefined (those are excluded from mean and
/// percentiles). `flagged` is set when more than 10% of replicates were
/// undefined.
struct EstimateSummary {
  std::optional<PointInterval> value;
  int n_undefined = 0;
  bool flagged = false;
};

enum class EstimatorKind { Actual = 0, Observed = 1, Weighted = 2 };
inline constexpr int kNumEstimators = 3;

inline const char* to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::Actual: return "actual";
    case EstimatorKind::Observed: return "observed";
    case EstimatorKind::Weighted: return "weighted";
  }
  return "?";
}

/// Percentile of an ascending-sorted range, by linear interpolation between
/// closest ranks: rank = pct/100 * (n-1), interpolating between the floor
/// and ceil sample.
inline double percentile_sorted(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty list");
  if (sorted.size() == 1) return sorted[0];
  const double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo_idx = static_cast<std::size_t>(rank);
  if (lo_idx + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo_idx);
  return sorted[lo_idx] + frac * (sorted[lo_idx + 1] - sorted[lo_idx]);
}

/// Arithmetic mean plus [lo_pct, hi_pct] percentiles of `values`.
inline PointInterval percentile_interval(std::span<const double> values,
                                         double lo_pct = 2.5, double hi_pct = 97.5) {
  if (values.empty()) throw std::invalid_argument("percentile interval of empty list");
  if (!(lo_pct >= 0.0 && lo_pct < hi_pct && hi_pct <= 100.0))
    throw std::invalid_argument("percentile bounds must satisfy 0 <= lo < hi <= 100");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  return PointInterval{sum / static_cast<double>(sorted.size()),
                       percentile_sorted(sorted, lo_pct),
                       percentile_sorted(sorted, hi_pct)};
}

/// Summarize replicate values of a possibly-undefined metric.
inline EstimateSummary summarize_replicates(std::span<const std::optional<double>> values,
                                            double lo_pct = 2.5, double hi_pct = 97.5) {
  EstimateSummary out;
  std::vector<double> defined;
  defined.reserve(values.size());
  for (const auto& v : values) {
    if (v.has_value()) defined.push_back(*v);
  }
  out.n_undefined = static_cast<int>(values.size() - defined.size());
  out.flagged = 10 * out.n_undefined > static_cast<int>(values.size());
  if (!defined.empty()) out.value = percentile_interval(defined, lo_pct, hi_pct);
  return out;
}

}  // namespace ipweval
