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

// Report serialization: CSV (source of truth, 6 significant digits), a
// human-readable text grid (2 decimals), and JSON mirrors of the CSVs.
// All output is byte-deterministic for a given input: fixed row order,
// fixed formatting, "\n" line endings, files written in binary mode.
// Undefined estimates serialize as empty CSV fields and JSON nulls.

#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipweval/deployment.hpp"
#include "ipweval/experiments.hpp"
#include "ipweval/stats.hpp"

namespace ipweval {

/// Format with 6 significant digits (the CSV number format).
inline std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Format with 2 decimals (the text-grid number format).
inline std::string format_f2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// "mean [lo, hi]" at 2 decimals; "undefined" when no replicate defined
/// the value; a trailing '*' marks summaries with >10% undefined
/// replicates.
inline std::string format_cell(const EstimateSummary& s) {
  std::string cell;
  if (s.value.has_value()) {
    cell = format_f2(s.value->mean) + " [" + format_f2(s.value->lo) + ", " +
           format_f2(s.value->hi) + "]";
  } else {
    cell = "undefined";
  }
  if (s.flagged) cell += "*";
  return cell;
}

namespace detail {

inline void append_summary_fields(std::string& out, const EstimateSummary& s) {
  if (s.value.has_value()) {
    out += format_g6(s.value->mean);
    out += ',';
    out += format_g6(s.value->lo);
    out += ',';
    out += format_g6(s.value->hi);
  } else {
    out += ",,";
  }
}

inline nlohmann::json summary_json(const EstimateSummary& s) {
  nlohmann::json j;
  if (s.value.has_value()) {
    j["mean"] = s.value->mean;
    j["lo"] = s.value->lo;
    j["hi"] = s.value->hi;
  } else {
    j["mean"] = nullptr;
    j["lo"] = nullptr;
    j["hi"] = nullptr;
  }
  j["n_undefined"] = s.n_undefined;
  j["flagged"] = s.flagged;
  return j;
}

}  // namespace detail

inline constexpr std::array<EstimatorKind, kNumEstimators> kAllEstimators = {
    EstimatorKind::Actual, EstimatorKind::Observed, EstimatorKind::Weighted};

/// Metric-grid CSV: one row per (scenario, metric, estimator).
inline std::string table1_csv(std::span<const ScenarioResult> results,
                              std::span<const MetricName> metrics) {
  std::string out = "scenario,metric,estimator,mean,lo,hi,n_undefined\n";
  for (const auto& result : results) {
    for (MetricName m : metrics) {
      for (const auto& triplet : result.triplets) {
        if (triplet.metric != m) continue;
        for (EstimatorKind e : kAllEstimators) {
          const EstimateSummary& s = triplet.get(e);
          out += to_string(result.spec.scenario);
          out += ',';
          out += to_string(m);
          out += ',';
          out += to_string(e);
          out += ',';
          detail::append_summary_fields(out, s);
          out += ',';
          out += std::to_string(s.n_undefined);
          out += '\n';
        }
      }
    }
  }
  return out;
}

/// Human-readable metric grid: metric x estimator rows, scenario columns,
/// cells "mean [lo, hi]" at 2 decimals. Every scenario in `required` must
/// be present among the results.
inline std::string table1_text(std::span<const ScenarioResult> results,
                               std::span<const MetricName> metrics,
                               std::span<const Scenario> required) {
  std::vector<const ScenarioResult*> ordered;
  for (Scenario s : required) {
    const ScenarioResult* found = nullptr;
    for (const auto& result : results)
      if (result.spec.scenario == s) found = &result;
    if (!found)
      throw std::runtime_error(std::string("missing scenario: ") + to_string(s));
    ordered.push_back(found);
  }

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"metric", "estimator"};
  for (const auto* result : ordered) header.push_back(to_string(result->spec.scenario));
  grid.push_back(header);
  bool any_flagged = false;
  for (MetricName m : metrics) {
    for (EstimatorKind e : kAllEstimators) {
      std::vector<std::string> row;
      row.push_back(e == EstimatorKind::Actual ? to_string(m) : "");
      row.push_back(to_string(e));
      for (const auto* result : ordered) {
        const EstimateSummary* s = nullptr;
        for (const auto& triplet : result->triplets)
          if (triplet.metric == m) s = &triplet.get(e);
        row.push_back(s ? format_cell(*s) : "-");
        if (s && s->flagged) any_flagged = true;
      }
      grid.push_back(row);
    }
  }

  std::vector<std::size_t> widths(grid[0].size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c + 1 < row.size()) cell.resize(widths[c] + 2, ' ');
      out += cell;
    }
    out += '\n';
  }
  if (any_flagged) out += "* more than 10% of replicates undefined\n";
  return out;
}

/// Calibration CSV: one row per (scenario, estimator, bin). Bins that
/// never held samples emit empty value fields.
inline std::string calibration_csv(std::span<const ScenarioResult> results) {
  std::string out =
      "scenario,estimator,bin_index,bin_lo,bin_hi,mean_pred,prevalence,"
      "weight_mass,lo,hi\n";
  for (const auto& result : results) {
    for (EstimatorKind e : kAllEstimators) {
      const CalibrationBand& band =
          result.calibration[static_cast<std::size_t>(e)];
      for (std::size_t b = 0; b < band.bins.size(); ++b) {
        const CalibrationBinBand& bin = band.bins[b];
        out += to_string(result.spec.scenario);
        out += ',';
        out += to_string(e);
        out += ',';
        out += std::to_string(b);
        out += ',';
        out += format_g6(bin.lo);
        out += ',';
        out += format_g6(bin.hi);
        out += ',';
        if (bin.mean_pred.has_value()) out += format_g6(*bin.mean_pred);
        out += ',';
        if (bin.prevalence.has_value()) out += format_g6(*bin.prevalence);
        out += ',';
        out += format_g6(bin.mean_mass);
        out += ',';
        if (bin.prev_lo.has_value()) out += format_g6(*bin.prev_lo);
        out += ',';
        if (bin.prev_hi.has_value()) out += format_g6(*bin.prev_hi);
        out += '\n';
      }
    }
  }
  return out;
}

/// Sweep CSV: three estimator rows per grid point.
inline std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out =
      "swept_param,param_value,estimator,mean,lo,hi,mean_observed_fraction,"
      "n_undefined\n";
  for (const auto& row : rows) {
    for (EstimatorKind e : kAllEstimators) {
      const EstimateSummary& s = e == EstimatorKind::Actual     ? row.actual
                                 : e == EstimatorKind::Observed ? row.observed
                                                                : row.weighted;
      out += to_string(row.param);
      out += ',';
      out += format_g6(row.value);
      out += ',';
      out += to_string(e);
      out += ',';
      detail::append_summary_fields(out, s);
      out += ',';
      out += format_g6(row.mean_observed_fraction);
      out += ',';
      out += std::to_string(s.n_undefined);
      out += '\n';
    }
  }
  return out;
}

inline nlohmann::json table1_json(std::span<const ScenarioResult> results,
                                  std::span<const MetricName> metrics) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& result : results) {
    nlohmann::json entry;
    entry["scenario"] = to_string(result.spec.scenario);
    entry["n"] = result.n;
    entry["n_reps"] = result.n_reps;
    entry["threshold"] = result.threshold;
    entry["seed"] = result.seed;
    nlohmann::json triplets = nlohmann::json::array();
    for (MetricName m : metrics) {
      for (const auto& triplet : result.triplets) {
        if (triplet.metric != m) continue;
        nlohmann::json t;
        t["metric"] = to_string(m);
        t["actual"] = detail::summary_json(triplet.actual);
        t["observed"] = detail::summary_json(triplet.observed);
        t["weighted"] = detail::summary_json(triplet.weighted);
        triplets.push_back(t);
      }
    }
    entry["metrics"] = triplets;
    scenarios.push_back(entry);
  }
  nlohmann::json j;
  j["scenarios"] = scenarios;
  return j;
}

inline nlohmann::json calibration_json(std::span<const ScenarioResult> results) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& result : results) {
    nlohmann::json entry;
    entry["scenario"] = to_string(result.spec.scenario);
    entry["n_bins"] = result.n_bins;
    nlohmann::json estimators;
    for (EstimatorKind e : kAllEstimators) {
      const CalibrationBand& band =
          result.calibration[static_cast<std::size_t>(e)];
      nlohmann::json bins = nlohmann::json::array();
      for (std::size_t b = 0; b < band.bins.size(); ++b) {
        const CalibrationBinBand& bin = band.bins[b];
        nlohmann::json jb;
        jb["bin_index"] = b;
        jb["bin_lo"] = bin.lo;
        jb["bin_hi"] = bin.hi;
        jb["n_defined"] = bin.n_defined;
        jb["weight_mass"] = bin.mean_mass;
        if (bin.mean_pred.has_value()) {
          jb["mean_pred"] = *bin.mean_pred;
          jb["prevalence"] = *bin.prevalence;
          jb["lo"] = *bin.prev_lo;
          jb["hi"] = *bin.prev_hi;
        } else {
          jb["mean_pred"] = nullptr;
          jb["prevalence"] = nullptr;
          jb["lo"] = nullptr;
          jb["hi"] = nullptr;
        }
        bins.push_back(jb);
      }
      estimators[to_string(e)] = bins;
    }
    entry["estimators"] = estimators;
    scenarios.push_back(entry);
  }
  nlohmann::json j;
  j["scenarios"] = scenarios;
  return j;
}

inline nlohmann::json sweep_json(std::span<const SweepRow> rows) {
  nlohmann::json out_rows = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["swept_param"] = to_string(row.param);
    r["param_value"] = row.value;
    r["actual"] = detail::summary_json(row.actual);
    r["observed"] = detail::summary_json(row.observed);
    r["weighted"] = detail::summary_json(row.weighted);
    r["mean_observed_fraction"] = row.mean_observed_fraction;
    out_rows.push_back(r);
  }
  nlohmann::json j;
  j["rows"] = out_rows;
  return j;
}

/// Write `content` verbatim (binary mode, so "\n" stays "\n").
inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace ipweval
