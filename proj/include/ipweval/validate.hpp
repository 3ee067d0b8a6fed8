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

// Self-validation suite: independent oracles checked over many random
// instances.
//
//   pairwise_auroc_oracle   curve-integration AUROC versus the brute-force
//                           weighted pairwise statistic (ties count half)
//   replication_oracle      integer-weight metrics versus the unweighted
//                           metrics on the weight-replicated multiset
//   unit_weight_equivalence all-unit-weight metrics versus direct
//                           count-based implementations
//   selection_consistency   empirical selection frequencies versus the
//                           scenario probabilities (chi-square, alpha=0.001)
//
// A fault mode exists to prove the suite has teeth: WeightsNotInverted
// feeds selection probabilities in place of their reciprocals into the
// estimator under test, which the pairwise oracle must catch. Failures
// carry a JSON-serialized counterexample.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipweval/metrics.hpp"
#include "ipweval/rng.hpp"
#include "ipweval/synthetic.hpp"

namespace ipweval {

enum class FaultMode { None, WeightsNotInverted };

struct PropertyResult {
  std::string name;
  bool pass = true;
  int n_checked = 0;
  std::string detail;
};

namespace detail {

/// Upper-tail chi-square quantile via the Wilson-Hilferty cube
/// approximation.
inline double chi_square_quantile(double df, double z_upper) {
  const double a = 2.0 / (9.0 * df);
  const double c = 1.0 - a + z_upper * std::sqrt(a);
  return df * c * c * c;
}

inline nlohmann::json instance_json(const std::vector<WeightedSample>& samples) {
  nlohmann::json scores = nlohmann::json::array();
  nlohmann::json labels = nlohmann::json::array();
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json probs = nlohmann::json::array();
  for (const auto& s : samples) {
    scores.push_back(s.score);
    labels.push_back(s.label.value_or(-1));
    weights.push_back(s.weight);
    probs.push_back(s.selection_prob);
  }
  nlohmann::json j;
  j["scores"] = scores;
  j["labels"] = labels;
  j["weights"] = weights;
  j["selection_probs"] = probs;
  return j;
}

/// Random metric-oracle instance: scores from a tie-prone grid or the
/// continuum, balanced enough to contain both classes.
inline std::vector<WeightedSample> random_instance(Rng& rng, bool integer_weights) {
  const int n = 2 + rng.uniform_int(0, 48);
  const int grid = std::array<int, 4>{0, 3, 5, 11}[static_cast<std::size_t>(rng.uniform_int(0, 3))];
  std::vector<WeightedSample> samples(static_cast<std::size_t>(n));
  for (auto& s : samples) {
    s.score = grid == 0 ? rng.uniform01()
                        : static_cast<double>(rng.uniform_int(0, grid - 1)) / (grid - 1);
    s.label = rng.bernoulli(0.5) ? 1 : 0;
    s.selection_prob = rng.uniform(0.2, 1.0);
    s.weight = integer_weights ? static_cast<double>(rng.uniform_int(1, 4))
                               : rng.uniform(0.1, 4.0);
  }
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& s : samples) (*s.label != 0 ? has_pos : has_neg) = true;
  if (!has_pos) samples[0].label = 1;
  if (!has_neg) samples[samples.size() - 1].label = 0;
  return samples;
}

/// Brute-force weighted pairwise ranking statistic (ties half credit).
inline double pairwise_auroc(const std::vector<WeightedSample>& samples) {
  double wpos = 0.0;
  double wneg = 0.0;
  double credit = 0.0;
  for (const auto& p : samples) {
    if (*p.label == 0) continue;
    wpos += p.weight;
    for (const auto& q : samples) {
      if (*q.label != 0) continue;
      if (p.score > q.score)
        credit += p.weight * q.weight;
      else if (p.score == q.score)
        credit += 0.5 * p.weight * q.weight;
    }
  }
  for (const auto& q : samples)
    if (*q.label == 0) wneg += q.weight;
  return credit / (wpos * wneg);
}

}  // namespace detail

/// AUROC under test equals the brute-force weighted pairwise statistic
/// within 1e-9. The pipeline under test derives weights from
/// selection_prob (reciprocal, unless the fault swaps that for the raw
/// probability); the oracle always uses the true reciprocal weights.
inline PropertyResult pairwise_auroc_oracle(int n_instances, std::uint64_t seed,
                                            FaultMode fault) {
  PropertyResult result;
  result.name = "pairwise_auroc_oracle";
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    auto samples = detail::random_instance(rng, false);
    for (auto& s : samples) s.weight = 1.0 / s.selection_prob;
    const double expected = detail::pairwise_auroc(samples);
    auto under_test = samples;
    if (fault == FaultMode::WeightsNotInverted)
      for (auto& s : under_test) s.weight = s.selection_prob;
    const double got = *weighted_roc(under_test).area;
    ++result.n_checked;
    if (std::abs(got - expected) > 1e-9) {
      result.pass = false;
      nlohmann::json j = detail::instance_json(samples);
      j["instance"] = i;
      j["expected"] = expected;
      j["got"] = got;
      result.detail = j.dump();
      return result;
    }
  }
  return result;
}

namespace detail {

struct MetricVector {
  std::optional<double> values[6];
};

inline MetricVector all_metrics(const std::vector<WeightedSample>& samples,
                                double threshold) {
  MetricVector m;
  const WeightedConfusion conf = weighted_confusion(samples, threshold);
  m.values[0] = sensitivity(conf);
  m.values[1] = specificity(conf);
  m.values[2] = ppv(conf);
  m.values[3] = accuracy(conf);
  m.values[4] = weighted_roc(samples).area;
  m.values[5] = weighted_pr(samples).area;
  return m;
}

}  // namespace detail

/// With integer weights, every metric equals its unweighted value on the
/// multiset where each sample is repeated weight-many times (1e-9).
inline PropertyResult replication_oracle(int n_instances, std::uint64_t seed) {
  PropertyResult result;
  result.name = "replication_oracle";
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto samples = detail::random_instance(rng, true);
    std::vector<WeightedSample> replicated;
    for (const auto& s : samples) {
      WeightedSample unit = s;
      unit.weight = 1.0;
      for (int k = 0; k < static_cast<int>(s.weight); ++k) replicated.push_back(unit);
    }
    const auto weighted = detail::all_metrics(samples, 0.5);
    const auto unweighted = detail::all_metrics(replicated, 0.5);
    ++result.n_checked;
    for (int m = 0; m < 6; ++m) {
      const auto& a = weighted.values[m];
      const auto& b = unweighted.values[m];
      const bool mismatch = a.has_value() != b.has_value() ||
                            (a.has_value() && std::abs(*a - *b) > 1e-9);
      if (mismatch) {
        result.pass = false;
        nlohmann::json j = detail::instance_json(samples);
        j["instance"] = i;
        j["metric_index"] = m;
        j["weighted"] = a.has_value() ? nlohmann::json(*a) : nlohmann::json(nullptr);
        j["replicated"] = b.has_value() ? nlohmann::json(*b) : nlohmann::json(nullptr);
        result.detail = j.dump();
        return result;
      }
    }
  }
  return result;
}

namespace detail {

/// Direct count-based implementations of the six metrics on unit-weight
/// samples, written independently of the weighted accumulators.
inline MetricVector counting_metrics(const std::vector<WeightedSample>& samples,
                                     double threshold) {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& s : samples) {
    const bool predicted = s.score >= threshold;
    const bool actual = *s.label != 0;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  MetricVector m;
  const long pos = tp + fn;
  const long neg = tn + fp;
  if (pos > 0) m.values[0] = static_cast<double>(tp) / static_cast<double>(pos);
  if (neg > 0) m.values[1] = static_cast<double>(tn) / static_cast<double>(neg);
  if (tp + fp > 0) m.values[2] = static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.values[3] = static_cast<double>(tp + tn) / static_cast<double>(samples.size());

  std::vector<std::pair<double, int>> by_score;
  by_score.reserve(samples.size());
  for (const auto& s : samples) by_score.emplace_back(s.score, *s.label != 0 ? 1 : 0);
  std::sort(by_score.begin(), by_score.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  double concordant2 = 0.0;
  long seen_pos = 0;
  double ap = 0.0;
  long ap_tp = 0, ap_fp = 0;
  std::size_t i = 0;
  while (i < by_score.size()) {
    std::size_t j = i;
    long dpos = 0, dneg = 0;
    while (j < by_score.size() && by_score[j].first == by_score[i].first) {
      (by_score[j].second != 0 ? dpos : dneg) += 1;
      ++j;
    }
    concordant2 += static_cast<double>(dneg) * (2.0 * seen_pos + dpos);
    seen_pos += dpos;
    ap_tp += dpos;
    ap_fp += dneg;
    if (dpos > 0)
      ap += static_cast<double>(dpos) *
            (static_cast<double>(ap_tp) / static_cast<double>(ap_tp + ap_fp));
    i = j;
  }
  if (pos > 0 && neg > 0)
    m.values[4] = concordant2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  if (pos > 0) m.values[5] = ap / static_cast<double>(pos);
  return m;
}

}  // namespace detail

/// With all weights 1, every weighted metric equals the count-based
/// implementation bit for bit.
inline PropertyResult unit_weight_equivalence(int n_instances, std::uint64_t seed) {
  PropertyResult result;
  result.name = "unit_weight_equivalence";
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    auto samples = detail::random_instance(rng, false);
    for (auto& s : samples) s.weight = 1.0;
    const auto weighted = detail::all_metrics(samples, 0.5);
    const auto counted = detail::counting_metrics(samples, 0.5);
    ++result.n_checked;
    for (int m = 0; m < 6; ++m) {
      const auto& a = weighted.values[m];
      const auto& b = counted.values[m];
      const bool mismatch =
          a.has_value() != b.has_value() || (a.has_value() && *a != *b);
      if (mismatch) {
        result.pass = false;
        nlohmann::json j = detail::instance_json(samples);
        j["instance"] = i;
        j["metric_index"] = m;
        j["weighted"] = a.has_value() ? nlohmann::json(*a) : nlohmann::json(nullptr);
        j["counted"] = b.has_value() ? nlohmann::json(*b) : nlohmann::json(nullptr);
        result.detail = j.dump();
        return result;
      }
    }
  }
  return result;
}

/// Within bins of equal selection probability, the fraction of examples
/// actually selected must be statistically consistent with that
/// probability (chi-square test at significance 0.001, per scenario and
/// dataset seed).
inline PropertyResult selection_consistency(int n_seeds, int n, std::uint64_t seed) {
  PropertyResult result;
  result.name = "selection_consistency";
  const double z_999 = 3.090232306167813;
  for (Scenario scenario : kAllScenarios) {
    for (int k = 0; k < n_seeds; ++k) {
      const ScenarioSpec spec = default_spec(scenario);
      const auto data = sample_dataset(
          spec, n, derive_seed(seed, static_cast<std::uint64_t>(scenario) * 1000 +
                                         static_cast<std::uint64_t>(k)));
      const int n_bins = 16;
      std::vector<double> expected(n_bins, 0.0);
      std::vector<double> variance(n_bins, 0.0);
      std::vector<double> selected(n_bins, 0.0);
      for (const auto& e : data) {
        auto b = static_cast<std::size_t>(e.selection_prob * n_bins);
        if (b >= static_cast<std::size_t>(n_bins)) b = n_bins - 1;
        expected[b] += e.selection_prob;
        variance[b] += e.selection_prob * (1.0 - e.selection_prob);
        selected[b] += e.selected ? 1.0 : 0.0;
      }
      double stat = 0.0;
      double df = 0.0;
      for (int b = 0; b < n_bins; ++b) {
        if (variance[b] < 1e-9) continue;
        const double z = (selected[b] - expected[b]) / std::sqrt(variance[b]);
        stat += z * z;
        df += 1.0;
      }
      ++result.n_checked;
      if (df < 1.0) continue;
      const double critical = detail::chi_square_quantile(df, z_999);
      if (stat > critical) {
        result.pass = false;
        nlohmann::json j;
        j["scenario"] = to_string(scenario);
        j["seed_index"] = k;
        j["chi_square"] = stat;
        j["df"] = df;
        j["critical_0.999"] = critical;
        result.detail = j.dump();
        return result;
      }
    }
  }
  return result;
}

/// Run the whole suite. Quick mode shrinks instance counts to finish in
/// seconds; `fault` seeds a deliberate bug so the suite's sensitivity can
/// be demonstrated.
inline std::vector<PropertyResult> run_validation(bool quick, FaultMode fault,
                                                  std::uint64_t seed) {
  const int pair_n = quick ? 200 : 1000;
  const int repl_n = quick ? 50 : 200;
  const int unit_n = quick ? 50 : 200;
  const int seeds_n = quick ? 1 : 3;
  std::vector<PropertyResult> results;
  results.push_back(pairwise_auroc_oracle(pair_n, derive_seed(seed, 0), fault));
  results.push_back(replication_oracle(repl_n, derive_seed(seed, 1)));
  results.push_back(unit_weight_equivalence(unit_n, derive_seed(seed, 2)));
  results.push_back(selection_consistency(seeds_n, 10000, derive_seed(seed, 3)));
  return results;
}

}  // namespace ipweval
