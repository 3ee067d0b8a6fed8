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

// Deployed-alert feedback loop simulation.
//
// A model scores a population; an alert fires when the score is confident
// (above the alert threshold or below its complement). To keep evaluation
// possible, each alert-eligible example has its alert randomly withheld
// with a configured probability. An example's label is observed when its
// alert was withheld or it was never alert-eligible; a shown alert is
// assumed to change the outcome, so its label is missing. This makes label
// selection depend only on the score and an independent coin, so the
// selection probability of every observed-eligible example is exactly the
// withhold probability and inverse-probability weights are available in
// closed form.
//
// Each replicate redraws the withholding coins on a fixed population
// (optionally redrawing the population itself for synthetic provenances)
// and yields actual / observed / weighted AUROC. Sweeps vary either the
// alert threshold or the withhold probability and aggregate replicates
// into percentile intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
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

enum class Provenance { SyntheticDgp, SyntheticClinical, ExternalFile };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::SyntheticDgp: return "synthetic_dgp";
    case Provenance::SyntheticClinical: return "synthetic_clinical";
    case Provenance::ExternalFile: return "external_file";
  }
  return "?";
}

/// A fixed population of scored, labeled examples.
///
/// `resampler`, when present, draws an independent population from the
/// same generating process; it is used by sweeps configured to redraw the
/// population per replicate and is absent for external files.
struct ScoredPopulation {
  std::vector<double> scores;
  std::vector<int> labels;
  Provenance provenance = Provenance::ExternalFile;
  double prevalence = 0.0;
  std::function<ScoredPopulation(std::uint64_t)> resampler;

  std::size_t size() const { return scores.size(); }
};

/// Parameters of one deployment simulation.
struct DeploymentConfig {
  double alert_threshold = 0.9;
  double withhold_prob = 0.05;
  int n_reps = 1000;
  std::uint64_t seed = 0;
  bool resample_population = false;

  void validate() const {
    if (!(alert_threshold > 0.5 && alert_threshold < 1.0))
      throw std::invalid_argument("alert threshold must lie in (0.5, 1)");
    if (!(withhold_prob >= 0.0 && withhold_prob <= 1.0))
      throw std::invalid_argument("withhold probability must lie in (0, 1]");
    if (n_reps < 1) throw std::invalid_argument("at least one replicate required");
  }
};

/// True iff the score is confident enough to trigger an alert: above the
/// threshold or below its complement.
inline bool alert_eligible(double score, double alert_threshold) {
  return score > alert_threshold || score < 1.0 - alert_threshold;
}

/// AUROC estimates from one replicate. `observed` and `weighted` are
/// absent when the observed subpopulation held a single class.
/// `observed_fraction` is the share of the population whose label was
/// observed.
struct ReplicateEstimates {
  double actual = 0.0;
  std::optional<double> observed;
  std::optional<double> weighted;
  double observed_fraction = 0.0;
};

namespace detail {

/// Population presorted by descending score with tie-group boundaries,
/// ready for single-pass ROC accumulation.
struct SortedPopulation {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::size_t> group_end;
  double npos = 0.0;
  double nneg = 0.0;
};

inline SortedPopulation sort_population(const ScoredPopulation& pop) {
  if (pop.scores.size() != pop.labels.size())
    throw std::invalid_argument("population scores and labels differ in length");
  if (pop.scores.empty()) throw std::invalid_argument("empty population");
  const std::size_t n = pop.scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pop.scores[a] != pop.scores[b]) return pop.scores[a] > pop.scores[b];
    return a < b;
  });
  SortedPopulation sorted;
  sorted.scores.reserve(n);
  sorted.labels.reserve(n);
  for (std::size_t i : order) {
    const double s = pop.scores[i];
    if (!(s >= 0.0 && s <= 1.0))
      throw std::invalid_argument("sample score outside [0, 1]");
    sorted.scores.push_back(s);
    sorted.labels.push_back(pop.labels[i]);
    (pop.labels[i] != 0 ? sorted.npos : sorted.nneg) += 1.0;
  }
  for (std::size_t i = 1; i <= n; ++i)
    if (i == n || sorted.scores[i] != sorted.scores[i - 1]) sorted.group_end.push_back(i);
  if (sorted.npos <= 0.0 || sorted.nneg <= 0.0)
    throw std::invalid_argument("population must contain both classes");
  return sorted;
}

/// One pass over the sorted population: draw withholding coins (descending
/// score order, eligible examples only) and accumulate the three ROC
/// integrals simultaneously.
inline ReplicateEstimates run_replicate(const SortedPopulation& pop,
                                        double alert_threshold, double withhold_prob,
                                        Rng& coins) {
  RocAccumulator act;
  RocAccumulator obs;
  RocAccumulator wtd;
  const double eligible_weight = withhold_prob > 0.0 ? 1.0 / withhold_prob : 0.0;
  std::size_t n_observed = 0;
  std::size_t start = 0;
  for (std::size_t end : pop.group_end) {
    double a_pos = 0.0, a_neg = 0.0;
    double o_pos = 0.0, o_neg = 0.0;
    double w_pos = 0.0, w_neg = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      const bool positive = pop.labels[i] != 0;
      (positive ? a_pos : a_neg) += 1.0;
      if (alert_eligible(pop.scores[i], alert_threshold)) {
        if (withhold_prob <= 0.0)
          throw std::runtime_error("positivity violation: eligible labels never observed");
        if (coins.bernoulli(withhold_prob)) {
          (positive ? o_pos : o_neg) += 1.0;
          (positive ? w_pos : w_neg) += eligible_weight;
          ++n_observed;
        }
      } else {
        (positive ? o_pos : o_neg) += 1.0;
        (positive ? w_pos : w_neg) += 1.0;
        ++n_observed;
      }
    }
    act.add_group(a_pos, a_neg);
    obs.add_group(o_pos, o_neg);
    wtd.add_group(w_pos, w_neg);
    start = end;
  }
  ReplicateEstimates est;
  est.actual = act.area2 / (2.0 * pop.npos * pop.nneg);
  est.observed_fraction =
      static_cast<double>(n_observed) / static_cast<double>(pop.scores.size());
  if (obs.tp > 0.0 && obs.fp > 0.0) {
    est.observed = obs.area2 / (2.0 * obs.tp * obs.fp);
    est.weighted = wtd.area2 / (2.0 * wtd.tp * wtd.fp);
  }
  return est;
}

}  // namespace detail

/// Run cfg.n_reps feedback-loop replicates on the population.
///
/// Replicate r derives its streams from derive_seed(cfg.seed, r):
/// substream 0 redraws the population (when configured), substream 1
/// drives the withholding coins.
inline std::vector<ReplicateEstimates> simulate_deployment(const ScoredPopulation& pop,
                                                           const DeploymentConfig& cfg,
                                                           int n_threads = 0) {
  cfg.validate();
  if (cfg.resample_population && !pop.resampler)
    throw std::invalid_argument("population resampling requires a synthetic population");
  const detail::SortedPopulation sorted = detail::sort_population(pop);
  std::vector<ReplicateEstimates> reps(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(reps.size(), n_threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, r);
    Rng coins(derive_seed(rep_seed, 1));
    if (cfg.resample_population) {
      const ScoredPopulation redrawn = pop.resampler(derive_seed(rep_seed, 0));
      const detail::SortedPopulation resorted = detail::sort_population(redrawn);
      reps[r] = detail::run_replicate(resorted, cfg.alert_threshold, cfg.withhold_prob, coins);
    } else {
      reps[r] = detail::run_replicate(sorted, cfg.alert_threshold, cfg.withhold_prob, coins);
    }
  });
  return reps;
}

enum class SweptParam { AlertThreshold, WithholdProb };

inline const char* to_string(SweptParam p) {
  switch (p) {
    case SweptParam::AlertThreshold: return "alert_threshold";
    case SweptParam::WithholdProb: return "withhold_prob";
  }
  return "?";
}

/// Replicate-aggregated AUROC estimates at one grid point.
struct SweepRow {
  SweptParam param = SweptParam::AlertThreshold;
  double value = 0.0;
  EstimateSummary actual;
  EstimateSummary observed;
  EstimateSummary weighted;
  double mean_observed_fraction = 0.0;
};

inline SweepRow summarize_sweep_row(SweptParam param, double value,
                                    std::span<const ReplicateEstimates> reps) {
  SweepRow row;
  row.param = param;
  row.value = value;
  std::vector<std::optional<double>> actual(reps.size());
  std::vector<std::optional<double>> observed(reps.size());
  std::vector<std::optional<double>> weighted(reps.size());
  double fraction_sum = 0.0;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    actual[r] = reps[r].actual;
    observed[r] = reps[r].observed;
    weighted[r] = reps[r].weighted;
    fraction_sum += reps[r].observed_fraction;
  }
  row.actual = summarize_replicates(actual);
  row.observed = summarize_replicates(observed);
  row.weighted = summarize_replicates(weighted);
  row.mean_observed_fraction = fraction_sum / static_cast<double>(reps.size());
  return row;
}

/// Grid for the alert-threshold sweep: 0.99 down to 0.51 in steps of 0.02.
inline std::vector<double> default_alert_grid() {
  std::vector<double> grid;
  for (int k = 99; k >= 51; k -= 2) grid.push_back(k / 100.0);
  return grid;
}

/// Grid for the withhold-probability sweep: 0.99, then 0.95 down to 0.10
/// in steps of 0.05, then a finer tail 0.08, 0.06, 0.05, 0.04, 0.02, 0.01.
inline std::vector<double> default_withhold_grid() {
  std::vector<double> grid;
  grid.push_back(0.99);
  for (int k = 95; k >= 10; k -= 5) grid.push_back(k / 100.0);
  for (int k : {8, 6, 5, 4, 2, 1}) grid.push_back(k / 100.0);
  return grid;
}

namespace detail {

template <typename MakeConfig>
std::vector<SweepRow> run_sweep(const ScoredPopulation& pop, SweptParam param,
                                std::span<const double> values, MakeConfig&& make_config,
                                int n_threads) {
  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), n_threads, [&](std::size_t i) {
    const DeploymentConfig cfg = make_config(i);
    const auto reps = simulate_deployment(pop, cfg, 1);
    rows[i] = summarize_sweep_row(param, values[i], reps);
  });
  return rows;
}

}  // namespace detail

/// Sweep the alert threshold over a strictly descending grid at a fixed
/// withhold probability. Row i derives its seed stream from
/// derive_seed(seed, i).
inline std::vector<SweepRow> sweep_alert_threshold(const ScoredPopulation& pop,
                                                   std::span<const double> values,
                                                   double withhold_prob, int n_reps,
                                                   std::uint64_t seed, int n_threads = 0,
                                                   bool resample_population = false) {
  if (values.empty()) throw std::invalid_argument("empty sweep grid");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.5 && values[i] < 1.0))
      throw std::invalid_argument("alert grid values must lie in (0.5, 1)");
    if (i > 0 && !(values[i] < values[i - 1]))
      throw std::invalid_argument("alert grid must be strictly descending");
  }
  return detail::run_sweep(
      pop, SweptParam::AlertThreshold, values,
      [&](std::size_t i) {
        DeploymentConfig cfg;
        cfg.alert_threshold = values[i];
        cfg.withhold_prob = withhold_prob;
        cfg.n_reps = n_reps;
        cfg.seed = derive_seed(seed, i);
        cfg.resample_population = resample_population;
        return cfg;
      },
      n_threads);
}

/// Sweep the withhold probability over a grid at a fixed alert threshold.
inline std::vector<SweepRow> sweep_withhold_prob(const ScoredPopulation& pop,
                                                 std::span<const double> values,
                                                 double alert_threshold, int n_reps,
                                                 std::uint64_t seed, int n_threads = 0,
                                                 bool resample_population = false) {
  if (values.empty()) throw std::invalid_argument("empty sweep grid");
  for (double v : values)
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument("withhold grid values must lie in (0, 1]");
  return detail::run_sweep(
      pop, SweptParam::WithholdProb, values,
      [&](std::size_t i) {
        DeploymentConfig cfg;
        cfg.alert_threshold = alert_threshold;
        cfg.withhold_prob = values[i];
        cfg.n_reps = n_reps;
        cfg.seed = derive_seed(seed, i);
        cfg.resample_population = resample_population;
        return cfg;
      },
      n_threads);
}

/// Synthetic stand-in for a deployed clinical model's test set.
///
/// Labels are Bernoulli at the requested prevalence. Scores come from a
/// class-conditional Gaussian score model on the logit scale: the latent
/// logit has mean +separation/2 for positives, -separation/2 for
/// negatives, and variance equal to `separation`, which makes the reported
/// score sigmoid(latent + logit(prevalence)) the exact posterior
/// probability of a positive label. The population is therefore calibrated
/// by construction, with AUROC increasing in `separation`
/// (Phi(sqrt(separation/2)) in expectation).
inline ScoredPopulation synthetic_clinical_population(int n, double prevalence,
                                                      double separation,
                                                      std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("population needs at least 2 examples");
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw std::invalid_argument("prevalence must lie in (0, 1)");
  if (!(separation > 0.0)) throw std::invalid_argument("separation must be positive");
  Rng rng(seed);
  const double offset = logit(prevalence);
  const double sd = std::sqrt(separation);
  ScoredPopulation pop;
  pop.provenance = Provenance::SyntheticClinical;
  pop.scores.reserve(static_cast<std::size_t>(n));
  pop.labels.reserve(static_cast<std::size_t>(n));
  double label_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const int y = rng.bernoulli(prevalence) ? 1 : 0;
    const double latent = rng.normal(y != 0 ? separation / 2.0 : -separation / 2.0, sd);
    pop.scores.push_back(sigmoid(latent + offset));
    pop.labels.push_back(y);
    label_sum += y;
  }
  pop.prevalence = label_sum / static_cast<double>(n);
  if (pop.prevalence <= 0.0 || pop.prevalence >= 1.0)
    throw std::runtime_error("population too small to realize both classes");
  pop.resampler = [n, prevalence, separation](std::uint64_t s) {
    return synthetic_clinical_population(n, prevalence, separation, s);
  };
  return pop;
}

/// Population drawn from the synthetic data-generating process: uniform
/// features, calibrated sigmoid scores, Bernoulli labels.
inline ScoredPopulation dgp_population(int n, std::uint64_t seed,
                                       const DgpParams& dgp = {}) {
  if (n < 2) throw std::invalid_argument("population needs at least 2 examples");
  if (!(dgp.support_min < dgp.support_max))
    throw std::invalid_argument("feature support must have positive width");
  Rng rng(seed);
  ScoredPopulation pop;
  pop.provenance = Provenance::SyntheticDgp;
  pop.scores.reserve(static_cast<std::size_t>(n));
  pop.labels.reserve(static_cast<std::size_t>(n));
  double label_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.uniform(dgp.support_min, dgp.support_max);
    const double x2 = rng.uniform(dgp.support_min, dgp.support_max);
    const double score = sigmoid(dgp.coef1 * x1 + dgp.coef2 * x2 + dgp.intercept);
    const int y = rng.bernoulli(score) ? 1 : 0;
    pop.scores.push_back(score);
    pop.labels.push_back(y);
    label_sum += y;
  }
  pop.prevalence = label_sum / static_cast<double>(n);
  if (pop.prevalence <= 0.0 || pop.prevalence >= 1.0)
    throw std::runtime_error("population too small to realize both classes");
  pop.resampler = [n, dgp](std::uint64_t s) { return dgp_population(n, s, dgp); };
  return pop;
}

/// Load a population from a headered CSV with columns `score,label`.
/// Parse failures name the offending line.
inline ScoredPopulation load_population_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open population file");
  auto fail = [&](std::size_t line_no, const std::string& what) -> std::runtime_error {
    return std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw fail(1, "missing header (expected \"score,label\")");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "score,label") throw fail(line_no, "header must be \"score,label\"");

  ScoredPopulation pop;
  pop.provenance = Provenance::ExternalFile;
  double label_sum = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw fail(line_no, "expected two comma-separated fields");
    const std::string score_text = line.substr(0, comma);
    const std::string label_text = line.substr(comma + 1);
    double score = 0.0;
    std::size_t used = 0;
    try {
      score = std::stod(score_text, &used);
    } catch (const std::exception&) {
      throw fail(line_no, "score is not a number: \"" + score_text + "\"");
    }
    if (used != score_text.size())
      throw fail(line_no, "score is not a number: \"" + score_text + "\"");
    if (!(score >= 0.0 && score <= 1.0))
      throw fail(line_no, "score outside [0, 1]: \"" + score_text + "\"");
    int label = 0;
    if (label_text == "0")
      label = 0;
    else if (label_text == "1")
      label = 1;
    else
      throw fail(line_no, "label must be 0 or 1: \"" + label_text + "\"");
    pop.scores.push_back(score);
    pop.labels.push_back(label);
    label_sum += label;
  }
  if (pop.scores.empty()) throw fail(line_no, "file contains no examples");
  pop.prevalence = label_sum / static_cast<double>(pop.scores.size());
  return pop;
}

}  // namespace ipweval
