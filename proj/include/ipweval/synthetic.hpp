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

// Synthetic data-generating process and label-selection mechanisms.
//
// The generating model: features (x1, x2) are i.i.d. uniform over a square
// support, the outcome is Bernoulli with success probability
// sigmoid(coef1*x1 + coef2*x2 + intercept), and the evaluated scorer
// reports exactly that probability, so it is perfectly calibrated and its
// decision boundary is the line coef1*x1 + coef2*x2 + intercept = 0.
//
// Five selection mechanisms decide which labels are observed:
//   scar             every label observed with a fixed probability
//   select_hard      observation probability decays exponentially with
//                    distance from the decision boundary
//   select_easy      observation probability grows exponentially with
//                    distance, reaching 1 at the support corner
//   select_negative  negatives always observed, positives with prob 0.5
//   select_positive  positives always observed, negatives with prob 0.5
//
// All sampling is a pure function of (spec, n, seed).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipweval/rng.hpp"

namespace ipweval {

/// Constants of the data-generating process. Defaults give the square
/// support [-2, 2]^2 with decision boundary x1 + x2 = 0.
struct DgpParams {
  double support_min = -2.0;
  double support_max = 2.0;
  double coef1 = 1.0;
  double coef2 = 1.0;
  double intercept = 0.0;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Inverse of sigmoid on (0, 1).
inline double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit argument outside (0, 1)");
  return std::log(p / (1.0 - p));
}

/// Euclidean distance from (x1, x2) to the decision boundary line.
inline double boundary_distance(double x1, double x2, const DgpParams& dgp) {
  const double norm = std::sqrt(dgp.coef1 * dgp.coef1 + dgp.coef2 * dgp.coef2);
  if (!(norm > 0.0))
    throw std::invalid_argument("boundary coefficients must not both be zero");
  return std::abs(dgp.coef1 * x1 + dgp.coef2 * x2 + dgp.intercept) / norm;
}

/// Supremum of boundary_distance over the square feature support
/// (attained at a corner; 2*sqrt(2) at defaults).
inline double support_delta(const DgpParams& dgp) {
  const std::array<double, 2> ends = {dgp.support_min, dgp.support_max};
  double best = 0.0;
  for (double x1 : ends)
    for (double x2 : ends) best = std::max(best, boundary_distance(x1, x2, dgp));
  return best;
}

enum class Scenario {
  Scar,
  SelectHard,
  SelectEasy,
  SelectNegative,
  SelectPositive,
};

inline constexpr int kNumScenarios = 5;

inline constexpr std::array<Scenario, kNumScenarios> kAllScenarios = {
    Scenario::Scar, Scenario::SelectHard, Scenario::SelectEasy,
    Scenario::SelectNegative, Scenario::SelectPositive};

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Scar: return "scar";
    case Scenario::SelectHard: return "select_hard";
    case Scenario::SelectEasy: return "select_easy";
    case Scenario::SelectNegative: return "select_negative";
    case Scenario::SelectPositive: return "select_positive";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& name) {
  for (Scenario s : kAllScenarios)
    if (name == to_string(s)) return s;
  throw std::invalid_argument(
      "unknown scenario \"" + name +
      "\" (expected scar, select_hard, select_easy, select_negative, or "
      "select_positive)");
}

/// How the distance scale of select_easy is fixed: from the analytic
/// support supremum (deterministic across replicates) or from the largest
/// boundary distance realized in the sample.
enum class DeltaMode { SupportSupremum, SampleMax };

/// Full parameterization of one selection scenario.
///
/// `select_prob_pos` / `select_prob_neg` are the per-class observation
/// probabilities used by scar (positives value applies to every example)
/// and by the not-at-random scenarios. `sharpness` is the exponential rate
/// of the distance-driven scenarios; the defaults installed by
/// default_spec are 2 for select_hard and 1 for select_easy.
struct ScenarioSpec {
  Scenario scenario = Scenario::Scar;
  double select_prob_pos = 0.5;
  double select_prob_neg = 0.5;
  double sharpness = 1.0;
  DgpParams dgp;
  DeltaMode delta_mode = DeltaMode::SupportSupremum;
};

/// Scenario spec with this library's default parameters installed.
inline ScenarioSpec default_spec(Scenario scenario) {
  ScenarioSpec spec;
  spec.scenario = scenario;
  switch (scenario) {
    case Scenario::Scar:
      break;
    case Scenario::SelectHard:
      spec.sharpness = 2.0;
      break;
    case Scenario::SelectEasy:
      spec.sharpness = 1.0;
      break;
    case Scenario::SelectNegative:
      spec.select_prob_pos = 0.5;
      spec.select_prob_neg = 1.0;
      break;
    case Scenario::SelectPositive:
      spec.select_prob_pos = 1.0;
      spec.select_prob_neg = 0.5;
      break;
  }
  return spec;
}

/// Probability that the label at (x1, x2, y) is observed, using the
/// analytic support supremum as the distance scale for select_easy. Always
/// in (0, 1] on the feature support.
inline double selection_probability(double x1, double x2, int y,
                                    const ScenarioSpec& spec) {
  switch (spec.scenario) {
    case Scenario::Scar:
      return spec.select_prob_pos;
    case Scenario::SelectHard:
      return std::exp(-spec.sharpness * boundary_distance(x1, x2, spec.dgp));
    case Scenario::SelectEasy: {
      const double d = boundary_distance(x1, x2, spec.dgp);
      return std::exp(spec.sharpness * (d - support_delta(spec.dgp)));
    }
    case Scenario::SelectNegative:
    case Scenario::SelectPositive:
      return y != 0 ? spec.select_prob_pos : spec.select_prob_neg;
  }
  throw std::invalid_argument("unknown scenario");
}

/// One generated example. `label` is the true outcome; whether it was
/// observed is recorded in `selected`.
struct SimulatedExample {
  double x1 = 0.0;
  double x2 = 0.0;
  int label = 0;
  double score = 0.0;
  double selection_prob = 1.0;
  bool selected = true;
};

/// Draw a dataset of size n. Deterministic given (spec, n, seed).
///
/// Draw order: features and label coins for all examples first (x1, x2,
/// label coin per example), then one selection coin per example. Runs with
/// the same seed therefore share the identical population across
/// scenarios and delta modes, differing only in which labels are observed.
inline std::vector<SimulatedExample> sample_dataset(const ScenarioSpec& spec, int n,
                                                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dataset size must be at least 1");
  if (!(spec.dgp.support_min < spec.dgp.support_max))
    throw std::invalid_argument("feature support must have positive width");
  Rng rng(seed);
  std::vector<SimulatedExample> data(static_cast<std::size_t>(n));
  for (auto& e : data) {
    e.x1 = rng.uniform(spec.dgp.support_min, spec.dgp.support_max);
    e.x2 = rng.uniform(spec.dgp.support_min, spec.dgp.support_max);
    e.score = sigmoid(spec.dgp.coef1 * e.x1 + spec.dgp.coef2 * e.x2 + spec.dgp.intercept);
    e.label = rng.bernoulli(e.score) ? 1 : 0;
  }
  double delta = 0.0;
  if (spec.scenario == Scenario::SelectEasy && spec.delta_mode == DeltaMode::SampleMax) {
    for (const auto& e : data)
      delta = std::max(delta, boundary_distance(e.x1, e.x2, spec.dgp));
  }
  for (auto& e : data) {
    if (spec.scenario == Scenario::SelectEasy && spec.delta_mode == DeltaMode::SampleMax) {
      const double d = boundary_distance(e.x1, e.x2, spec.dgp);
      e.selection_prob = std::exp(spec.sharpness * (d - delta));
    } else {
      e.selection_prob = selection_probability(e.x1, e.x2, e.label, spec);
    }
    e.selected = rng.bernoulli(e.selection_prob);
  }
  return data;
}

}  // namespace ipweval
