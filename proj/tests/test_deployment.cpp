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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "ipweval/deployment.hpp"
#include "ipweval/metrics.hpp"

#include <catch2/catch_amalgamated.hpp>

using Catch::Matchers::ContainsSubstring;
using ipweval::DeploymentConfig;
using ipweval::ScoredPopulation;

namespace {

ScoredPopulation make_population(std::vector<double> scores, std::vector<int> labels) {
  ScoredPopulation pop;
  pop.scores = std::move(scores);
  pop.labels = std::move(labels);
  const double sum = std::accumulate(pop.labels.begin(), pop.labels.end(), 0.0);
  pop.prevalence = sum / static_cast<double>(pop.labels.size());
  return pop;
}

double population_auroc(const ScoredPopulation& pop) {
  std::vector<ipweval::WeightedSample> samples(pop.scores.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].score = pop.scores[i];
    samples[i].label = pop.labels[i];
  }
  return *ipweval::weighted_roc(samples).area;
}

std::string write_temp_csv(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  out.close();
  return path.string();
}

}  // namespace

TEST_CASE("alert eligibility is strict on both boundaries") {
  CHECK(ipweval::alert_eligible(0.95, 0.9));
  CHECK(ipweval::alert_eligible(0.05, 0.9));
  CHECK_FALSE(ipweval::alert_eligible(0.9, 0.9));
  CHECK_FALSE(ipweval::alert_eligible(0.1, 0.9));
  CHECK_FALSE(ipweval::alert_eligible(0.5, 0.9));
  CHECK_FALSE(ipweval::alert_eligible(0.11, 0.9));
  CHECK(ipweval::alert_eligible(0.09, 0.9));
}

TEST_CASE("deployment config validation") {
  DeploymentConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  cfg.alert_threshold = 0.5;
  REQUIRE_THROWS_WITH(cfg.validate(), "alert threshold must lie in (0.5, 1)");
  cfg.alert_threshold = 1.0;
  REQUIRE_THROWS_WITH(cfg.validate(), "alert threshold must lie in (0.5, 1)");
  cfg.alert_threshold = 0.9;

  cfg.withhold_prob = -0.1;
  REQUIRE_THROWS_WITH(cfg.validate(), "withhold probability must lie in (0, 1]");
  cfg.withhold_prob = 1.5;
  REQUIRE_THROWS_WITH(cfg.validate(), "withhold probability must lie in (0, 1]");
  cfg.withhold_prob = 0.05;

  cfg.n_reps = 0;
  REQUIRE_THROWS_WITH(cfg.validate(), "at least one replicate required");
}

TEST_CASE("withholding nothing reproduces the actual estimate exactly") {
  const auto pop = ipweval::synthetic_clinical_population(400, 0.5, 3.0, 31);
  DeploymentConfig cfg;
  cfg.alert_threshold = 0.8;
  cfg.withhold_prob = 1.0;
  cfg.n_reps = 5;
  cfg.seed = 2;
  const auto reps = ipweval::simulate_deployment(pop, cfg);
  REQUIRE(reps.size() == 5);
  for (const auto& rep : reps) {
    REQUIRE(rep.observed.has_value());
    REQUIRE(rep.weighted.has_value());
    CHECK(*rep.observed == rep.actual);
    CHECK(*rep.weighted == rep.actual);
    CHECK(rep.observed_fraction == 1.0);
  }
}

TEST_CASE("never observing eligible labels violates positivity") {
  const auto pop = make_population({0.95, 0.6, 0.4, 0.2}, {1, 1, 0, 0});
  DeploymentConfig cfg;
  cfg.alert_threshold = 0.9;
  cfg.withhold_prob = 0.0;
  cfg.n_reps = 2;
  REQUIRE_THROWS_WITH(ipweval::simulate_deployment(pop, cfg),
                      "positivity violation: eligible labels never observed");
}

TEST_CASE("zero withholding is fine when no score is alert-eligible") {
  const auto pop = make_population({0.65, 0.6, 0.45, 0.4}, {1, 1, 0, 0});
  DeploymentConfig cfg;
  cfg.alert_threshold = 0.7;
  cfg.withhold_prob = 0.0;
  cfg.n_reps = 3;
  const auto reps = ipweval::simulate_deployment(pop, cfg);
  for (const auto& rep : reps) {
    CHECK(rep.observed_fraction == 1.0);
    CHECK(*rep.observed == rep.actual);
  }
}

TEST_CASE("observed fraction matches the withholding rate") {
  const auto pop = ipweval::synthetic_clinical_population(2000, 0.5, 3.0, 17);
  const double alert_threshold = 0.8;
  const double withhold_prob = 0.3;
  std::size_t n_eligible = 0;
  for (double s : pop.scores)
    if (ipweval::alert_eligible(s, alert_threshold)) ++n_eligible;
  REQUIRE(n_eligible > 100);

  DeploymentConfig cfg;
  cfg.alert_threshold = alert_threshold;
  cfg.withhold_prob = withhold_prob;
  cfg.n_reps = 50;
  cfg.seed = 4;
  const auto reps = ipweval::simulate_deployment(pop, cfg);
  double fraction = 0.0;
  for (const auto& rep : reps) fraction += rep.observed_fraction;
  fraction /= static_cast<double>(reps.size());

  const double n = static_cast<double>(pop.scores.size());
  const double expected = (n - static_cast<double>(n_eligible)) / n +
                          static_cast<double>(n_eligible) / n * withhold_prob;
  CHECK(fraction == Catch::Approx(expected).margin(0.01));

  const double eligible_kept =
      (fraction * n - (n - static_cast<double>(n_eligible))) /
      static_cast<double>(n_eligible);
  CHECK(eligible_kept == Catch::Approx(withhold_prob).margin(0.02));
}

TEST_CASE("replicates match a by-hand reconstruction of the coin stream") {
  const auto pop = make_population({0.98, 0.95, 0.8, 0.7, 0.6, 0.4, 0.3, 0.05, 0.02},
                                   {1, 1, 1, 0, 1, 0, 0, 0, 1});
  DeploymentConfig cfg;
  cfg.alert_threshold = 0.9;
  cfg.withhold_prob = 0.5;
  cfg.n_reps = 4;
  cfg.seed = 5;
  const auto reps = ipweval::simulate_deployment(pop, cfg);

  std::vector<std::size_t> order(pop.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pop.scores[a] > pop.scores[b]; });

  for (std::size_t r = 0; r < reps.size(); ++r) {
    const std::uint64_t rep_seed = ipweval::derive_seed(cfg.seed, r);
    ipweval::Rng coins(ipweval::derive_seed(rep_seed, 1));
    std::vector<ipweval::WeightedSample> observed;
    std::vector<ipweval::WeightedSample> weighted;
    for (std::size_t idx : order) {
      ipweval::WeightedSample s;
      s.score = pop.scores[idx];
      s.label = pop.labels[idx];
      if (ipweval::alert_eligible(s.score, cfg.alert_threshold)) {
        if (!coins.bernoulli(cfg.withhold_prob)) continue;
        observed.push_back(s);
        s.weight = 1.0 / cfg.withhold_prob;
        weighted.push_back(s);
      } else {
        observed.push_back(s);
        weighted.push_back(s);
      }
    }
    const double fraction = static_cast<double>(observed.size()) /
                            static_cast<double>(pop.scores.size());
    CHECK(reps[r].observed_fraction == fraction);
    REQUIRE(reps[r].observed.has_value());
    CHECK(*reps[r].observed == *ipweval::weighted_roc(observed).area);
    CHECK(*reps[r].weighted == *ipweval::weighted_roc(weighted).area);
  }
}

TEST_CASE("clinical population is calibrated and tunable") {
  const auto pop = ipweval::synthetic_clinical_population(10000, 0.27, 3.0, 42);
  REQUIRE(pop.scores.size() == 10000);
  REQUIRE(pop.provenance == ipweval::Provenance::SyntheticClinical);
  const double label_mean =
      std::accumulate(pop.labels.begin(), pop.labels.end(), 0.0) / 10000.0;
  CHECK(pop.prevalence == label_mean);
  CHECK(pop.prevalence > 0.25);
  CHECK(pop.prevalence < 0.29);

  const auto again = ipweval::synthetic_clinical_population(10000, 0.27, 3.0, 42);
  CHECK(pop.scores == again.scores);
  CHECK(pop.labels == again.labels);

  const auto blurry = ipweval::synthetic_clinical_population(4000, 0.5, 0.01, 7);
  const double low = population_auroc(blurry);
  CHECK(low > 0.45);
  CHECK(low < 0.60);

  const auto sharp = ipweval::synthetic_clinical_population(10000, 0.57, 3.0, 7);
  const double high = population_auroc(sharp);
  CHECK(high > 0.86);
  CHECK(high < 0.92);

  std::vector<ipweval::WeightedSample> samples(sharp.scores.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].score = sharp.scores[i];
    samples[i].label = sharp.labels[i];
  }
  const auto curve = ipweval::calibration_curve(samples, 5);
  for (const auto& point : curve.points) {
    if (!point.has_data) continue;
    CHECK(std::abs(point.x - point.y) < 0.05);
  }

  REQUIRE(pop.resampler);
  const auto redrawn = pop.resampler(99);
  CHECK(redrawn.scores.size() == pop.scores.size());
  CHECK(redrawn.scores != pop.scores);
}

TEST_CASE("clinical population rejects bad parameters") {
  REQUIRE_THROWS_AS(ipweval::synthetic_clinical_population(1, 0.5, 3.0, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ipweval::synthetic_clinical_population(100, 0.0, 3.0, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ipweval::synthetic_clinical_population(100, 1.0, 3.0, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ipweval::synthetic_clinical_population(100, 0.5, 0.0, 1),
                    std::invalid_argument);

  bool found_single_class = false;
  for (std::uint64_t seed = 0; seed < 50 && !found_single_class; ++seed) {
    try {
      ipweval::synthetic_clinical_population(2, 0.5, 3.0, seed);
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "population too small to realize both classes");
      found_single_class = true;
    }
  }
  CHECK(found_single_class);
}

TEST_CASE("dgp population mirrors the scenario generator") {
  const auto pop = ipweval::dgp_population(5000, 12);
  REQUIRE(pop.provenance == ipweval::Provenance::SyntheticDgp);
  REQUIRE(pop.scores.size() == 5000);
  for (double s : pop.scores) {
    CHECK(s >= ipweval::sigmoid(-4.0));
    CHECK(s <= ipweval::sigmoid(4.0));
  }
  CHECK(pop.prevalence == Catch::Approx(0.5).margin(0.02));
  const double auroc = population_auroc(pop);
  CHECK(auroc == Catch::Approx(0.84).margin(0.02));
  REQUIRE(pop.resampler);
}

TEST_CASE("population CSV loader accepts well-formed files") {
  const auto path = write_temp_csv("ipweval_pop_ok.csv",
                                   "score,label\n0.9,1\n\n0.25,0\r\n0.5,1\n");
  const auto pop = ipweval::load_population_csv(path);
  REQUIRE(pop.scores.size() == 3);
  CHECK(pop.scores[0] == 0.9);
  CHECK(pop.scores[1] == 0.25);
  CHECK(pop.scores[2] == 0.5);
  CHECK(pop.labels == std::vector<int>{1, 0, 1});
  CHECK(pop.prevalence == Catch::Approx(2.0 / 3.0));
  CHECK(pop.provenance == ipweval::Provenance::ExternalFile);
  CHECK_FALSE(pop.resampler);
}

TEST_CASE("population CSV loader names the offending line") {
  const auto missing = std::filesystem::temp_directory_path() / "ipweval_absent.csv";
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(missing.string()),
                      ContainsSubstring("cannot open population file"));

  const auto bad_header = write_temp_csv("ipweval_pop_header.csv", "prob,label\n0.5,1\n");
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(bad_header),
                      ContainsSubstring(":1: header must be \"score,label\""));

  const auto bad_score =
      write_temp_csv("ipweval_pop_score.csv", "score,label\n0.5,1\noops,0\n");
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(bad_score),
                      ContainsSubstring(":3: score is not a number"));

  const auto out_of_range =
      write_temp_csv("ipweval_pop_range.csv", "score,label\n1.5,1\n");
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(out_of_range),
                      ContainsSubstring(":2: score outside [0, 1]"));

  const auto bad_label = write_temp_csv("ipweval_pop_label.csv", "score,label\n0.5,2\n");
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(bad_label),
                      ContainsSubstring(":2: label must be 0 or 1"));

  const auto one_field = write_temp_csv("ipweval_pop_field.csv", "score,label\n0.5\n");
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(one_field),
                      ContainsSubstring("expected two comma-separated fields"));

  const auto empty = write_temp_csv("ipweval_pop_empty.csv", "score,label\n");
  REQUIRE_THROWS_WITH(ipweval::load_population_csv(empty),
                      ContainsSubstring("file contains no examples"));
}

TEST_CASE("default sweep grids") {
  const auto alert = ipweval::default_alert_grid();
  REQUIRE(alert.size() == 25);
  CHECK(alert.front() == 0.99);
  CHECK(alert.back() == 0.51);
  CHECK(std::is_sorted(alert.rbegin(), alert.rend()));

  const auto withhold = ipweval::default_withhold_grid();
  REQUIRE(withhold.size() == 25);
  CHECK(withhold.front() == 0.99);
  CHECK(withhold.back() == 0.01);
  CHECK(std::count(withhold.begin(), withhold.end(), 0.5) == 1);
  CHECK(std::count(withhold.begin(), withhold.end(), 0.05) == 1);
  CHECK(std::is_sorted(withhold.rbegin(), withhold.rend()));
}

TEST_CASE("sweeps validate their grids") {
  const auto pop = ipweval::synthetic_clinical_population(200, 0.5, 3.0, 1);
  const std::vector<double> empty;
  REQUIRE_THROWS_WITH(ipweval::sweep_alert_threshold(pop, empty, 0.5, 2, 1),
                      "empty sweep grid");
  const std::vector<double> half = {0.5};
  REQUIRE_THROWS_WITH(ipweval::sweep_alert_threshold(pop, half, 0.5, 2, 1),
                      "alert grid values must lie in (0.5, 1)");
  const std::vector<double> ascending = {0.7, 0.8};
  REQUIRE_THROWS_WITH(ipweval::sweep_alert_threshold(pop, ascending, 0.5, 2, 1),
                      "alert grid must be strictly descending");
  const std::vector<double> zero = {0.5, 0.0};
  REQUIRE_THROWS_WITH(ipweval::sweep_withhold_prob(pop, zero, 0.9, 2, 1),
                      "withhold grid values must lie in (0, 1]");
}

TEST_CASE("sweeps summarize each grid point deterministically") {
  const auto pop = ipweval::synthetic_clinical_population(600, 0.5, 3.0, 9);
  const std::vector<double> grid = {0.9, 0.8, 0.7};
  const auto rows = ipweval::sweep_alert_threshold(pop, grid, 0.5, 10, 21, 1);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].param == ipweval::SweptParam::AlertThreshold);
    CHECK(rows[i].value == grid[i]);
    REQUIRE(rows[i].actual.value.has_value());
    REQUIRE(rows[i].weighted.value.has_value());
    CHECK(rows[i].mean_observed_fraction > 0.0);
    CHECK(rows[i].mean_observed_fraction <= 1.0);
  }

  const auto parallel = ipweval::sweep_alert_threshold(pop, grid, 0.5, 10, 21, 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].actual.value->mean == parallel[i].actual.value->mean);
    CHECK(rows[i].observed.value->mean == parallel[i].observed.value->mean);
    CHECK(rows[i].weighted.value->mean == parallel[i].weighted.value->mean);
    CHECK(rows[i].mean_observed_fraction == parallel[i].mean_observed_fraction);
  }

  const std::vector<double> wgrid = {0.8, 0.2};
  const auto wrows = ipweval::sweep_withhold_prob(pop, wgrid, 0.85, 10, 33, 1);
  REQUIRE(wrows.size() == 2);
  CHECK(wrows[0].param == ipweval::SweptParam::WithholdProb);
  CHECK(wrows[0].mean_observed_fraction > wrows[1].mean_observed_fraction);
}

TEST_CASE("population resampling needs a synthetic population") {
  const auto external = make_population({0.9, 0.6, 0.4, 0.1}, {1, 1, 0, 0});
  DeploymentConfig cfg;
  cfg.alert_threshold = 0.8;
  cfg.withhold_prob = 0.5;
  cfg.n_reps = 2;
  cfg.resample_population = true;
  REQUIRE_THROWS_WITH(ipweval::simulate_deployment(external, cfg),
                      "population resampling requires a synthetic population");

  const auto clinical = ipweval::synthetic_clinical_population(300, 0.5, 3.0, 8);
  const auto reps = ipweval::simulate_deployment(clinical, cfg);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].actual != reps[1].actual);
}
