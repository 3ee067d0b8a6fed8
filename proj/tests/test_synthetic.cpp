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

#include <cmath>

#include "ipweval/rng.hpp"
#include "ipweval/synthetic.hpp"

#include <catch2/catch_amalgamated.hpp>

using ipweval::DeltaMode;
using ipweval::Scenario;
using ipweval::ScenarioSpec;

TEST_CASE("sigmoid fixed points and symmetry") {
  CHECK(ipweval::sigmoid(0.0) == 0.5);
  CHECK(ipweval::sigmoid(4.0) == Catch::Approx(0.98201).margin(1e-5));
  for (double z : {0.3, 1.7, 5.0}) {
    CHECK(ipweval::sigmoid(z) + ipweval::sigmoid(-z) == Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("logit inverts sigmoid") {
  for (double z : {-2.0, 0.0, 1.5}) {
    CHECK(ipweval::logit(ipweval::sigmoid(z)) == Catch::Approx(z).margin(1e-12));
  }
  REQUIRE_THROWS_AS(ipweval::logit(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ipweval::logit(1.0), std::invalid_argument);
}

TEST_CASE("boundary distance closed forms") {
  const ipweval::DgpParams dgp;
  CHECK(ipweval::boundary_distance(0.0, 0.0, dgp) == 0.0);
  CHECK(ipweval::boundary_distance(1.0, 1.0, dgp) == Catch::Approx(std::sqrt(2.0)));
  CHECK(ipweval::boundary_distance(2.0, 2.0, dgp) == Catch::Approx(2.0 * std::sqrt(2.0)));
  ipweval::DgpParams degenerate;
  degenerate.coef1 = 0.0;
  degenerate.coef2 = 0.0;
  REQUIRE_THROWS_AS(ipweval::boundary_distance(1.0, 1.0, degenerate),
                    std::invalid_argument);
}

TEST_CASE("support supremum of the boundary distance sits at a corner") {
  CHECK(ipweval::support_delta(ipweval::DgpParams{}) ==
        Catch::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("scenario names round-trip") {
  for (Scenario s : ipweval::kAllScenarios) {
    CHECK(ipweval::parse_scenario(ipweval::to_string(s)) == s);
  }
  REQUIRE_THROWS_AS(ipweval::parse_scenario("select_everything"), std::invalid_argument);
}

TEST_CASE("default specs install per-scenario parameters") {
  CHECK(ipweval::default_spec(Scenario::SelectHard).sharpness == 2.0);
  CHECK(ipweval::default_spec(Scenario::SelectEasy).sharpness == 1.0);
  const auto neg = ipweval::default_spec(Scenario::SelectNegative);
  CHECK(neg.select_prob_pos == 0.5);
  CHECK(neg.select_prob_neg == 1.0);
  const auto pos = ipweval::default_spec(Scenario::SelectPositive);
  CHECK(pos.select_prob_pos == 1.0);
  CHECK(pos.select_prob_neg == 0.5);
  CHECK(ipweval::default_spec(Scenario::Scar).select_prob_pos == 0.5);
}

TEST_CASE("selection probability anchors") {
  const auto hard = ipweval::default_spec(Scenario::SelectHard);
  CHECK(ipweval::selection_probability(0.0, 0.0, 1, hard) == 1.0);
  const auto easy = ipweval::default_spec(Scenario::SelectEasy);
  CHECK(ipweval::selection_probability(2.0, 2.0, 0, easy) == Catch::Approx(1.0));
  const auto neg = ipweval::default_spec(Scenario::SelectNegative);
  CHECK(ipweval::selection_probability(0.3, 0.1, 0, neg) == 1.0);
  CHECK(ipweval::selection_probability(0.3, 0.1, 1, neg) == 0.5);
  const auto scar = ipweval::default_spec(Scenario::Scar);
  CHECK(ipweval::selection_probability(1.0, -1.5, 0, scar) == 0.5);
}

TEST_CASE("distance scenarios move in opposite directions") {
  const auto hard = ipweval::default_spec(Scenario::SelectHard);
  const auto easy = ipweval::default_spec(Scenario::SelectEasy);
  double prev_hard = 2.0;
  double prev_easy = 0.0;
  for (double x : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const double p_hard = ipweval::selection_probability(x, x, 1, hard);
    const double p_easy = ipweval::selection_probability(x, x, 1, easy);
    CHECK(p_hard < prev_hard);
    CHECK(p_easy > prev_easy);
    CHECK(p_hard > 0.0);
    CHECK(p_easy <= 1.0);
    prev_hard = p_hard;
    prev_easy = p_easy;
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto spec = ipweval::default_spec(Scenario::SelectHard);
  const auto a = ipweval::sample_dataset(spec, 500, 99);
  const auto b = ipweval::sample_dataset(spec, 500, 99);
  const auto c = ipweval::sample_dataset(spec, 500, 100);
  REQUIRE(a.size() == 500);
  bool all_equal = true;
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_equal = all_equal && a[i].x1 == b[i].x1 && a[i].label == b[i].label &&
                a[i].selected == b[i].selected;
    any_diff = any_diff || a[i].x1 != c[i].x1;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("sampled examples satisfy their own invariants") {
  const auto spec = ipweval::default_spec(Scenario::SelectEasy);
  const auto data = ipweval::sample_dataset(spec, 2000, 5);
  for (const auto& e : data) {
    CHECK(e.x1 >= spec.dgp.support_min);
    CHECK(e.x1 <= spec.dgp.support_max);
    CHECK(e.x2 >= spec.dgp.support_min);
    CHECK(e.x2 <= spec.dgp.support_max);
    CHECK(e.score == ipweval::sigmoid(e.x1 + e.x2));
    CHECK(e.selection_prob > 0.0);
    CHECK(e.selection_prob <= 1.0);
  }
}

TEST_CASE("prevalence and SCAR selection are balanced at defaults") {
  const auto spec = ipweval::default_spec(Scenario::Scar);
  const auto data = ipweval::sample_dataset(spec, 10000, 1);
  double positives = 0.0;
  double selected = 0.0;
  for (const auto& e : data) {
    positives += e.label;
    selected += e.selected ? 1.0 : 0.0;
  }
  CHECK(std::abs(positives / 10000.0 - 0.5) < 0.02);
  CHECK(std::abs(selected / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("sample-max delta mode shares the population and tops out at one") {
  auto spec = ipweval::default_spec(Scenario::SelectEasy);
  const auto analytic = ipweval::sample_dataset(spec, 1000, 31);
  spec.delta_mode = DeltaMode::SampleMax;
  const auto empirical = ipweval::sample_dataset(spec, 1000, 31);
  double max_prob = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    CHECK(empirical[i].x1 == analytic[i].x1);
    CHECK(empirical[i].x2 == analytic[i].x2);
    CHECK(empirical[i].label == analytic[i].label);
    CHECK(empirical[i].selection_prob >= analytic[i].selection_prob);
    CHECK(empirical[i].selection_prob <= 1.0);
    max_prob = std::max(max_prob, empirical[i].selection_prob);
  }
  CHECK(max_prob == 1.0);
}

TEST_CASE("dataset size must be positive") {
  REQUIRE_THROWS_AS(ipweval::sample_dataset(ipweval::default_spec(Scenario::Scar), 0, 1),
                    std::invalid_argument);
}
