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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ipweval/deployment.hpp"
#include "ipweval/report.hpp"
#include "ipweval/svg.hpp"

#include <catch2/catch_amalgamated.hpp>

using Catch::Matchers::ContainsSubstring;
using ipweval::EstimateSummary;
using ipweval::MetricName;
using ipweval::PointInterval;
using ipweval::Scenario;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

ipweval::ScenarioResult make_sparse_result() {
  ipweval::ScenarioResult result;
  result.spec = ipweval::default_spec(Scenario::Scar);
  result.n = 10;
  result.n_reps = 4;
  result.threshold = 0.5;
  result.seed = 1;
  result.n_bins = 5;
  ipweval::MetricTriplet triplet;
  triplet.metric = MetricName::Auroc;
  triplet.actual.value = PointInterval{0.5, 0.4, 0.6};
  triplet.observed.n_undefined = 4;
  triplet.observed.flagged = true;
  triplet.weighted.value = PointInterval{0.55, 0.45, 0.65};
  triplet.weighted.n_undefined = 1;
  triplet.weighted.flagged = true;
  result.triplets.push_back(triplet);
  return result;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(ipweval::format_g6(0.5) == "0.5");
  CHECK(ipweval::format_g6(0.123456789) == "0.123457");
  CHECK(ipweval::format_g6(1.0 / 3.0) == "0.333333");
  CHECK(ipweval::format_f2(0.6283) == "0.63");
  CHECK(ipweval::format_f2(1.0) == "1.00");
}

TEST_CASE("cell formatting") {
  EstimateSummary s;
  s.value = PointInterval{0.628, 0.601, 0.6514};
  CHECK(ipweval::format_cell(s) == "0.63 [0.60, 0.65]");
  s.flagged = true;
  CHECK(ipweval::format_cell(s) == "0.63 [0.60, 0.65]*");
  s.value.reset();
  s.flagged = false;
  CHECK(ipweval::format_cell(s) == "undefined");
  s.flagged = true;
  CHECK(ipweval::format_cell(s) == "undefined*");
}

TEST_CASE("metric-grid CSV shape and undefined rows") {
  const std::vector<ipweval::ScenarioResult> results = {make_sparse_result()};
  const std::vector<MetricName> metrics = {MetricName::Auroc};
  const auto lines = split_lines(ipweval::table1_csv(results, metrics));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "scenario,metric,estimator,mean,lo,hi,n_undefined");
  CHECK(lines[1] == "scar,auroc,actual,0.5,0.4,0.6,0");
  CHECK(lines[2] == "scar,auroc,observed,,,,4");
  CHECK(lines[3] == "scar,auroc,weighted,0.55,0.45,0.65,1");
}

TEST_CASE("metric-grid CSV covers every metric and estimator of a real run") {
  const auto result = ipweval::run_scenario(ipweval::default_spec(Scenario::Scar), 600,
                                            6, 0.5, 3);
  const std::vector<ipweval::ScenarioResult> results = {result};
  const auto lines =
      split_lines(ipweval::table1_csv(results, ipweval::kAllMetrics));
  REQUIRE(lines.size() == 1 + 6 * 3);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(lines[i].rfind("scar,", 0) == 0);
  }
}

TEST_CASE("text grid renders cells and flags") {
  const std::vector<ipweval::ScenarioResult> results = {make_sparse_result()};
  const std::vector<MetricName> metrics = {MetricName::Auroc};
  const std::vector<Scenario> required = {Scenario::Scar};
  const auto text = ipweval::table1_text(results, metrics, required);
  CHECK_THAT(text, ContainsSubstring("auroc"));
  CHECK_THAT(text, ContainsSubstring("scar"));
  CHECK_THAT(text, ContainsSubstring("0.50 [0.40, 0.60]"));
  CHECK_THAT(text, ContainsSubstring("undefined*"));
  CHECK_THAT(text, ContainsSubstring("* more than 10% of replicates undefined"));

  const std::vector<Scenario> extra = {Scenario::Scar, Scenario::SelectHard};
  REQUIRE_THROWS_WITH(ipweval::table1_text(results, metrics, extra),
                      "missing scenario: select_hard");
}

TEST_CASE("calibration CSV shape") {
  const auto result = ipweval::run_scenario(ipweval::default_spec(Scenario::Scar), 600,
                                            6, 0.5, 3);
  const std::vector<ipweval::ScenarioResult> results = {result};
  const auto lines = split_lines(ipweval::calibration_csv(results));
  CHECK(lines[0] ==
        "scenario,estimator,bin_index,bin_lo,bin_hi,mean_pred,prevalence,"
        "weight_mass,lo,hi");
  REQUIRE(lines.size() == 1 + 3 * 5);
  CHECK_THAT(lines[1], ContainsSubstring("scar,actual,0,0,0.2,"));
  CHECK_THAT(lines[6], ContainsSubstring("scar,observed,0,"));
  CHECK_THAT(lines[11], ContainsSubstring("scar,weighted,0,"));
}

TEST_CASE("sweep CSV shape") {
  const auto pop = ipweval::synthetic_clinical_population(400, 0.5, 3.0, 11);
  const std::vector<double> grid = {0.9, 0.8};
  const auto rows = ipweval::sweep_alert_threshold(pop, grid, 0.5, 5, 2, 1);
  const auto lines = split_lines(ipweval::sweep_csv(rows));
  CHECK(lines[0] ==
        "swept_param,param_value,estimator,mean,lo,hi,mean_observed_fraction,"
        "n_undefined");
  REQUIRE(lines.size() == 1 + 2 * 3);
  CHECK(lines[1].rfind("alert_threshold,0.9,actual,", 0) == 0);
  CHECK(lines[2].rfind("alert_threshold,0.9,observed,", 0) == 0);
  CHECK(lines[4].rfind("alert_threshold,0.8,actual,", 0) == 0);
}

TEST_CASE("JSON reports mirror the CSV content") {
  const std::vector<ipweval::ScenarioResult> results = {make_sparse_result()};
  const std::vector<MetricName> metrics = {MetricName::Auroc};
  const auto t1 = ipweval::table1_json(results, metrics);
  REQUIRE(t1.contains("scenarios"));
  REQUIRE(t1["scenarios"].size() == 1);
  CHECK(t1["scenarios"][0]["scenario"] == "scar");
  CHECK(t1["scenarios"][0]["metrics"][0]["metric"] == "auroc");
  CHECK(t1["scenarios"][0]["metrics"][0]["actual"]["mean"] == 0.5);
  CHECK(t1["scenarios"][0]["metrics"][0]["observed"]["mean"].is_null());
  CHECK(t1["scenarios"][0]["metrics"][0]["observed"]["n_undefined"] == 4);
  CHECK(t1["scenarios"][0]["metrics"][0]["observed"]["flagged"] == true);

  const auto run = ipweval::run_scenario(ipweval::default_spec(Scenario::Scar), 400, 4,
                                         0.5, 3);
  const std::vector<ipweval::ScenarioResult> real = {run};
  const auto cal = ipweval::calibration_json(real);
  REQUIRE(cal["scenarios"].size() == 1);
  CHECK(cal["scenarios"][0]["n_bins"] == 5);
  REQUIRE(cal["scenarios"][0]["estimators"]["actual"].size() == 5);
  CHECK(cal["scenarios"][0]["estimators"]["actual"][0]["bin_lo"] == 0.0);

  const auto pop = ipweval::synthetic_clinical_population(400, 0.5, 3.0, 11);
  const std::vector<double> grid = {0.9};
  const auto rows = ipweval::sweep_alert_threshold(pop, grid, 0.5, 5, 2, 1);
  const auto sweep = ipweval::sweep_json(rows);
  REQUIRE(sweep["rows"].size() == 1);
  CHECK(sweep["rows"][0]["swept_param"] == "alert_threshold");
  CHECK(sweep["rows"][0]["param_value"] == 0.9);
  CHECK(sweep["rows"][0]["actual"].contains("mean"));
}

TEST_CASE("write_file is verbatim") {
  const auto path =
      (std::filesystem::temp_directory_path() / "ipweval_write_test.bin").string();
  const std::string content = "a\nb\r\nc";
  ipweval::write_file(path, content);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == content);

  REQUIRE_THROWS_WITH(ipweval::write_file("/nonexistent-dir/x.txt", "x"),
                      ContainsSubstring("cannot open for writing"));
}

TEST_CASE("SVG rendering is deterministic and well-formed") {
  ipweval::svg::Panel panel;
  panel.title = "calibration a&b<c";
  panel.x_label = "predicted";
  panel.y_label = "prevalence";
  panel.diagonal = true;
  ipweval::svg::Series series;
  series.label = "observed";
  series.color = ipweval::svg::kObservedColor;
  series.markers = true;
  series.points = {{0.1, 0.15}, {0.5, 0.52}, {0.9, 0.88}};
  panel.series.push_back(series);
  ipweval::svg::Band band;
  band.color = ipweval::svg::kObservedColor;
  band.points = {{{0.1, 0.1, 0.2}}, {{0.5, 0.45, 0.6}}, {{0.9, 0.8, 0.95}}};
  panel.bands.push_back(band);
  ipweval::svg::ErrorBar bar;
  bar.color = ipweval::svg::kActualColor;
  bar.x = 0.5;
  bar.y_lo = 0.4;
  bar.y_hi = 0.6;
  panel.error_bars.push_back(bar);

  const std::vector<ipweval::svg::Panel> panels = {panel};
  const auto svg = ipweval::svg::render(panels, 1);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK_THAT(svg, ContainsSubstring("<svg"));
  CHECK_THAT(svg, ContainsSubstring("</svg>"));
  CHECK_THAT(svg, ContainsSubstring("polyline"));
  CHECK_THAT(svg, ContainsSubstring("polygon"));
  CHECK_THAT(svg, ContainsSubstring("calibration a&amp;b&lt;c"));
  CHECK(svg == ipweval::svg::render(panels, 1));

  const std::vector<ipweval::svg::Panel> two = {panel, panel};
  const auto wide = ipweval::svg::render(two, 2);
  CHECK(wide.size() > svg.size());
}
