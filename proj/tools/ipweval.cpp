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

// Command-line entry point.
//
// Subcommands:
//   scenarios     full metric grid plus calibration study over the five
//                 label-selection scenarios
//   calibration   calibration study only
//   deploy-sweep  alert feedback-loop simulation, sweeping the alert
//                 threshold and the withhold probability
//   validate      self-validation oracle suite
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or data error,
// 3 validation failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipweval/ipweval.hpp"

namespace {

struct CommonOpts {
  std::uint64_t seed = 1729;
  int n = 10000;
  int reps = 100;
  std::string out_dir = "out";
  int threads = 0;
  bool csv = true;
  bool json = false;
  bool svg = true;
};

void add_common(CLI::App* cmd, CommonOpts& opts, int default_reps) {
  opts.reps = default_reps;
  cmd->add_option("--seed", opts.seed, "Root RNG seed")->capture_default_str();
  cmd->add_option("--n", opts.n, "Population size per replicate")->capture_default_str();
  cmd->add_option("--reps", opts.reps, "Number of replicates")->capture_default_str();
  cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();
  cmd->add_flag("--csv,!--no-csv", opts.csv, "Write CSV reports (default on)");
  cmd->add_flag("--json,!--no-json", opts.json, "Write JSON reports (default off)");
  cmd->add_flag("--svg,!--no-svg", opts.svg, "Write SVG figures (default on)");
}

struct ScenarioOpts {
  std::vector<std::string> scenarios;
  std::vector<std::string> metrics;
  double threshold = 0.5;
  int bins = 5;
  std::string delta_mode = "support";
};

void add_scenario_opts(CLI::App* cmd, ScenarioOpts& opts, bool with_metrics) {
  cmd->add_option("--scenario", opts.scenarios,
                  "Scenario subset (default: all five); one of scar, select_hard, "
                  "select_easy, select_negative, select_positive");
  if (with_metrics)
    cmd->add_option("--metric", opts.metrics,
                    "Metric subset (default: all six); one of sensitivity, specificity, "
                    "ppv, accuracy, auroc, auprc");
  cmd->add_option("--threshold", opts.threshold, "Classification threshold")
      ->capture_default_str();
  cmd->add_option("--bins", opts.bins, "Calibration bins")->capture_default_str();
  cmd->add_option("--delta-mode", opts.delta_mode,
                  "Distance scale for select_easy: support (analytic supremum) or "
                  "sample (per-dataset maximum)")
      ->capture_default_str()
      ->check(CLI::IsMember({"support", "sample"}));
}

struct DeployOpts {
  std::optional<double> p_t;
  std::optional<double> p_withhold;
  std::string pt_grid;
  std::string withhold_grid;
  std::string pop = "clinical";
  double prevalence = 0.57;
  double separation = 3.0;
  std::string file;
  bool resample_population = false;
};

std::vector<double> parse_grid(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string field = text.substr(pos, comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != field.size())
      throw std::invalid_argument(std::string(flag) +
                                  " expects comma-separated numbers, got \"" + field + "\"");
    values.push_back(v);
    pos = comma + 1;
  }
  return values;
}

std::vector<ipweval::Scenario> resolve_scenarios(const std::vector<std::string>& names) {
  std::vector<ipweval::Scenario> scenarios;
  if (names.empty()) {
    scenarios.assign(ipweval::kAllScenarios.begin(), ipweval::kAllScenarios.end());
    return scenarios;
  }
  for (const auto& name : names) {
    const ipweval::Scenario s = ipweval::parse_scenario(name);
    if (std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end())
      scenarios.push_back(s);
  }
  return scenarios;
}

std::vector<ipweval::MetricName> resolve_metrics(const std::vector<std::string>& names) {
  std::vector<ipweval::MetricName> metrics;
  if (names.empty()) {
    metrics.assign(ipweval::kAllMetrics.begin(), ipweval::kAllMetrics.end());
    return metrics;
  }
  for (const auto& name : names) {
    const ipweval::MetricName m = ipweval::parse_metric(name);
    if (std::find(metrics.begin(), metrics.end(), m) == metrics.end())
      metrics.push_back(m);
  }
  return metrics;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  return (std::filesystem::path(opts.out_dir) / name).string();
}

/// Monte Carlo scenario runs shared by `scenarios` and `calibration`.
/// Failed scenarios are reported on stderr and skipped.
std::vector<ipweval::ScenarioResult> run_requested_scenarios(
    const CommonOpts& common, const ScenarioOpts& scen,
    const std::vector<ipweval::Scenario>& scenarios, bool& any_failed) {
  const ipweval::DeltaMode delta_mode = scen.delta_mode == "sample"
                                            ? ipweval::DeltaMode::SampleMax
                                            : ipweval::DeltaMode::SupportSupremum;
  ipweval::RunOptions run_opts;
  run_opts.n_bins = scen.bins;
  run_opts.n_threads = common.threads;
  std::vector<ipweval::ScenarioResult> results;
  for (ipweval::Scenario s : scenarios) {
    ipweval::ScenarioSpec spec = ipweval::default_spec(s);
    spec.delta_mode = delta_mode;
    const std::uint64_t stream =
        ipweval::derive_seed(common.seed, static_cast<std::uint64_t>(s));
    try {
      results.push_back(ipweval::run_scenario(spec, common.n, common.reps, scen.threshold,
                                              stream, run_opts));
    } catch (const std::exception& e) {
      std::cerr << "scenario " << ipweval::to_string(s) << " failed: " << e.what() << "\n";
      any_failed = true;
    }
  }
  return results;
}

ipweval::svg::Panel calibration_panel(const ipweval::ScenarioResult& result,
                                      ipweval::EstimatorKind estimator) {
  using ipweval::svg::Panel;
  Panel panel;
  panel.title = std::string(ipweval::to_string(result.spec.scenario)) + " " +
                ipweval::to_string(estimator);
  panel.x_label = "mean predicted probability";
  panel.y_label = "outcome prevalence";
  panel.diagonal = true;
  panel.legend = false;
  const char* color = estimator == ipweval::EstimatorKind::Actual
                          ? ipweval::svg::kActualColor
                          : estimator == ipweval::EstimatorKind::Observed
                                ? ipweval::svg::kObservedColor
                                : ipweval::svg::kWeightedColor;
  ipweval::svg::Series series;
  series.label = ipweval::to_string(estimator);
  series.color = color;
  series.markers = true;
  const auto& band = result.calibration[static_cast<std::size_t>(estimator)];
  for (const auto& bin : band.bins) {
    if (!bin.mean_pred.has_value()) continue;
    series.points.emplace_back(*bin.mean_pred, *bin.prevalence);
    ipweval::svg::ErrorBar bar;
    bar.color = color;
    bar.x = *bin.mean_pred;
    bar.y_lo = *bin.prev_lo;
    bar.y_hi = *bin.prev_hi;
    panel.error_bars.push_back(bar);
  }
  panel.series.push_back(series);
  return panel;
}

void write_calibration_outputs(const CommonOpts& common,
                               const std::vector<ipweval::ScenarioResult>& results) {
  if (common.csv)
    ipweval::write_file(out_path(common, "calibration.csv"),
                        ipweval::calibration_csv(results));
  if (common.json)
    ipweval::write_file(out_path(common, "calibration.json"),
                        ipweval::calibration_json(results).dump(2) + "\n");
  if (common.svg) {
    for (const auto& result : results) {
      std::vector<ipweval::svg::Panel> panels;
      for (ipweval::EstimatorKind e : ipweval::kAllEstimators)
        panels.push_back(calibration_panel(result, e));
      const std::string name =
          std::string("calibration_") + ipweval::to_string(result.spec.scenario) + ".svg";
      ipweval::write_file(out_path(common, name), ipweval::svg::render(panels, 3));
    }
  }
}

int cmd_scenarios(const CommonOpts& common, const ScenarioOpts& scen) {
  const auto scenarios = resolve_scenarios(scen.scenarios);
  const auto metrics = resolve_metrics(scen.metrics);
  std::filesystem::create_directories(common.out_dir);
  bool any_failed = false;
  const auto results = run_requested_scenarios(common, scen, scenarios, any_failed);
  if (!results.empty()) {
    std::vector<ipweval::Scenario> completed;
    for (const auto& r : results) completed.push_back(r.spec.scenario);
    const std::string text = ipweval::table1_text(results, metrics, completed);
    ipweval::write_file(out_path(common, "table1.txt"), text);
    if (common.csv)
      ipweval::write_file(out_path(common, "table1.csv"),
                          ipweval::table1_csv(results, metrics));
    if (common.json)
      ipweval::write_file(out_path(common, "table1.json"),
                          ipweval::table1_json(results, metrics).dump(2) + "\n");
    write_calibration_outputs(common, results);
    std::cout << text;
  }
  if (any_failed) return 2;
  std::cout << "wrote reports to " << common.out_dir << "\n";
  return 0;
}

int cmd_calibration(const CommonOpts& common, const ScenarioOpts& scen) {
  const auto scenarios = resolve_scenarios(scen.scenarios);
  std::filesystem::create_directories(common.out_dir);
  bool any_failed = false;
  const auto results = run_requested_scenarios(common, scen, scenarios, any_failed);
  if (!results.empty()) write_calibration_outputs(common, results);
  if (any_failed) return 2;
  std::cout << "wrote calibration reports to " << common.out_dir << "\n";
  return 0;
}

double nice_floor(double v) { return std::max(0.0, std::floor((v - 0.02) * 20.0) / 20.0); }
double nice_ceil(double v) { return std::min(1.0, std::ceil((v + 0.02) * 20.0) / 20.0); }

ipweval::svg::Panel sweep_panel(const std::vector<ipweval::SweepRow>& rows,
                                const std::string& title, const std::string& x_label) {
  using ipweval::EstimatorKind;
  ipweval::svg::Panel panel;
  panel.title = title;
  panel.x_label = x_label;
  panel.y_label = "AUROC";
  double x_min = rows.front().value, x_max = rows.front().value;
  double y_min = 1.0, y_max = 0.0;
  for (const auto& row : rows) {
    x_min = std::min(x_min, row.value);
    x_max = std::max(x_max, row.value);
    for (EstimatorKind e : ipweval::kAllEstimators) {
      const auto& s = e == EstimatorKind::Actual     ? row.actual
                      : e == EstimatorKind::Observed ? row.observed
                                                     : row.weighted;
      if (s.value.has_value()) {
        y_min = std::min(y_min, s.value->lo);
        y_max = std::max(y_max, s.value->hi);
      }
    }
  }
  panel.x_min = x_min;
  panel.x_max = x_max;
  panel.y_min = nice_floor(y_min);
  panel.y_max = nice_ceil(y_max);
  for (EstimatorKind e : ipweval::kAllEstimators) {
    const char* color = e == EstimatorKind::Actual     ? ipweval::svg::kActualColor
                        : e == EstimatorKind::Observed ? ipweval::svg::kObservedColor
                                                       : ipweval::svg::kWeightedColor;
    ipweval::svg::Series series;
    series.label = ipweval::to_string(e);
    series.color = color;
    ipweval::svg::Band band;
    band.color = color;
    for (const auto& row : rows) {
      const auto& s = e == EstimatorKind::Actual     ? row.actual
                      : e == EstimatorKind::Observed ? row.observed
                                                     : row.weighted;
      if (!s.value.has_value()) continue;
      series.points.emplace_back(row.value, s.value->mean);
      band.points.push_back({row.value, s.value->lo, s.value->hi});
    }
    panel.bands.push_back(band);
    panel.series.push_back(series);
  }
  return panel;
}

int cmd_deploy_sweep(const CommonOpts& common, const DeployOpts& deploy) {
  ipweval::ScoredPopulation pop;
  const std::uint64_t pop_seed = ipweval::derive_seed(common.seed, 0);
  if (deploy.pop == "clinical") {
    pop = ipweval::synthetic_clinical_population(common.n, deploy.prevalence,
                                                 deploy.separation, pop_seed);
  } else if (deploy.pop == "dgp") {
    pop = ipweval::dgp_population(common.n, pop_seed);
  } else if (deploy.pop == "external") {
    if (deploy.file.empty())
      throw std::invalid_argument("--pop external requires --file");
    pop = ipweval::load_population_csv(deploy.file);
  } else {
    throw std::invalid_argument("--pop must be dgp, clinical, or external");
  }
  if (pop.size() < 100)
    std::cerr << "warning: population has only " << pop.size()
              << " examples; intervals will be wide\n";

  std::vector<double> alert_grid;
  if (!deploy.pt_grid.empty())
    alert_grid = parse_grid(deploy.pt_grid, "--pt-grid");
  else if (deploy.p_t.has_value())
    alert_grid = {*deploy.p_t};
  else
    alert_grid = ipweval::default_alert_grid();
  const double fixed_withhold = deploy.p_withhold.value_or(0.05);

  std::vector<double> withhold_grid;
  if (!deploy.withhold_grid.empty())
    withhold_grid = parse_grid(deploy.withhold_grid, "--withhold-grid");
  else if (deploy.p_withhold.has_value())
    withhold_grid = {*deploy.p_withhold};
  else
    withhold_grid = ipweval::default_withhold_grid();
  const double fixed_alert = deploy.p_t.value_or(0.9);

  std::filesystem::create_directories(common.out_dir);
  std::cout << "population: " << ipweval::to_string(pop.provenance) << " n=" << pop.size()
            << " prevalence=" << ipweval::format_g6(pop.prevalence) << "\n";

  const auto pt_rows = ipweval::sweep_alert_threshold(
      pop, alert_grid, fixed_withhold, common.reps, ipweval::derive_seed(common.seed, 1),
      common.threads, deploy.resample_population);
  const auto withhold_rows = ipweval::sweep_withhold_prob(
      pop, withhold_grid, fixed_alert, common.reps, ipweval::derive_seed(common.seed, 2),
      common.threads, deploy.resample_population);

  if (common.csv) {
    ipweval::write_file(out_path(common, "sweep_pt.csv"), ipweval::sweep_csv(pt_rows));
    ipweval::write_file(out_path(common, "sweep_withhold.csv"),
                        ipweval::sweep_csv(withhold_rows));
  }
  if (common.json) {
    ipweval::write_file(out_path(common, "sweep_pt.json"),
                        ipweval::sweep_json(pt_rows).dump(2) + "\n");
    ipweval::write_file(out_path(common, "sweep_withhold.json"),
                        ipweval::sweep_json(withhold_rows).dump(2) + "\n");
  }
  if (common.svg) {
    std::vector<ipweval::svg::Panel> panels;
    panels.push_back(sweep_panel(
        pt_rows, "alert-threshold sweep",
        "alert threshold (withhold " + ipweval::format_g6(fixed_withhold) + ")"));
    panels.push_back(sweep_panel(
        withhold_rows, "withhold-probability sweep",
        "withhold probability (alert threshold " + ipweval::format_g6(fixed_alert) + ")"));
    ipweval::write_file(out_path(common, "sweep.svg"),
                        ipweval::svg::render(panels, 1, 560.0, 300.0));
  }
  std::cout << "sweep_pt: " << pt_rows.size() << " rows; sweep_withhold: "
            << withhold_rows.size() << " rows\n";
  std::cout << "wrote reports to " << common.out_dir << "\n";
  return 0;
}

int cmd_validate(const CommonOpts& common, bool quick, const std::string& fault_name) {
  ipweval::FaultMode fault;
  if (fault_name == "none")
    fault = ipweval::FaultMode::None;
  else if (fault_name == "no-invert")
    fault = ipweval::FaultMode::WeightsNotInverted;
  else
    throw std::invalid_argument("--inject-fault must be none or no-invert");

  const auto results = ipweval::run_validation(quick, fault, common.seed);
  bool all_pass = true;
  for (const auto& r : results) {
    if (r.pass) {
      std::cout << "[PASS] " << r.name << " (" << r.n_checked << " instances)\n";
    } else {
      all_pass = false;
      std::cout << "[FAIL] " << r.name << " after " << r.n_checked << " instances\n";
      std::cerr << r.name << " counterexample: " << r.detail << "\n";
    }
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selection-aware classification metrics: scenario studies, alert "
               "feedback-loop sweeps, and self-validation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (flags win)");
  app.allow_config_extras(false);

  CommonOpts scen_common;
  ScenarioOpts scen_opts;
  CLI::App* scenarios = app.add_subcommand(
      "scenarios", "Metric grid and calibration study over the selection scenarios");
  add_common(scenarios, scen_common, 100);
  add_scenario_opts(scenarios, scen_opts, true);

  CommonOpts cal_common;
  ScenarioOpts cal_opts;
  CLI::App* calibration =
      app.add_subcommand("calibration", "Calibration study over the selection scenarios");
  add_common(calibration, cal_common, 100);
  add_scenario_opts(calibration, cal_opts, false);

  CommonOpts deploy_common;
  DeployOpts deploy_opts;
  CLI::App* deploy = app.add_subcommand(
      "deploy-sweep", "Alert feedback-loop simulation over both parameter sweeps");
  add_common(deploy, deploy_common, 1000);
  deploy->add_option("--p-t", deploy_opts.p_t,
                     "Alert threshold; fixes the threshold of the withhold sweep and, "
                     "if no grid is given, collapses the threshold sweep to this point");
  deploy->add_option("--p-withhold", deploy_opts.p_withhold,
                     "Withhold probability; fixes the probability of the threshold "
                     "sweep and, if no grid is given, collapses the withhold sweep");
  deploy->add_option("--pt-grid", deploy_opts.pt_grid,
                     "Comma-separated descending alert-threshold grid");
  deploy->add_option("--withhold-grid", deploy_opts.withhold_grid,
                     "Comma-separated withhold-probability grid");
  deploy->add_option("--pop", deploy_opts.pop, "Population source: dgp, clinical, external")
      ->capture_default_str()
      ->check(CLI::IsMember({"dgp", "clinical", "external"}));
  deploy->add_option("--prevalence", deploy_opts.prevalence,
                     "Positive-label prevalence of the clinical population")
      ->capture_default_str();
  deploy->add_option("--separation", deploy_opts.separation,
                     "Class separation of the clinical population (AUROC rises with it)")
      ->capture_default_str();
  deploy->add_option("--file", deploy_opts.file,
                     "CSV population file with header score,label (for --pop external)");
  deploy->add_flag("--resample-population", deploy_opts.resample_population,
                   "Redraw the synthetic population every replicate instead of only "
                   "the withholding coins");

  CommonOpts val_common;
  bool val_quick = false;
  std::string val_fault = "none";
  CLI::App* validate = app.add_subcommand("validate", "Run the self-validation oracles");
  validate->add_option("--seed", val_common.seed, "Root RNG seed")->capture_default_str();
  validate->add_flag("--quick", val_quick, "Smaller instance counts (finishes in seconds)");
  validate->add_option("--inject-fault", val_fault,
                       "Seed a deliberate bug to exercise the oracles: none or no-invert")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (scenarios->parsed()) return cmd_scenarios(scen_common, scen_opts);
    if (calibration->parsed()) return cmd_calibration(cal_common, cal_opts);
    if (deploy->parsed()) return cmd_deploy_sweep(deploy_common, deploy_opts);
    if (validate->parsed()) return cmd_validate(val_common, val_quick, val_fault);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
