// Copyright 2026 The dephasim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include "dephasim/experiments.hpp"

using namespace dephasim;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.chain = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.01, 2, 0.01);
  cfg.model = ConstantRate{0.0};
  cfg.sweep.parameter = "gamma";
  cfg.sweep.min = 0.0;
  cfg.sweep.max = 0.1;
  cfg.sweep.points = 3;
  cfg.integrator.rtol = 1e-8;
  cfg.integrator.atol = 1e-11;
  cfg.integrator.window_tol = 1e-7;
  cfg.integrator.t_max = 5000.0;
  return cfg;
}

const char* kConfigJson = R"({
  "schema_version": 1,
  "name": "example",
  "chain": {
    "n_sites": 3,
    "frequency": 1.0,
    "coupling": 0.1,
    "injection_site": 1,
    "injection_rate": 0.01,
    "extraction_site": 2,
    "extraction_rate": 0.01
  },
  "rate_model": {"type": "sine", "gamma": 0.05, "nu": 2.0},
  "sweep": {"parameter": "gamma", "min": 0.0, "max": 0.1, "points": 5},
  "integrator": {"rtol": 1e-8, "t_max": 2000.0},
  "output": "out.csv"
})";

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("config JSON parsing and round trip") {
  const ExperimentConfig cfg = parse_config(kConfigJson);
  CHECK(cfg.chain.n_sites == 3);
  CHECK(cfg.chain.extraction_site == 2);
  CHECK(std::get<SineRate>(cfg.model).nu == doctest::Approx(2.0));
  CHECK(cfg.sweep.points == 5);
  CHECK(cfg.integrator.t_max == doctest::Approx(2000.0));
  CHECK(cfg.output_path == "out.csv");

  const ExperimentConfig again = parse_config(config_to_json(cfg));
  CHECK(again.chain.n_sites == cfg.chain.n_sites);
  CHECK(again.sweep.max == doctest::Approx(cfg.sweep.max));
  CHECK(model_name(again.model) == "sine");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 99})"), ConfigError);
  // missing rate model
  CHECK_THROWS_AS(parse_config(R"({"schema_version":1,"chain":{"n_sites":2,
    "injection_rate":0.01,"extraction_site":2,"extraction_rate":0.01},
    "sweep":{"parameter":"gamma","min":0,"max":1,"points":3}})"),
                  ConfigError);
  // theta sweep on a non-NMR model
  auto cfg = small_config();
  cfg.sweep.parameter = "theta";
  CHECK_THROWS(cfg.validate());
  auto cfg2 = small_config();
  cfg2.sweep.points = 1;
  CHECK_THROWS_AS(cfg2.validate(), ConfigError);
}

TEST_CASE("sweep grid endpoints are exact") {
  SweepSpec s;
  s.min = 0.0;
  s.max = 2.0;
  s.points = 25;
  const auto g = s.grid();
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 2.0);
  CHECK(g.size() == 25);
}

TEST_CASE("run_sweep produces ordered, converged, definition-consistent records") {
  const auto records = run_sweep(small_config(), 1);
  REQUIRE(records.size() == 3);
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    CHECK(r.converged);
    // J-tilde is n_k / N by definition
    CHECK(r.j_tilde == doctest::Approx(r.populations(1) / 2.0).epsilon(1e-14));
    CHECK(r.delta_n <= 1.0);
    CHECK(r.nm_quantifier_period == doctest::Approx(0.0));
    if (i > 0) CHECK(r.parameter > records[i - 1].parameter);
    CHECK(r.stats.max_trace_drift <= 1e-9);
  }
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
  const auto cfg = small_config();
  const auto a = run_sweep(cfg, 1);
  const auto b = run_sweep(cfg, 1);
  const auto c = run_sweep(cfg, 4);
  const std::string csv_a = records_to_csv(a, cfg.chain.n_sites);
  CHECK(csv_a == records_to_csv(b, cfg.chain.n_sites));
  CHECK(csv_a == records_to_csv(c, cfg.chain.n_sites));
}

TEST_CASE("CP violation aborts the sweep before any integration") {
  auto cfg = small_config();
  cfg.model = ConstantRate{0.0};
  cfg.sweep.min = -0.2;  // negative constant rates are not CP
  cfg.sweep.max = 0.1;
  CHECK_THROWS_AS(run_sweep(cfg, 1), CpViolationError);
}

TEST_CASE("CSV has the fixed column order") {
  SweepRecord r;
  r.parameter = 0.5;
  r.j_tilde = 0.01;
  r.delta_n = 0.99;
  r.populations = RVector::Zero(2);
  r.converged = true;
  r.periods = 7;
  r.nm_quantifier_period = 0.25;
  const std::string csv = records_to_csv({r}, 2);
  CHECK(csv.rfind("parameter,J_tilde,Delta_n,n1,n2,converged,periods,F\n", 0) == 0);
  CHECK(csv.find(",1,7,") != std::string::npos);
}

TEST_CASE("curve summaries classify monotonicity") {
  auto mk = [](std::vector<double> js) {
    std::vector<SweepRecord> rs;
    for (size_t i = 0; i < js.size(); ++i) {
      SweepRecord r;
      r.parameter = static_cast<double>(i);
      r.j_tilde = js[i];
      r.delta_n = js[i];  // spread tracks the current here
      r.converged = true;
      rs.push_back(r);
    }
    return rs;
  };
  CHECK(report_figure_summary(mk({5, 4, 3, 2, 1})).verdict == "decreasing");
  CHECK(report_figure_summary(mk({1, 2, 3, 4, 5})).verdict == "increasing");
  const auto peak = report_figure_summary(mk({1, 2, 5, 4, 3}));
  CHECK(peak.verdict == "interior-max");
  CHECK(peak.argmax_index == 2);
  CHECK(peak.max_j_tilde == doctest::Approx(5.0));
  CHECK(peak.interior_extrema == 1);
  const auto wiggle = report_figure_summary(mk({3, 1, 4, 1, 5}));
  CHECK(wiggle.verdict == "non-monotonic");
  CHECK(wiggle.interior_extrema == 3);
  CHECK(report_figure_summary(mk({1, 1, 1})).verdict == "flat");
}

TEST_CASE("figure bundles") {
  const auto fig1 = figure_bundle(1);
  CHECK(fig1.curves.size() == 5);
  for (const auto& c : fig1.curves) CHECK(c.chain.extraction_site == 5);
  const auto fig3 = figure_bundle(3);
  for (const auto& c : fig3.curves) CHECK(c.chain.extraction_site == 7);
  const auto fig7 = figure_bundle(7);
  CHECK(fig7.curves.size() == 2);
  CHECK(std::holds_alternative<NmrRate>(fig7.curves[0].model));
  CHECK_THROWS_AS(figure_bundle(9), std::invalid_argument);
  // every bundled curve carries a valid configuration
  for (int n = 1; n <= 7; ++n)
    for (const auto& c : figure_bundle(n).curves) CHECK_NOTHROW(c.validate());
}

TEST_CASE("NMR rate sampling CSV") {
  const std::string csv = sample_nmr_rates({0.3, 0.52}, 1.0, 0.0, 2.0, 11);
  CHECK(csv.rfind("t,gamma_theta_0.3,gamma_theta_0.52\n", 0) == 0);
  int lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 12);
}

}  // TEST_SUITE
