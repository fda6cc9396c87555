// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace xlmimo;
using namespace xlmimo::harness;

namespace {

nlohmann::json tiny_scenario() {
  return nlohmann::json::parse(R"({
    "base": { "M": 2, "N": 2, "L_p": 2, "K": 6, "T": 8, "I_max": 3, "lasso_tol": 1e-6, "seed": 9 },
    "sweep": { "snr_db": [10, 20] },
    "methods": ["proposed", "idealized", "ls", "omp"],
    "R": 2,
    "out_dir": "unused"
  })");
}

}  // namespace

TEST(Scenario, ParsesAndValidates) {
  auto s = scenario_from_json(tiny_scenario());
  EXPECT_EQ(s.axis, SweepAxis::kSnr);
  EXPECT_EQ(s.points(), 2u);
  EXPECT_EQ(s.point_config(1).snr_db, 20.0);
  EXPECT_EQ(s.point_label(0), "10.0");
  EXPECT_EQ(s.atoms_for(s.base), 8);

  auto bad = tiny_scenario();
  bad["R"] = 0;
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
  bad = tiny_scenario();
  bad["methods"] = nlohmann::json::array();
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
  bad = tiny_scenario();
  bad["methods"] = {"magic"};
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
  bad = tiny_scenario();
  bad["sweep"] = {{"snr_db", nlohmann::json::array()}};
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
  bad = tiny_scenario();
  bad["sweep"] = {{"T", {8}}, {"snr_db", {1}}};
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
  bad = tiny_scenario();
  bad["sweep"] = {{"MN", {{2, 2}, {0, 3}}}};
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
}

TEST(Scenario, OtherAxesAndRoundTrip) {
  auto j = tiny_scenario();
  j["sweep"] = {{"MN", {{2, 2}, {3, 2}}}};
  auto s = scenario_from_json(j);
  EXPECT_EQ(s.point_config(1).M, 3);
  EXPECT_EQ(s.point_label(1), "3x2");
  auto again = scenario_from_json(scenario_to_json(s));
  EXPECT_EQ(scenario_to_json(again).dump(), scenario_to_json(s).dump());
  j["sweep"] = {{"T", {4, 8}}};
  EXPECT_EQ(scenario_from_json(j).point_config(0).T, 4);
}

TEST(Runner, StreamsAreIndependentAndRepeatable) {
  auto a = stream_rng(1, 2, 3), b = stream_rng(1, 2, 3), c = stream_rng(1, 2, 4);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(Runner, ParallelForCoversEveryIndexAndRethrows) {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
               std::runtime_error);
}

TEST(Runner, SweepCompleteAndJobIndependent) {
  auto s = scenario_from_json(tiny_scenario());
  auto r1 = run_sweep(s, 5, 1);
  auto r2 = run_sweep(s, 5, 3);
  EXPECT_EQ(r1.runs.size(), 2u * 2u * 4u);
  EXPECT_EQ(r1.summary.size(), 2u * 4u);
  std::ostringstream a, b, c, d;
  write_runs_csv(a, s, r1.runs);
  write_runs_csv(b, s, r2.runs);
  write_summary_csv(c, s, r1.summary);
  write_summary_csv(d, s, r2.summary);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(c.str(), d.str());
  EXPECT_EQ(c.str().rfind("snr_db,method,runs,failed,nmse_mean,nmse_se,nmse_db", 0), 0u);
  auto r3 = run_sweep(s, 6, 1);
  std::ostringstream e;
  write_runs_csv(e, s, r3.runs);
  EXPECT_NE(a.str(), e.str());
}

TEST(Runner, SingleRealizationHasNanStandardError) {
  auto j = tiny_scenario();
  j["R"] = 1;
  j["methods"] = {"ls"};
  auto res = run_sweep(scenario_from_json(j), 1, 1);
  ASSERT_EQ(res.summary.size(), 2u);
  EXPECT_TRUE(std::isnan(res.summary[0].nmse_se));
  EXPECT_TRUE(std::isfinite(res.summary[0].nmse));
}

TEST(Runner, FailuresBecomeNanRows) {
  auto s = scenario_from_json(tiny_scenario());
  auto rng = stream_rng(1, 0, 0);
  Trial t = make_trial(s.point_config(0), rng);
  t.cfg.M = 3;  // no longer matches the training set and channel
  auto rec = run_method("ls", t, 4, rng);
  EXPECT_TRUE(std::isnan(rec.nmse));
  EXPECT_EQ(rec.status.rfind("error:", 0), 0u);

  std::vector<RunRecord> runs{rec};
  runs[0].method = "ls";
  auto j = tiny_scenario();
  j["methods"] = {"ls"};
  auto agg = aggregate(scenario_from_json(j), runs);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].n_failed, 1);
  EXPECT_TRUE(std::isnan(agg[0].nmse));
  EXPECT_EQ(agg[1].n_ok + agg[1].n_failed, 0);
}

TEST(Runner, DbOfMeanNotMeanOfDb) {
  auto j = tiny_scenario();
  j["methods"] = {"ls"};
  auto s = scenario_from_json(j);
  std::vector<RunRecord> runs(2);
  runs[0].nmse = 1.0;
  runs[1].nmse = 0.01;
  for (auto& r : runs) r.method = "ls";
  auto agg = aggregate(s, runs);
  EXPECT_NEAR(to_db(agg[0].nmse), 10.0 * std::log10(0.505), 1e-12);
}

TEST(Convergence, IdealizedConstantAndRepeatable) {
  auto j = tiny_scenario();
  j["sweep"] = {{"snr_db", {30}}};
  auto s = scenario_from_json(j);
  auto a = convergence_trace(s, 3, 1);
  auto b = convergence_trace(s, 3, 2);
  ASSERT_EQ(a.rows.size(), std::size_t(s.base.I_max + 1));
  for (const auto& r : a.rows) EXPECT_EQ(r.idealized, a.rows.front().idealized);
  std::ostringstream x, y;
  write_convergence_csv(x, s, a.rows);
  write_convergence_csv(y, s, b.rows);
  EXPECT_EQ(x.str(), y.str());
  EXPECT_TRUE(std::isnan(a.rows.front().residual));
  EXPECT_TRUE(std::isfinite(a.rows.back().residual));
}

TEST(DelayProfile, CountsAndApertureTable) {
  auto j = tiny_scenario();
  j["base"]["M"] = 8;
  j["base"]["N"] = 8;
  j["base"]["L_p"] = 3;
  j["base"]["K"] = 8;
  j["base"]["xi"] = {2, 3, 3};
  auto s = scenario_from_json(j);
  auto rep = delay_profile_report(s, 4);
  ASSERT_EQ(rep.profile.size(), 2u * 8u);
  for (int pair = 0; pair < 2; ++pair) {
    int ones = 0;
    for (int k = 0; k < 8; ++k) ones += rep.profile[std::size_t(pair * 8 + k)].e;
    EXPECT_GE(ones, 1);
    EXPECT_LE(ones, s.base.L_p + 1);
  }
  ASSERT_GE(rep.aperture.size(), 2u);
  for (std::size_t i = 1; i < rep.aperture.size(); ++i) {
    EXPECT_LE(rep.aperture[i].max_delay_s, rep.aperture[i - 1].max_delay_s);
    EXPECT_LT(rep.aperture[i].bound_s, rep.aperture[i - 1].bound_s);
  }
}

TEST(DelayProfile, SinglePathSingleUnity) {
  auto j = tiny_scenario();
  j["base"]["L_p"] = 1;
  j["base"]["xi"] = {2};
  auto rep = delay_profile_report(scenario_from_json(j), 1);
  int ones = 0;
  for (const auto& r : rep.profile) ones += r.e;
  EXPECT_EQ(ones, 2);  // one per reported pair
}

TEST(Output, CsvQuotingAndNumbers) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
  EXPECT_EQ(fmt_num(std::nan("")), "nan");
  EXPECT_EQ(fmt_num(0.5), "0.5");
}
