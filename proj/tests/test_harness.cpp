#include <gtest/gtest.h>

#include <sstream>

#include "slm/harness.hpp"

using namespace slm;

namespace {

struct ReferenceRow {
  const char* algorithm;
  std::size_t np;
  double time;
  const char* lb;
  const char* speedup;
  const char* efficiency;
};

// Reference timings; the derived columns follow from the time column alone.
const std::vector<ReferenceRow> kTable{
    {"SPA", 1, 40.485, "40.485", "1.000", "1.000"},   {"SPA", 2, 28.245, "20.242", "1.433", "0.716"},
    {"SPA", 3, 28.840, "13.495", "1.403", "0.467"},   {"SPA", 4, 15.581, "10.121", "2.598", "0.649"},
    {"SPA", 5, 15.781, "8.097", "2.565", "0.513"},    {"SPA", 6, 15.987, "6.747", "2.532", "0.422"},
    {"SPA", 7, 16.210, "5.783", "2.497", "0.356"},    {"SPA", 8, 8.562, "5.060", "4.728", "0.591"},
    {"SPA", 9, 8.569, "4.498", "4.724", "0.524"},     {"SPA", 10, 8.572, "4.048", "4.722", "0.472"},
    {"SPGA", 1, 33.215, "33.215", "1.000", "1.000"},  {"SPGA", 2, 27.251, "16.607", "1.218", "0.609"},
    {"SPGA", 3, 17.235, "11.071", "1.927", "0.642"},  {"SPGA", 4, 15.369, "8.303", "2.161", "0.540"},
    // SPGA NP=6 LB is 33.215 / 6 = 5.5358, truncated.
    {"SPGA", 5, 13.569, "6.643", "2.447", "0.489"},   {"SPGA", 6, 11.012, "5.535", "3.016", "0.502"},
    {"SPGA", 7, 11.023, "4.745", "3.013", "0.430"},   {"SPGA", 8, 6.321, "4.151", "5.254", "0.656"},
    {"SPGA", 9, 6.451, "3.690", "5.148", "0.572"},    {"SPGA", 10, 6.569, "3.321", "5.056", "0.505"},
    {"SCBPGA", 1, 25.215, "25.215", "1.000", "1.000"}, {"SCBPGA", 2, 17.253, "12.607", "1.461", "0.730"},
    {"SCBPGA", 3, 12.321, "8.405", "2.046", "0.682"}, {"SCBPGA", 4, 10.258, "6.303", "2.458", "0.614"},
    {"SCBPGA", 5, 10.123, "5.043", "2.490", "0.498"}, {"SCBPGA", 6, 9.362, "4.202", "2.693", "0.448"},
    {"SCBPGA", 7, 8.369, "3.602", "3.012", "0.430"},  {"SCBPGA", 8, 6.321, "3.151", "3.989", "0.498"},
    {"SCBPGA", 9, 6.123, "2.801", "4.118", "0.457"},  {"SCBPGA", 10, 6.123, "2.521", "4.118", "0.411"},
};

}  // namespace

TEST(Speedup, Fixture) {
  const auto r = derive_speedup("parallel", 2, 40.485, 28.245);
  EXPECT_EQ(format_truncated(r.speedup), "1.433");
  EXPECT_EQ(format_truncated(r.efficiency), "0.716");
  EXPECT_EQ(format_truncated(r.lb_time), "20.242");
  const auto one = derive_speedup("parallel", 1, 3.0, 3.0);
  EXPECT_EQ(one.speedup, 1.0);
  EXPECT_EQ(one.efficiency, 1.0);
  EXPECT_THROW(derive_speedup("x", 0, 1, 1), ConfigError);
  EXPECT_THROW(derive_speedup("x", 1, 0, 1), ConfigError);
}

TEST(Speedup, ReproducesReferenceTableDerivedColumns) {
  double t1 = 0.0;
  for (const auto& row : kTable) {
    if (row.np == 1) t1 = row.time;
    const auto r = derive_speedup(row.algorithm, row.np, t1, row.time);
    EXPECT_EQ(format_truncated(r.lb_time), row.lb) << row.algorithm << " " << row.np;
    EXPECT_EQ(format_truncated(r.speedup), row.speedup) << row.algorithm << " " << row.np;
    EXPECT_EQ(format_truncated(r.efficiency), row.efficiency) << row.algorithm << " " << row.np;
  }
}

TEST(Speedup, CsvLayout) {
  std::ostringstream os;
  write_speedup_csv(os, {derive_speedup("parallel", 1, 40.485, 40.485), derive_speedup("parallel", 2, 40.485, 28.245)});
  EXPECT_EQ(os.str(),
            "Algorithm,NP,Time,LB Time,Speedup,Efficiency\n"
            "parallel,1,40.485,40.485,1.000,1.000\n"
            "parallel,2,28.245,20.242,1.433,0.716\n");
}

TEST(Format, Truncation) {
  EXPECT_EQ(format_truncated(1.4339), "1.433");
  EXPECT_EQ(format_truncated(2.0), "2.000");
  EXPECT_EQ(format_truncated(0.71699), "0.716");
  // Binary noise just below a 3-decimal boundary rounds up first.
  EXPECT_EQ(format_truncated(0.7169999999), "0.717");
  EXPECT_EQ(format_number(0.4375), "0.4375");
  EXPECT_EQ(format_point(std::vector<double>{3.3203125, -1}), "(3.3203125,-1)");
}

TEST(Parsing, DomainAndSweep) {
  const auto d = parse_domain("-1,1", 2);
  EXPECT_EQ(d, SearchDomain::cube(2, -1, 1));
  const auto e = parse_domain("0,1;-3,2.5", 2);
  EXPECT_EQ(e, SearchDomain({0, -3}, {1, 2.5}));
  EXPECT_THROW(parse_domain("0,1;0,1;0,1", 2), ConfigError);
  EXPECT_THROW(parse_domain("1,0", 2), ConfigError);
  EXPECT_THROW(parse_domain("a,b", 1), ConfigError);
  EXPECT_EQ(parse_sweep("1..4"), (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(parse_sweep("1,2,8"), (std::vector<std::size_t>{1, 2, 8}));
  EXPECT_THROW(parse_sweep("0..3"), ConfigError);
  EXPECT_THROW(parse_sweep("4..2"), ConfigError);
  EXPECT_THROW(parse_sweep("1.5"), ConfigError);
  EXPECT_EQ(parse_strategy("gradient"), LabelingStrategy::GradientFixedPoint);
  EXPECT_THROW(parse_sense("up"), ConfigError);
}

TEST(Compare, F1Rows) {
  ExperimentConfig cfg;
  cfg.engine.max_generations = 6;
  const auto rows = cmd_compare(cfg);
  ASSERT_EQ(rows.size(), 4U);
  EXPECT_EQ(rows[0].algorithm, "SLM");
  EXPECT_EQ(rows[0].iterations, 6U);
  EXPECT_LE(std::abs(rows[0].found[1] - 0.4), 0.0625);
  EXPECT_EQ(rows[1].algorithm, "RS");
  EXPECT_EQ(rows[2].algorithm.rfind("RSW", 0), 0U);
  EXPECT_EQ(rows[3].algorithm, "SA");
  for (const auto& r : rows) {
    ASSERT_TRUE(r.error.has_value());
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ((*r.error)[i], std::abs(r.found[i] - (*r.known)[i]));
  }
  std::ostringstream os;
  write_comparison_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "Algorithm,Iteration,Optimal point,Best Point,Error");

  std::ostringstream again;
  write_comparison_csv(again, cmd_compare(cfg));
  EXPECT_EQ(os.str(), again.str());

  cfg.rs_budget = 0;
  EXPECT_THROW(cmd_compare(cfg), ConfigError);
}

TEST(Compare, EasomError) {
  ExperimentConfig cfg;
  cfg.function = "easom";
  cfg.engine.max_generations = 11;
  const auto rows = cmd_compare(cfg);
  for (double e : *rows[0].error) EXPECT_LE(e, 0.2);
}

TEST(Run, JsonReport) {
  ExperimentConfig cfg;
  cfg.engine.max_generations = 3;
  const auto out = cmd_run(cfg);
  EXPECT_EQ(out.json["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(out.json["generations"].size(), 4U);
  std::vector<std::size_t> labels;
  for (const auto& v : out.json["generations"][0]["vertices"]) labels.push_back(v["label"]);
  std::sort(labels.begin(), labels.end());
  EXPECT_EQ(labels, (std::vector<std::size_t>{0, 1, 2, 2}));
  EXPECT_EQ(out.json["evaluations"], out.report.evaluations);
  EXPECT_EQ(out.json["algorithm"], "SLM");

  // Everything except wall time is reproducible.
  auto a = out.json;
  auto b = cmd_run(cfg).json;
  a.erase("wall_seconds");
  b.erase("wall_seconds");
  EXPECT_EQ(a.dump(), b.dump());

  std::ostringstream csv;
  write_trace_csv(csv, out.report);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "generation,h,point,mutated point,label,solution");

  cfg.function = "nope";
  EXPECT_THROW(cmd_run(cfg), ConfigError);
  cfg.function = "f1";
  cfg.domain = SearchDomain::cube(3, -1, 1);
  EXPECT_THROW(cmd_run(cfg), ConfigError);
}

TEST(Bench, RowsAndWarnings) {
  ExperimentConfig cfg;
  cfg.engine.max_generations = 2;
  cfg.trials = 1;
  cfg.sweep = {1, 2};
  cfg.hardware_cap = 1;
  std::ostringstream warn;
  const auto rows = cmd_bench(cfg, warn);
  ASSERT_EQ(rows.size(), 5U);
  EXPECT_EQ(rows[0].algorithm, "serial");
  EXPECT_EQ(rows[0].speedup, 1.0);
  EXPECT_NE(warn.str().find("NP=2"), std::string::npos);
  std::size_t par2 = 0;
  std::size_t clu2 = 0;
  for (const auto& r : rows) {
    if (r.np == 1) {
      EXPECT_EQ(r.efficiency, 1.0);
    }
    if (r.np == 2 && r.algorithm == "parallel") par2 = r.evaluations;
    if (r.np == 2 && r.algorithm == "clustered") clu2 = r.evaluations;
  }
  EXPECT_LT(clu2, par2);
  cfg.trials = 0;
  EXPECT_THROW(cmd_bench(cfg), ConfigError);
}
