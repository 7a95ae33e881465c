//
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "polish/config.h"
#include "polish/dataset.h"
#include "polish/error.h"
#include "polish/evaluation.h"
#include "polish/smiles.h"

namespace polish {

TEST(Config, ParseAndOverride) {
  Config c = Config::parse("# comment\n a = 1 \nb=[0.3, 1.0]  # trailing\n\na = 2\n");
  EXPECT_EQ(c.get("a"), "2");
  EXPECT_EQ(c.get("b"), "[0.3, 1.0]");
  EXPECT_FALSE(c.get("c"));
  EXPECT_EQ(c.get_long("a", 0), 2);
  EXPECT_DOUBLE_EQ(c.get_double("missing", 0.5), 0.5);
  EXPECT_THROW(c.get_long("b", 0), Error);
  EXPECT_THROW(Config::parse("novalue\n"), Error);

  Config d = Config::parse("a = 3\nz = x\n");
  c.merge(d);
  EXPECT_EQ(c.get("a"), "3");
  std::ostringstream os;
  c.write(os);
  EXPECT_EQ(os.str(), "a = 3\nb = [0.3, 1.0]\nz = x\n");
  EXPECT_THROW(Config::load("/nonexistent/polish.conf"), IoError);
}

TEST(Range, Parse) {
  const Range a = parse_range("[0.3, 1.0]");
  EXPECT_DOUBLE_EQ(a.lo, 0.3);
  EXPECT_DOUBLE_EQ(a.hi, 1.0);
  EXPECT_TRUE(a.contains(0.3));
  EXPECT_TRUE(a.contains(1.0));
  EXPECT_FALSE(a.contains(0.2999));
  const Range b = parse_range("[0.8, +inf)");
  EXPECT_TRUE(std::isinf(b.hi));
  EXPECT_TRUE(b.contains(1e9));
  EXPECT_EQ(b.text, "[0.8, +inf)");
  EXPECT_THROW(parse_range("[1.0, 0.3]"), Error);
  EXPECT_THROW(parse_range("0.3, 1.0"), Error);
  EXPECT_THROW(parse_range("[0.3, 1.0)"), Error);
}

TEST(MetricSpec, BundledConfigMatchesBuiltIn) {
  std::ifstream is(POLISH_DATA_DIR "/metrics.conf");
  ASSERT_TRUE(is);
  std::stringstream text;
  text << is.rdbuf();
  EXPECT_EQ(text.str(), default_metric_config_text());
}

TEST(MetricSpec, DefinitionsVerbatim) {
  const Config c = default_metric_config();
  struct Row {
    const char *metric, *dataset, *sim, *prop;
  };
  const Row rows[] = {
    { "M1", "qed", "[0.3, 1.0]", "[0.6, 1.0]" },
    { "M1", "drd2", "[0.3, 1.0]", "[0.6, 1.0]" },
    { "M1", "logp4", "[0.4, 1.0]", "[0.8, +inf)" },
    { "M1", "logp6", "[0.4, 1.0]", "[0.8, +inf)" },
    { "M2", "qed", "[0.4, 1.0]", "[0.8, 1.0]" },
    { "M2", "drd2", "[0.4, 1.0]", "[0.8, 1.0]" },
    { "M2", "logp4", "[0.4, 1.0]", "[1.2, +inf)" },
    { "M3", "qed", "[0.4, 1.0]", "[0.9, 1.0]" },
    { "M3", "drd2", "[0.4, 1.0]", "[0.5, 1.0]" },
    { "M3", "logp6", "[0.4, 1.0]", "[0.6, +inf)" },
  };
  for (const Row &r: rows) {
    const MetricSpec s = metric_spec(c, r.metric, r.dataset);
    EXPECT_EQ(s.mode, MetricMode::kSuccessRate);
    EXPECT_EQ(s.similarity.text, r.sim);
    EXPECT_EQ(s.property.text, r.prop);
  }
  const MetricSpec m4 = metric_spec(c, "M4", "logp4");
  EXPECT_EQ(m4.mode, MetricMode::kMeanImprovement);
  EXPECT_DOUBLE_EQ(m4.threshold, 0.3);
  EXPECT_DOUBLE_EQ(metric_spec(c, "M5", "qed").threshold, 0.4);
  EXPECT_THROW(metric_spec(c, "M9", "qed"), Error);

  Config over = c;
  over.merge(Config::parse("metric.M1.qed.property = [0.7, 1.0]\n"));
  EXPECT_EQ(metric_spec(over, "M1", "qed").property.text, "[0.7, 1.0]");
}

TEST(Summarize, SuccessRateByHand) {
  const MetricSpec spec = metric_spec(default_metric_config(), "M1", "qed");
  std::vector<Outcome> out;
  for (double sim: { 0.5, 0.2, 0.35, 0.45 })
    out.push_back({ true, sim, 0, 0.7 });
  MetricReport r = summarize(out, spec);
  EXPECT_EQ(r.qualified, 3);
  EXPECT_DOUBLE_EQ(r.success_rate, 75.0);

  // Property out of range, and a failed generation, are not successes.
  out[0].property_out = 0.59;
  out.push_back({ false, 1.0, 0, 0.9 });
  r = summarize(out, spec);
  EXPECT_EQ(r.qualified, 2);
  EXPECT_EQ(r.failed, 1);
  EXPECT_DOUBLE_EQ(r.success_rate, 40.0);
  EXPECT_DOUBLE_EQ(summarize({}, spec).success_rate, 0.0);
}

TEST(Summarize, MeanImprovementByHand) {
  const MetricSpec spec = metric_spec(default_metric_config(), "M4", "logp4");
  const std::vector<Outcome> out {
    { true, 0.5, 1.0, 1.1 },
    { true, 0.3, 2.0, 2.3 },
    { true, 0.29, 0.0, 9.0 },
    { false, 0.9, 0.0, 9.0 },
  };
  const MetricReport r = summarize(out, spec);
  EXPECT_EQ(r.qualified, 2);
  EXPECT_NEAR(r.mean_improvement, 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(summarize({}, spec).mean_improvement, 0.0);
}

TEST(PropertyOracle, TableCommandAndToy) {
  std::istringstream table("OCC\t0.5\nc1ccccc1 1.25\n");
  const PropertyOracle t = PropertyOracle::from_table(table);
  EXPECT_DOUBLE_EQ(t.value(parse_smiles("CCO")), 0.5);
  EXPECT_DOUBLE_EQ(t.value(parse_smiles("c1ccccc1")), 1.25);
  EXPECT_THROW(t.value(parse_smiles("CCN")), MissingProperty);
  std::istringstream bad("CCO\n");
  EXPECT_THROW(PropertyOracle::from_table(bad), Error);

  EXPECT_DOUBLE_EQ(PropertyOracle::heavy_atoms().value(parse_smiles("CCO")), 3);
  const PropertyOracle cmd = PropertyOracle::from_command("echo 2.5 #");
  EXPECT_DOUBLE_EQ(cmd.value(parse_smiles("CCO")), 2.5);
  EXPECT_THROW(PropertyOracle::from_command("false").value(parse_smiles("C")),
               MissingProperty);
}

TEST(Generated, RoundTripAndScoring) {
  std::ostringstream os;
  write_generated(os, { "CCO", "CCN", "ok" });
  write_generated(os, { "CCO", "", "failed" });
  std::istringstream is(os.str());
  const std::vector<GeneratedRecord> recs = read_generated(is);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].generated, "");
  EXPECT_EQ(recs[1].status, "failed");
  std::istringstream bad("CCO\tCCN\n");
  EXPECT_THROW(read_generated(bad), Error);

  const MetricSpec m5 = metric_spec(default_metric_config(), "M5", "qed");
  const std::vector<GeneratedRecord> same { { "CCO", "OCC", "ok" } };
  const std::vector<Outcome> o =
      score_generated(same, m5, PropertyOracle::heavy_atoms());
  EXPECT_DOUBLE_EQ(o[0].similarity, 1.0);
  EXPECT_DOUBLE_EQ(summarize(o, m5).mean_improvement, 0.0);

  std::ostringstream report;
  write_report(report, summarize(o, m5));
  EXPECT_NE(report.str().find("similarity_threshold\t0.4\n"), std::string::npos);
}

TEST(Ingest, CountsAndDiagnostics) {
  std::istringstream empty("");
  EXPECT_TRUE(ingest_pairs(empty).pairs.empty());

  std::istringstream is("CCO\tCCN\nC1CC\tCC\n\nCC CN 1.5 2.5\nCC\tCN\tx\n");
  const IngestResult r = ingest_pairs(is);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].line, 1);
  EXPECT_EQ(r.pairs[1].properties, (std::vector<double> { 1.5, 2.5 }));
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].line, 2);
  EXPECT_EQ(r.errors[1].line, 5);
  EXPECT_EQ(r.blank_lines, 1);
  EXPECT_THROW(ingest_pairs(std::filesystem::path("/nonexistent.tsv")), IoError);
}

}  // namespace polish
