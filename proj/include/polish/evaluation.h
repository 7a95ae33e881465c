//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_EVALUATION_H_
#define POLISH_EVALUATION_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polish/config.h"
#include "polish/molgraph.h"

namespace polish {

// Closed interval; hi may be +infinity. text keeps the config spelling.
struct Range {
  double lo = 0;
  double hi = 0;
  std::string text;

  bool contains(double v) const { return v >= lo && v <= hi; }
};

// "[lo, hi]", "[lo, hi)" or "[lo, +inf)".
Range parse_range(const std::string &text);

enum class MetricMode {
  kSuccessRate,
  kMeanImprovement,
};

struct MetricSpec {
  std::string name;  // M1..M5
  std::string dataset;  // qed, drd2, logp4, logp6
  MetricMode mode = MetricMode::kSuccessRate;
  Range similarity;  // success-rate mode
  Range property;  // success-rate mode
  double threshold = 0;  // mean-improvement mode
  std::string threshold_text;
};

// Built-in metric definitions, identical to data/metrics.conf.
const std::string &default_metric_config_text();
Config default_metric_config();

// Keys metric.<name>.<dataset>.similarity / .property for M1..M3 and
// metric.<name>.threshold for M4 and M5.
MetricSpec metric_spec(const Config &config, const std::string &name,
                       const std::string &dataset);

// Property values for molecules, looked up by canonical SMILES.
class PropertyOracle {
public:
  // "SMILES<TAB>value" lines; SMILES are canonicalized on load.
  static PropertyOracle from_table(std::istream &is);
  static PropertyOracle from_table(const std::filesystem::path &path);
  // Runs `command 'SMILES'` and reads one number from its output.
  static PropertyOracle from_command(std::string command);
  // Heavy-atom count; for tests.
  static PropertyOracle heavy_atoms();

  // Throws MissingProperty.
  double value(const MolGraph &g) const;

private:
  enum class Kind { kTable, kCommand, kHeavyAtoms };
  Kind kind_ = Kind::kTable;
  std::map<std::string, double> table_;
  std::string command_;
  mutable std::map<std::string, double> cache_;
};

// One generated molecule as scored for evaluation.
struct Outcome {
  bool ok = false;  // generation succeeded
  double similarity = 0;  // tanimoto(X, Y')
  double property_src = 0;
  double property_out = 0;
};

struct MetricReport {
  MetricSpec spec;
  int total = 0;
  int failed = 0;
  int qualified = 0;  // successes, or pairs above the similarity threshold
  double success_rate = 0;  // percent of all outputs
  double mean_improvement = 0;  // over qualified pairs; 0 when none
};

MetricReport summarize(std::span<const Outcome> outcomes, const MetricSpec &spec);

struct GeneratedRecord {
  std::string src;
  std::string generated;
  std::string status;  // "ok" or a failure label
};

// "src<TAB>generated<TAB>status" lines.
std::vector<GeneratedRecord> read_generated(std::istream &is);
void write_generated(std::ostream &os, const GeneratedRecord &r);

// Fingerprint similarity and properties of each record. Property lookups are
// made only where the metric needs them.
std::vector<Outcome> score_generated(std::span<const GeneratedRecord> records,
                                     const MetricSpec &spec,
                                     const PropertyOracle &oracle);

void write_report(std::ostream &os, const MetricReport &r);

}  // namespace polish

#endif  // POLISH_EVALUATION_H_
