//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_DATASET_H_
#define POLISH_DATASET_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polish/molgraph.h"

namespace polish {

struct PairRecord {
  int line = 0;  // 1-based
  std::string src;
  std::string tgt;
  MolGraph x;
  MolGraph y;
  // Optional trailing columns: source then target property value.
  std::vector<double> properties;
};

struct LineError {
  int line;
  std::string message;
};

struct IngestResult {
  std::vector<PairRecord> pairs;
  std::vector<LineError> errors;
  int blank_lines = 0;
};

// Lines "src<TAB>tgt[<TAB>prop_src<TAB>prop_tgt]"; any whitespace separates
// columns. Bad lines are collected in errors, blank lines are skipped.
IngestResult ingest_pairs(std::istream &is);
// Throws IoError when the file cannot be opened.
IngestResult ingest_pairs(const std::filesystem::path &path);

void write_pairs(std::ostream &os, const std::vector<PairRecord> &pairs);

}  // namespace polish

#endif  // POLISH_DATASET_H_
