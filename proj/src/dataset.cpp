//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/dataset.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "polish/error.h"
#include "polish/smiles.h"

namespace polish {

IngestResult ingest_pairs(std::istream &is) {
  IngestResult out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    std::istringstream fields(line);
    std::vector<std::string> cols;
    for (std::string f; fields >> f;)
      cols.push_back(f);
    if (cols.empty()) {
      ++out.blank_lines;
      continue;
    }
    if (cols.size() != 2 && cols.size() != 4) {
      out.errors.push_back({ number, "expected 2 or 4 columns, got "
                                         + std::to_string(cols.size()) });
      continue;
    }
    PairRecord rec;
    rec.line = number;
    rec.src = cols[0];
    rec.tgt = cols[1];
    try {
      rec.x = parse_smiles(rec.src);
      rec.y = parse_smiles(rec.tgt);
      for (std::size_t k = 2; k < cols.size(); ++k) {
        std::size_t used = 0;
        const double v = std::stod(cols[k], &used);
        if (used != cols[k].size() || !std::isfinite(v))
          throw Error("bad property value " + cols[k]);
        rec.properties.push_back(v);
      }
    } catch (const std::invalid_argument &) {
      out.errors.push_back({ number, "bad property value" });
      continue;
    } catch (const std::out_of_range &) {
      out.errors.push_back({ number, "property value out of range" });
      continue;
    } catch (const Error &e) {
      out.errors.push_back({ number, e.what() });
      continue;
    }
    out.pairs.push_back(std::move(rec));
  }
  return out;
}

IngestResult ingest_pairs(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open pair file " + path.string());
  return ingest_pairs(is);
}

void write_pairs(std::ostream &os, const std::vector<PairRecord> &pairs) {
  for (const PairRecord &p: pairs) {
    os << p.src << '\t' << p.tgt;
    for (double v: p.properties)
      os << '\t' << v;
    os << '\n';
  }
}

}  // namespace polish
