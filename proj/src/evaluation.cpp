//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/evaluation.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "polish/error.h"
#include "polish/fingerprint.h"
#include "polish/smiles.h"

namespace polish {

namespace {
  double parse_bound(const std::string &s, const std::string &range) {
    if (s == "+inf" || s == "inf" || s == "+∞")
      return std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size())
        return v;
    } catch (const std::exception &) {
    }
    throw Error("bad range " + range);
  }

  std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::string shell_quote(const std::string &s) {
    std::string out = "'";
    for (char c: s) {
      if (c == '\'')
        out += "'\\''";
      else
        out += c;
    }
    return out + "'";
  }
}  // namespace

Range parse_range(const std::string &text) {
  const std::string t = trim(text);
  const auto comma = t.find(',');
  if (t.size() < 5 || t.front() != '[' || (t.back() != ']' && t.back() != ')')
      || comma == std::string::npos)
    throw Error("bad range " + text);
  Range r;
  r.lo = parse_bound(trim(t.substr(1, comma - 1)), text);
  r.hi = parse_bound(trim(t.substr(comma + 1, t.size() - comma - 2)), text);
  if (t.back() == ')' && !std::isinf(r.hi))
    throw Error("half-open range needs an infinite bound: " + text);
  if (!(r.lo <= r.hi))
    throw Error("range lower bound above upper bound: " + text);
  r.text = t;
  return r;
}

const std::string &default_metric_config_text() {
  static const std::string text = R"CONF(# Property-targeting metrics: similarity range and property range per dataset.
metric.M1.qed.similarity = [0.3, 1.0]
metric.M1.qed.property = [0.6, 1.0]
metric.M1.drd2.similarity = [0.3, 1.0]
metric.M1.drd2.property = [0.6, 1.0]
metric.M1.logp4.similarity = [0.4, 1.0]
metric.M1.logp4.property = [0.8, +inf)
metric.M1.logp6.similarity = [0.4, 1.0]
metric.M1.logp6.property = [0.8, +inf)

metric.M2.qed.similarity = [0.4, 1.0]
metric.M2.qed.property = [0.8, 1.0]
metric.M2.drd2.similarity = [0.4, 1.0]
metric.M2.drd2.property = [0.8, 1.0]
metric.M2.logp4.similarity = [0.4, 1.0]
metric.M2.logp4.property = [1.2, +inf)
metric.M2.logp6.similarity = [0.4, 1.0]
metric.M2.logp6.property = [1.2, +inf)

metric.M3.qed.similarity = [0.4, 1.0]
metric.M3.qed.property = [0.9, 1.0]
metric.M3.drd2.similarity = [0.4, 1.0]
metric.M3.drd2.property = [0.5, 1.0]
metric.M3.logp4.similarity = [0.4, 1.0]
metric.M3.logp4.property = [0.6, +inf)
metric.M3.logp6.similarity = [0.4, 1.0]
metric.M3.logp6.property = [0.6, +inf)

# Property optimization: mean improvement above a similarity threshold.
metric.M4.threshold = 0.3
metric.M5.threshold = 0.4
)CONF";
  return text;
}

Config default_metric_config() {
  return Config::parse(default_metric_config_text());
}

MetricSpec metric_spec(const Config &config, const std::string &name,
                       const std::string &dataset) {
  MetricSpec spec;
  spec.name = name;
  spec.dataset = dataset;
  const std::string base = "metric." + name;
  if (const auto t = config.get(base + ".threshold")) {
    spec.mode = MetricMode::kMeanImprovement;
    spec.threshold = config.get_double(base + ".threshold", 0);
    spec.threshold_text = *t;
    return spec;
  }
  const auto sim = config.get(base + "." + dataset + ".similarity");
  const auto prop = config.get(base + "." + dataset + ".property");
  if (!sim || !prop)
    throw Error("no metric " + name + " for dataset " + dataset);
  spec.mode = MetricMode::kSuccessRate;
  spec.similarity = parse_range(*sim);
  spec.property = parse_range(*prop);
  return spec;
}

PropertyOracle PropertyOracle::from_table(std::istream &is) {
  PropertyOracle o;
  o.kind_ = Kind::kTable;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    std::istringstream fields(line);
    std::string smi, value;
    if (!(fields >> smi))
      continue;
    if (!(fields >> value))
      throw Error("property table line " + std::to_string(number)
                  + ": missing value");
    double v = 0;
    try {
      v = std::stod(value);
    } catch (const std::exception &) {
      throw Error("property table line " + std::to_string(number)
                  + ": bad value " + value);
    }
    if (!std::isfinite(v))
      throw Error("property table line " + std::to_string(number)
                  + ": non-finite value");
    std::string key = smi;
    try {
      key = write_smiles(parse_smiles(smi));
    } catch (const Error &) {
    }
    o.table_[key] = v;
  }
  return o;
}

PropertyOracle PropertyOracle::from_table(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open property table " + path.string());
  return from_table(is);
}

PropertyOracle PropertyOracle::from_command(std::string command) {
  PropertyOracle o;
  o.kind_ = Kind::kCommand;
  o.command_ = std::move(command);
  return o;
}

PropertyOracle PropertyOracle::heavy_atoms() {
  PropertyOracle o;
  o.kind_ = Kind::kHeavyAtoms;
  return o;
}

double PropertyOracle::value(const MolGraph &g) const {
  if (kind_ == Kind::kHeavyAtoms)
    return g.num_atoms();
  const std::string key = write_smiles(g);
  if (kind_ == Kind::kTable) {
    const auto it = table_.find(key);
    if (it == table_.end())
      throw MissingProperty("no property value for " + key);
    return it->second;
  }
  if (const auto it = cache_.find(key); it != cache_.end())
    return it->second;
  const std::string cmd = command_ + " " + shell_quote(key);
  std::unique_ptr<FILE, int (*)(FILE *)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe)
    throw MissingProperty("cannot run scorer for " + key);
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe.get()) != nullptr)
    out += buf;
  const int status = pclose(pipe.release());
  double v = 0;
  try {
    v = std::stod(out);
  } catch (const std::exception &) {
    throw MissingProperty("scorer gave no number for " + key);
  }
  if (status != 0 || !std::isfinite(v))
    throw MissingProperty("scorer failed for " + key);
  cache_[key] = v;
  return v;
}

MetricReport summarize(std::span<const Outcome> outcomes,
                       const MetricSpec &spec) {
  MetricReport r;
  r.spec = spec;
  r.total = static_cast<int>(outcomes.size());
  double gain = 0;
  for (const Outcome &o: outcomes) {
    if (!o.ok) {
      ++r.failed;
      continue;
    }
    if (spec.mode == MetricMode::kSuccessRate) {
      if (spec.similarity.contains(o.similarity)
          && spec.property.contains(o.property_out))
        ++r.qualified;
    } else if (o.similarity >= spec.threshold) {
      ++r.qualified;
      gain += o.property_out - o.property_src;
    }
  }
  if (spec.mode == MetricMode::kSuccessRate) {
    r.success_rate = r.total == 0 ? 0 : 100.0 * r.qualified / r.total;
  } else {
    r.mean_improvement = r.qualified == 0 ? 0 : gain / r.qualified;
  }
  return r;
}

std::vector<GeneratedRecord> read_generated(std::istream &is) {
  std::vector<GeneratedRecord> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos)
        break;
      start = tab + 1;
    }
    if (cols.size() != 3)
      throw Error("generated file line " + std::to_string(number)
                  + ": expected src, generated, status");
    out.push_back({ cols[0], cols[1], cols[2] });
  }
  return out;
}

void write_generated(std::ostream &os, const GeneratedRecord &r) {
  os << r.src << '\t' << r.generated << '\t' << r.status << '\n';
}

std::vector<Outcome> score_generated(std::span<const GeneratedRecord> records,
                                     const MetricSpec &spec,
                                     const PropertyOracle &oracle) {
  std::vector<Outcome> out;
  for (const GeneratedRecord &r: records) {
    Outcome o;
    if (r.status == "ok") {
      const MolGraph x = parse_smiles(r.src);
      MolGraph y;
      try {
        y = parse_smiles(r.generated);
        o.ok = true;
      } catch (const Error &) {
      }
      if (o.ok) {
        o.similarity = tanimoto(morgan_fingerprint(x), morgan_fingerprint(y));
        if (spec.mode == MetricMode::kSuccessRate) {
          if (spec.similarity.contains(o.similarity))
            o.property_out = oracle.value(y);
        } else if (o.similarity >= spec.threshold) {
          o.property_src = oracle.value(x);
          o.property_out = oracle.value(y);
        }
      }
    }
    out.push_back(o);
  }
  return out;
}

void write_report(std::ostream &os, const MetricReport &r) {
  const MetricSpec &s = r.spec;
  os << "metric\t" << s.name << '\n' << "dataset\t" << s.dataset << '\n';
  char buf[64];
  if (s.mode == MetricMode::kSuccessRate) {
    os << "mode\tsuccess-rate\n"
       << "similarity_range\t" << s.similarity.text << '\n'
       << "property_range\t" << s.property.text << '\n';
  } else {
    os << "mode\tmean-improvement\n"
       << "similarity_threshold\t" << s.threshold_text << '\n';
  }
  os << "outputs\t" << r.total << '\n' << "failed\t" << r.failed << '\n'
     << "qualified\t" << r.qualified << '\n';
  if (s.mode == MetricMode::kSuccessRate) {
    std::snprintf(buf, sizeof buf, "%.6f", r.success_rate);
    os << "success_rate_percent\t" << buf << '\n';
  } else {
    std::snprintf(buf, sizeof buf, "%.6f", r.mean_improvement);
    os << "mean_improvement\t" << buf << '\n';
  }
}

}  // namespace polish
