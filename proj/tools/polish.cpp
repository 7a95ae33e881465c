//
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "polish/config.h"
#include "polish/dataset.h"
#include "polish/elements.h"
#include "polish/error.h"
#include "polish/evaluation.h"
#include "polish/fingerprint.h"
#include "polish/isomorphism.h"
#include "polish/juncttree.h"
#include "polish/smiles.h"
#include "polish/synth.h"
#include "polish/teacher.h"
#include "polish/training.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polish;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

// Output file or stdout when the path is empty or "-".
class Output {
public:
  explicit Output(const std::string &path) {
    if (path.empty() || path == "-")
      return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_)
      throw IoError("cannot write " + path);
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

IngestResult read_pairs(const std::string &path) {
  IngestResult in = ingest_pairs(fs::path(path));
  for (const LineError &e: in.errors)
    spdlog::warn("{}:{}: {}", path, e.line, e.message);
  return in;
}

// First whitespace-separated column of every non-blank line.
std::vector<std::string> read_first_column(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    std::string first;
    if (fields >> first)
      out.push_back(first);
  }
  return out;
}

Config load_config(const std::string &path) {
  return path.empty() ? Config() : Config::load(path);
}

json branch_list(const BranchSet &set, const std::vector<int> &indices) {
  json out = json::array();
  for (int b: indices)
    out.push_back(anchored_smiles(set.branches[b]));
  return out;
}

json annotation_json(const PairRecord &p, const PolishAnnotation &a) {
  std::vector<int> px;
  for (const BranchMatch &m: a.preserved)
    px.push_back(m.x);
  return {
    { "line", p.line },
    { "src", p.src },
    { "tgt", p.tgt },
    { "center", a.center },
    { "mapped_center", a.mapped_center },
    { "center_element", std::string(element_symbol(a.center_atom.element)) },
    { "preserved", branch_list(a.source_branches, px) },
    { "removed", branch_list(a.source_branches, a.removed) },
    { "added", branch_list(a.target_branches, a.added) },
    { "source_atoms", a.source_atoms },
    { "target_atoms", a.target_atoms },
    { "preserved_atoms", a.preserved_atoms() },
    { "removed_atoms", a.removed_atoms() },
    { "added_atoms", a.added_atoms() },
  };
}

struct Annotated {
  std::vector<const PairRecord *> records;
  std::vector<PolishAnnotation> annotations;
  int skipped = 0;
};

Annotated annotate_records(const std::vector<PairRecord> &pairs) {
  Annotated out;
  for (const PairRecord &p: pairs) {
    try {
      out.annotations.push_back(annotate_pair(p.x, p.y));
      out.records.push_back(&p);
    } catch (const NoCandidate &e) {
      spdlog::warn("line {}: {}", p.line, e.what());
      ++out.skipped;
    }
  }
  return out;
}

json stats_json(const CorpusStats &s, int identity_violations) {
  return {
    { "pairs", s.pairs.size() },
    { "mean_source_atoms", s.mean_source_atoms },
    { "mean_target_atoms", s.mean_target_atoms },
    { "mean_preserved_atoms", s.mean_preserved },
    { "mean_removed_atoms", s.mean_removed },
    { "mean_added_atoms", s.mean_added },
    { "identity_violations", identity_violations },
  };
}

// preserved + removed = |V_X| - 1 and preserved + added = |V_Y| - 1.
int identity_violations(const std::vector<PolishAnnotation> &anns) {
  int bad = 0;
  for (const PolishAnnotation &a: anns) {
    bad += a.preserved_atoms() + a.removed_atoms() != a.source_atoms - 1
           || a.preserved_atoms() + a.added_atoms() != a.target_atoms - 1;
  }
  return bad;
}

int cmd_ingest(const std::string &input, const std::string &output,
               std::optional<long> expect) {
  const IngestResult in = read_pairs(input);
  if (!output.empty()) {
    Output out(output);
    write_pairs(out.stream(), in.pairs);
  }
  std::cout << json {
    { "input", input },
    { "pairs", in.pairs.size() },
    { "errors", in.errors.size() },
    { "blank_lines", in.blank_lines },
  }.dump() << '\n';
  if (expect && static_cast<long>(in.pairs.size()) != *expect) {
    spdlog::error("expected {} pairs, read {}", *expect, in.pairs.size());
    return kExitFatal;
  }
  return in.errors.empty() ? kExitOk : kExitPartial;
}

int cmd_annotate(const std::string &input, const std::string &output,
                 bool audit) {
  const IngestResult in = read_pairs(input);
  const Annotated ann = annotate_records(in.pairs);
  Output out(output);
  int audit_failures = 0;
  for (std::size_t k = 0; k < ann.annotations.size(); ++k) {
    json j = annotation_json(*ann.records[k], ann.annotations[k]);
    if (audit) {
      const bool ok =
          graph_isomorphic(reconstruct(ann.annotations[k]), ann.records[k]->y);
      j["reconstruction_ok"] = ok;
      audit_failures += !ok;
    }
    out.stream() << j.dump() << '\n';
  }
  const CorpusStats stats = corpus_stats(ann.annotations);
  json summary = stats_json(stats, identity_violations(ann.annotations));
  summary["skipped_no_candidate"] = ann.skipped;
  summary["parse_errors"] = in.errors.size();
  if (audit)
    summary["reconstruction_failures"] = audit_failures;
  std::cerr << summary.dump() << '\n';
  if (audit_failures > 0)
    return kExitFatal;
  return ann.skipped + in.errors.size() > 0 ? kExitPartial : kExitOk;
}

int cmd_stats(const std::string &input) {
  const IngestResult in = read_pairs(input);
  const Annotated ann = annotate_records(in.pairs);
  json summary = stats_json(corpus_stats(ann.annotations),
                            identity_violations(ann.annotations));
  summary["skipped_no_candidate"] = ann.skipped;
  summary["parse_errors"] = in.errors.size();
  std::cout << summary.dump(2) << '\n';
  return ann.skipped + in.errors.size() > 0 ? kExitPartial : kExitOk;
}

int cmd_vocab(const std::string &input, const std::string &output,
              bool decoder) {
  const IngestResult in = read_pairs(input);
  ComponentVocabulary vocab;
  int skipped = static_cast<int>(in.errors.size());
  if (decoder) {
    std::vector<AnnotatedPair> pairs;
    for (const PairRecord &p: in.pairs) {
      if (auto a = annotate(p.x, p.y))
        pairs.push_back(std::move(*a));
      else
        ++skipped;
    }
    vocab = decoder_vocabulary(pairs);
  } else {
    std::vector<MolGraph> mols;
    for (const PairRecord &p: in.pairs) {
      mols.push_back(p.x);
      mols.push_back(p.y);
    }
    vocab = build_vocabulary(mols);
  }
  Output out(output);
  vocab.write(out.stream());
  spdlog::info("{} vocabulary entries", vocab.size());
  return skipped > 0 ? kExitPartial : kExitOk;
}

struct TrainFlags {
  std::string input, output, config, resume;
  std::optional<int> epochs, hidden, batch, iterations;
  std::optional<double> anneal, lr;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainFlags &f) {
  Config cfg = load_config(f.config);
  auto put = [&](const char *key, const auto &v) {
    if (v) {
      std::ostringstream os;
      os << *v;
      cfg.set(key, os.str());
    }
  };
  put("train.epochs", f.epochs);
  put("train.hidden", f.hidden);
  put("train.batch", f.batch);
  put("train.iterations", f.iterations);
  put("train.anneal", f.anneal);
  put("train.lr", f.lr);
  put("train.seed", f.seed);

  StudentConfig sc;
  sc.hidden = static_cast<int>(cfg.get_long("train.hidden", sc.hidden));
  sc.iterations = static_cast<int>(cfg.get_long("train.iterations", sc.iterations));
  TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.get_long("train.epochs", tc.epochs));
  tc.batch_size = static_cast<int>(cfg.get_long("train.batch", tc.batch_size));
  tc.lr = cfg.get_double("train.lr", tc.lr);
  tc.anneal = cfg.get_double("train.anneal", tc.anneal);
  tc.seed = static_cast<std::uint64_t>(cfg.get_long("train.seed", 1));
  const fs::path dir(f.output);
  fs::create_directories(dir);
  tc.checkpoint_dir = dir;
  tc.log_path = dir / "train_log.csv";
  {
    std::ofstream echo(dir / "config.txt");
    cfg.write(echo);
  }

  const IngestResult in = read_pairs(f.input);
  int skipped = static_cast<int>(in.errors.size());
  std::vector<AnnotatedPair> pairs;
  for (const PairRecord &p: in.pairs) {
    if (auto a = annotate(p.x, p.y))
      pairs.push_back(std::move(*a));
    else
      ++skipped;
  }

  TrainState state;
  if (!f.resume.empty()) {
    state = load_checkpoint(f.resume);
    sc = state.model->config();
  } else {
    state = new_training(sc, decoder_vocabulary(pairs), tc);
  }
  {
    std::ofstream vo(dir / "vocab.tsv");
    state.model->vocab().write(vo);
  }

  std::vector<TrainingExample> examples;
  for (const AnnotatedPair &p: pairs) {
    try {
      examples.push_back(prepare_example(p, state.model->vocab(), sc));
    } catch (const Error &e) {
      spdlog::warn("skipping pair {} -> {}: {}", write_smiles(p.x),
                   write_smiles(p.y), e.what());
      ++skipped;
    }
  }
  spdlog::info("{} training examples, {} parameters", examples.size(),
               state.model->parameter_count());
  train(state, examples, tc);
  save_checkpoint(dir / "model.ckpt", state);
  return skipped > 0 ? kExitPartial : kExitOk;
}

struct GenerateFlags {
  std::string input, output, model, vocab;
  std::uint64_t seed = 1;
  int hidden = 64;
};

int cmd_generate(const GenerateFlags &f) {
  std::unique_ptr<StudentModel> model;
  if (!f.model.empty()) {
    model = std::move(load_checkpoint(f.model).model);
  } else {
    if (f.vocab.empty())
      throw Error("generate needs --model, or --vocab for an untrained model");
    std::ifstream vi(f.vocab);
    if (!vi)
      throw IoError("cannot open " + f.vocab);
    StudentConfig sc;
    sc.hidden = f.hidden;
    model = std::make_unique<StudentModel>(sc, ComponentVocabulary::read(vi),
                                           f.seed);
  }
  Output out(f.output);
  int skipped = 0;
  for (const std::string &smi: read_first_column(f.input)) {
    MolGraph x;
    try {
      x = parse_smiles(smi);
    } catch (const Error &e) {
      spdlog::warn("skipping {}: {}", smi, e.what());
      ++skipped;
      continue;
    }
    const GenerationResult g = generate(*model, x);
    GeneratedRecord rec { smi, "", "ok" };
    if (g.ok)
      rec.generated = write_smiles(g.molecule);
    else
      rec.status = g.valence_error ? "valence_error" : "failed";
    write_generated(out.stream(), rec);
  }
  return skipped > 0 ? kExitPartial : kExitOk;
}

struct EvaluateFlags {
  std::string input, output, config, metric, dataset, properties, scorer_cmd;
  bool toy_scorer = false;
};

int cmd_evaluate(const EvaluateFlags &f) {
  Config cfg = default_metric_config();
  cfg.merge(load_config(f.config));
  const MetricSpec spec = metric_spec(cfg, f.metric, f.dataset);

  std::optional<PropertyOracle> oracle;
  if (!f.properties.empty())
    oracle = PropertyOracle::from_table(fs::path(f.properties));
  else if (!f.scorer_cmd.empty())
    oracle = PropertyOracle::from_command(f.scorer_cmd);
  else if (f.toy_scorer)
    oracle = PropertyOracle::heavy_atoms();
  else
    throw MissingProperty("evaluate needs --properties, --scorer-cmd or --toy-scorer");

  std::ifstream is(f.input);
  if (!is)
    throw IoError("cannot open " + f.input);
  const std::vector<GeneratedRecord> records = read_generated(is);
  const std::vector<Outcome> outcomes = score_generated(records, spec, *oracle);
  Output out(f.output);
  out.stream() << "config\t" << (f.config.empty() ? "built-in" : f.config) << '\n';
  write_report(out.stream(), summarize(outcomes, spec));
  return kExitOk;
}

int cmd_fingerprint(const std::vector<std::string> &smiles,
                    const std::string &input, int radius, int width) {
  auto fp = [&](const std::string &s) {
    return morgan_fingerprint(parse_smiles(s), radius, width);
  };
  if (!input.empty()) {
    const IngestResult in = read_pairs(input);
    for (const PairRecord &p: in.pairs) {
      std::cout << p.src << '\t' << p.tgt << '\t'
                << fixed6(tanimoto(morgan_fingerprint(p.x, radius, width),
                                   morgan_fingerprint(p.y, radius, width)))
                << '\n';
    }
    return in.errors.empty() ? kExitOk : kExitPartial;
  }
  if (smiles.size() == 1) {
    const Fingerprint a = fp(smiles[0]);
    std::cout << "bits\t" << a.count() << '\n' << "hex\t" << a.to_hex() << '\n';
  } else if (smiles.size() == 2) {
    std::cout << "similarity\t" << fixed6(tanimoto(fp(smiles[0]), fp(smiles[1])))
              << '\n';
  } else {
    throw Error("fingerprint takes one or two SMILES, or --input");
  }
  return kExitOk;
}

int cmd_synth(const std::string &output, const std::string &rule, int count,
              std::uint64_t seed, int max_atoms) {
  std::mt19937_64 rng(seed);
  SynthOptions opts;
  opts.max_atoms = max_atoms;
  Output out(output);
  for (int k = 0; k < count; ++k) {
    const bool hydroxyl = rule == "hydroxyl" || (rule == "mixed" && k % 2 == 0);
    const MolPair p = hydroxyl ? hydroxyl_to_amine_pair(rng, opts)
                               : random_edit_pair(rng, opts);
    out.stream() << write_smiles(p.src) << '\t' << write_smiles(p.tgt) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "Teacher-student molecule polishing" };
  app.require_subcommand(1);
  spdlog::set_default_logger(spdlog::stderr_color_st("polish"));
  spdlog::set_pattern("[%l] %v");

  std::string input, output, config;
  auto *ingest = app.add_subcommand("ingest", "Parse a pair file and count records");
  std::optional<long> expect;
  ingest->add_option("--input", input, "src<TAB>tgt pair file")->required();
  ingest->add_option("--output", output, "Write the parsed pairs");
  ingest->add_option("--expect-count", expect, "Fail unless this many pairs parse");

  bool audit = false;
  auto *annotate_cmd = app.add_subcommand("annotate", "Teacher annotation to JSONL");
  annotate_cmd->add_option("--input", input)->required();
  annotate_cmd->add_option("--output", output, "JSONL, stdout by default");
  annotate_cmd->add_flag("--audit", audit, "Check reconstruction of every pair");

  auto *stats = app.add_subcommand("stats", "Mean preserved, removed and added atoms");
  stats->add_option("--input", input)->required();

  bool decoder = false;
  auto *vocab = app.add_subcommand("vocab", "Cluster vocabulary");
  vocab->add_option("--input", input)->required();
  vocab->add_option("--output", output);
  vocab->add_flag("--decoder", decoder, "Clusters of the added regions only");

  TrainFlags tf;
  auto *train_cmd = app.add_subcommand("train", "Train the student");
  train_cmd->add_option("--input", tf.input)->required();
  train_cmd->add_option("--output", tf.output, "Checkpoint directory")->required();
  train_cmd->add_option("--config", tf.config, "key = value file (train.*)");
  train_cmd->add_option("--resume", tf.resume, "Continue from a checkpoint");
  train_cmd->add_option("--epochs", tf.epochs);
  train_cmd->add_option("--hidden", tf.hidden);
  train_cmd->add_option("--batch", tf.batch);
  train_cmd->add_option("--iterations", tf.iterations);
  train_cmd->add_option("--anneal", tf.anneal);
  train_cmd->add_option("--lr", tf.lr);
  train_cmd->add_option("--seed", tf.seed);

  GenerateFlags gf;
  auto *gen = app.add_subcommand("generate", "Polish source molecules");
  gen->add_option("--input", gf.input, "Sources in the first column")->required();
  gen->add_option("--output", gf.output);
  gen->add_option("--model", gf.model, "Checkpoint");
  gen->add_option("--vocab", gf.vocab, "Vocabulary for an untrained model");
  gen->add_option("--seed", gf.seed);
  gen->add_option("--hidden", gf.hidden);

  EvaluateFlags ef;
  auto *eval = app.add_subcommand("evaluate", "Success rate or mean improvement");
  eval->add_option("--input", ef.input, "generate output")->required();
  eval->add_option("--output", ef.output);
  eval->add_option("--config", ef.config, "Metric definitions override");
  eval->add_option("--metric", ef.metric)
      ->required()
      ->check(CLI::IsMember({ "M1", "M2", "M3", "M4", "M5" }));
  eval->add_option("--dataset", ef.dataset)
      ->required()
      ->check(CLI::IsMember({ "qed", "drd2", "logp4", "logp6" }));
  eval->add_option("--properties", ef.properties, "SMILES<TAB>value file");
  eval->add_option("--scorer-cmd", ef.scorer_cmd, "Command printing a property");
  eval->add_flag("--toy-scorer", ef.toy_scorer, "Heavy-atom count as property");

  std::vector<std::string> fp_smiles;
  int radius = kDefaultFingerprintRadius, width = kDefaultFingerprintWidth;
  auto *fpc = app.add_subcommand("fingerprint", "Morgan bits or Tanimoto similarity");
  fpc->add_option("smiles", fp_smiles, "One or two SMILES");
  fpc->add_option("--input", input, "Pair file; one similarity per pair");
  fpc->add_option("--radius", radius);
  fpc->add_option("--width", width);

  std::string rule = "mixed";
  int count = 1000, max_atoms = 30;
  std::uint64_t seed = 1;
  auto *synth = app.add_subcommand("synth", "Synthetic pair corpus");
  synth->add_option("--output", output);
  synth->add_option("--rule", rule)->check(CLI::IsMember({ "hydroxyl", "edit", "mixed" }));
  synth->add_option("--count", count);
  synth->add_option("--seed", seed);
  synth->add_option("--max-atoms", max_atoms);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitFatal;
  }

  try {
    if (*ingest)
      return cmd_ingest(input, output, expect);
    if (*annotate_cmd)
      return cmd_annotate(input, output, audit);
    if (*stats)
      return cmd_stats(input);
    if (*vocab)
      return cmd_vocab(input, output, decoder);
    if (*train_cmd)
      return cmd_train(tf);
    if (*gen)
      return cmd_generate(gf);
    if (*eval)
      return cmd_evaluate(ef);
    if (*fpc)
      return cmd_fingerprint(fp_smiles, input, radius, width);
    if (*synth)
      return cmd_synth(output, rule, count, seed, max_atoms);
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kExitFatal;
  }
  return kExitFatal;
}
