//
// SPDX-License-Identifier: Apache-2.0
//
// Prints one PASS / FAIL / SKIP line per acceptance criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.h"
#include "oracles.h"
#include "polish/dataset.h"
#include "polish/error.h"
#include "polish/evaluation.h"
#include "polish/isomorphism.h"
#include "polish/juncttree.h"
#include "polish/smiles.h"
#include "polish/student.h"
#include "polish/synth.h"
#include "polish/teacher.h"
#include "polish/training.h"
#include "testing.h"

namespace fs = std::filesystem;
using namespace polish;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Result {
  Verdict verdict;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Result pass_if(bool ok, std::string detail) {
  return { ok ? Verdict::kPass : Verdict::kFail, std::move(detail) };
}

// 500 rule pairs and 500 random-edit pairs, molecules of at most 40 atoms.
std::vector<MolPair> mixed_corpus() {
  std::mt19937_64 rng(2024);
  SynthOptions opts;
  opts.max_atoms = 40;
  std::vector<MolPair> out;
  for (int k = 0; k < 500; ++k)
    out.push_back(hydroxyl_to_amine_pair(rng, opts));
  for (int k = 0; k < 500; ++k)
    out.push_back(random_edit_pair(rng, opts));
  return out;
}

Result teacher_reconstruction() {
  const auto t0 = Clock::now();
  int annotatable = 0, ok = 0;
  for (const MolPair &p: mixed_corpus()) {
    PolishAnnotation ann;
    try {
      ann = annotate_pair(p.src, p.tgt);
    } catch (const NoCandidate &) {
      continue;
    }
    ++annotatable;
    ok += graph_isomorphic(reconstruct(ann), p.tgt);
  }
  const double secs = seconds_since(t0);
  return pass_if(ok == annotatable && annotatable > 0 && secs < 60,
                 fmt("%d/%d reconstructed, %.1f s", ok, annotatable, secs));
}

Result center_optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  SynthOptions opts;
  opts.min_atoms = 3;
  opts.max_atoms = 12;
  int checked = 0, equal = 0;
  while (checked < 200) {
    const MolPair p = random_edit_pair(rng, opts);
    if (p.src.num_atoms() > 12 || p.tgt.num_atoms() > 12)
      continue;
    ++checked;
    equal += annotate_pair(p.src, p.tgt).preserved_atoms()
             == testing::oracle_best_score(p.src, p.tgt);
  }
  const double secs = seconds_since(t0);
  return pass_if(equal == checked && secs < 120,
                 fmt("%d/%d equal to exhaustive max, %.1f s", equal, checked, secs));
}

Result smiles_round_trip() {
  std::mt19937_64 rng(5);
  int round_trips = 0, canonical = 0;
  const std::vector<MolGraph> corpus = testing::corpus(1000, 31);
  for (const MolGraph &g: corpus) {
    const std::string smi = write_smiles(g);
    round_trips += find_isomorphism(parse_smiles(smi), g).has_value();
    bool same = true;
    for (int k = 0; k < 10 && same; ++k)
      same = write_smiles(g.permuted(testing::random_permutation(g.num_atoms(), rng)))
             == smi;
    canonical += same;
  }
  const int n = static_cast<int>(corpus.size());
  return pass_if(round_trips == n && canonical == n,
                 fmt("%d/%d round-trip, %d/%d canonical under 10 permutations",
                     round_trips, n, canonical, n));
}

Result junction_tree_round_trip() {
  int ok = 0, intersect = 0;
  const std::vector<MolGraph> corpus = testing::corpus(1000, 32);
  for (const MolGraph &g: corpus) {
    const JunctionTree t = decompose(g);
    intersect += running_intersection(t, g.num_atoms());
    try {
      ok += find_isomorphism(realize_molecule(ground_truth_plan(g, t)), g).has_value();
    } catch (const Error &) {
    }
  }
  const int n = static_cast<int>(corpus.size());
  return pass_if(ok == n && intersect == n,
                 fmt("%d/%d reassembled, %d/%d running intersection", ok, n,
                     intersect, n));
}

std::vector<AnnotatedPair> annotated(const std::vector<MolPair> &pairs) {
  std::vector<AnnotatedPair> out;
  for (const MolPair &p: pairs) {
    if (auto a = annotate(p.src, p.tgt))
      out.push_back(std::move(*a));
  }
  return out;
}

Result gradient_correctness() {
  int passed = 0, total = 0, kinked = 0, entries = 0;
  double worst = 0;
  std::string worst_where;
  for (int seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(100 + seed);
    SynthOptions opts;
    opts.max_atoms = 18;
    std::vector<MolPair> raw;
    for (int k = 0; k < 40; ++k)
      raw.push_back(k % 2 ? random_edit_pair(rng, opts)
                          : hydroxyl_to_amine_pair(rng, opts));
    const std::vector<AnnotatedPair> pairs = annotated(raw);
    const ComponentVocabulary vocab = decoder_vocabulary(pairs);
    StudentConfig sc;
    sc.hidden = 8;
    sc.iterations = 2;
    sc.max_train_candidates = 8;
    StudentModel m(sc, vocab, seed);
    std::vector<TrainingExample> examples;
    for (const AnnotatedPair &p: pairs)
      examples.push_back(prepare_example(p, vocab, sc));
    const TrainingExample *pick = nullptr;
    for (const TrainingExample &ex: examples) {
      if (!ex.assembly.empty() && !ex.branch_atoms.empty()
          && ex.target.clusters.size() > 2) {
        pick = &ex;
        break;
      }
    }
    if (pick == nullptr)
      return { Verdict::kFail, "no example exercises every head" };

    // Zero biases with zero root messages sit on relu kinks.
    std::uniform_real_distribution<double> offset(-0.1, 0.1);
    for (ad::Parameter &p: m.params())
      p.value = p.value.unaryExpr([&](double v) { return v + offset(rng); });

    const std::pair<const char *, ad::Var LossTerms::*> heads[] = {
      { "c", &LossTerms::c },       { "r", &LossTerms::r },
      { "topo", &LossTerms::topo }, { "label", &LossTerms::label },
      { "a", &LossTerms::a },
    };
    for (const auto &[name, member]: heads) {
      const auto res = testing::gradient_check(
          m.params(),
          [&](ad::Tape &t) { return example_losses(t, m, *pick).*member; }, rng,
          2, 1e-4, 1e-5);
      ++total;
      passed += res.max_rel < 1e-3 && res.skipped == 0;
      kinked += res.kinked;
      entries += res.checked;
      if (res.max_rel > worst) {
        worst = res.max_rel;
        worst_where = std::string(name) + " " + res.worst;
      }
    }
  }
  return pass_if(passed == total,
                 fmt("%d/%d head checks over 5 seeds, %d entries, max rel %.2e "
                     "(%s), %d kink-crossing entries redone at smaller steps",
                     passed, total, entries, worst, worst_where.c_str(), kinked));
}

Result closed_form_losses() {
  const double ln2 = std::numbers::ln2;
  ad::Tape t;
  const std::vector<double> te { 1, 0 };
  const double kl =
      center_loss(te, t.constant(Eigen::MatrixXd::Zero(2, 1))).scalar();

  const std::vector<AnnotatedPair> pairs = annotated(mixed_corpus());
  const ComponentVocabulary vocab = decoder_vocabulary(
      std::span<const AnnotatedPair>(pairs.data(), 40));
  StudentConfig sc;
  sc.hidden = 16;
  StudentModel m(sc, vocab, 1);
  m.u_l->value.setZero();
  double label_err = 0;
  for (std::size_t k = 0; k < 40; ++k) {
    const TrainingExample ex = prepare_example(pairs[k], vocab, sc);
    ad::Tape tt;
    const DecodeTrace trace =
        tree_decode(tt, m, encode_views(tt, m, ex.views), ex.root, &ex.target);
    int steps = 0;
    for (const DecodeStep &s: trace.steps)
      steps += s.expand && s.label >= 0;
    label_err = std::max(label_err,
                         std::abs(decode_losses(tt, trace).label.scalar()
                                  - steps * std::log(vocab.size())));
  }
  const double two =
      assembly_loss(t.constant(Eigen::MatrixXd::Constant(2, 1, 0.7)), 0).scalar();
  const bool ok = std::abs(kl - ln2) <= 1e-9 && label_err <= 1e-9
                  && std::abs(two - ln2) <= 1e-9;
  return pass_if(ok, fmt("KL %.12f, max |label - n ln V| %.1e (V = %d), "
                         "two-candidate %.12f, ln 2 = %.12f",
                         kl, label_err, vocab.size(), two, ln2));
}

Result toy_learning() {
  const IngestResult in = ingest_pairs(fs::path(POLISH_DATA_DIR "/rule_pairs.tsv"));
  std::vector<AnnotatedPair> pairs;
  for (const PairRecord &p: in.pairs) {
    if (auto a = annotate(p.x, p.y))
      pairs.push_back(std::move(*a));
  }
  const std::size_t n_train = pairs.size() * 9 / 10;
  const std::span<const AnnotatedPair> train_pairs(pairs.data(), n_train);
  const ComponentVocabulary vocab = decoder_vocabulary(train_pairs);

  StudentConfig sc;
  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 32;
  tc.lr = 1e-4;
  std::vector<TrainingExample> train_ex, test_ex;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    (k < n_train ? train_ex : test_ex).push_back(prepare_example(pairs[k], vocab, sc));

  const auto t0 = Clock::now();
  TrainState state = new_training(sc, vocab, tc);
  const std::vector<EpochStats> stats = train(state, train_ex, tc);
  const double secs = seconds_since(t0);
  const StudentMetrics m = evaluate_student(*state.model, test_ex);
  const bool ok = m.center_accuracy >= 0.9 && m.branch_accuracy >= 0.9
                  && m.exact_match >= 0.9 && secs < 15 * 60
                  && stats.size() == 30 && stats.back().total < stats.front().total;
  return pass_if(
      ok, fmt("%zu train / %zu held out; center %.3f, branch %.3f, exact %.3f; "
              "loss %.4f -> %.4f; %.0f s",
              train_ex.size(), test_ex.size(), m.center_accuracy, m.branch_accuracy,
              m.exact_match, stats.front().total, stats.back().total, secs));
}

Result teacher_forced_identity() {
  const std::vector<AnnotatedPair> pairs = annotated(mixed_corpus());
  const ComponentVocabulary vocab = decoder_vocabulary(pairs);
  StudentConfig sc;
  sc.hidden = 16;
  const StudentModel m(sc, vocab, 3);
  int ok = 0;
  for (const AnnotatedPair &p: pairs) {
    const GenerationResult g = generate_forced(m, prepare_example(p, vocab, sc));
    ok += g.ok && write_smiles(g.molecule) == write_smiles(p.y);
  }
  return pass_if(ok == static_cast<int>(pairs.size()),
                 fmt("%d/%zu reproduced", ok, pairs.size()));
}

Result evaluation_arithmetic() {
  const Config cfg = Config::load(POLISH_DATA_DIR "/metrics.conf");
  const MetricSpec m1 = metric_spec(cfg, "M1", "qed");
  std::vector<Outcome> four;
  for (double sim: { 0.5, 0.2, 0.35, 0.45 })
    four.push_back({ true, sim, 0, 0.7 });
  const double rate = summarize(four, m1).success_rate;

  const MetricSpec m4 = metric_spec(cfg, "M4", "logp4");
  const std::vector<Outcome> two { { true, 0.5, 1.0, 1.1 }, { true, 0.6, 2.0, 2.3 } };
  const double gain = summarize(two, m4).mean_improvement;

  // Plain recomputation on random 10-row samples.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  bool sample_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Outcome> rows(10);
    int hits = 0, qualified = 0;
    double sum = 0;
    for (Outcome &o: rows) {
      o = { u(rng) < 0.9, u(rng), u(rng), u(rng) };
      hits += o.ok && o.similarity >= 0.3 && o.similarity <= 1.0
              && o.property_out >= 0.6 && o.property_out <= 1.0;
      if (o.ok && o.similarity >= 0.3) {
        ++qualified;
        sum += o.property_out - o.property_src;
      }
    }
    sample_ok = sample_ok && summarize(rows, m1).success_rate == 100.0 * hits / 10
                && summarize(rows, m4).mean_improvement
                       == (qualified ? sum / qualified : 0.0);
  }

  // Every configured range appears verbatim in its report.
  bool echoed = true;
  int reports = 0;
  for (const auto &[key, value]: cfg.entries()) {
    std::istringstream parts(key);
    std::string prefix, name, dataset, field;
    std::getline(parts, prefix, '.');
    std::getline(parts, name, '.');
    std::getline(parts, dataset, '.');
    std::getline(parts, field, '.');
    if (field.empty())
      continue;
    std::ostringstream os;
    write_report(os, summarize({}, metric_spec(cfg, name, dataset)));
    echoed = echoed && os.str().find("\t" + value + "\n") != std::string::npos;
    ++reports;
  }
  const bool ok = rate == 75.0 && std::abs(gain - 0.2) < 1e-12 && sample_ok
                  && echoed && reports == 24;
  return pass_if(ok, fmt("M1-QED rate %.4f%%, mean improvement %.4f, "
                         "100 ten-row recomputations %s, %d ranges echoed %s",
                         rate, gain, sample_ok ? "equal" : "differ", reports,
                         echoed ? "verbatim" : "altered"));
}

Result logp6_ingestion() {
  const char *env = std::getenv("POLISH_LOGP6_TRAIN");
  const fs::path path = env ? fs::path(env)
                            : fs::path(POLISH_DATA_DIR "/logp6/train_pairs.txt");
  if (!fs::exists(path))
    return { Verdict::kSkip, "waived: " + path.string() + " not present" };
  const IngestResult in = ingest_pairs(path);
  return pass_if(in.pairs.size() == 75284,
                 fmt("%zu pairs, %zu unparsed lines", in.pairs.size(),
                     in.errors.size()));
}

}  // namespace

int main() {
  const std::pair<const char *, std::function<Result()>> criteria[] = {
    { "teacher reconstruction", teacher_reconstruction },
    { "center optimality vs brute force", center_optimality },
    { "SMILES round-trip and canonicality", smiles_round_trip },
    { "junction-tree round-trip", junction_tree_round_trip },
    { "gradient correctness", gradient_correctness },
    { "closed-form losses", closed_form_losses },
    { "toy learning", toy_learning },
    { "teacher-forced end-to-end identity", teacher_forced_identity },
    { "evaluation arithmetic", evaluation_arithmetic },
    { "LogP6 ingestion", logp6_ingestion },
  };
  int failed = 0, index = 0;
  for (const auto &[name, run]: criteria) {
    ++index;
    Result r;
    try {
      r = run();
    } catch (const std::exception &e) {
      r = { Verdict::kFail, std::string("exception: ") + e.what() };
    }
    const char *tag = r.verdict == Verdict::kPass   ? "PASS"
                      : r.verdict == Verdict::kSkip ? "SKIP"
                                                    : "FAIL";
    failed += r.verdict == Verdict::kFail;
    std::printf("criterion %2d %s: %s (%s)\n", index, tag, name, r.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
