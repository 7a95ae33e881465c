//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/training.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include <spdlog/spdlog.h>

#include "polish/canon.h"
#include "polish/error.h"
#include "polish/smiles.h"

namespace polish {

using ad::Matrix;
using ad::Tape;
using ad::Var;

std::optional<AnnotatedPair> annotate(const MolGraph &x, const MolGraph &y) {
  try {
    return AnnotatedPair { x, y, annotate_pair(x, y) };
  } catch (const NoCandidate &) {
    return std::nullopt;
  }
}

AssemblyPlan added_plan(const MolGraph &a) {
  return ground_truth_plan(a, decompose(a, 0));
}

ComponentVocabulary decoder_vocabulary(std::span<const AnnotatedPair> pairs) {
  std::vector<MolGraph> graphs;
  graphs.reserve(pairs.size());
  for (const AnnotatedPair &p: pairs)
    graphs.push_back(build_A(p.ann));
  std::vector<JunctionTree> trees;
  trees.reserve(graphs.size());
  for (const MolGraph &a: graphs)
    trees.push_back(decompose(a, 0));
  std::vector<std::pair<const MolGraph *, const JunctionTree *>> refs;
  for (std::size_t k = 0; k < graphs.size(); ++k)
    refs.emplace_back(&graphs[k], &trees[k]);
  return build_vocabulary(refs);
}

TrainingExample prepare_example(const AnnotatedPair &pair,
                                const ComponentVocabulary &vocab,
                                const StudentConfig &config) {
  const PolishAnnotation &ann = pair.ann;
  TrainingExample ex;
  ex.x = pair.x;
  ex.y = pair.y;
  ex.x_ranks = canonical_rank(pair.x);
  ex.s_te = ann.scores.normalized;
  ex.center = ann.center;

  std::vector<bool> kept(ann.source_branches.branches.size(), false);
  for (const BranchMatch &m: ann.preserved)
    kept[m.x] = true;
  for (int b: smiles_branch_order(pair.x, ann.source_branches)) {
    ex.branch_atoms.push_back(ann.source_branches.branches[b].source_indices);
    ex.branch_flags.push_back(kept[b] ? 1 : 0);
  }
  std::vector<int> preserved;
  for (std::size_t b = 0; b < kept.size(); ++b) {
    if (kept[b])
      preserved.push_back(static_cast<int>(b));
  }
  ex.r = build_R(pair.x, ann.source_branches, preserved);
  ex.views = view_inputs(pair.x, ex.r);

  ex.plan = added_plan(build_A(ann));
  ex.root = ex.plan.clusters[0];
  ex.target = decode_target(ex.plan, vocab);

  PartialAssembly partial = start_assembly(ex.plan.clusters[0]);
  for (std::size_t k = 1; k < ex.plan.clusters.size(); ++k) {
    PartialAssembly truth = attach(partial, ex.plan.clusters[k],
                                   ex.plan.parent[k], ex.plan.attachments[k]);
    const std::string key = assembly_key(truth);
    const std::vector<AssemblyCandidate> cands =
        enumerate_assemblies(partial, ex.plan.clusters[k], ex.plan.parent[k]);
    if (cands.size() >= 2) {
      AssemblyTarget target { static_cast<int>(k), {}, -1 };
      const auto cap = static_cast<std::size_t>(
          std::max(config.max_train_candidates, 2));
      for (const AssemblyCandidate &c: cands) {
        const bool is_truth = c.key == key;
        if (!is_truth && target.candidates.size() + (target.truth < 0) >= cap)
          continue;
        if (is_truth)
          target.truth = static_cast<int>(target.candidates.size());
        target.candidates.push_back(graph_features(c.result.molecule));
      }
      if (target.truth < 0)
        throw Error("ground-truth assembly missing from its candidate set");
      ex.assembly.push_back(std::move(target));
    }
    partial = std::move(truth);
  }
  return ex;
}

LossTerms example_losses(Tape &t, const StudentModel &m,
                         const TrainingExample &ex) {
  LossTerms out;
  Var h = mpn_encode(t, m.graph_mpn, ex.views.xg, m.config().hidden,
                     m.config().iterations);
  out.c = center_loss(ex.s_te, center_logits(t, m, h));

  if (ex.branch_atoms.empty()) {
    out.r = t.scalar(0.0);
  } else {
    const std::vector<BranchStep> steps =
        branch_forward(t, m, h, ex.center, ex.branch_atoms, ex.branch_flags);
    const std::vector<double> flags(ex.branch_flags.begin(),
                                    ex.branch_flags.end());
    out.r = branch_loss(steps, flags);
  }

  const EncodedViews views = encode_views(t, m, ex.views, h);
  const DecodeTrace trace = tree_decode(t, m, views, ex.root, &ex.target);
  const DecodeLosses dl = decode_losses(t, trace);
  out.topo = dl.topo;
  out.label = dl.label;

  std::vector<Var> terms;
  for (const AssemblyTarget &a: ex.assembly) {
    std::vector<Var> scores;
    for (const GraphFeatures &c: a.candidates)
      scores.push_back(graph_decode_score(t, m, c, views));
    terms.push_back(assembly_loss(ad::vcat(scores), a.truth));
  }
  out.a = terms.empty() ? t.scalar(0.0) : ad::sum_rows(ad::vcat(terms));
  return out;
}

Adam::Adam(const ad::ParameterSet &params) {
  for (const ad::Parameter &p: params) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(ad::ParameterSet &params, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Parameter &p = params[k];
    m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * p.grad;
    v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m_[k].array() / c1)
                       / ((v_[k].array() / c2).sqrt() + kEps);
    p.grad.setZero();
  }
}

namespace {
  void write_matrix(std::ostream &os, const Matrix &m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        os << (c ? " " : "") << m(r, c);
      os << '\n';
    }
  }

  void read_matrix(std::istream &is, Matrix &m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (!(is >> m(r, c)))
          throw Error("checkpoint: truncated matrix");
      }
    }
  }

  void expect_word(std::istream &is, const std::string &word) {
    std::string got;
    if (!(is >> got) || got != word)
      throw Error("checkpoint: expected '" + word + "', found '" + got + "'");
  }

  template <typename T>
  T read_field(std::istream &is, const std::string &word) {
    expect_word(is, word);
    T v;
    if (!(is >> v))
      throw Error("checkpoint: bad value for " + word);
    return v;
  }
}  // namespace

void Adam::write(std::ostream &os) const {
  os << "adam " << t_ << '\n';
  for (std::size_t k = 0; k < m_.size(); ++k) {
    write_matrix(os, m_[k]);
    write_matrix(os, v_[k]);
  }
}

void Adam::read(std::istream &is) {
  t_ = read_field<long>(is, "adam");
  for (std::size_t k = 0; k < m_.size(); ++k) {
    read_matrix(is, m_[k]);
    read_matrix(is, v_[k]);
  }
}

TrainState new_training(const StudentConfig &config, ComponentVocabulary vocab,
                        const TrainConfig &train) {
  TrainState s;
  s.model = std::make_unique<StudentModel>(config, std::move(vocab),
                                           train.seed);
  s.adam = std::make_unique<Adam>(s.model->params());
  s.lr = train.lr;
  return s;
}

void save_checkpoint(const std::filesystem::path &path, const TrainState &s) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os)
      throw IoError("cannot write checkpoint " + tmp.string());
    os << std::setprecision(17);
    const StudentConfig &c = s.model->config();
    os << "polish-student-checkpoint 1\n"
       << "hidden " << c.hidden << "\niterations " << c.iterations
       << "\nmax_decode_nodes " << c.max_decode_nodes
       << "\nmax_train_candidates " << c.max_train_candidates
       << "\nepochs_done " << s.epochs_done << "\nlr " << s.lr << '\n';
    std::ostringstream vocab;
    s.model->vocab().write(vocab);
    os << "vocab " << s.model->vocab().size() << '\n' << vocab.str();
    const ad::ParameterSet &params = s.model->params();
    os << "params " << params.size() << '\n';
    for (const ad::Parameter &p: params) {
      os << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
      write_matrix(os, p.value);
    }
    s.adam->write(os);
    os << "end\n";
    if (!os)
      throw Error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TrainState load_checkpoint(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open checkpoint " + path.string());
  if (read_field<int>(is, "polish-student-checkpoint") != 1)
    throw Error("checkpoint: unsupported version");
  StudentConfig c;
  c.hidden = read_field<int>(is, "hidden");
  c.iterations = read_field<int>(is, "iterations");
  c.max_decode_nodes = read_field<int>(is, "max_decode_nodes");
  c.max_train_candidates = read_field<int>(is, "max_train_candidates");
  TrainState s;
  s.epochs_done = read_field<int>(is, "epochs_done");
  s.lr = read_field<double>(is, "lr");
  const int vocab_size = read_field<int>(is, "vocab");
  std::string line;
  std::getline(is, line);
  std::ostringstream vocab_text;
  for (int k = 0; k < vocab_size; ++k) {
    if (!std::getline(is, line))
      throw Error("checkpoint: truncated vocabulary");
    vocab_text << line << '\n';
  }
  std::istringstream vocab_in(vocab_text.str());
  s.model = std::make_unique<StudentModel>(
      c, ComponentVocabulary::read(vocab_in), 0);
  ad::ParameterSet &params = s.model->params();
  if (read_field<std::size_t>(is, "params") != params.size())
    throw Error("checkpoint: parameter count mismatch");
  for (ad::Parameter &p: params) {
    std::string name;
    Eigen::Index rows, cols;
    is >> name >> rows >> cols;
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols())
      throw Error("checkpoint: parameter '" + name + "' does not match '"
                  + p.name + "'");
    read_matrix(is, p.value);
  }
  s.adam = std::make_unique<Adam>(params);
  s.adam->read(is);
  expect_word(is, "end");
  return s;
}

std::vector<EpochStats> train(
    TrainState &state, std::span<const TrainingExample> examples,
    const TrainConfig &train,
    const std::function<void(const EpochStats &)> &on_epoch) {
  if (examples.empty())
    throw DomainError("train: no examples");
  if (train.batch_size < 1)
    throw DomainError("train: batch size must be positive");
  StudentModel &model = *state.model;
  ad::ParameterSet &params = model.params();
  const auto &w = train.weights;

  std::ofstream log;
  if (!train.log_path.empty()) {
    const bool fresh = !std::filesystem::exists(train.log_path)
                       || std::filesystem::file_size(train.log_path) == 0;
    log.open(train.log_path, std::ios::app);
    if (!log)
      throw IoError("cannot open training log " + train.log_path.string());
    if (fresh)
      log << kTrainLogHeader << '\n';
  }
  if (!train.checkpoint_dir.empty())
    std::filesystem::create_directories(train.checkpoint_dir);

  std::vector<EpochStats> history;
  std::vector<std::size_t> order(examples.size());
  while (state.epochs_done < train.epochs) {
    const int epoch = state.epochs_done + 1;
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::seed_seq seq { static_cast<std::uint32_t>(train.seed),
                        static_cast<std::uint32_t>(train.seed >> 32),
                        static_cast<std::uint32_t>(epoch) };
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats stats;
    stats.epoch = epoch;
    params.zero_grad();
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(train.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(train.batch_size));
      const double inv = 1.0 / static_cast<double>(end - begin);
      try {
        for (std::size_t k = begin; k < end; ++k) {
          Tape t;
          const LossTerms l = example_losses(t, model, examples[order[k]]);
          const Var parts[] = { ad::scale(l.c, w[0]), ad::scale(l.r, w[1]),
                                ad::scale(l.topo, w[2]),
                                ad::scale(l.label, w[3]),
                                ad::scale(l.a, w[4]) };
          Var total = ad::sum_all(ad::vcat(parts));
          t.backward(ad::scale(total, inv));
          stats.total += total.scalar();
          stats.c += l.c.scalar();
          stats.r += l.r.scalar();
          stats.topo += l.topo.scalar();
          stats.label += l.label.scalar();
          stats.a += l.a.scalar();
        }
      } catch (const NonFinite &e) {
        params.zero_grad();
        spdlog::error("epoch {}: {}; last good checkpoint is epoch {}", epoch,
                      e.what(), state.epochs_done);
        throw;
      }
      state.adam->step(params, state.lr);
    }
    const double n = static_cast<double>(examples.size());
    stats.total /= n;
    stats.c /= n;
    stats.r /= n;
    stats.topo /= n;
    stats.label /= n;
    stats.a /= n;
    stats.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    state.epochs_done = epoch;
    state.lr *= train.anneal;

    if (log.is_open()) {
      log << std::setprecision(10) << stats.epoch << ',' << stats.total << ','
          << stats.c << ',' << stats.r << ',' << stats.topo << ','
          << stats.label << ',' << stats.a << ',' << stats.seconds << '\n';
      log.flush();
    }
    if (!train.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03d.ckpt", epoch);
      save_checkpoint(train.checkpoint_dir / name, state);
    }
    spdlog::info("epoch {} loss {:.6f} (c {:.4f} r {:.4f} topo {:.4f} label "
                 "{:.4f} a {:.4f}) {:.1f}s",
                 epoch, stats.total, stats.c, stats.r, stats.topo, stats.label,
                 stats.a, stats.seconds);
    history.push_back(stats);
    if (on_epoch)
      on_epoch(stats);
  }
  return history;
}

namespace {
  std::vector<double> values_of(Var v) {
    const Matrix &m = v.value();
    return std::vector<double>(m.data(), m.data() + m.size());
  }

  // Assembles a decoded tree; choose(k, candidates) picks the candidate for
  // node k and is called for every node.
  template <typename Choose>
  MolGraph assemble(const DecodeTrace &trace, Choose choose) {
    PartialAssembly partial = start_assembly(trace.clusters[0]);
    for (int k = 1; k < trace.num_nodes(); ++k) {
      std::vector<AssemblyCandidate> cands =
          enumerate_assemblies(partial, trace.clusters[k], trace.parent[k]);
      partial = std::move(cands[choose(k, cands)].result);
    }
    return partial.molecule;
  }

  GenerationResult finish(GenerationResult res, const MolGraph &r,
                          const MolGraph &a) {
    try {
      res.molecule = merge_final(r, a);
      res.ok = true;
    } catch (const ValenceError &e) {
      res.valence_error = true;
      res.error = e.what();
    }
    return res;
  }
}  // namespace

GenerationResult generate(const StudentModel &m, const MolGraph &x) {
  GenerationResult res;
  try {
    Tape t;
    const ViewInputs x_only { graph_features(x), {}, {}, {} };
    Var h = mpn_encode(t, m.graph_mpn, x_only.xg, m.config().hidden,
                       m.config().iterations);
    const std::vector<int> ranks = canonical_rank(x);
    res.center = predict_center(values_of(center_forward(t, m, h)), ranks);

    const BranchSet set = branches_around(x, res.center, ranks);
    const std::vector<int> order = smiles_branch_order(x, set);
    std::vector<std::vector<int>> atoms;
    for (int b: order)
      atoms.push_back(set.branches[b].source_indices);
    const std::vector<BranchStep> steps =
        branch_forward(t, m, h, res.center, atoms);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (steps[k].preserved)
        res.preserved.push_back(order[k]);
    }
    std::sort(res.preserved.begin(), res.preserved.end());

    const MolGraph r = build_R(x, set, res.preserved);
    const ViewInputs in = view_inputs(x, r);
    const EncodedViews views = encode_views(t, m, in, h);
    const MolGraph root({ x.atom(res.center) }, {});
    const DecodeTrace trace = tree_decode(t, m, views, root);
    const MolGraph a = assemble(
        trace, [&](int, const std::vector<AssemblyCandidate> &cands) {
          std::size_t best = 0;
          if (cands.size() == 1)
            return best;
          double best_score = 0;
          for (std::size_t j = 0; j < cands.size(); ++j) {
            const double s =
                graph_decode_score(t, m, graph_features(cands[j].result.molecule),
                                   views)
                    .scalar();
            if (j == 0 || s > best_score) {
              best = j;
              best_score = s;
            }
          }
          return best;
        });
    return finish(std::move(res), r, a);
  } catch (const ValenceError &e) {
    res.valence_error = true;
    res.error = e.what();
  } catch (const Error &e) {
    res.error = e.what();
  }
  return res;
}

GenerationResult generate_forced(const StudentModel &m,
                                 const TrainingExample &ex) {
  GenerationResult res;
  res.center = ex.center;
  try {
    Tape t;
    const EncodedViews views = encode_views(t, m, ex.views);
    const DecodeTrace trace = tree_decode(t, m, views, ex.root, &ex.target);
    PartialAssembly truth = start_assembly(ex.plan.clusters[0]);
    const MolGraph a = assemble(
        trace, [&](int k, const std::vector<AssemblyCandidate> &cands) {
          truth = attach(truth, ex.plan.clusters[k], ex.plan.parent[k],
                         ex.plan.attachments[k]);
          const std::string key = assembly_key(truth);
          const auto it =
              std::find_if(cands.begin(), cands.end(),
                           [&](const AssemblyCandidate &c) { return c.key == key; });
          if (it == cands.end())
            throw Error("forced assembly not among candidates");
          return static_cast<std::size_t>(it - cands.begin());
        });
    return finish(std::move(res), ex.r, a);
  } catch (const Error &e) {
    res.error = e.what();
  }
  return res;
}

StudentMetrics evaluate_student(const StudentModel &m,
                                std::span<const TrainingExample> examples) {
  StudentMetrics out;
  int centers = 0, branches = 0, branch_hits = 0, exact = 0;
  for (const TrainingExample &ex: examples) {
    ++out.examples;
    Tape t;
    Var h = mpn_encode(t, m.graph_mpn, ex.views.xg, m.config().hidden,
                       m.config().iterations);
    if (predict_center(values_of(center_forward(t, m, h)), ex.x_ranks)
        == ex.center)
      ++centers;
    const std::vector<BranchStep> steps =
        branch_forward(t, m, h, ex.center, ex.branch_atoms);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      ++branches;
      if (steps[k].preserved == (ex.branch_flags[k] != 0))
        ++branch_hits;
    }
    const GenerationResult g = generate(m, ex.x);
    if (!g.ok) {
      ++out.failures;
      if (g.valence_error)
        ++out.valence_errors;
    } else if (write_smiles(g.molecule) == write_smiles(ex.y)) {
      ++exact;
    }
  }
  if (out.examples > 0) {
    out.center_accuracy = static_cast<double>(centers) / out.examples;
    out.exact_match = static_cast<double>(exact) / out.examples;
  }
  if (branches > 0)
    out.branch_accuracy = static_cast<double>(branch_hits) / branches;
  return out;
}

}  // namespace polish
