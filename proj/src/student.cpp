//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/student.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "polish/error.h"
#include "polish/smiles.h"

namespace polish {

using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {
  constexpr int kElements[] = { 6, 7, 8, 16, 9, 17, 35, 53, 15, 5, 0 };
  constexpr int kElementSlots = 12;

  int element_slot(int element) {
    for (int k = 0; k < kElementSlots - 1; ++k) {
      if (kElements[k] == element)
        return k;
    }
    return kElementSlots - 1;
  }

  void set_directed_edges(GraphFeatures &f, int u, int v,
                          const Eigen::RowVectorXd &feat, int row) {
    f.src[row] = u;
    f.dst[row] = v;
    f.src[row + 1] = v;
    f.dst[row + 1] = u;
    f.rev[row] = row + 1;
    f.rev[row + 1] = row;
    f.edges.row(row) = feat;
    f.edges.row(row + 1) = feat;
  }
}  // namespace

GraphFeatures graph_features(const MolGraph &g) {
  GraphFeatures f;
  const int n = g.num_atoms();
  const std::vector<bool> ring_atom = g.ring_atoms();
  const std::vector<bool> ring_bond = g.ring_bonds();
  f.nodes = Matrix::Zero(n, kAtomFeatures);
  for (int i = 0; i < n; ++i) {
    const AtomSpec &a = g.atom(i);
    int col = 0;
    f.nodes(i, col + element_slot(a.element)) = 1;
    col += kElementSlots;
    f.nodes(i, col + std::clamp(a.formal_charge, -1, 1) + 1) = 1;
    col += 3;
    f.nodes(i, col++) = a.aromatic ? 1 : 0;
    f.nodes(i, col + std::min(g.hydrogen_count(i), 4)) = 1;
    col += 5;
    f.nodes(i, col + std::min(g.degree(i), 5)) = 1;
    col += 6;
    f.nodes(i, col) = ring_atom[i] ? 1 : 0;
  }

  const int e = 2 * g.num_bonds();
  f.edges = Matrix::Zero(e, kBondFeatures);
  f.src.resize(e);
  f.dst.resize(e);
  f.rev.resize(e);
  for (int b = 0; b < g.num_bonds(); ++b) {
    const Bond &bond = g.bond(b);
    Eigen::RowVectorXd feat = Eigen::RowVectorXd::Zero(kBondFeatures);
    feat(static_cast<int>(bond.order) - 1) = 1;
    feat(4) = ring_bond[b] ? 1 : 0;
    set_directed_edges(f, bond.begin, bond.end, feat, 2 * b);
  }
  return f;
}

ClusterKind cluster_kind_of(const MolGraph &cluster) {
  if (cluster.num_atoms() == 1)
    return ClusterKind::kSingleton;
  if (cluster.num_bonds() >= cluster.num_atoms())
    return ClusterKind::kRing;
  return ClusterKind::kBond;
}

Eigen::RowVectorXd cluster_features(const MolGraph &cluster) {
  Eigen::RowVectorXd f = Eigen::RowVectorXd::Zero(kClusterFeatures);
  f(static_cast<int>(cluster_kind_of(cluster))) = 1;
  const int n = cluster.num_atoms();
  const int bucket = n <= 2 ? n - 1 : n <= 4 ? 2 : n <= 6 ? n - 2 : 5;
  f(3 + std::max(bucket, 0)) = 1;
  bool aromatic = false;
  for (int i = 0; i < n; ++i) {
    const AtomSpec &a = cluster.atom(i);
    aromatic |= a.aromatic;
    int slot = 5;
    switch (a.element) {
    case 6: slot = 0; break;
    case 7: slot = 1; break;
    case 8: slot = 2; break;
    case 16: slot = 3; break;
    case 9:
    case 17:
    case 35:
    case 53: slot = 4; break;
    default: break;
    }
    f(10 + slot) += 1.0 / 6.0;
  }
  f(9) = aromatic ? 1 : 0;
  for (const Bond &b: cluster.bonds()) {
    if (b.order != BondOrder::kSingle)
      f(16 + static_cast<int>(b.order) - 2) += 1.0 / 6.0;
  }
  return f;
}

GraphFeatures tree_features(const MolGraph &g, const JunctionTree &t) {
  GraphFeatures f;
  const int n = t.num_nodes();
  f.nodes = Matrix::Zero(n, kClusterFeatures);
  for (int k = 0; k < n; ++k)
    f.nodes.row(k) = cluster_features(cluster_graph(g, t.nodes[k]));
  const int e = 2 * static_cast<int>(t.edges.size());
  f.edges = Matrix::Zero(e, kTreeEdgeFeatures);
  f.src.resize(e);
  f.dst.resize(e);
  f.rev.resize(e);
  for (std::size_t k = 0; k < t.edges.size(); ++k) {
    const auto [u, v] = t.edges[k];
    std::vector<int> shared;
    std::set_intersection(t.nodes[u].atoms.begin(), t.nodes[u].atoms.end(),
                          t.nodes[v].atoms.begin(), t.nodes[v].atoms.end(),
                          std::back_inserter(shared));
    Eigen::RowVectorXd feat = Eigen::RowVectorXd::Zero(kTreeEdgeFeatures);
    feat(std::min<int>(static_cast<int>(shared.size()), 3) - 1) = 1;
    set_directed_edges(f, u, v, feat, 2 * static_cast<int>(k));
  }
  return f;
}

Var Mlp::project(Tape &t, int k, Var x) const {
  return ad::matmul(x, t.param(*w1[k]));
}

Var Mlp::finish(Tape &t, Var pre) const {
  Var hidden = ad::relu(ad::add_row(pre, t.param(*b1)));
  return ad::add_row(ad::matmul(hidden, t.param(*w2)), t.param(*b2));
}

Var Mlp::operator()(Tape &t, std::span<const Var> inputs) const {
  if (inputs.size() != w1.size())
    throw DomainError("mlp: input block count mismatch");
  Var pre = project(t, 0, inputs[0]);
  for (std::size_t k = 1; k < inputs.size(); ++k)
    pre = pre + project(t, static_cast<int>(k), inputs[k]);
  return finish(t, pre);
}

Var Mlp::operator()(Tape &t, Var x) const {
  const Var in[] = { x };
  return (*this)(t, in);
}

StudentModel::StudentModel(const StudentConfig &config,
                           ComponentVocabulary vocab, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)),
      params_(std::make_unique<ad::ParameterSet>()), init_rng_(seed) {
  const int h = config_.hidden;
  if (h < 1 || config_.iterations < 1)
    throw DomainError("hidden size and iterations must be positive");
  const int fa = kAtomFeatures, fc = kClusterFeatures;
  graph_mpn.f1 = make_mlp("graph.f1", { fa, kBondFeatures, h }, h);
  graph_mpn.f2 = make_mlp("graph.f2", { fa, h }, h);
  tree_mpn.f1 = make_mlp("tree.f1", { fc, kTreeEdgeFeatures, h }, h);
  tree_mpn.f2 = make_mlp("tree.f2", { fc, h }, h);
  f3 = make_mlp("f3", { h, h }, 1);
  f4 = make_mlp("f4", { h, h, h }, 1);
  f5 = make_mlp("f5", { fc }, h);
  f6 = make_mlp("f6", { h }, h);
  f7 = make_mlp("f7", { h }, h);
  f8 = make_mlp("f8", { h, h, h, h }, h);
  f9 = make_mlp("f9", { h }, h);
  f10 = make_mlp("f10", { h }, h);
  f11 = make_mlp("f11", { h }, h);
  f12 = make_mlp("f12", { h, h, h, h }, h);
  f13 = make_mlp("f13", { h, h }, h);

  const int v = std::max(vocab_.size(), 1);
  u_d = &params_->add("u_d", 1, h);
  ad::glorot_uniform(u_d->value, h, 1, init_rng_);
  u_l = &params_->add("u_l", h, v);
  ad::glorot_uniform(u_l->value, h, v, init_rng_);

  auto weight = [&](const std::string &name, int rows, int cols) {
    ad::Parameter *p = &params_->add("gru." + name, rows, cols);
    ad::glorot_uniform(p->value, rows, cols, init_rng_);
    return p;
  };
  auto bias = [&](const std::string &name) {
    return &params_->add("gru." + name, 1, h);
  };
  gru.wz = weight("wz", kClusterFeatures, h);
  gru.uz = weight("uz", h, h);
  gru.bz = bias("bz");
  gru.wr = weight("wr", kClusterFeatures, h);
  gru.ur = weight("ur", h, h);
  gru.br = bias("br");
  gru.wh = weight("wh", kClusterFeatures, h);
  gru.uh = weight("uh", h, h);
  gru.bh = bias("bh");
}

Mlp StudentModel::make_mlp(const std::string &name,
                           std::initializer_list<int> in, int out) {
  const int h = config_.hidden;
  int fan_in = 0;
  for (int n: in)
    fan_in += n;
  Mlp m;
  int k = 0;
  for (int n: in) {
    const std::string suffix =
        in.size() == 1 ? ".w1" : ".w1_" + std::to_string(k++);
    m.w1.push_back(&params_->add(name + suffix, n, h));
    ad::glorot_uniform(m.w1.back()->value, fan_in, h, init_rng_);
  }
  m.b1 = &params_->add(name + ".b1", 1, h);
  m.w2 = &params_->add(name + ".w2", h, out);
  ad::glorot_uniform(m.w2->value, h, out, init_rng_);
  m.b2 = &params_->add(name + ".b2", 1, out);
  return m;
}

Var mpn_encode(Tape &t, const Mpn &mpn, const GraphFeatures &f, int hidden,
               int iterations) {
  const int n = f.num_nodes();
  if (n == 0)
    throw DomainError("mpn_encode: empty graph");
  Var nodes = t.constant(f.nodes);
  Var incoming;
  if (f.num_edges() == 0) {
    incoming = t.constant(Matrix::Zero(n, hidden));
  } else {
    // Source-atom and edge terms do not change across iterations.
    Var fixed =
        ad::gather_rows(mpn.f1.project(t, 0, nodes), f.src)
        + mpn.f1.project(t, 1, t.constant(f.edges));
    Var m = mpn.f1.finish(t, fixed);
    for (int it = 1; it < iterations; ++it) {
      Var in_sum = ad::scatter_rows(m, f.dst, n);
      Var s = ad::gather_rows(in_sum, f.src) - ad::gather_rows(m, f.rev);
      m = mpn.f1.finish(t, fixed + mpn.f1.project(t, 2, s));
    }
    incoming = ad::scatter_rows(m, f.dst, n);
  }
  const Var parts[] = { nodes, incoming };
  return mpn.f2(t, parts);
}

Var graph_embedding(Var h) { return ad::mean_rows(h); }

Var center_logits(Tape &t, const StudentModel &m, Var h) {
  Var pre = ad::add_row(m.f3.project(t, 1, h),
                        m.f3.project(t, 0, graph_embedding(h)));
  return m.f3.finish(t, pre);
}

Var center_forward(Tape &t, const StudentModel &m, Var h) {
  return ad::softmax(center_logits(t, m, h));
}

Var center_loss(std::span<const double> s_te, Var logits) {
  return ad::kl_divergence(s_te, logits);
}

double center_loss(std::span<const double> s_te,
                   std::span<const double> s_st) {
  if (s_te.size() != s_st.size())
    throw DomainError("center_loss: length mismatch");
  double v = 0;
  for (std::size_t k = 0; k < s_te.size(); ++k) {
    if (s_te[k] <= 0)
      continue;
    if (s_st[k] <= 0)
      throw DomainError("center_loss: zero student probability at atom "
                        + std::to_string(k));
    v += s_te[k] * (std::log(s_te[k]) - std::log(s_st[k]));
  }
  return v;
}

int predict_center(std::span<const double> s_st, std::span<const int> ranks) {
  if (s_st.empty() || s_st.size() != ranks.size())
    throw DomainError("predict_center: bad input sizes");
  const double top = *std::max_element(s_st.begin(), s_st.end());
  int best = -1;
  for (int i = 0; i < static_cast<int>(s_st.size()); ++i) {
    if (top - s_st[i] > 1e-12)
      continue;
    if (best < 0 || ranks[i] < ranks[best])
      best = i;
  }
  return best;
}

std::vector<int> smiles_branch_order(const MolGraph &g, const BranchSet &set) {
  std::vector<int> order;
  write_smiles(g, {}, &order);
  std::vector<int> position(g.num_atoms(), 0);
  for (int k = 0; k < static_cast<int>(order.size()); ++k)
    position[order[k]] = k;
  const int nb = static_cast<int>(set.branches.size());
  std::vector<int> first(nb, std::numeric_limits<int>::max());
  for (int b = 0; b < nb; ++b) {
    const Branch &br = set.branches[b];
    for (const Anchor &a: br.anchors)
      first[b] = std::min(first[b], position[br.source_indices[a.atom]]);
  }
  std::vector<int> idx(nb);
  for (int b = 0; b < nb; ++b)
    idx[b] = b;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return first[a] < first[b]; });
  return idx;
}

std::vector<BranchStep> branch_forward(
    Tape &t, const StudentModel &m, Var h, int center,
    std::span<const std::vector<int>> branch_atoms,
    std::span<const int> forced) {
  if (!forced.empty() && forced.size() != branch_atoms.size())
    throw DomainError("branch_forward: forced flag count mismatch");
  const int hidden = static_cast<int>(h.cols());
  Var hc = ad::row(h, center);
  std::vector<Var> kept;
  std::vector<BranchStep> steps;
  for (std::size_t k = 0; k < branch_atoms.size(); ++k) {
    Var hb = ad::mean_rows(ad::gather_rows(h, branch_atoms[k]));
    Var hu = kept.empty() ? t.constant(Matrix::Zero(1, hidden))
                          : ad::mean_rows(ad::vcat(kept));
    const Var parts[] = { hc, hb, hu };
    Var p = ad::sigmoid(m.f4(t, parts));
    const bool keep = forced.empty() ? p.scalar() >= 0.5 : forced[k] != 0;
    steps.push_back({ p, keep });
    if (keep)
      kept.push_back(hb);
  }
  return steps;
}

Var branch_loss(std::span<const BranchStep> steps,
                std::span<const double> flags) {
  if (steps.empty())
    throw DomainError("branch_loss: no branches");
  std::vector<Var> probs;
  for (const BranchStep &s: steps)
    probs.push_back(s.prob);
  return ad::binary_cross_entropy(ad::vcat(probs), flags);
}

double branch_loss(std::span<const double> flags, std::span<const double> p) {
  if (flags.size() != p.size())
    throw DomainError("branch_loss: length mismatch");
  double v = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = std::clamp(p[k], ad::kProbFloor, 1.0 - ad::kProbFloor);
    v -= flags[k] * std::log(pk) + (1.0 - flags[k]) * std::log(1.0 - pk);
  }
  return v;
}

MolGraph build_R(const MolGraph &x, const BranchSet &set,
                 std::span<const int> preserved) {
  std::vector<AttachPart> parts;
  for (int k: preserved) {
    const Branch &b = set.branches[k];
    parts.push_back({ &b.fragment, b.anchors });
  }
  return merge_disjoint(x.atom(set.center), parts);
}

MolGraph build_A(const PolishAnnotation &ann) {
  std::vector<AttachPart> parts;
  for (int k: ann.added) {
    const Branch &b = ann.target_branches.branches[k];
    parts.push_back({ &b.fragment, b.anchors });
  }
  return merge_disjoint(ann.mapped_atom, parts);
}

ViewInputs view_inputs(const MolGraph &x, const MolGraph &r) {
  return { graph_features(x), graph_features(r),
           tree_features(x, decompose(x)), tree_features(r, decompose(r)) };
}

EncodedViews encode_views(Tape &t, const StudentModel &m, const ViewInputs &in,
                          Var hx) {
  const int h = m.config().hidden, it = m.config().iterations;
  EncodedViews v;
  v.xg = hx.valid() ? hx : mpn_encode(t, m.graph_mpn, in.xg, h, it);
  v.rg = mpn_encode(t, m.graph_mpn, in.rg, h, it);
  v.xt = mpn_encode(t, m.tree_mpn, in.xt, h, it);
  v.rt = mpn_encode(t, m.tree_mpn, in.rt, h, it);
  return v;
}

Attention attend(Var query, Var keys) {
  Attention a;
  a.weights = ad::softmax(ad::matmul(keys, ad::transpose(query)));
  a.context = ad::matmul(ad::transpose(a.weights), keys);
  return a;
}

DecodeTarget decode_target(const AssemblyPlan &plan,
                           const ComponentVocabulary &vocab) {
  DecodeTarget target;
  target.clusters = plan.clusters;
  target.parent = plan.parent;
  for (const MolGraph &c: plan.clusters)
    target.labels.push_back(vocab.lookup(write_smiles(c)).value_or(-1));
  return target;
}

namespace {
  struct Message {
    int from;
    Var value;
  };

  class TreeDecoder {
  public:
    TreeDecoder(Tape &t, const StudentModel &m, const EncodedViews &views)
        : t_(t), m_(m), views_(views), hidden_(m.config().hidden) { }

    DecodeTrace run(const MolGraph &root, const DecodeTarget *force);

  private:
    Var sum_incoming(int node, int exclude) const;
    Var gru(int node, int exclude);
    std::array<Var, 4> contexts(Var query, std::array<Var, 4> *weights);
    int add_node(MolGraph cluster, int label, int parent);

    Tape &t_;
    const StudentModel &m_;
    const EncodedViews &views_;
    int hidden_;
    DecodeTrace trace_;
    std::vector<Var> features_;
    std::vector<std::vector<Message>> inbox_;
  };

  Var TreeDecoder::sum_incoming(int node, int exclude) const {
    std::vector<Var> msgs;
    for (const Message &msg: inbox_[node]) {
      if (msg.from != exclude)
        msgs.push_back(msg.value);
    }
    if (msgs.empty())
      return t_.constant(Matrix::Zero(1, hidden_));
    return ad::sum_rows(ad::vcat(msgs));
  }

  Var TreeDecoder::gru(int node, int exclude) {
    const TreeGru &g = m_.gru;
    Var x = features_[node];
    Var s = sum_incoming(node, exclude);
    Var z = ad::sigmoid(ad::add(
        ad::add(ad::matmul(x, t_.param(*g.wz)), ad::matmul(s, t_.param(*g.uz))),
        t_.param(*g.bz)));
    Var xr = ad::add(ad::matmul(x, t_.param(*g.wr)), t_.param(*g.br));
    std::vector<Var> gated;
    for (const Message &msg: inbox_[node]) {
      if (msg.from == exclude)
        continue;
      Var r = ad::sigmoid(ad::add(xr, ad::matmul(msg.value, t_.param(*g.ur))));
      gated.push_back(ad::cmul(r, msg.value));
    }
    Var gated_sum = gated.empty() ? t_.constant(Matrix::Zero(1, hidden_))
                                  : ad::sum_rows(ad::vcat(gated));
    Var cand = ad::tanh(ad::add(ad::add(ad::matmul(x, t_.param(*g.wh)),
                                        ad::matmul(gated_sum, t_.param(*g.uh))),
                                t_.param(*g.bh)));
    return ad::add(ad::cmul(ad::one_minus(z), s), ad::cmul(z, cand));
  }

  std::array<Var, 4> TreeDecoder::contexts(Var query,
                                           std::array<Var, 4> *weights) {
    const Var keys[] = { views_.xg, views_.rg, views_.xt, views_.rt };
    std::array<Var, 4> out;
    for (int k = 0; k < 4; ++k) {
      const Attention a = attend(query, keys[k]);
      out[k] = a.context;
      if (weights != nullptr)
        (*weights)[k] = a.weights;
    }
    return out;
  }

  int TreeDecoder::add_node(MolGraph cluster, int label, int parent) {
    features_.push_back(t_.constant(cluster_features(cluster)));
    trace_.clusters.push_back(std::move(cluster));
    trace_.labels.push_back(label);
    trace_.parent.push_back(parent);
    inbox_.emplace_back();
    return trace_.num_nodes() - 1;
  }

  DecodeTrace TreeDecoder::run(const MolGraph &root,
                               const DecodeTarget *force) {
    const int budget = m_.config().max_decode_nodes;
    const ComponentVocabulary &vocab = m_.vocab();
    std::vector<std::vector<int>> target_children;
    if (force != nullptr) {
      target_children.resize(force->clusters.size());
      for (std::size_t k = 1; k < force->clusters.size(); ++k)
        target_children[force->parent[k]].push_back(static_cast<int>(k));
    }
    std::vector<std::size_t> next_child;

    add_node(root, -1, -1);
    next_child.push_back(0);
    int cur = 0;
    for (;;) {
      DecodeStep step;
      step.node = cur;
      Var ht = ad::relu(ad::add(m_.f5(t_, features_[cur]),
                                m_.f6(t_, sum_incoming(cur, -1))));
      const std::array<Var, 4> cd = contexts(m_.f9(t_, ht), &step.topo_attention);
      Var hidden = ad::relu(ad::add(m_.f7(t_, ht), m_.f8(t_, cd)));
      step.p = ad::sigmoid(ad::dot(hidden, t_.param(*m_.u_d)));

      int forced_child = -1;
      if (force != nullptr) {
        if (next_child[cur] < target_children[cur].size())
          forced_child = target_children[cur][next_child[cur]];
        step.expand = forced_child >= 0;
      } else {
        step.expand = step.p.scalar() >= 0.5;
      }

      if (step.expand) {
        if (force == nullptr && trace_.num_nodes() >= budget)
          throw BudgetExceeded("tree decoder exceeded "
                               + std::to_string(budget) + " nodes");
        step.message = gru(cur, -1);
        const std::array<Var, 4> cl = contexts(m_.f10(t_, step.message), nullptr);
        Var lh = ad::relu(
            ad::add(m_.f11(t_, step.message), m_.f12(t_, cl)));
        step.q = ad::transpose(ad::matmul(lh, t_.param(*m_.u_l)));
        MolGraph cluster;
        if (force != nullptr) {
          ++next_child[cur];
          step.label = force->labels[forced_child];
          cluster = force->clusters[forced_child];
        } else {
          if (vocab.size() == 0)
            throw DomainError("tree decoder has an empty vocabulary");
          Eigen::Index best;
          step.q.value().col(0).head(vocab.size()).maxCoeff(&best);
          step.label = static_cast<int>(best);
          cluster = vocab.entry(step.label).graph;
        }
        const int child = add_node(std::move(cluster), step.label, cur);
        next_child.push_back(0);
        inbox_[child].push_back({ cur, step.message });
        trace_.steps.push_back(std::move(step));
        cur = child;
        continue;
      }

      if (cur == 0) {
        trace_.steps.push_back(std::move(step));
        break;
      }
      const int parent = trace_.parent[cur];
      step.message = gru(cur, parent);
      inbox_[parent].push_back({ cur, step.message });
      trace_.steps.push_back(std::move(step));
      cur = parent;
    }
    return std::move(trace_);
  }
}  // namespace

DecodeTrace tree_decode(Tape &t, const StudentModel &m,
                        const EncodedViews &views, const MolGraph &root,
                        const DecodeTarget *force) {
  if (force != nullptr
      && (force->clusters.empty() || force->parent.size() != force->clusters.size()
          || force->labels.size() != force->clusters.size()))
    throw DomainError("tree_decode: malformed target");
  return TreeDecoder(t, m, views).run(root, force);
}

DecodeLosses decode_losses(Tape &t, const DecodeTrace &trace) {
  std::vector<Var> probs;
  std::vector<double> targets;
  std::vector<Var> labels;
  for (const DecodeStep &s: trace.steps) {
    probs.push_back(s.p);
    targets.push_back(s.expand ? 1.0 : 0.0);
    if (s.expand && s.label >= 0)
      labels.push_back(ad::cross_entropy(s.q, s.label));
  }
  DecodeLosses out;
  out.topo = ad::binary_cross_entropy(ad::vcat(probs), targets);
  out.label = labels.empty() ? t.scalar(0.0) : ad::sum_rows(ad::vcat(labels));
  return out;
}

Var graph_decode_score(Tape &t, const StudentModel &m,
                       const GraphFeatures &candidate,
                       const EncodedViews &views) {
  Var hd = mpn_encode(t, m.graph_mpn, candidate, m.config().hidden,
                      m.config().iterations);
  const Var guide[] = { ad::sum_rows(views.xg), ad::sum_rows(views.rg) };
  return ad::dot(ad::sum_rows(hd), m.f13(t, guide));
}

Var assembly_loss(Var scores, int truth) {
  if (truth < 0 || truth >= scores.rows())
    throw DomainError("assembly_loss: truth out of range");
  return ad::logsumexp(scores) - ad::row(scores, truth);
}

double assembly_loss(std::span<const double> scores, int truth) {
  if (truth < 0 || truth >= static_cast<int>(scores.size()))
    throw DomainError("assembly_loss: truth out of range");
  const double m = *std::max_element(scores.begin(), scores.end());
  double total = 0;
  for (double s: scores)
    total += std::exp(s - m);
  return m + std::log(total) - scores[truth];
}

MolGraph merge_final(const MolGraph &r, const MolGraph &a) {
  if (r.empty() || a.empty())
    throw DomainError("merge_final: empty operand");
  std::vector<AtomSpec> atoms(r.atoms().begin(), r.atoms().end());
  atoms[0] = a.atom(0);
  const int offset = r.num_atoms() - 1;
  for (int i = 1; i < a.num_atoms(); ++i)
    atoms.push_back(a.atom(i));
  std::vector<Bond> bonds(r.bonds().begin(), r.bonds().end());
  auto map = [&](int i) { return i == 0 ? 0 : i + offset; };
  for (const Bond &b: a.bonds())
    bonds.push_back({ map(b.begin), map(b.end), b.order });
  return MolGraph(std::move(atoms), std::move(bonds));
}

}  // namespace polish
