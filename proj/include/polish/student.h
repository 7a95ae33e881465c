//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_STUDENT_H_
#define POLISH_STUDENT_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polish/autodiff.h"
#include "polish/branch.h"
#include "polish/juncttree.h"
#include "polish/molgraph.h"
#include "polish/teacher.h"

namespace polish {

struct StudentConfig {
  int hidden = 64;
  int iterations = 4;
  int max_decode_nodes = 30;
  // Candidates scored per tree node during training; the ground truth is
  // always kept.
  int max_train_candidates = 64;
};

// Input encoding of a graph or junction tree for message passing. Each
// undirected edge appears as two directed edges; rev[e] is the opposite one.
struct GraphFeatures {
  Eigen::MatrixXd nodes;
  Eigen::MatrixXd edges;
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> rev;

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_edges() const { return static_cast<int>(src.size()); }
};

inline constexpr int kAtomFeatures = 28;
inline constexpr int kBondFeatures = 5;
inline constexpr int kClusterFeatures = 19;
inline constexpr int kTreeEdgeFeatures = 3;

GraphFeatures graph_features(const MolGraph &g);
GraphFeatures tree_features(const MolGraph &g, const JunctionTree &t);

// Kind of a standalone cluster graph: one atom, a ring system, or a bond.
ClusterKind cluster_kind_of(const MolGraph &cluster);
Eigen::RowVectorXd cluster_features(const MolGraph &cluster);

// Single-hidden-layer ReLU perceptron W2 relu(sum_k x_k W1_k + b1) + b2 over
// row inputs. The first layer is split by input block, which equals one
// matrix over the concatenated input.
struct Mlp {
  std::vector<ad::Parameter *> w1;
  ad::Parameter *b1 = nullptr;
  ad::Parameter *w2 = nullptr;
  ad::Parameter *b2 = nullptr;

  // x W1_k, the first-layer contribution of input block k.
  ad::Var project(ad::Tape &t, int k, ad::Var x) const;
  // Output from the summed first-layer contributions.
  ad::Var finish(ad::Tape &t, ad::Var pre) const;

  ad::Var operator()(ad::Tape &t, std::span<const ad::Var> inputs) const;
  ad::Var operator()(ad::Tape &t, ad::Var x) const;
};

struct Mpn {
  Mlp f1;  // message
  Mlp f2;  // node readout
};

struct TreeGru {
  ad::Parameter *wz, *uz, *bz;
  ad::Parameter *wr, *ur, *br;
  ad::Parameter *wh, *uh, *bh;
};

class StudentModel {
public:
  StudentModel(const StudentConfig &config, ComponentVocabulary vocab,
               std::uint64_t seed);
  StudentModel(const StudentModel &) = delete;
  StudentModel &operator=(const StudentModel &) = delete;

  const StudentConfig &config() const { return config_; }
  const ComponentVocabulary &vocab() const { return vocab_; }
  ad::ParameterSet &params() { return *params_; }
  const ad::ParameterSet &params() const { return *params_; }
  std::size_t parameter_count() const { return params_->scalar_count(); }

  Mpn graph_mpn;
  Mpn tree_mpn;
  Mlp f3;  // center score
  Mlp f4;  // branch preservation
  Mlp f5, f6, f7, f8, f9;  // topological head
  Mlp f10, f11, f12;  // label head
  Mlp f13;  // candidate scoring
  ad::Parameter *u_d = nullptr;  // 1 x hidden
  ad::Parameter *u_l = nullptr;  // hidden x vocab
  TreeGru gru;

private:
  Mlp make_mlp(const std::string &name, std::initializer_list<int> in,
               int out);

  StudentConfig config_;
  ComponentVocabulary vocab_;
  std::unique_ptr<ad::ParameterSet> params_;
  std::mt19937_64 init_rng_;
};

// Node embeddings after `iterations` rounds of message passing, m^0 = 0.
ad::Var mpn_encode(ad::Tape &t, const Mpn &mpn, const GraphFeatures &f,
                   int hidden, int iterations);

// Mean of node embeddings.
ad::Var graph_embedding(ad::Var h);

// Per-atom center logits s_i, n x 1.
ad::Var center_logits(ad::Tape &t, const StudentModel &m, ad::Var h);
// Softmax of center_logits.
ad::Var center_forward(ad::Tape &t, const StudentModel &m, ad::Var h);

ad::Var center_loss(std::span<const double> s_te, ad::Var logits);
// KL(s_te || s_st); throws DomainError where s_st is zero and s_te is not.
double center_loss(std::span<const double> s_te, std::span<const double> s_st);

// Argmax; ties within 1e-12 go to the smallest rank.
int predict_center(std::span<const double> s_st, std::span<const int> ranks);

// Branch indices sorted by the first appearance of an anchor in the
// canonical SMILES of g.
std::vector<int> smiles_branch_order(const MolGraph &g, const BranchSet &set);

struct BranchStep {
  ad::Var prob;
  bool preserved;
};

// branch_atoms[k] lists the source atoms of the k-th branch in visiting order.
// With forced 0/1 flags the preserved set follows them, otherwise p >= 0.5.
std::vector<BranchStep> branch_forward(
    ad::Tape &t, const StudentModel &m, ad::Var h, int center,
    std::span<const std::vector<int>> branch_atoms,
    std::span<const int> forced = {});

ad::Var branch_loss(std::span<const BranchStep> steps,
                    std::span<const double> flags);
double branch_loss(std::span<const double> flags, std::span<const double> p);

// Center (atom 0) plus the listed branches.
MolGraph build_R(const MolGraph &x, const BranchSet &set,
                 std::span<const int> preserved);
// Mapped center (atom 0) plus the added target branches.
MolGraph build_A(const PolishAnnotation &ann);

struct ViewInputs {
  GraphFeatures xg, rg, xt, rt;
};

ViewInputs view_inputs(const MolGraph &x, const MolGraph &r);

struct EncodedViews {
  ad::Var xg, rg, xt, rt;
};

// Shared graph MPN over X and R, shared tree MPN over their trees. hx may
// pass an already computed H^XG.
EncodedViews encode_views(ad::Tape &t, const StudentModel &m,
                          const ViewInputs &in, ad::Var hx = {});

struct Attention {
  ad::Var weights;  // n x 1, sums to one
  ad::Var context;  // 1 x hidden
};

Attention attend(ad::Var query, ad::Var keys);

// Ground-truth tree in realization order, for forced decoding.
struct DecodeTarget {
  std::vector<MolGraph> clusters;
  std::vector<int> labels;  // vocabulary ids, -1 when absent
  std::vector<int> parent;
};

DecodeTarget decode_target(const AssemblyPlan &plan,
                           const ComponentVocabulary &vocab);

struct DecodeStep {
  int node;
  ad::Var p;  // expand probability, 1 x 1
  bool expand;  // decision taken
  ad::Var q;  // label distribution logits (vocab x 1), expansions only
  int label = -1;  // label taken, -1 when forced to a label outside vocab
  ad::Var message;
  std::array<ad::Var, 4> topo_attention;
};

struct DecodeTrace {
  std::vector<DecodeStep> steps;
  std::vector<MolGraph> clusters;
  std::vector<int> labels;
  std::vector<int> parent;  // -1 at the root

  int num_nodes() const { return static_cast<int>(clusters.size()); }
};

// Depth-first decoding from the root cluster. Forced decoding follows the
// target; free decoding takes p >= 0.5 and argmax labels and throws
// BudgetExceeded past config.max_decode_nodes nodes.
DecodeTrace tree_decode(ad::Tape &t, const StudentModel &m,
                        const EncodedViews &views, const MolGraph &root,
                        const DecodeTarget *force = nullptr);

struct DecodeLosses {
  ad::Var topo;
  ad::Var label;  // zero when no label step is in the vocabulary
};

DecodeLosses decode_losses(ad::Tape &t, const DecodeTrace &trace);

// f^s(G) = sum_k h_k . f13([sum H^XG, sum H^RG]).
ad::Var graph_decode_score(ad::Tape &t, const StudentModel &m,
                           const GraphFeatures &candidate,
                           const EncodedViews &views);

// -(s* - logsumexp(s)); scores is n x 1.
ad::Var assembly_loss(ad::Var scores, int truth);
double assembly_loss(std::span<const double> scores, int truth);

// Joins R and A at their atom 0; A's atom 0 supplies the center attributes.
// Throws ValenceError.
MolGraph merge_final(const MolGraph &r, const MolGraph &a);

}  // namespace polish

#endif  // POLISH_STUDENT_H_
