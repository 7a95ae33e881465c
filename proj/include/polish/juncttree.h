//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_JUNCTTREE_H_
#define POLISH_JUNCTTREE_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polish/molgraph.h"

namespace polish {

// Smallest set of smallest rings; each ring lists its atoms in cycle order.
std::vector<std::vector<int>> sssr(const MolGraph &g);

enum class ClusterKind {
  kRing,
  kBond,
  kSingleton,
};

struct Cluster {
  std::vector<int> atoms;  // sorted parent-graph indices
  ClusterKind kind;
};

struct JunctionTree {
  std::vector<Cluster> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;  // sorted
  int root = 0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }

  // Depth-first preorder from the root; children in ascending node order.
  std::vector<int> preorder() const;
  // Parent per node in the rooted tree, -1 at the root.
  std::vector<int> parents() const;
};

// Clusters: SSSR rings (rings sharing more than two atoms, or two unbonded
// atoms, are merged) and non-ring bonds; atoms in three or more clusters get a
// singleton cluster. Tree = maximum spanning tree over cluster overlaps.
// Nodes are numbered in a canonical order, so the result does not depend on
// the input atom order beyond canonical-rank ties.
JunctionTree decompose(const MolGraph &g);

// As above, with root_atom forced into a singleton root cluster.
JunctionTree decompose(const MolGraph &g, int root_atom);

// Clusters containing each atom form a connected subtree.
bool running_intersection(const JunctionTree &t, int num_atoms);

// Induced subgraph on the cluster atoms, in cluster order.
MolGraph cluster_graph(const MolGraph &g, const Cluster &c);

// Canonical SMILES of the cluster graph; the vocabulary key.
std::string cluster_key(const MolGraph &g, const Cluster &c);

class ComponentVocabulary {
public:
  struct Entry {
    std::string smiles;
    long count = 0;
    MolGraph graph;
  };

  ComponentVocabulary() = default;
  explicit ComponentVocabulary(std::vector<Entry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  const Entry &entry(int id) const { return entries_[id]; }
  std::optional<int> lookup(const std::string &smiles) const;

  void write(std::ostream &os) const;
  static ComponentVocabulary read(std::istream &is);

private:
  std::vector<Entry> entries_;
  std::map<std::string, int> index_;
};

// Ids by descending frequency, then key order.
ComponentVocabulary build_vocabulary(std::span<const MolGraph> corpus);
ComponentVocabulary build_vocabulary(
    std::span<const std::pair<const MolGraph *, const JunctionTree *>> trees);

// Local cluster atom -> global atom of the partial molecule.
struct Attachment {
  std::vector<std::pair<int, int>> overlap;

  bool operator==(const Attachment &) const = default;
};

// Molecule realized from the first k tree nodes of a plan.
struct PartialAssembly {
  MolGraph molecule;
  // Global atoms of each realized node, in the node's local atom order.
  std::vector<std::vector<int>> node_atoms;
};

struct AssemblyCandidate {
  Attachment attachment;
  PartialAssembly result;
  // Canonical SMILES of the result with atoms labelled by node membership.
  std::string key;
};

struct AssemblyOptions {
  std::size_t max_candidates = 2000;
};

// Starts a realization with the root cluster.
PartialAssembly start_assembly(const MolGraph &root);

// Places node (realized nodes are numbered in placement order) by overlapping
// cluster with the realized parent. Throws ValenceError or Error on an
// incompatible overlap.
PartialAssembly attach(const PartialAssembly &partial, const MolGraph &cluster,
                       int parent, const Attachment &attachment);

// Every valence-valid way to overlap cluster with its realized parent:
// one shared atom, or for ring-ring a shared bond in either orientation.
// Deduplicated by membership-labelled canonical SMILES, sorted by it,
// truncated to max_candidates. Throws NoValidAttachment when empty.
std::vector<AssemblyCandidate>
enumerate_assemblies(const PartialAssembly &partial, const MolGraph &cluster,
                     int parent, const AssemblyOptions &opts = {});

// Membership-labelled canonical key of a partial assembly.
std::string assembly_key(const PartialAssembly &partial);

// A tree in realization order: node k's parent precedes it.
struct AssemblyPlan {
  std::vector<MolGraph> clusters;
  std::vector<int> parent;  // -1 for node 0
  std::vector<Attachment> attachments;  // empty for node 0
  // Tree node of the source decomposition for each plan node.
  std::vector<int> tree_node;
};

// Ground-truth plan reproducing g from its decomposition, in preorder.
AssemblyPlan ground_truth_plan(const MolGraph &g, const JunctionTree &t);

// Replays attachments. Throws ValenceError on invalid overlaps.
MolGraph realize_molecule(const AssemblyPlan &plan);

}  // namespace polish

#endif  // POLISH_JUNCTTREE_H_
