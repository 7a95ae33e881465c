//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_BRANCH_H_
#define POLISH_BRANCH_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "polish/molgraph.h"

namespace polish {

struct Anchor {
  int atom;  // fragment atom index
  BondOrder order;

  bool operator==(const Anchor &) const = default;
};

// Connected component of a graph with its center atom removed.
struct Branch {
  int center = -1;
  // Sorted by fragment atom.
  std::vector<Anchor> anchors;
  MolGraph fragment;
  // Fragment atom -> parent atom.
  std::vector<int> source_indices;
  // Anchored canonical key; see canonical_branch_key.
  std::string key;

  int size() const { return fragment.num_atoms(); }
};

struct BranchSet {
  int center = -1;
  // Ordered by the smallest canonical rank among each branch's anchors.
  std::vector<Branch> branches;
  // Branch key -> indices into branches, in branch order.
  std::map<std::string, std::vector<int>> by_class;
};

// ranks: canonical ranks of g; computed when empty.
BranchSet branches_around(const MolGraph &g, int center,
                          std::span<const int> ranks = {});

// The fragment plus one '*' atom (the last atom) bonded to every anchor with
// its center-bond order.
MolGraph anchored_graph(const Branch &b);

// Canonical SMILES of the anchored graph over matching attributes only.
std::string canonical_branch_key(const Branch &b);

// Full canonical SMILES of the anchored graph, '*' marking the center.
std::string anchored_smiles(const Branch &b);

bool branch_isomorphic(const Branch &a, const Branch &b);

struct AttachPart {
  const MolGraph *fragment;
  std::vector<Anchor> anchors;
};

// Center atom (index 0) followed by every part's atoms in order, with
// center-to-anchor bonds. Throws ValenceError if any atom, the center in
// particular, exceeds its maximum valence.
MolGraph merge_disjoint(const AtomSpec &center,
                        std::span<const AttachPart> parts);

}  // namespace polish

#endif  // POLISH_BRANCH_H_
