//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/branch.h"

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polish/canon.h"
#include "polish/elements.h"
#include "polish/isomorphism.h"
#include "polish/smiles.h"

namespace polish {

BranchSet branches_around(const MolGraph &g, int center,
                          std::span<const int> ranks) {
  std::vector<int> own_ranks;
  if (ranks.empty()) {
    own_ranks = canonical_rank(g);
    ranks = own_ranks;
  }

  const int n = g.num_atoms();
  std::vector<int> comp(n, -1);
  comp[center] = -2;
  std::vector<std::vector<int>> members;
  for (const Neighbor &start: g.neighbors(center)) {
    if (comp[start.atom] != -1)
      continue;
    const int id = static_cast<int>(members.size());
    std::vector<int> &atoms = members.emplace_back();
    std::vector<int> stack { start.atom };
    comp[start.atom] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      atoms.push_back(u);
      for (const Neighbor &nb: g.neighbors(u)) {
        if (comp[nb.atom] == -1) {
          comp[nb.atom] = id;
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(atoms.begin(), atoms.end());
  }

  std::vector<Branch> branches;
  std::vector<int> min_rank;
  branches.reserve(members.size());
  for (std::vector<int> &atoms: members) {
    Branch &b = branches.emplace_back();
    b.center = center;
    b.fragment = g.subgraph(atoms);
    int best = n;
    for (const Neighbor &nb: g.neighbors(center)) {
      const auto it = std::lower_bound(atoms.begin(), atoms.end(), nb.atom);
      if (it == atoms.end() || *it != nb.atom)
        continue;
      b.anchors.push_back({ static_cast<int>(it - atoms.begin()),
                            g.bond(nb.bond).order });
      best = std::min(best, ranks[nb.atom]);
    }
    std::sort(b.anchors.begin(), b.anchors.end(),
              [](const Anchor &x, const Anchor &y) { return x.atom < y.atom; });
    b.source_indices = std::move(atoms);
    b.key = canonical_branch_key(b);
    min_rank.push_back(best);
  }

  std::vector<int> order(branches.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return min_rank[x] < min_rank[y]; });

  BranchSet set;
  set.center = center;
  for (int k: order) {
    set.by_class[branches[k].key].push_back(
        static_cast<int>(set.branches.size()));
    set.branches.push_back(std::move(branches[k]));
  }
  return set;
}

MolGraph anchored_graph(const Branch &b) {
  std::vector<AtomSpec> atoms(b.fragment.atoms().begin(),
                              b.fragment.atoms().end());
  std::vector<Bond> bonds(b.fragment.bonds().begin(),
                          b.fragment.bonds().end());
  const int dummy = static_cast<int>(atoms.size());
  atoms.push_back({ .element = kDummyElement });
  for (const Anchor &a: b.anchors)
    bonds.push_back({ a.atom, dummy, a.order });
  return MolGraph(std::move(atoms), std::move(bonds));
}

std::string canonical_branch_key(const Branch &b) {
  return match_key(anchored_graph(b));
}

std::string anchored_smiles(const Branch &b) {
  return write_smiles(anchored_graph(b));
}

bool branch_isomorphic(const Branch &a, const Branch &b) {
  if (a.size() != b.size() || a.anchors.size() != b.anchors.size())
    return false;
  // Keys only group candidates; the search decides.
  return find_isomorphism(anchored_graph(a), anchored_graph(b)).has_value();
}

MolGraph merge_disjoint(const AtomSpec &center,
                        std::span<const AttachPart> parts) {
  std::vector<AtomSpec> atoms { center };
  std::vector<Bond> bonds;
  for (const AttachPart &part: parts) {
    const int offset = static_cast<int>(atoms.size());
    atoms.insert(atoms.end(), part.fragment->atoms().begin(),
                 part.fragment->atoms().end());
    for (const Bond &bond: part.fragment->bonds())
      bonds.push_back({ bond.begin + offset, bond.end + offset, bond.order });
    for (const Anchor &a: part.anchors)
      bonds.push_back({ 0, a.atom + offset, a.order });
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

}  // namespace polish
