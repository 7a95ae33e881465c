//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/molgraph.h"

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polish/elements.h"
#include "polish/error.h"

namespace polish {
bool accepts_aromatic_bond(const AtomSpec &atom) {
  return atom.aromatic || atom.element == kDummyElement;
}

int bond_valence(BondOrder order) {
  switch (order) {
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  case BondOrder::kSingle:
  case BondOrder::kAromatic:
    break;
  }
  return 1;
}

std::optional<int> implicit_hydrogens(const AtomSpec &atom, int bond_sum,
                                      bool has_aromatic_bond) {
  const std::span<const int> valences =
      standard_valences(atom.element, atom.formal_charge);
  if (valences.empty())
    return 0;

  auto it = std::find_if(valences.begin(), valences.end(),
                         [&](int v) { return v >= bond_sum; });
  if (it == valences.end())
    return std::nullopt;

  int used = bond_sum;
  if (atom.aromatic && has_aromatic_bond) {
    // Aromatic carbon has no lone pair to donate, so it needs the pi bond.
    if (bond_sum + 1 <= *it)
      ++used;
    else if (atom.element == 6)
      return std::nullopt;
  }
  return *it - used;
}

MolGraph::MolGraph(std::vector<AtomSpec> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)),
      adjacency_(atoms_.size()), hydrogens_(atoms_.size(), 0) {
  const int n = num_atoms();
  for (int b = 0; b < num_bonds(); ++b) {
    const Bond &bond = bonds_[b];
    if (bond.begin < 0 || bond.end < 0 || bond.begin >= n || bond.end >= n)
      throw Error("bond " + std::to_string(b) + " references a missing atom");
    if (bond.begin == bond.end)
      throw Error("self-loop on atom " + std::to_string(bond.begin));
    if (bond.order == BondOrder::kAromatic && (!accepts_aromatic_bond(atoms_[bond.begin])
        || !accepts_aromatic_bond(atoms_[bond.end])))
      throw Error("aromatic bond between non-aromatic atoms "
                  + std::to_string(bond.begin) + " and "
                  + std::to_string(bond.end));
    adjacency_[bond.begin].push_back({ bond.end, b });
    adjacency_[bond.end].push_back({ bond.begin, b });
  }

  for (int i = 0; i < n; ++i) {
    const AtomSpec &atom = atoms_[i];
    if (atom.element < 0 || atom.element > kMaxElement)
      throw Error("invalid element on atom " + std::to_string(i));
    if (atom.aromatic && !is_aromatizable(atom.element))
      throw Error("aromatic flag on non-aromatizable atom "
                  + std::to_string(i));

    std::vector<int> seen;
    seen.reserve(adjacency_[i].size());
    for (const Neighbor &nb: adjacency_[i]) {
      if (std::find(seen.begin(), seen.end(), nb.atom) != seen.end())
        throw Error("parallel bonds between atoms " + std::to_string(i)
                    + " and " + std::to_string(nb.atom));
      seen.push_back(nb.atom);
    }

    if (atom.element == kDummyElement)
      continue;

    const int sum = valence_sum(i);
    bool has_aromatic = false;
    for (const Neighbor &nb: adjacency_[i])
      has_aromatic |= bonds_[nb.bond].order == BondOrder::kAromatic;

    if (atom.explicit_h) {
      hydrogens_[i] = *atom.explicit_h;
    } else {
      const std::optional<int> h = implicit_hydrogens(atom, sum, has_aromatic);
      if (!h)
        throw ValenceError(i, "valence exceeded on atom " + std::to_string(i));
      hydrogens_[i] = *h;
    }

    const std::span<const int> valences =
        standard_valences(atom.element, atom.formal_charge);
    if (!valences.empty() && sum + hydrogens_[i] > valences.back())
      throw ValenceError(i, "valence exceeded on atom " + std::to_string(i));
  }
}

int MolGraph::valence_sum(int i) const {
  int sum = 0;
  for (const Neighbor &nb: adjacency_[i])
    sum += bond_valence(bonds_[nb.bond].order);
  return sum;
}

int MolGraph::find_bond(int a, int b) const {
  for (const Neighbor &nb: adjacency_[a]) {
    if (nb.atom == b)
      return nb.bond;
  }
  return -1;
}

std::vector<int> MolGraph::component_ids() const {
  std::vector<int> comp(atoms_.size(), -1);
  std::vector<int> stack;
  int next = 0;
  for (int root = 0; root < num_atoms(); ++root) {
    if (comp[root] >= 0)
      continue;
    comp[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: adjacency_[a]) {
        if (comp[nb.atom] < 0) {
          comp[nb.atom] = next;
          stack.push_back(nb.atom);
        }
      }
    }
    ++next;
  }
  return comp;
}

int MolGraph::num_components() const {
  const std::vector<int> comp = component_ids();
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

MolGraph MolGraph::subgraph(std::span<const int> atoms) const {
  std::vector<int> index(atoms_.size(), -1);
  std::vector<AtomSpec> sub_atoms;
  sub_atoms.reserve(atoms.size());
  for (int k = 0; k < static_cast<int>(atoms.size()); ++k) {
    index[atoms[k]] = k;
    sub_atoms.push_back(atoms_[atoms[k]]);
  }

  std::vector<Bond> sub_bonds;
  for (const Bond &bond: bonds_) {
    if (index[bond.begin] >= 0 && index[bond.end] >= 0)
      sub_bonds.push_back({ index[bond.begin], index[bond.end], bond.order });
  }
  return MolGraph(std::move(sub_atoms), std::move(sub_bonds));
}

MolGraph MolGraph::permuted(std::span<const int> perm) const {
  std::vector<AtomSpec> atoms(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i)
    atoms[perm[i]] = atoms_[i];

  std::vector<Bond> bonds;
  bonds.reserve(bonds_.size());
  for (const Bond &bond: bonds_)
    bonds.push_back({ perm[bond.begin], perm[bond.end], bond.order });
  return MolGraph(std::move(atoms), std::move(bonds));
}

std::vector<bool> MolGraph::ring_bonds() const {
  // A bond lies on a cycle iff it is not a bridge. Bridges via iterative DFS
  // low-link values; every non-tree bond closes a cycle.
  const int n = num_atoms();
  std::vector<bool> ring(bonds_.size(), true);
  std::vector<int> depth(n, -1), low(n, 0);

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;

  for (int root = 0; root < n; ++root) {
    if (depth[root] >= 0)
      continue;
    depth[root] = low[root] = 0;
    stack.push_back({ root, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.next < adjacency_[f.atom].size()) {
        const Neighbor nb = adjacency_[f.atom][f.next++];
        if (nb.bond == f.parent_bond)
          continue;
        if (depth[nb.atom] < 0) {
          depth[nb.atom] = low[nb.atom] = depth[f.atom] + 1;
          stack.push_back({ nb.atom, nb.bond, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], depth[nb.atom]);
        }
        continue;
      }

      const Frame done = f;
      stack.pop_back();
      if (done.parent_bond >= 0) {
        const int parent = bonds_[done.parent_bond].other(done.atom);
        low[parent] = std::min(low[parent], low[done.atom]);
        if (low[done.atom] > depth[parent])
          ring[done.parent_bond] = false;
      }
    }
  }
  return ring;
}

std::vector<bool> MolGraph::ring_atoms() const {
  const std::vector<bool> ring = ring_bonds();
  std::vector<bool> atoms(atoms_.size(), false);
  for (int b = 0; b < num_bonds(); ++b) {
    if (ring[b]) {
      atoms[bonds_[b].begin] = true;
      atoms[bonds_[b].end] = true;
    }
  }
  return atoms;
}

}  // namespace polish
