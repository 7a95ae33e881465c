//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/isomorphism.h"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polish/canon.h"
#include "polish/smiles.h"

namespace polish {
namespace {
  constexpr CanonOptions kMatchCanon { .hydrogens = false, .isotopes = false };

  // Refines both graphs as one disjoint union so class ids are shared.
  std::pair<std::vector<int>, std::vector<int>>
  joint_classes(const MolGraph &a, const MolGraph &b) {
    std::vector<AtomSpec> atoms(a.atoms().begin(), a.atoms().end());
    atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
    std::vector<Bond> bonds(a.bonds().begin(), a.bonds().end());
    const int offset = a.num_atoms();
    for (const Bond &bond: b.bonds())
      bonds.push_back({ bond.begin + offset, bond.end + offset, bond.order });

    // Hydrogen handling is irrelevant for matching; strip explicit counts so
    // the union never trips a valence check the parts passed.
    for (AtomSpec &atom: atoms)
      atom.explicit_h = 0;
    const MolGraph joint(std::move(atoms), std::move(bonds));
    const std::vector<int> classes = refined_classes(joint, kMatchCanon);
    return {
      std::vector<int>(classes.begin(), classes.begin() + offset),
      std::vector<int>(classes.begin() + offset, classes.end()),
    };
  }

  class Matcher {
  public:
    Matcher(const MolGraph &a, const MolGraph &b, std::vector<int> ca,
            std::vector<int> cb)
        : a_(a), b_(b), ca_(std::move(ca)), cb_(std::move(cb)),
          map_(a.num_atoms(), -1), used_(b.num_atoms(), false) { }

    std::optional<std::vector<int>> run() {
      order_ = search_order();
      if (extend(0))
        return map_;
      return std::nullopt;
    }

  private:
    // BFS from the atom of the rarest class so every later atom has a mapped
    // neighbor to constrain it.
    std::vector<int> search_order() const {
      const int n = a_.num_atoms();
      std::vector<int> freq(2 * n + 1, 0);
      for (int c: ca_)
        ++freq[c];

      std::vector<int> order;
      std::vector<bool> seen(n, false);
      while (static_cast<int>(order.size()) < n) {
        int root = -1;
        for (int i = 0; i < n; ++i) {
          if (!seen[i] && (root < 0 || freq[ca_[i]] < freq[ca_[root]]))
            root = i;
        }
        seen[root] = true;
        std::size_t head = order.size();
        order.push_back(root);
        while (head < order.size()) {
          const int u = order[head++];
          for (const Neighbor &nb: a_.neighbors(u)) {
            if (!seen[nb.atom]) {
              seen[nb.atom] = true;
              order.push_back(nb.atom);
            }
          }
        }
      }
      return order;
    }

    bool feasible(int u, int v) const {
      if (ca_[u] != cb_[v] || used_[v])
        return false;
      for (const Neighbor &nb: a_.neighbors(u)) {
        const int image = map_[nb.atom];
        if (image < 0)
          continue;
        const int bond = b_.find_bond(v, image);
        if (bond < 0 || b_.bond(bond).order != a_.bond(nb.bond).order)
          return false;
      }
      return true;
    }

    bool extend(std::size_t depth) {
      if (depth == order_.size())
        return true;
      const int u = order_[depth];
      for (int v = 0; v < b_.num_atoms(); ++v) {
        if (!feasible(u, v))
          continue;
        map_[u] = v;
        used_[v] = true;
        if (extend(depth + 1))
          return true;
        map_[u] = -1;
        used_[v] = false;
      }
      return false;
    }

    const MolGraph &a_, &b_;
    std::vector<int> ca_, cb_;
    std::vector<int> map_;
    std::vector<bool> used_;
    std::vector<int> order_;
  };
}  // namespace

std::string match_key(const MolGraph &g) {
  return write_smiles(g, WriteOptions { .canon = kMatchCanon });
}

std::optional<std::vector<int>> find_isomorphism(const MolGraph &a,
                                                 const MolGraph &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return std::nullopt;
  if (a.empty())
    return std::vector<int>();

  auto [ca, cb] = joint_classes(a, b);
  std::vector<int> sa = ca, sb = cb;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb)
    return std::nullopt;

  return Matcher(a, b, std::move(ca), std::move(cb)).run();
}

bool graph_isomorphic(const MolGraph &a, const MolGraph &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  if (match_key(a) == match_key(b))
    return true;
  return find_isomorphism(a, b).has_value();
}

}  // namespace polish
