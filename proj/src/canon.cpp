//
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <numeric>
#include <span>
#include <vector>

#include "polish/canon.h"
#include "polish/molgraph.h"

namespace polish {
namespace {
  // Assigns dense class ids to atoms ordered by key; equal keys share an id.
  template <class Key>
  int dense_classes(const std::vector<Key> &keys, std::vector<int> &classes) {
    const int n = static_cast<int>(keys.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return keys[a] < keys[b]; });

    int next = -1;
    for (int k = 0; k < n; ++k) {
      if (k == 0 || keys[order[k - 1]] < keys[order[k]])
        ++next;
      classes[order[k]] = next;
    }
    return next + 1;
  }

  int refine(const MolGraph &g, std::vector<int> &classes, int num_classes) {
    const int n = g.num_atoms();
    std::vector<std::vector<int>> signatures(n);
    while (num_classes < n) {
      for (int i = 0; i < n; ++i) {
        std::vector<int> &sig = signatures[i];
        sig.clear();
        sig.push_back(classes[i]);
        const std::size_t start = sig.size();
        for (const Neighbor &nb: g.neighbors(i)) {
          const int order = static_cast<int>(g.bond(nb.bond).order);
          sig.push_back(classes[nb.atom] * 8 + order);
        }
        std::sort(sig.begin() + static_cast<std::ptrdiff_t>(start), sig.end());
      }
      const int refined = dense_classes(signatures, classes);
      if (refined == num_classes)
        break;
      num_classes = refined;
    }
    return num_classes;
  }

  std::vector<int> initial_classes(const MolGraph &g, const CanonOptions &opts,
                                   std::span<const int> atom_classes,
                                   int &num_classes) {
    const int n = g.num_atoms();
    std::vector<std::array<int, 8>> initial(n);
    for (int i = 0; i < n; ++i) {
      const AtomSpec &atom = g.atom(i);
      initial[i] = {
        atom_classes.empty() ? 0 : atom_classes[i],
        atom.element,
        atom.aromatic ? 1 : 0,
        atom.formal_charge,
        g.degree(i),
        opts.hydrogens ? g.hydrogen_count(i) : 0,
        opts.hydrogens && atom.explicit_h ? 1 : 0,
        opts.isotopes ? atom.isotope.value_or(0) : 0,
      };
    }
    std::vector<int> classes(n);
    num_classes = dense_classes(initial, classes);
    return classes;
  }
}  // namespace

std::vector<int> refined_classes(const MolGraph &g, const CanonOptions &opts,
                                 std::span<const int> atom_classes) {
  int num_classes = 0;
  std::vector<int> classes =
      initial_classes(g, opts, atom_classes, num_classes);
  refine(g, classes, num_classes);
  return classes;
}

std::vector<int> canonical_rank(const MolGraph &g, const CanonOptions &opts,
                                std::span<const int> atom_classes) {
  const int n = g.num_atoms();
  int num_classes = 0;
  std::vector<int> classes =
      initial_classes(g, opts, atom_classes, num_classes);
  num_classes = refine(g, classes, num_classes);

  // Break residual ties: the lowest tied class gives up its first member,
  // then refinement propagates the split.
  while (num_classes < n) {
    std::vector<int> count(num_classes, 0);
    for (int c: classes)
      ++count[c];
    const int tied = static_cast<int>(
        std::find_if(count.begin(), count.end(), [](int c) { return c > 1; })
        - count.begin());
    const int chosen = static_cast<int>(
        std::find(classes.begin(), classes.end(), tied) - classes.begin());

    std::vector<int> keys(n);
    for (int i = 0; i < n; ++i)
      keys[i] = classes[i] * 2 + (classes[i] == tied && i != chosen ? 1 : 0);
    num_classes = dense_classes(keys, classes);
    num_classes = refine(g, classes, num_classes);
  }
  return classes;
}

}  // namespace polish
