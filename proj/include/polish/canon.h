//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_CANON_H_
#define POLISH_CANON_H_

#include <span>
#include <vector>

#include "polish/molgraph.h"

namespace polish {

struct CanonOptions {
  // Hydrogen counts (and whether they are explicit) take part in ranking and
  // output. Disabled for match keys, which compare heavy-atom attributes.
  bool hydrogens = true;
  bool isotopes = true;
};

// Neighborhood-refined equivalence classes without tie breaking. Class ids
// are ordered by invariant value, so they are comparable across graphs.
std::vector<int> refined_classes(const MolGraph &g,
                                 const CanonOptions &opts = {},
                                 std::span<const int> atom_classes = {});

// Canonical atom ranks 0..n-1, invariant under atom renumbering. Optional
// per-atom classes (empty, or one entry per atom) refine the initial
// invariants and are treated as part of the atom identity. Residual ties are
// split in refined-class order, lowest atom index first.
std::vector<int> canonical_rank(const MolGraph &g,
                                const CanonOptions &opts = {},
                                std::span<const int> atom_classes = {});

}  // namespace polish

#endif  // POLISH_CANON_H_
