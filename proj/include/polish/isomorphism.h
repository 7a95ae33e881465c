//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_ISOMORPHISM_H_
#define POLISH_ISOMORPHISM_H_

#include <optional>
#include <string>
#include <vector>

#include "polish/molgraph.h"

namespace polish {

// Canonical SMILES over the matching attributes only (element, charge,
// aromatic flag, bond order). Equal for isomorphic graphs.
std::string match_key(const MolGraph &g);

// Backtracking search for an attribute-preserving bijection. Candidate
// images are restricted to atoms with the same refined invariant class.
// Result maps atoms of a to atoms of b.
std::optional<std::vector<int>> find_isomorphism(const MolGraph &a,
                                                 const MolGraph &b);

// Exact isomorphism: canonical-key equality short-circuits, otherwise the
// backtracking search decides.
bool graph_isomorphic(const MolGraph &a, const MolGraph &b);

}  // namespace polish

#endif  // POLISH_ISOMORPHISM_H_
