//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_SMILES_H_
#define POLISH_SMILES_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polish/canon.h"
#include "polish/molgraph.h"

namespace polish {

struct ParseOptions {
  // '.'-separated components; rejected for molecule inputs.
  bool allow_disconnected = false;
  // '*' attachment atoms, used for anchored fragments.
  bool allow_wildcard = false;
};

// Parses the supported SMILES subset. Atoms are numbered in order of first
// appearance. Throws SmilesError carrying the 0-based byte offset.
MolGraph parse_smiles(std::string_view text, const ParseOptions &opts = {});

struct WriteOptions {
  CanonOptions canon;
  // When non-empty, every atom is written in brackets with ":class".
  std::span<const int> atom_classes;
};

// Canonical SMILES. If output_order is given it receives the atom indices in
// the order they appear in the string.
std::string write_smiles(const MolGraph &g, const WriteOptions &opts = {},
                         std::vector<int> *output_order = nullptr);

// SMILES following the supplied ranks instead of canonical ones.
std::string write_smiles_ranked(const MolGraph &g, std::span<const int> ranks,
                                const WriteOptions &opts = {},
                                std::vector<int> *output_order = nullptr);

}  // namespace polish

#endif  // POLISH_SMILES_H_
