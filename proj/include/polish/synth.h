//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_SYNTH_H_
#define POLISH_SYNTH_H_

#include <random>

#include "polish/molgraph.h"

namespace polish {

// Random drug-like molecule generator used for synthetic corpora and tests.
struct SynthOptions {
  int min_atoms = 6;
  int max_atoms = 30;
  // Chance that growth starts from a ring and per-step chance of adding one.
  double ring_probability = 0.3;
};

MolGraph random_molecule(std::mt19937_64 &rng, const SynthOptions &opts = {});

struct MolPair {
  MolGraph src;
  MolGraph tgt;
};

// Source carries exactly one terminal hydroxyl; the target replaces it by an
// amine. The carbon bearing the hydroxyl is the unique optimization center.
MolPair hydroxyl_to_amine_pair(std::mt19937_64 &rng,
                               const SynthOptions &opts = {});

// Target derived from the source by one to three random local edits
// (substituent added, terminal atom removed or mutated, ring attached, bond
// order changed).
MolPair random_edit_pair(std::mt19937_64 &rng, const SynthOptions &opts = {});

}  // namespace polish

#endif  // POLISH_SYNTH_H_
