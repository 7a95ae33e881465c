//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_TEACHER_H_
#define POLISH_TEACHER_H_

#include <span>
#include <vector>

#include "polish/branch.h"
#include "polish/molgraph.h"

namespace polish {

struct BranchMatch {
  int x;  // index into the source BranchSet
  int y;  // index into the target BranchSet
};

// Per branch class, pairs min(multiplicity) instances; instances are taken
// in branch order (ascending canonical anchor rank) on both sides.
std::vector<BranchMatch> match_branches(const BranchSet &bx,
                                        const BranchSet &by);

// Preserved heavy-atom count: summed sizes of matched source branches.
int center_score(const BranchSet &bx, const BranchSet &by);
int center_score(const MolGraph &x, int i, const MolGraph &y, int j);

struct CenterScoreTable {
  std::vector<int> raw;
  std::vector<double> normalized;
  // Best-scoring element-matching target atom, or -1 when there is none.
  std::vector<int> best_mapped;
};

// Branch sets around every atom of a pair, computed once.
class PairContext {
public:
  PairContext(const MolGraph &x, const MolGraph &y);

  const MolGraph &source() const { return *x_; }
  const MolGraph &target() const { return *y_; }
  const std::vector<int> &source_ranks() const { return x_ranks_; }
  const std::vector<int> &target_ranks() const { return y_ranks_; }
  const BranchSet &source_branches(int i) const { return x_sets_[i]; }
  const BranchSet &target_branches(int j) const { return y_sets_[j]; }

private:
  const MolGraph *x_;
  const MolGraph *y_;
  std::vector<int> x_ranks_, y_ranks_;
  std::vector<BranchSet> x_sets_, y_sets_;
};

CenterScoreTable center_distribution(const PairContext &ctx);
CenterScoreTable center_distribution(const MolGraph &x, const MolGraph &y);

struct CenterPair {
  int center;
  int mapped_center;
};

// Highest raw score; ties prefer atoms with a candidate, then the smallest
// canonical rank. Throws NoCandidate when no element is shared.
CenterPair locate_center(const PairContext &ctx, const CenterScoreTable &t);
CenterPair locate_center(const MolGraph &x, const MolGraph &y);

struct PolishAnnotation {
  int center = -1;
  int mapped_center = -1;
  BranchSet source_branches;
  BranchSet target_branches;
  std::vector<BranchMatch> preserved;
  std::vector<int> removed;  // source branch indices
  std::vector<int> added;    // target branch indices
  CenterScoreTable scores;
  AtomSpec center_atom;
  AtomSpec mapped_atom;
  int source_atoms = 0;
  int target_atoms = 0;

  int preserved_atoms() const;
  int removed_atoms() const;
  int added_atoms() const;
};

PolishAnnotation annotate_pair(const MolGraph &x, const MolGraph &y);

// Center atom plus preserved source fragments plus added target fragments.
MolGraph reconstruct(const PolishAnnotation &ann, const AtomSpec &center_atom);
inline MolGraph reconstruct(const PolishAnnotation &ann) {
  return reconstruct(ann, ann.mapped_atom);
}

struct PairScale {
  int source_atoms;
  int target_atoms;
  int preserved_atoms;
  int removed_atoms;
  int added_atoms;
};

struct CorpusStats {
  std::vector<PairScale> pairs;
  double mean_preserved = 0;
  double mean_removed = 0;
  double mean_added = 0;
  double mean_source_atoms = 0;
  double mean_target_atoms = 0;
};

CorpusStats corpus_stats(std::span<const PolishAnnotation> annotations);

}  // namespace polish

#endif  // POLISH_TEACHER_H_
