//
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "polish/canon.h"
#include "polish/error.h"
#include "polish/isomorphism.h"
#include "polish/smiles.h"
#include "polish/synth.h"
#include "polish/teacher.h"
#include "oracles.h"
#include "testing.h"

namespace polish {
namespace {
  MolGraph mol(const char *smi) { return parse_smiles(smi); }

  std::vector<std::string> fragments(const BranchSet &set,
                                     const std::vector<int> &which) {
    std::vector<std::string> out;
    for (int k: which)
      out.push_back(anchored_smiles(set.branches[k]));
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> preserved_x(const PolishAnnotation &ann) {
    std::vector<int> out;
    for (const BranchMatch &m: ann.preserved)
      out.push_back(m.x);
    return out;
  }
}  // namespace

TEST(MatchBranches, MultiplicityAndInstanceChoice) {
  // Center carbon with two methyls in the source, one in the target.
  const MolGraph x = mol("CC(C)O");
  const MolGraph y = mol("CC(N)O");
  const BranchSet bx = branches_around(x, 1);
  const BranchSet by = branches_around(y, 1);
  const std::vector<BranchMatch> m = match_branches(bx, by);
  // One methyl and the hydroxyl.
  ASSERT_EQ(m.size(), 2u);
  int methyls = 0;
  for (const BranchMatch &p: m) {
    if (bx.branches[p.x].fragment.atom(0).element == 6) {
      ++methyls;
      // Lowest canonical anchor rank among the two methyls.
      const std::vector<int> rank = canonical_rank(x);
      for (const Branch &b: bx.branches) {
        if (b.key == bx.branches[p.x].key)
          EXPECT_LE(rank[bx.branches[p.x].source_indices[0]],
                    rank[b.source_indices[0]]);
      }
    }
  }
  EXPECT_EQ(methyls, 1);
  EXPECT_EQ(center_score(bx, by), testing::oracle_matching(bx, by));
}

TEST(MatchBranches, IdenticalAndDisjoint) {
  const MolGraph g = mol("CC(C)(O)CC");
  const BranchSet b = branches_around(g, 1);
  EXPECT_EQ(match_branches(b, b).size(), b.branches.size());
  const BranchSet other = branches_around(mol("NN(F)Cl"), 1);
  EXPECT_TRUE(match_branches(b, other).empty());
}

TEST(MatchBranches, AgreesWithExhaustiveMatching) {
  SynthOptions opts { .min_atoms = 3, .max_atoms = 10 };
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    const MolPair p = random_edit_pair(rng, opts);
    for (int i = 0; i < p.src.num_atoms(); i += 2) {
      const BranchSet bx = branches_around(p.src, i);
      for (int j = 0; j < p.tgt.num_atoms(); j += 2) {
        const BranchSet by = branches_around(p.tgt, j);
        EXPECT_EQ(center_score(bx, by), testing::oracle_matching(bx, by));
      }
    }
  }
}

TEST(CenterScore, Examples) {
  const MolGraph g = mol("CC(C)(O)CC");
  for (int i = 0; i < g.num_atoms(); ++i)
    EXPECT_EQ(center_score(g, i, g, i), g.num_atoms() - 1);
  EXPECT_EQ(center_score(mol("CCO"), 1, mol("CCN"), 1), 1);
  EXPECT_EQ(center_score(mol("CO"), 0, mol("CN"), 0), 0);
}

TEST(CenterDistribution, EthanolToEthylamine) {
  const MolGraph x = mol("CCO"), y = mol("CCN");
  const CenterScoreTable t = center_distribution(x, y);
  EXPECT_EQ(t.raw, (std::vector<int> { 0, 1, 0 }));
  EXPECT_EQ(t.best_mapped[1], 1);
  EXPECT_EQ(t.best_mapped[2], -1);
  EXPECT_NEAR(std::accumulate(t.normalized.begin(), t.normalized.end(), 0.0),
              1.0, 1e-9);
  EXPECT_EQ(std::max_element(t.normalized.begin(), t.normalized.end())
                - t.normalized.begin(),
            1);
  const CenterPair c = locate_center(x, y);
  EXPECT_EQ(c.center, 1);
  EXPECT_EQ(c.mapped_center, 1);
}

TEST(CenterDistribution, NoSharedElement) {
  const MolGraph x = mol("CC"), y = mol("NN");
  const CenterScoreTable t = center_distribution(x, y);
  EXPECT_DOUBLE_EQ(t.normalized[0], 0.5);
  EXPECT_DOUBLE_EQ(t.normalized[1], 0.5);
  EXPECT_THROW(locate_center(x, y), NoCandidate);
  EXPECT_THROW(annotate_pair(x, y), NoCandidate);
}

TEST(CenterDistribution, SumsToOneAndArgmaxFollowsRaw) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const MolPair p = random_edit_pair(rng);
    const CenterScoreTable table = center_distribution(p.src, p.tgt);
    EXPECT_NEAR(
        std::accumulate(table.normalized.begin(), table.normalized.end(), 0.0),
        1.0, 1e-9);
    // Scaling raw scores by a positive constant keeps the argmax.
    const int top = *std::max_element(table.raw.begin(), table.raw.end());
    for (int i = 0; i < p.src.num_atoms(); ++i) {
      if (table.raw[i] == top)
        EXPECT_DOUBLE_EQ(table.normalized[i],
                         *std::max_element(table.normalized.begin(),
                                           table.normalized.end()));
    }
  }
}

TEST(AnnotatePair, EthanolToEthylamine) {
  const MolGraph x = mol("CCO"), y = mol("CCN");
  const PolishAnnotation ann = annotate_pair(x, y);
  ASSERT_EQ(ann.preserved.size(), 1u);
  EXPECT_EQ(anchored_smiles(ann.source_branches.branches[ann.preserved[0].x]),
            "*C");
  EXPECT_EQ(fragments(ann.source_branches, ann.removed),
            std::vector<std::string> { "*O" });
  EXPECT_EQ(fragments(ann.target_branches, ann.added),
            std::vector<std::string> { "*N" });
  EXPECT_EQ(write_smiles(reconstruct(ann)), write_smiles(y));
  EXPECT_EQ(write_smiles(reconstruct(ann)), "CCN");
}

TEST(AnnotatePair, IdentityPair) {
  const MolGraph g = mol("Cc1ccc(CC(=O)N)cc1");
  const PolishAnnotation ann = annotate_pair(g, g);
  EXPECT_TRUE(ann.removed.empty());
  EXPECT_TRUE(ann.added.empty());
  EXPECT_EQ(ann.preserved_atoms(), g.num_atoms() - 1);
  // Canonical-rank-minimal atom wins the tie.
  EXPECT_EQ(canonical_rank(g)[ann.center], 0);
  EXPECT_TRUE(graph_isomorphic(reconstruct(ann), g));
}

TEST(AnnotatePair, FigureOneAnalogue) {
  // Quaternary center: one branch changes, three are preserved.
  const MolGraph x = mol("CCC(C)(C)O");
  const MolGraph y = mol("CCC(C)(C)N");
  const PolishAnnotation ann = annotate_pair(x, y);
  EXPECT_EQ(ann.center, 2);
  EXPECT_EQ(ann.mapped_center, 2);
  EXPECT_EQ(ann.preserved.size(), 3u);
  EXPECT_EQ(ann.preserved_atoms(), 4);
}

TEST(AnnotatePair, PartitionAndReconstruction) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const MolPair p = t % 2 ? random_edit_pair(rng)
                            : hydroxyl_to_amine_pair(rng);
    const PolishAnnotation ann = annotate_pair(p.src, p.tgt);
    EXPECT_EQ(ann.preserved.size() + ann.removed.size(),
              ann.source_branches.branches.size());
    EXPECT_EQ(ann.preserved_atoms() + ann.removed_atoms(),
              p.src.num_atoms() - 1);
    EXPECT_EQ(ann.preserved.size() + ann.added.size(),
              ann.target_branches.branches.size());
    std::vector<bool> seen(ann.target_branches.branches.size(), false);
    for (const BranchMatch &m: ann.preserved) {
      EXPECT_FALSE(seen[m.y]);
      seen[m.y] = true;
      EXPECT_TRUE(branch_isomorphic(ann.source_branches.branches[m.x],
                                    ann.target_branches.branches[m.y]));
    }
    const MolGraph r = reconstruct(ann);
    EXPECT_TRUE(graph_isomorphic(r, p.tgt));
    EXPECT_EQ(write_smiles(r), write_smiles(p.tgt));
  }
}

TEST(AnnotatePair, RuleCorpusCenterIsHydroxylCarbon) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 100; ++t) {
    const MolPair p = hydroxyl_to_amine_pair(rng);
    const PolishAnnotation ann = annotate_pair(p.src, p.tgt);
    ASSERT_EQ(ann.removed.size(), 1u);
    ASSERT_EQ(ann.added.size(), 1u);
    EXPECT_EQ(fragments(ann.source_branches, ann.removed),
              std::vector<std::string> { "*O" });
    EXPECT_EQ(fragments(ann.target_branches, ann.added),
              std::vector<std::string> { "*N" });
  }
}

TEST(AnnotatePair, OptimalAgainstBruteForce) {
  SynthOptions opts { .min_atoms = 3, .max_atoms = 12 };
  std::mt19937_64 rng(15);
  for (int t = 0; t < 60; ++t) {
    const MolPair p = random_edit_pair(rng, opts);
    if (p.src.num_atoms() > 12 || p.tgt.num_atoms() > 12)
      continue;
    const PolishAnnotation ann = annotate_pair(p.src, p.tgt);
    EXPECT_EQ(ann.preserved_atoms(), testing::oracle_best_score(p.src, p.tgt))
        << write_smiles(p.src) << " -> " << write_smiles(p.tgt);
  }
}

TEST(AnnotatePair, DeterministicUnderPermutation) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 40; ++t) {
    const MolPair p = random_edit_pair(rng);
    const PolishAnnotation ref = annotate_pair(p.src, p.tgt);
    const int ref_c = canonical_rank(p.src)[ref.center];
    const int ref_m = canonical_rank(p.tgt)[ref.mapped_center];
    for (int k = 0; k < 3; ++k) {
      const MolGraph xs =
          p.src.permuted(testing::random_permutation(p.src.num_atoms(), rng));
      const MolGraph ys =
          p.tgt.permuted(testing::random_permutation(p.tgt.num_atoms(), rng));
      const PolishAnnotation ann = annotate_pair(xs, ys);
      EXPECT_EQ(canonical_rank(xs)[ann.center], ref_c);
      EXPECT_EQ(canonical_rank(ys)[ann.mapped_center], ref_m);
      EXPECT_EQ(fragments(ann.source_branches, preserved_x(ann)),
                fragments(ref.source_branches, preserved_x(ref)));
      EXPECT_EQ(fragments(ann.source_branches, ann.removed),
                fragments(ref.source_branches, ref.removed));
      EXPECT_EQ(fragments(ann.target_branches, ann.added),
                fragments(ref.target_branches, ref.added));
      EXPECT_EQ(ann.scores.raw.size(), ref.scores.raw.size());
    }
  }
}

TEST(CorpusStats, IdentityAndPartition) {
  std::mt19937_64 rng(17);
  std::vector<PolishAnnotation> same, edits;
  for (int t = 0; t < 20; ++t) {
    const MolGraph g = random_molecule(rng);
    same.push_back(annotate_pair(g, g));
    const MolPair p = random_edit_pair(rng);
    edits.push_back(annotate_pair(p.src, p.tgt));
  }
  const CorpusStats s = corpus_stats(same);
  EXPECT_DOUBLE_EQ(s.mean_removed, 0.0);
  EXPECT_DOUBLE_EQ(s.mean_added, 0.0);

  const CorpusStats e = corpus_stats(edits);
  for (const PairScale &p: e.pairs)
    EXPECT_EQ(p.preserved_atoms + p.removed_atoms, p.source_atoms - 1);
  EXPECT_LE(e.mean_added, e.mean_target_atoms - 1);
}

}  // namespace polish
