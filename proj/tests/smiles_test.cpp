//
// SPDX-License-Identifier: Apache-2.0
//

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "polish/canon.h"
#include "polish/error.h"
#include "polish/isomorphism.h"
#include "polish/smiles.h"
#include "testing.h"

namespace polish {
namespace {
  SmilesError::Kind error_kind(const std::string &smi) {
    try {
      parse_smiles(smi);
    } catch (const SmilesError &e) {
      return e.kind();
    }
    ADD_FAILURE() << smi << " parsed";
    return SmilesError::Kind::kSyntax;
  }

  std::size_t error_position(const std::string &smi) {
    try {
      parse_smiles(smi);
    } catch (const SmilesError &e) {
      return e.position();
    }
    ADD_FAILURE() << smi << " parsed";
    return 0;
  }

  std::string canon(const std::string &smi) {
    return write_smiles(parse_smiles(smi));
  }
}  // namespace

TEST(ParseSmiles, Ethanol) {
  const MolGraph g = parse_smiles("CCO");
  ASSERT_EQ(g.num_atoms(), 3);
  EXPECT_EQ(g.num_bonds(), 2);
  EXPECT_EQ(g.atom(0).element, 6);
  EXPECT_EQ(g.atom(1).element, 6);
  EXPECT_EQ(g.atom(2).element, 8);
  EXPECT_EQ(g.hydrogen_count(0), 3);
  EXPECT_EQ(g.hydrogen_count(1), 2);
  EXPECT_EQ(g.hydrogen_count(2), 1);
  for (const Bond &b: g.bonds())
    EXPECT_EQ(b.order, BondOrder::kSingle);
}

TEST(ParseSmiles, Benzene) {
  const MolGraph g = parse_smiles("c1ccccc1");
  ASSERT_EQ(g.num_atoms(), 6);
  ASSERT_EQ(g.num_bonds(), 6);
  for (int i = 0; i < 6; ++i) {
    EXPECT_TRUE(g.atom(i).aromatic);
    EXPECT_EQ(g.degree(i), 2);
    EXPECT_EQ(g.hydrogen_count(i), 1);
  }
  for (const Bond &b: g.bonds())
    EXPECT_EQ(b.order, BondOrder::kAromatic);
  EXPECT_TRUE(g.find_bond(0, 5) >= 0);
}

TEST(ParseSmiles, ImplicitHydrogens) {
  EXPECT_EQ(parse_smiles("C").hydrogen_count(0), 4);
  EXPECT_EQ(parse_smiles("C=O").hydrogen_count(0), 2);
  EXPECT_EQ(parse_smiles("C#N").hydrogen_count(0), 1);
  EXPECT_EQ(parse_smiles("CS(=O)(=O)C").hydrogen_count(1), 0);
  EXPECT_EQ(parse_smiles("CP(C)(C)=O").hydrogen_count(1), 0);
  EXPECT_EQ(parse_smiles("ClC").hydrogen_count(0), 0);
  EXPECT_EQ(parse_smiles("c1ccncc1").hydrogen_count(3), 0);
  EXPECT_EQ(parse_smiles("c1ccc2ccccc2c1").hydrogen_count(3), 0);
  EXPECT_EQ(parse_smiles("c1ccoc1").hydrogen_count(3), 0);
}

TEST(ParseSmiles, BracketAtoms) {
  const MolGraph g = parse_smiles("C[NH3+]");
  EXPECT_EQ(g.atom(1).formal_charge, 1);
  EXPECT_EQ(g.hydrogen_count(1), 3);
  const MolGraph o = parse_smiles("CC(=O)[O-]");
  EXPECT_EQ(o.atom(3).formal_charge, -1);
  EXPECT_EQ(o.hydrogen_count(3), 0);
  const MolGraph iso = parse_smiles("[13CH4]");
  EXPECT_EQ(iso.atom(0).isotope, 13);
  EXPECT_EQ(iso.hydrogen_count(0), 4);
  const MolGraph pyrrole = parse_smiles("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.hydrogen_count(3), 1);
  EXPECT_EQ(parse_smiles("[Na+].[Cl-]", { .allow_disconnected = true })
                .num_components(),
            2);
}

TEST(ParseSmiles, RingClosures) {
  EXPECT_EQ(parse_smiles("C%10CC%10").num_bonds(), 3);
  EXPECT_EQ(parse_smiles("C1CC1").num_bonds(), 3);
  // Digit reuse after closing.
  EXPECT_EQ(parse_smiles("C1CC1C1CC1").num_bonds(), 7);
  EXPECT_EQ(parse_smiles("C=1CC1").bond(2).order, BondOrder::kDouble);
}

TEST(ParseSmiles, Errors) {
  using Kind = SmilesError::Kind;
  EXPECT_EQ(error_kind("C1CC"), Kind::kRingClosure);
  EXPECT_EQ(error_position("C1CC"), 1u);
  EXPECT_EQ(error_kind("C(C"), Kind::kSyntax);
  EXPECT_EQ(error_kind("CC)"), Kind::kSyntax);
  EXPECT_EQ(error_position("CC)"), 2u);
  EXPECT_EQ(error_kind("CQ"), Kind::kSyntax);
  EXPECT_EQ(error_kind(""), Kind::kSyntax);
  EXPECT_EQ(error_kind("C(=O)(=O)C"), Kind::kValence);
  EXPECT_EQ(error_kind("FC(F)(F)(F)F"), Kind::kValence);
  EXPECT_EQ(error_kind("C/C=C/C"), Kind::kUnsupported);
  EXPECT_EQ(error_position("C/C=C/C"), 1u);
  EXPECT_EQ(error_kind("C[C@H](O)N"), Kind::kUnsupported);
  EXPECT_EQ(error_position("C[C@H](O)N"), 3u);
  EXPECT_EQ(error_kind("C*"), Kind::kUnsupported);
  EXPECT_EQ(error_kind("C.C"), Kind::kUnsupported);
  EXPECT_EQ(error_kind("C=C="), Kind::kSyntax);
  EXPECT_EQ(error_kind("[C"), Kind::kSyntax);
  EXPECT_EQ(error_kind("C11"), Kind::kSyntax);
}

TEST(ParseSmiles, FuzzTotality) {
  static const std::string alphabet = "CcNnOoSsPBFIl123%()[]=#-:+@/\\.*Hr0 9xZ";
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20000; ++trial) {
    const int len = std::uniform_int_distribution<int>(0, 16)(rng);
    std::string s;
    for (int k = 0; k < len; ++k) {
      if (trial % 10 == 0)
        s += static_cast<char>(
            std::uniform_int_distribution<int>(1, 255)(rng));
      else
        s += alphabet[std::uniform_int_distribution<std::size_t>(
            0, alphabet.size() - 1)(rng)];
    }
    try {
      const MolGraph g = parse_smiles(s);
      // Anything accepted must write and round-trip.
      EXPECT_TRUE(graph_isomorphic(parse_smiles(write_smiles(g)), g)) << s;
    } catch (const SmilesError &e) {
      EXPECT_LE(e.position(), s.size()) << s;
    }
  }
}

TEST(WriteSmiles, Basics) {
  EXPECT_EQ(canon("C"), "C");
  EXPECT_EQ(canon("OCC"), canon("CCO"));
  EXPECT_EQ(canon("c1ccccc1"), "c1ccccc1");
  EXPECT_EQ(canon("C[NH3+]"), canon("[NH3+]C"));
  EXPECT_NE(canon("CCO"), canon("CCN"));
}

TEST(WriteSmiles, BracketHydrogensSurvive) {
  for (const char *smi: { "c1cc[nH]c1", "[13CH3]C", "C[N+](C)(C)C",
                          "[O-]C(=O)C", "[CH2]C" }) {
    const MolGraph g = parse_smiles(smi);
    const MolGraph back = parse_smiles(write_smiles(g));
    EXPECT_TRUE(graph_isomorphic(back, g)) << smi;
    for (int i = 0; i < g.num_atoms(); ++i)
      EXPECT_EQ(write_smiles(back), write_smiles(g)) << smi;
  }
}

TEST(WriteSmiles, RoundTripCorpus) {
  const std::vector<MolGraph> mols = testing::corpus(1000, 11);
  for (const MolGraph &g: mols) {
    const std::string s = write_smiles(g);
    const MolGraph back = parse_smiles(s);
    EXPECT_TRUE(graph_isomorphic(back, g)) << s;
    EXPECT_EQ(write_smiles(back), s);
  }
}

TEST(WriteSmiles, PermutationCanonicality) {
  std::mt19937_64 rng(3);
  const std::vector<MolGraph> mols = testing::corpus(100, 12);
  for (const MolGraph &g: mols) {
    const std::string s = write_smiles(g);
    for (int k = 0; k < 10; ++k) {
      const MolGraph p =
          g.permuted(testing::random_permutation(g.num_atoms(), rng));
      EXPECT_EQ(write_smiles(p), s);
    }
  }
}

TEST(CanonicalRank, EthanolOxygenDistinct) {
  for (const char *smi: { "CCO", "OCC", "C(O)C" }) {
    const MolGraph g = parse_smiles(smi);
    const std::vector<int> rank = canonical_rank(g);
    int o = 0;
    for (int i = 0; i < 3; ++i) {
      if (g.atom(i).element == 8)
        o = i;
    }
    for (int i = 0; i < 3; ++i) {
      if (i != o)
        EXPECT_NE(rank[i], rank[o]);
    }
  }
}

TEST(CanonicalRank, IsTotalOrder) {
  for (const MolGraph &g: testing::corpus(50, 5)) {
    std::vector<int> rank = canonical_rank(g);
    std::sort(rank.begin(), rank.end());
    for (int i = 0; i < g.num_atoms(); ++i)
      EXPECT_EQ(rank[i], i);
  }
}

TEST(CanonicalRank, BenzeneSymmetry) {
  const MolGraph g = parse_smiles("c1ccccc1");
  const std::vector<int> classes = refined_classes(g);
  for (int c: classes)
    EXPECT_EQ(c, classes[0]);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k)
    EXPECT_EQ(write_smiles(g.permuted(testing::random_permutation(6, rng))),
              "c1ccccc1");
}

}  // namespace polish
