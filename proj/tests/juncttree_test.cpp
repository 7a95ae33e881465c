//
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "polish/error.h"
#include "polish/isomorphism.h"
#include "polish/juncttree.h"
#include "polish/smiles.h"
#include "testing.h"

namespace polish {
namespace {
  MolGraph mol(const char *smi) { return parse_smiles(smi); }

  int count_kind(const JunctionTree &t, ClusterKind kind) {
    return static_cast<int>(
        std::count_if(t.nodes.begin(), t.nodes.end(),
                      [&](const Cluster &c) { return c.kind == kind; }));
  }

  void expect_tree(const JunctionTree &t) {
    ASSERT_EQ(t.edges.size(), static_cast<std::size_t>(t.num_nodes() - 1));
    EXPECT_EQ(t.preorder().size(), static_cast<std::size_t>(t.num_nodes()));
  }

  // Each bond lies inside at least one cluster; only bonds shared by fused
  // rings lie in more than one.
  void expect_coverage(const MolGraph &g, const JunctionTree &t) {
    for (int b = 0; b < g.num_bonds(); ++b) {
      const Bond &bond = g.bond(b);
      int holders = 0, rings = 0;
      for (const Cluster &c: t.nodes) {
        if (std::binary_search(c.atoms.begin(), c.atoms.end(), bond.begin)
            && std::binary_search(c.atoms.begin(), c.atoms.end(), bond.end)) {
          ++holders;
          rings += c.kind == ClusterKind::kRing ? 1 : 0;
        }
      }
      EXPECT_GE(holders, 1);
      if (holders > 1)
        EXPECT_EQ(rings, holders);
    }
    for (const auto &[u, v]: t.edges) {
      std::vector<int> shared;
      std::set_intersection(t.nodes[u].atoms.begin(), t.nodes[u].atoms.end(),
                            t.nodes[v].atoms.begin(), t.nodes[v].atoms.end(),
                            std::back_inserter(shared));
      EXPECT_FALSE(shared.empty());
    }
  }
}  // namespace

TEST(Sssr, RingCounts) {
  EXPECT_TRUE(sssr(mol("CCO")).empty());
  EXPECT_EQ(sssr(mol("c1ccccc1")).size(), 1u);
  const auto naphthalene = sssr(mol("c1ccc2ccccc2c1"));
  ASSERT_EQ(naphthalene.size(), 2u);
  EXPECT_EQ(naphthalene[0].size(), 6u);
  EXPECT_EQ(naphthalene[1].size(), 6u);
  // Norbornane: two five-rings rather than the six-ring.
  const auto norbornane = sssr(mol("C1CC2CCC1C2"));
  ASSERT_EQ(norbornane.size(), 2u);
  EXPECT_EQ(norbornane[0].size(), 5u);
  EXPECT_EQ(norbornane[1].size(), 5u);
  // Cubane: five four-rings.
  const auto cubane = sssr(mol("C12C3C4C1C5C2C3C45"));
  ASSERT_EQ(cubane.size(), 5u);
  for (const auto &r: cubane)
    EXPECT_EQ(r.size(), 4u);
}

TEST(Sssr, RingsAreCycles) {
  for (const MolGraph &g: testing::corpus(200, 101)) {
    const auto rings = sssr(g);
    EXPECT_EQ(static_cast<int>(rings.size()),
              g.num_bonds() - g.num_atoms() + 1);
    for (const auto &r: rings) {
      for (std::size_t k = 0; k < r.size(); ++k)
        EXPECT_GE(g.find_bond(r[k], r[(k + 1) % r.size()]), 0);
      std::set<int> unique(r.begin(), r.end());
      EXPECT_EQ(unique.size(), r.size());
    }
  }
}

TEST(Decompose, Ethane) {
  const JunctionTree t = decompose(mol("CC"));
  ASSERT_EQ(t.num_nodes(), 1);
  EXPECT_EQ(t.nodes[0].kind, ClusterKind::kBond);
  EXPECT_TRUE(t.edges.empty());
}

TEST(Decompose, Methane) {
  const JunctionTree t = decompose(mol("C"));
  ASSERT_EQ(t.num_nodes(), 1);
  EXPECT_EQ(t.nodes[0].kind, ClusterKind::kSingleton);
}

TEST(Decompose, Toluene) {
  const JunctionTree t = decompose(mol("Cc1ccccc1"));
  EXPECT_EQ(t.num_nodes(), 2);
  EXPECT_EQ(count_kind(t, ClusterKind::kRing), 1);
  EXPECT_EQ(count_kind(t, ClusterKind::kBond), 1);
  EXPECT_EQ(t.edges.size(), 1u);
}

TEST(Decompose, SingletonForBranchAtom) {
  // Isobutane: central carbon sits in three bond clusters.
  const MolGraph g = mol("CC(C)C");
  const JunctionTree t = decompose(g);
  EXPECT_EQ(count_kind(t, ClusterKind::kBond), 3);
  ASSERT_EQ(count_kind(t, ClusterKind::kSingleton), 1);
  expect_tree(t);
  EXPECT_TRUE(running_intersection(t, g.num_atoms()));
  for (int k = 0; k < t.num_nodes(); ++k) {
    if (t.nodes[k].kind == ClusterKind::kSingleton)
      EXPECT_EQ(t.adjacency[k].size(), 3u);
  }
}

TEST(Decompose, BridgedRingsMerge) {
  const JunctionTree t = decompose(mol("C1CC2CCC1C2"));
  ASSERT_EQ(t.num_nodes(), 1);
  EXPECT_EQ(t.nodes[0].atoms.size(), 7u);
}

TEST(Decompose, ForcedRoot) {
  const MolGraph g = mol("CCO");
  const JunctionTree t = decompose(g, 1);
  EXPECT_EQ(t.nodes[t.root].kind, ClusterKind::kSingleton);
  EXPECT_EQ(t.nodes[t.root].atoms, std::vector<int> { 1 });
  EXPECT_EQ(t.adjacency[t.root].size(), 2u);
  EXPECT_TRUE(running_intersection(t, g.num_atoms()));

  const JunctionTree single = decompose(mol("C"), 0);
  EXPECT_EQ(single.num_nodes(), 1);
}

TEST(Decompose, CorpusProperties) {
  std::mt19937_64 rng(6);
  for (const MolGraph &g: testing::corpus(500, 111)) {
    const JunctionTree t = decompose(g);
    expect_tree(t);
    EXPECT_TRUE(running_intersection(t, g.num_atoms())) << write_smiles(g);
    expect_coverage(g, t);
    const int center = std::uniform_int_distribution<int>(
        0, g.num_atoms() - 1)(rng);
    const JunctionTree f = decompose(g, center);
    expect_tree(f);
    EXPECT_TRUE(running_intersection(f, g.num_atoms())) << write_smiles(g);
    EXPECT_EQ(f.nodes[f.root].atoms, std::vector<int> { center });
  }
}

TEST(Decompose, Deterministic) {
  const MolGraph g = mol("CC(C)c1ccc2ccccc2c1CC(=O)N");
  const JunctionTree a = decompose(g), b = decompose(g);
  ASSERT_EQ(a.num_nodes(), b.num_nodes());
  for (int k = 0; k < a.num_nodes(); ++k)
    EXPECT_EQ(a.nodes[k].atoms, b.nodes[k].atoms);
  EXPECT_EQ(a.edges, b.edges);
}

TEST(Vocabulary, Counts) {
  const std::vector<MolGraph> ethane { mol("CC") };
  EXPECT_EQ(build_vocabulary(ethane).size(), 1);

  const std::vector<MolGraph> rings { mol("c1ccccc1"), mol("Cc1ccccc1") };
  const ComponentVocabulary v = build_vocabulary(rings);
  ASSERT_EQ(v.size(), 2);
  EXPECT_EQ(v.entry(0).smiles, "c1ccccc1");
  EXPECT_EQ(v.entry(0).count, 2);
  EXPECT_EQ(v.entry(1).smiles, "Cc");
  EXPECT_EQ(v.lookup("Cc"), 1);
  EXPECT_FALSE(v.lookup("CC").has_value());

  std::stringstream ss;
  v.write(ss);
  EXPECT_EQ(ss.str(), "0\t2\tc1ccccc1\n1\t1\tCc\n");
  const ComponentVocabulary back = ComponentVocabulary::read(ss);
  ASSERT_EQ(back.size(), 2);
  EXPECT_EQ(back.entry(1).smiles, "Cc");
  EXPECT_EQ(back.entry(1).count, 1);

  std::stringstream bad("0\t1\n");
  EXPECT_THROW(ComponentVocabulary::read(bad), Error);
}

TEST(Vocabulary, TotalOnCorpus) {
  const std::vector<MolGraph> mols = testing::corpus(300, 121);
  const ComponentVocabulary v = build_vocabulary(mols);
  std::set<int> ids;
  for (const MolGraph &g: mols) {
    for (const Cluster &c: decompose(g).nodes) {
      const auto id = v.lookup(cluster_key(g, c));
      ASSERT_TRUE(id.has_value());
      ids.insert(*id);
      EXPECT_TRUE(graph_isomorphic(v.entry(*id).graph, cluster_graph(g, c)));
    }
  }
  EXPECT_EQ(static_cast<int>(ids.size()), v.size());
  for (int k = 1; k < v.size(); ++k)
    EXPECT_GE(v.entry(k - 1).count, v.entry(k).count);
}

TEST(RealizeMolecule, SingleCluster) {
  AssemblyPlan plan;
  plan.clusters.push_back(mol("c1ccccc1"));
  plan.parent.push_back(-1);
  plan.attachments.emplace_back();
  EXPECT_EQ(write_smiles(realize_molecule(plan)), "c1ccccc1");
}

TEST(RealizeMolecule, TolueneRoundTrip) {
  const MolGraph g = mol("Cc1ccccc1");
  const AssemblyPlan plan = ground_truth_plan(g, decompose(g));
  EXPECT_EQ(write_smiles(realize_molecule(plan)), write_smiles(g));
}

TEST(RealizeMolecule, InvalidOverlapThrows) {
  AssemblyPlan plan;
  plan.clusters = { mol("C(C)(C)C"), mol("CC") };
  plan.parent = { -1, 0 };
  // Fifth bond on the central carbon.
  plan.attachments = { {}, { { { 0, 0 } } } };
  EXPECT_NO_THROW(realize_molecule(plan));
  plan.clusters = { mol("C(C)(C)(C)C"), mol("CC") };
  EXPECT_THROW(realize_molecule(plan), ValenceError);
}

TEST(RealizeMolecule, CorpusRoundTrip) {
  std::mt19937_64 rng(7);
  for (const MolGraph &g: testing::corpus(500, 131)) {
    const AssemblyPlan plan = ground_truth_plan(g, decompose(g));
    EXPECT_EQ(write_smiles(realize_molecule(plan)), write_smiles(g));
    const int center =
        std::uniform_int_distribution<int>(0, g.num_atoms() - 1)(rng);
    const AssemblyPlan forced = ground_truth_plan(g, decompose(g, center));
    const MolGraph r = realize_molecule(forced);
    EXPECT_EQ(write_smiles(r), write_smiles(g));
    // The forced root's atom is realized first.
    EXPECT_EQ(r.atom(0), g.atom(center));
  }
}

TEST(EnumerateAssemblies, SymmetricPositionsCollapse) {
  const PartialAssembly ring = start_assembly(mol("c1ccccc1"));
  const std::vector<AssemblyCandidate> c =
      enumerate_assemblies(ring, mol("Cc"), 0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(write_smiles(c[0].result.molecule), "Cc1ccccc1");
}

TEST(EnumerateAssemblies, OneTreeSeveralMolecules) {
  // Ring-ring tree: fused and spiro assemblies.
  const PartialAssembly ring = start_assembly(mol("C1CCCCC1"));
  const std::vector<AssemblyCandidate> c =
      enumerate_assemblies(ring, mol("C1CCCCC1"), 0);
  std::set<std::string> molecules;
  for (const AssemblyCandidate &cand: c)
    molecules.insert(write_smiles(cand.result.molecule));
  EXPECT_GE(molecules.size(), 2u);
  EXPECT_TRUE(molecules.count(write_smiles(mol("C1CCC2CCCCC2C1"))));
  EXPECT_TRUE(molecules.count(write_smiles(mol("C1CCC2(CC1)CCCCC2"))));

  // Ring with two methyls: ortho, meta, para.
  std::set<std::string> xylenes;
  const PartialAssembly hexane = start_assembly(mol("c1ccccc1"));
  for (const AssemblyCandidate &first:
       enumerate_assemblies(hexane, mol("Cc"), 0)) {
    for (const AssemblyCandidate &second:
         enumerate_assemblies(first.result, mol("Cc"), 0))
      xylenes.insert(write_smiles(second.result.molecule));
  }
  EXPECT_EQ(xylenes.size(), 3u);
}

TEST(EnumerateAssemblies, NoValidAttachment) {
  const PartialAssembly p = start_assembly(mol("CF"));
  EXPECT_THROW(enumerate_assemblies(p, mol("NO"), 0), NoValidAttachment);
}

TEST(EnumerateAssemblies, ContainsGroundTruth) {
  for (const MolGraph &g: testing::corpus(300, 141)) {
    const AssemblyPlan plan = ground_truth_plan(g, decompose(g));
    PartialAssembly p = start_assembly(plan.clusters[0]);
    for (std::size_t k = 1; k < plan.clusters.size(); ++k) {
      const PartialAssembly truth =
          attach(p, plan.clusters[k], plan.parent[k], plan.attachments[k]);
      const std::string key = assembly_key(truth);
      const std::vector<AssemblyCandidate> cands =
          enumerate_assemblies(p, plan.clusters[k], plan.parent[k]);
      const bool found =
          std::any_of(cands.begin(), cands.end(),
                      [&](const AssemblyCandidate &c) { return c.key == key; });
      EXPECT_TRUE(found) << write_smiles(g) << " node " << k;
      p = truth;
    }
  }
}

}  // namespace polish
