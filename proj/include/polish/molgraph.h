//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_MOLGRAPH_H_
#define POLISH_MOLGRAPH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace polish {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Contribution of a bond to the valence sum. Aromatic bonds count as one;
// the aromatic atom bonus is applied separately when hydrogens are derived.
int bond_valence(BondOrder order);

struct AtomSpec {
  int element = 6;
  int formal_charge = 0;
  bool aromatic = false;
  // Present only for atoms written in brackets; organic-subset atoms derive
  // their hydrogens from standard valences.
  std::optional<int> explicit_h;
  std::optional<int> isotope;

  friend bool operator==(const AtomSpec &, const AtomSpec &) = default;
};

// Atom equality used by every matching operation: element, formal charge and
// aromatic flag. Hydrogen counts and isotopes are not compared.
inline bool same_match_class(const AtomSpec &a, const AtomSpec &b) {
  return a.element == b.element && a.formal_charge == b.formal_charge
         && a.aromatic == b.aromatic;
}

// Aromatic atoms, plus '*' attachment points standing in for a cut ring atom.
bool accepts_aromatic_bond(const AtomSpec &atom);

struct Bond {
  int begin;
  int end;
  BondOrder order;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

// Attributed undirected heavy-atom graph. Immutable after construction; the
// constructor validates structure and valence and derives hydrogen counts.
class MolGraph {
public:
  MolGraph() = default;

  // Throws Error for self-loops, parallel bonds, out-of-range indices or
  // aromatic flags on non-aromatizable elements, and ValenceError when an
  // atom exceeds its largest standard valence.
  MolGraph(std::vector<AtomSpec> atoms, std::vector<Bond> bonds);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const AtomSpec &atom(int i) const { return atoms_[i]; }
  const Bond &bond(int b) const { return bonds_[b]; }
  std::span<const AtomSpec> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }

  std::span<const Neighbor> neighbors(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }

  // Explicit hydrogens for bracket atoms, otherwise the implicit count.
  int hydrogen_count(int i) const { return hydrogens_[i]; }
  int valence_sum(int i) const;

  // Index of the bond joining a and b, or -1.
  int find_bond(int a, int b) const;

  // Component id per atom; ids are numbered by first atom appearance.
  std::vector<int> component_ids() const;
  int num_components() const;
  bool is_connected() const { return num_components() <= 1; }

  // Induced subgraph on the listed atoms, in the listed order.
  MolGraph subgraph(std::span<const int> atoms) const;

  // Atom i of this graph becomes atom perm[i] of the result.
  MolGraph permuted(std::span<const int> perm) const;

  // Per-atom flag: atom lies on at least one cycle.
  std::vector<bool> ring_atoms() const;
  // Per-bond flag: bond lies on at least one cycle (is not a bridge).
  std::vector<bool> ring_bonds() const;

private:
  std::vector<AtomSpec> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> hydrogens_;
};

// Implicit hydrogen count for an organic-subset atom with the given bond
// sum. Aromatic atoms with at least one aromatic bond reserve one valence
// unit for the implicit double bond when it fits under the lowest standard
// valence. Returns nullopt when no standard valence accommodates the sum.
std::optional<int> implicit_hydrogens(const AtomSpec &atom, int bond_sum,
                                      bool has_aromatic_bond);

}  // namespace polish

#endif  // POLISH_MOLGRAPH_H_
