//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/synth.h"

#include <algorithm>
#include <array>
#include <random>
#include <utility>
#include <vector>

#include "polish/elements.h"

namespace polish {
namespace {
  constexpr int kC = 6, kN = 7, kO = 8, kF = 9, kS = 16, kCl = 17;

  struct RingTemplate {
    std::array<int, 6> elements;
    int size;
    bool aromatic;
  };

  constexpr std::array<RingTemplate, 8> kRings { {
      { { kC, kC, kC, kC, kC, kC }, 6, true },
      { { kC, kC, kC, kC, kC, kC }, 6, true },
      { { kN, kC, kC, kC, kC, kC }, 6, true },
      { { kO, kC, kC, kC, kC, 0 }, 5, true },
      { { kS, kC, kC, kC, kC, 0 }, 5, true },
      { { kC, kC, kC, kC, kC, kC }, 6, false },
      { { kC, kC, kC, kC, kC, 0 }, 5, false },
      { { kN, kC, kC, kC, kC, kC }, 6, false },
  } };

  class Builder {
  public:
    explicit Builder(std::mt19937_64 &rng): rng_(rng) { }

    int size() const { return static_cast<int>(atoms_.size()); }

    int free_valence(int i) const {
      const AtomSpec &atom = atoms_[i];
      int capacity = standard_valences(atom.element).front();
      if (atom.aromatic)
        capacity = atom.element == kC ? 3 : 2;
      int used = 0;
      for (const Bond &bond: bonds_) {
        if (bond.begin == i || bond.end == i)
          used += bond_valence(bond.order);
      }
      return capacity - used;
    }

    int degree(int i) const {
      return static_cast<int>(
          std::count_if(bonds_.begin(), bonds_.end(), [&](const Bond &b) {
            return b.begin == i || b.end == i;
          }));
    }

    int add_atom(int element, bool aromatic = false) {
      atoms_.push_back({ .element = element, .aromatic = aromatic });
      return size() - 1;
    }

    void add_bond(int a, int b, BondOrder order) {
      bonds_.push_back({ a, b, order });
    }

    // Random atom satisfying pred, or -1.
    template <class Pred>
    int pick(Pred pred) {
      std::vector<int> pool;
      for (int i = 0; i < size(); ++i) {
        if (pred(i))
          pool.push_back(i);
      }
      if (pool.empty())
        return -1;
      return pool[uniform(0, static_cast<int>(pool.size()) - 1)];
    }

    int uniform(int lo, int hi) {
      return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }

    double unit() { return std::uniform_real_distribution<double>(0, 1)(rng_); }

    // Returns the first ring atom.
    int add_ring(const RingTemplate &ring) {
      const int first = size();
      for (int k = 0; k < ring.size; ++k)
        add_atom(ring.elements[k], ring.aromatic);
      const BondOrder order =
          ring.aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
      for (int k = 0; k < ring.size; ++k)
        add_bond(first + k, first + (k + 1) % ring.size, order);
      return first;
    }

    bool attach_ring() {
      const int host = pick([&](int i) { return free_valence(i) >= 1; });
      if (host < 0)
        return false;
      const RingTemplate &ring = kRings[uniform(0, kRings.size() - 1)];
      const int first = add_ring(ring);
      // Attach through a ring carbon.
      int k = uniform(0, ring.size - 1);
      if (ring.elements[k] != kC)
        k = (k + 1) % ring.size;
      add_bond(host, first + k, BondOrder::kSingle);
      return true;
    }

    // Fuses a new six-ring onto an existing ring bond whose atoms still have
    // a free valence.
    bool fuse_ring() {
      const std::vector<bool> in_ring = graph().ring_bonds();
      std::vector<int> candidates;
      for (int b = 0; b < static_cast<int>(bonds_.size()); ++b) {
        const Bond &bond = bonds_[b];
        const AtomSpec &a = atoms_[bond.begin], &c = atoms_[bond.end];
        if (a.element != kC || c.element != kC || a.aromatic != c.aromatic)
          continue;
        if (!in_ring[b] || free_valence(bond.begin) < 1
            || free_valence(bond.end) < 1)
          continue;
        if (a.aromatic != (bond.order == BondOrder::kAromatic))
          continue;
        candidates.push_back(b);
      }
      if (candidates.empty())
        return false;
      const Bond bond =
          bonds_[candidates[uniform(0, candidates.size() - 1)]];
      const bool aromatic = atoms_[bond.begin].aromatic;
      const BondOrder order =
          aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
      int prev = bond.begin;
      for (int k = 0; k < 4; ++k) {
        const int atom = add_atom(kC, aromatic);
        add_bond(prev, atom, order);
        prev = atom;
      }
      add_bond(prev, bond.end, order);
      return true;
    }

    bool attach_substituent(bool allow_hydroxyl) {
      const int host = pick([&](int i) { return free_valence(i) >= 1; });
      if (host < 0)
        return false;

      const double r = unit();
      int element = kC;
      // Heteroatom-heteroatom bonds are kept rare.
      if (atoms_[host].element != kC && r < 0.9)
        element = kC;
      else if (r < 0.15)
        element = kN;
      else if (r < 0.30)
        element = kO;
      else if (r < 0.35)
        element = kF;
      else if (r < 0.40)
        element = kCl;
      else if (r < 0.44)
        element = kS;

      const int host_free = free_valence(host);
      const int cap = standard_valences(element).front();
      BondOrder order = BondOrder::kSingle;
      if (!atoms_[host].aromatic && host_free >= 2 && cap >= 2) {
        const double q = unit();
        if (q < 0.03 && host_free >= 3 && cap >= 3 && element != kS)
          order = BondOrder::kTriple;
        else if (q < 0.18)
          order = BondOrder::kDouble;
      }
      if (!allow_hydroxyl && element == kO && order == BondOrder::kSingle)
        element = kC;

      const int atom = add_atom(element);
      add_bond(host, atom, order);
      return true;
    }

    // Terminal single-bonded oxygens become methoxy groups.
    void cap_hydroxyls() {
      const int n = size();
      for (int i = 0; i < n; ++i) {
        if (is_terminal_hydroxyl(i)) {
          const int c = add_atom(kC);
          add_bond(i, c, BondOrder::kSingle);
        }
      }
    }

    bool is_terminal_hydroxyl(int i) const {
      if (atoms_[i].element != kO || atoms_[i].aromatic || degree(i) != 1)
        return false;
      return std::any_of(bonds_.begin(), bonds_.end(), [&](const Bond &b) {
        return (b.begin == i || b.end == i) && b.order == BondOrder::kSingle;
      });
    }

    void grow(const SynthOptions &opts, bool allow_hydroxyl) {
      const int target = uniform(opts.min_atoms, opts.max_atoms);
      if (unit() < opts.ring_probability) {
        add_ring(kRings[uniform(0, kRings.size() - 1)]);
      } else {
        add_atom(kC);
      }

      int stalls = 0;
      while (size() < target && stalls < 20) {
        const double r = unit();
        bool ok = false;
        if (r < opts.ring_probability * 0.5 && size() + 6 <= opts.max_atoms) {
          ok = attach_ring();
        } else if (r < opts.ring_probability * 0.6
                   && size() + 4 <= opts.max_atoms) {
          ok = fuse_ring();
        } else {
          ok = attach_substituent(allow_hydroxyl);
        }
        stalls = ok ? 0 : stalls + 1;
      }
    }

    void remove_atom(int victim) {
      std::vector<AtomSpec> atoms;
      std::vector<int> remap(size(), -1);
      for (int i = 0; i < size(); ++i) {
        if (i != victim) {
          remap[i] = static_cast<int>(atoms.size());
          atoms.push_back(atoms_[i]);
        }
      }
      std::vector<Bond> bonds;
      for (std::size_t b = 0; b < bonds_.size(); ++b) {
        const Bond &bond = bonds_[b];
        if (bond.begin == victim || bond.end == victim)
          continue;
        bonds.push_back({ remap[bond.begin], remap[bond.end], bond.order });
      }
      atoms_ = std::move(atoms);
      bonds_ = std::move(bonds);
    }

    MolGraph graph() const { return MolGraph(atoms_, bonds_); }

    static Builder from(std::mt19937_64 &rng, const MolGraph &g) {
      Builder b(rng);
      b.atoms_.assign(g.atoms().begin(), g.atoms().end());
      b.bonds_.assign(g.bonds().begin(), g.bonds().end());
      return b;
    }

    std::vector<AtomSpec> &atoms() { return atoms_; }
    std::vector<Bond> &bonds() { return bonds_; }

  private:
    std::mt19937_64 &rng_;
    std::vector<AtomSpec> atoms_;
    std::vector<Bond> bonds_;
  };
}  // namespace

MolGraph random_molecule(std::mt19937_64 &rng, const SynthOptions &opts) {
  Builder b(rng);
  b.grow(opts, true);
  return b.graph();
}

MolPair hydroxyl_to_amine_pair(std::mt19937_64 &rng,
                               const SynthOptions &opts) {
  SynthOptions inner = opts;
  inner.max_atoms = std::max(inner.min_atoms, opts.max_atoms - 2);
  while (true) {
    Builder b(rng);
    b.grow(inner, false);
    b.cap_hydroxyls();
    const int host = b.pick([&](int i) {
      return b.atoms()[i].element == kC && b.free_valence(i) >= 1;
    });
    if (host < 0)
      continue;
    const int o = b.add_atom(kO);
    b.add_bond(host, o, BondOrder::kSingle);
    MolGraph src = b.graph();
    b.atoms()[o].element = kN;
    return { std::move(src), b.graph() };
  }
}

MolPair random_edit_pair(std::mt19937_64 &rng, const SynthOptions &opts) {
  const MolGraph src = random_molecule(rng, opts);
  while (true) {
    Builder b = Builder::from(rng, src);
    const int edits = b.uniform(1, 3);
    for (int e = 0; e < edits; ++e) {
      const int kind = b.uniform(0, 4);
      if (kind == 0) {
        b.attach_substituent(true);
      } else if (kind == 1 && b.size() > 2) {
        const int victim = b.pick([&](int i) {
          return b.degree(i) == 1 && !b.atoms()[i].aromatic;
        });
        if (victim >= 0)
          b.remove_atom(victim);
      } else if (kind == 2) {
        const int victim = b.pick([&](int i) {
          return b.degree(i) == 1 && !b.atoms()[i].aromatic;
        });
        if (victim >= 0) {
          // Mutate to a monovalent-compatible element that keeps the bond.
          static constexpr std::array<int, 5> kPool { kC, kN, kO, kF, kCl };
          const int used = standard_valences(b.atoms()[victim].element)
                               .front()
                           - b.free_valence(victim);
          std::vector<int> options;
          for (int z: kPool) {
            if (standard_valences(z).front() >= used)
              options.push_back(z);
          }
          b.atoms()[victim].element =
              options[b.uniform(0, static_cast<int>(options.size()) - 1)];
        }
      } else if (kind == 3) {
        b.attach_ring();
      } else {
        std::vector<int> doubles;
        for (int k = 0; k < static_cast<int>(b.bonds().size()); ++k) {
          if (b.bonds()[k].order == BondOrder::kDouble)
            doubles.push_back(k);
        }
        if (!doubles.empty())
          b.bonds()[doubles[b.uniform(0, doubles.size() - 1)]].order =
              BondOrder::kSingle;
        else
          b.attach_substituent(true);
      }
    }
    MolGraph tgt = b.graph();
    if (tgt.num_atoms() >= 2 && tgt.is_connected())
      return { src, std::move(tgt) };
  }
}

}  // namespace polish
