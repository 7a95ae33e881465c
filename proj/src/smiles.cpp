//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/smiles.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polish/elements.h"
#include "polish/error.h"

namespace polish {
namespace {
  using Kind = SmilesError::Kind;

  struct RingOpening {
    int atom;
    std::optional<BondOrder> order;
    std::size_t position;
  };

  class Parser {
  public:
    Parser(std::string_view text, const ParseOptions &opts)
        : text_(text), opts_(opts) { }

    MolGraph parse() {
      if (text_.empty())
        fail(Kind::kSyntax, 0, "empty SMILES");

      while (pos_ < text_.size()) {
        const char c = text_[pos_];
        if (static_cast<unsigned char>(c) > 127)
          fail(Kind::kSyntax, pos_, "non-ASCII byte");

        switch (c) {
        case '(':
          if (prev_ < 0)
            fail(Kind::kSyntax, pos_, "branch without a preceding atom");
          branches_.push_back({ prev_, pos_ });
          ++pos_;
          break;
        case ')':
          if (branches_.empty())
            fail(Kind::kSyntax, pos_, "unbalanced ')'");
          if (pending_)
            fail(Kind::kSyntax, pos_, "dangling bond before ')'");
          prev_ = branches_.back().first;
          branches_.pop_back();
          ++pos_;
          break;
        case '-':
        case '=':
        case '#':
        case ':':
          set_pending(c);
          break;
        case '/':
        case '\\':
          fail(Kind::kUnsupported, pos_, "stereo bond markers are unsupported");
        case '$':
          fail(Kind::kUnsupported, pos_, "quadruple bonds are unsupported");
        case '@':
          fail(Kind::kUnsupported, pos_, "chirality markers are unsupported");
        case '.':
          if (!opts_.allow_disconnected)
            fail(Kind::kUnsupported, pos_, "disconnected structures ('.')");
          if (pending_ || prev_ < 0)
            fail(Kind::kSyntax, pos_, "misplaced '.'");
          if (!branches_.empty())
            fail(Kind::kSyntax, pos_, "'.' inside a branch");
          prev_ = -1;
          ++pos_;
          break;
        case '%':
          ring_closure();
          break;
        case '[':
          bracket_atom();
          break;
        case '*':
          if (!opts_.allow_wildcard)
            fail(Kind::kUnsupported, pos_, "wildcard atoms are unsupported");
          add_atom(AtomSpec { .element = kDummyElement }, pos_);
          ++pos_;
          break;
        default:
          if (std::isdigit(static_cast<unsigned char>(c))) {
            ring_closure();
          } else if (std::isalpha(static_cast<unsigned char>(c))) {
            organic_atom();
          } else {
            fail(Kind::kSyntax, pos_, std::string("unexpected character '")
                                          + c + "'");
          }
        }
      }

      if (pending_)
        fail(Kind::kSyntax, pending_pos_, "dangling bond at end of input");
      if (!branches_.empty())
        fail(Kind::kSyntax, branches_.back().second, "unbalanced '('");
      if (!rings_.empty()) {
        const auto &[digit, open] = *rings_.begin();
        fail(Kind::kRingClosure, open.position,
             "ring bond " + std::to_string(digit) + " is never closed");
      }

      try {
        return MolGraph(std::move(atoms_), std::move(bonds_));
      } catch (const ValenceError &e) {
        fail(Kind::kValence, atom_pos_[e.atom()], e.what());
      } catch (const Error &e) {
        fail(Kind::kSyntax, 0, e.what());
      }
    }

  private:
    [[noreturn]] static void fail(Kind kind, std::size_t pos,
                                  const std::string &what) {
      throw SmilesError(kind, pos, what);
    }

    void set_pending(char c) {
      if (pending_)
        fail(Kind::kSyntax, pos_, "consecutive bond symbols");
      if (prev_ < 0)
        fail(Kind::kSyntax, pos_, "bond without a preceding atom");
      switch (c) {
      case '-':
        pending_ = BondOrder::kSingle;
        break;
      case '=':
        pending_ = BondOrder::kDouble;
        break;
      case '#':
        pending_ = BondOrder::kTriple;
        break;
      default:
        pending_ = BondOrder::kAromatic;
        break;
      }
      pending_pos_ = pos_;
      ++pos_;
    }

    BondOrder default_order(int a, int b) const {
      return atoms_[a].aromatic && atoms_[b].aromatic ? BondOrder::kAromatic
                                                      : BondOrder::kSingle;
    }

    void add_bond(int a, int b, BondOrder order, std::size_t pos) {
      if (a == b)
        fail(Kind::kSyntax, pos, "atom bonded to itself");
      for (const Bond &bond: bonds_) {
        if ((bond.begin == a && bond.end == b)
            || (bond.begin == b && bond.end == a))
          fail(Kind::kSyntax, pos, "duplicate bond");
      }
      if (order == BondOrder::kAromatic
          && !(accepts_aromatic_bond(atoms_[a]) && accepts_aromatic_bond(atoms_[b])))
        fail(Kind::kSyntax, pos, "aromatic bond to a non-aromatic atom");
      bonds_.push_back({ a, b, order });
    }

    void add_atom(const AtomSpec &atom, std::size_t pos) {
      const int idx = static_cast<int>(atoms_.size());
      atoms_.push_back(atom);
      atom_pos_.push_back(pos);
      if (prev_ >= 0) {
        add_bond(prev_, idx, pending_.value_or(default_order(prev_, idx)),
                 pending_ ? pending_pos_ : pos);
      } else if (pending_) {
        fail(Kind::kSyntax, pending_pos_, "bond without a preceding atom");
      }
      pending_.reset();
      prev_ = idx;
    }

    void organic_atom() {
      const std::size_t start = pos_;
      const char c = text_[pos_];
      AtomSpec atom;
      if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
        atom.element = 17;
        pos_ += 2;
      } else if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
        atom.element = 35;
        pos_ += 2;
      } else {
        switch (c) {
        case 'B':
        case 'C':
        case 'N':
        case 'O':
        case 'P':
        case 'S':
        case 'F':
        case 'I':
          atom.element = element_from_symbol(std::string_view(&text_[pos_], 1));
          break;
        case 'b':
        case 'c':
        case 'n':
        case 'o':
        case 'p':
        case 's': {
          const char upper = static_cast<char>(std::toupper(c));
          atom.element = element_from_symbol(std::string_view(&upper, 1));
          atom.aromatic = true;
          break;
        }
        case 'H':
          fail(Kind::kUnsupported, pos_, "hydrogen atoms must be implicit");
        default:
          fail(Kind::kSyntax, pos_, std::string("unknown atom symbol '") + c
                                        + "'");
        }
        ++pos_;
      }
      add_atom(atom, start);
    }

    int read_number(std::size_t max_digits) {
      int value = 0;
      std::size_t digits = 0;
      while (pos_ < text_.size() && digits < max_digits
             && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + (text_[pos_] - '0');
        ++pos_;
        ++digits;
      }
      return digits == 0 ? -1 : value;
    }

    void bracket_atom() {
      const std::size_t start = pos_;
      ++pos_;
      AtomSpec atom;

      const int isotope = read_number(3);
      if (isotope == 0)
        fail(Kind::kSyntax, start + 1, "isotope must be positive");
      if (isotope > 0)
        atom.isotope = isotope;

      if (pos_ >= text_.size())
        fail(Kind::kSyntax, start, "unterminated bracket atom");

      const char c = text_[pos_];
      if (c == '*') {
        if (!opts_.allow_wildcard)
          fail(Kind::kUnsupported, pos_, "wildcard atoms are unsupported");
        atom.element = kDummyElement;
        ++pos_;
      } else if (std::islower(static_cast<unsigned char>(c))) {
        if (text_.substr(pos_, 2) == "se" || text_.substr(pos_, 2) == "as"
            || text_.substr(pos_, 2) == "te")
          fail(Kind::kUnsupported, pos_, "aromatic element outside B,C,N,O,P,S");
        const char upper = static_cast<char>(std::toupper(c));
        atom.element = element_from_symbol(std::string_view(&upper, 1));
        if (atom.element < 0 || !is_aromatizable(atom.element))
          fail(Kind::kSyntax, pos_, std::string("unknown aromatic symbol '")
                                        + c + "'");
        atom.aromatic = true;
        ++pos_;
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        int element = -1;
        if (pos_ + 1 < text_.size()
            && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
          element = element_from_symbol(text_.substr(pos_, 2));
          if (element >= 0)
            pos_ += 2;
        }
        if (element < 0) {
          element = element_from_symbol(text_.substr(pos_, 1));
          if (element < 0)
            fail(Kind::kSyntax, pos_, "unknown element symbol");
          ++pos_;
        }
        atom.element = element;
      } else {
        fail(Kind::kSyntax, pos_, "expected element symbol");
      }

      if (atom.element == 1)
        fail(Kind::kUnsupported, start, "hydrogen atoms must be implicit");

      if (pos_ < text_.size() && text_[pos_] == '@')
        fail(Kind::kUnsupported, pos_, "chirality markers are unsupported");

      atom.explicit_h = 0;
      if (pos_ < text_.size() && text_[pos_] == 'H') {
        ++pos_;
        const int h = read_number(1);
        atom.explicit_h = h < 0 ? 1 : h;
      }

      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        const char sign = text_[pos_];
        const int unit = sign == '+' ? 1 : -1;
        ++pos_;
        int magnitude = 1;
        if (pos_ < text_.size() && text_[pos_] == sign) {
          while (pos_ < text_.size() && text_[pos_] == sign) {
            ++magnitude;
            ++pos_;
          }
        } else {
          const int value = read_number(2);
          if (value >= 0)
            magnitude = value;
        }
        atom.formal_charge = unit * magnitude;
      }

      if (pos_ < text_.size() && text_[pos_] == ':') {
        ++pos_;
        if (read_number(6) < 0)
          fail(Kind::kSyntax, pos_, "atom class requires a number");
      }

      if (pos_ >= text_.size() || text_[pos_] != ']')
        fail(Kind::kSyntax, pos_ < text_.size() ? pos_ : start,
             "malformed bracket atom");
      ++pos_;

      if (atom.element == kDummyElement)
        atom.explicit_h.reset();
      add_atom(atom, start);
    }

    void ring_closure() {
      const std::size_t start = pos_;
      if (prev_ < 0)
        fail(Kind::kSyntax, pos_, "ring bond without a preceding atom");
      int digit;
      if (text_[pos_] == '%') {
        ++pos_;
        const std::size_t before = pos_;
        digit = read_number(2);
        if (digit < 0 || pos_ - before != 2)
          fail(Kind::kSyntax, start, "'%' must be followed by two digits");
      } else {
        digit = text_[pos_] - '0';
        ++pos_;
      }

      auto it = rings_.find(digit);
      if (it == rings_.end()) {
        rings_.emplace(digit, RingOpening { prev_, pending_, start });
        pending_.reset();
        return;
      }

      const RingOpening open = it->second;
      rings_.erase(it);
      if (open.order && pending_ && *open.order != *pending_)
        fail(Kind::kSyntax, start, "conflicting ring bond symbols");
      const BondOrder order =
          pending_ ? *pending_
                   : open.order.value_or(default_order(open.atom, prev_));
      pending_.reset();
      add_bond(open.atom, prev_, order, start);
    }

    std::string_view text_;
    const ParseOptions &opts_;
    std::size_t pos_ = 0;

    std::vector<AtomSpec> atoms_;
    std::vector<std::size_t> atom_pos_;
    std::vector<Bond> bonds_;

    int prev_ = -1;
    std::optional<BondOrder> pending_;
    std::size_t pending_pos_ = 0;
    std::vector<std::pair<int, std::size_t>> branches_;
    std::map<int, RingOpening> rings_;
  };

  // ---------------------------------------------------------------- writer

  std::string bond_symbol(const MolGraph &g, const Bond &bond) {
    const bool both_aromatic =
        g.atom(bond.begin).aromatic && g.atom(bond.end).aromatic;
    switch (bond.order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
    }
    return "";
  }

  void append_atom(const MolGraph &g, int i, const WriteOptions &opts,
                   std::string &out) {
    const AtomSpec &atom = g.atom(i);
    std::string symbol(element_symbol(atom.element));
    if (atom.aromatic)
      symbol[0] = static_cast<char>(std::tolower(symbol[0]));

    const bool has_class = !opts.atom_classes.empty();
    const bool has_isotope = opts.canon.isotopes && atom.isotope.has_value();
    const bool has_h = opts.canon.hydrogens && atom.explicit_h.has_value();
    const bool bare = (atom.element == kDummyElement
                       || is_organic_subset(atom.element))
                      && atom.formal_charge == 0 && !has_isotope && !has_h
                      && !has_class;
    if (bare) {
      out += symbol;
      return;
    }

    out += '[';
    if (has_isotope)
      out += std::to_string(*atom.isotope);
    out += symbol;
    if (opts.canon.hydrogens && atom.element != kDummyElement) {
      const int h = g.hydrogen_count(i);
      if (h > 0)
        out += 'H';
      if (h > 1)
        out += std::to_string(h);
    }
    if (atom.formal_charge != 0) {
      out += atom.formal_charge > 0 ? '+' : '-';
      const int magnitude = std::abs(atom.formal_charge);
      if (magnitude > 1)
        out += std::to_string(magnitude);
    }
    if (has_class) {
      out += ':';
      out += std::to_string(opts.atom_classes[i]);
    }
    out += ']';
  }

  void append_ring_label(int digit, std::string &out) {
    if (digit < 10) {
      out += static_cast<char>('0' + digit);
    } else {
      out += '%';
      out += std::to_string(digit);
    }
  }

  class Writer {
  public:
    Writer(const MolGraph &g, std::span<const int> ranks,
           const WriteOptions &opts)
        : g_(g), ranks_(ranks), opts_(opts), visited_(g.num_atoms(), false),
          written_(g.num_atoms(), false), children_(g.num_atoms()),
          ring_bonds_(g.num_atoms()), tree_bond_(g.num_bonds(), false),
          ring_digit_(g.num_bonds(), -1) { }

    std::string write(std::vector<int> *output_order) {
      const int n = g_.num_atoms();
      std::vector<int> by_rank(n);
      for (int i = 0; i < n; ++i)
        by_rank[i] = i;
      std::sort(by_rank.begin(), by_rank.end(),
                [&](int a, int b) { return ranks_[a] < ranks_[b]; });

      std::string out;
      for (int root: by_rank) {
        if (visited_[root])
          continue;
        plan(root, -1);
        if (!out.empty())
          out += '.';
        emit(root, out);
      }
      if (output_order != nullptr)
        *output_order = std::move(order_);
      return out;
    }

  private:
    std::vector<Neighbor> sorted_neighbors(int a) const {
      std::vector<Neighbor> nbrs(g_.neighbors(a).begin(),
                                 g_.neighbors(a).end());
      std::sort(nbrs.begin(), nbrs.end(), [&](Neighbor x, Neighbor y) {
        return ranks_[x.atom] < ranks_[y.atom];
      });
      return nbrs;
    }

    // First pass: DFS spanning tree in rank order; remaining bonds close
    // rings.
    void plan(int a, int parent_bond) {
      visited_[a] = true;
      for (const Neighbor &nb: sorted_neighbors(a)) {
        if (nb.bond == parent_bond)
          continue;
        if (!visited_[nb.atom]) {
          tree_bond_[nb.bond] = true;
          children_[a].push_back(nb);
          plan(nb.atom, nb.bond);
        } else if (!tree_bond_[nb.bond]
                   && std::find_if(ring_bonds_[a].begin(), ring_bonds_[a].end(),
                                   [&](Neighbor r) { return r.bond == nb.bond; })
                          == ring_bonds_[a].end()) {
          ring_bonds_[a].push_back(nb);
          ring_bonds_[nb.atom].push_back({ a, nb.bond });
        }
      }
    }

    void emit(int a, std::string &out) {
      written_[a] = true;
      order_.push_back(a);
      append_atom(g_, a, opts_, out);

      // Closures (partner already written) before openings; each group in
      // partner rank order.
      std::vector<Neighbor> closes, opens;
      for (const Neighbor &nb: ring_bonds_[a])
        (written_[nb.atom] ? closes : opens).push_back(nb);
      auto by_rank = [&](Neighbor x, Neighbor y) {
        return ranks_[x.atom] < ranks_[y.atom];
      };
      std::sort(closes.begin(), closes.end(), by_rank);
      std::sort(opens.begin(), opens.end(), by_rank);

      std::vector<int> released;
      for (const Neighbor &nb: closes) {
        const int digit = ring_digit_[nb.bond];
        append_ring_label(digit, out);
        released.push_back(digit);
      }
      for (const Neighbor &nb: opens) {
        int digit = 1;
        while (std::find(used_.begin(), used_.end(), digit) != used_.end())
          ++digit;
        if (digit > 99)
          throw Error("more than 99 simultaneous ring closures");
        used_.push_back(digit);
        ring_digit_[nb.bond] = digit;
        out += bond_symbol(g_, g_.bond(nb.bond));
        append_ring_label(digit, out);
      }
      for (int digit: released)
        used_.erase(std::find(used_.begin(), used_.end(), digit));

      const std::vector<Neighbor> &kids = children_[a];
      for (std::size_t k = 0; k < kids.size(); ++k) {
        const bool last = k + 1 == kids.size();
        if (!last)
          out += '(';
        out += bond_symbol(g_, g_.bond(kids[k].bond));
        emit(kids[k].atom, out);
        if (!last)
          out += ')';
      }
    }

    const MolGraph &g_;
    std::span<const int> ranks_;
    const WriteOptions &opts_;

    std::vector<bool> visited_, written_;
    std::vector<std::vector<Neighbor>> children_, ring_bonds_;
    std::vector<bool> tree_bond_;
    std::vector<int> ring_digit_;
    std::vector<int> used_;
    std::vector<int> order_;
  };
}  // namespace

MolGraph parse_smiles(std::string_view text, const ParseOptions &opts) {
  return Parser(text, opts).parse();
}

std::string write_smiles(const MolGraph &g, const WriteOptions &opts,
                         std::vector<int> *output_order) {
  const std::vector<int> ranks =
      canonical_rank(g, opts.canon, opts.atom_classes);
  return write_smiles_ranked(g, ranks, opts, output_order);
}

std::string write_smiles_ranked(const MolGraph &g, std::span<const int> ranks,
                                const WriteOptions &opts,
                                std::vector<int> *output_order) {
  return Writer(g, ranks, opts).write(output_order);
}

}  // namespace polish
