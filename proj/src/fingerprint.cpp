//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/fingerprint.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polish/error.h"

namespace polish {
namespace {
  std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    // splitmix64 finalizer over a running combination.
    std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  int hex_value(char c) {
    if (c >= '0' && c <= '9')
      return c - '0';
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
      return c - 'A' + 10;
    return -1;
  }
}  // namespace

Fingerprint::Fingerprint(int width, int radius)
    : width_(width), radius_(radius) {
  if (width <= 0 || !std::has_single_bit(static_cast<unsigned>(width)))
    throw DomainError("fingerprint width must be a power of two");
  if (radius < 0)
    throw DomainError("fingerprint radius must be non-negative");
  words_.assign((width + 63) / 64, 0);
}

int Fingerprint::count() const {
  int total = 0;
  for (std::uint64_t w: words_)
    total += std::popcount(w);
  return total;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(width_ / 4);
  for (int base = 0; base + 4 <= width_; base += 4) {
    int v = 0;
    for (int k = 0; k < 4; ++k)
      v = (v << 1) | (test(base + k) ? 1 : 0);
    out += kDigits[v];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, int radius) {
  Fingerprint fp(static_cast<int>(hex.size()) * 4, radius);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const int v = hex_value(hex[i]);
    if (v < 0)
      throw DomainError("invalid hex digit in fingerprint");
    for (int k = 0; k < 4; ++k) {
      if ((v >> (3 - k)) & 1)
        fp.set(static_cast<int>(i) * 4 + k);
    }
  }
  return fp;
}

Fingerprint morgan_fingerprint(const MolGraph &g, int radius, int width) {
  Fingerprint fp(width, radius);
  const int n = g.num_atoms();
  const std::vector<bool> ring = g.ring_atoms();
  const std::uint64_t mask = static_cast<std::uint64_t>(width) - 1;

  std::vector<std::uint64_t> ids(n);
  for (int i = 0; i < n; ++i) {
    const AtomSpec &atom = g.atom(i);
    std::uint64_t h = 0;
    h = mix(h, static_cast<std::uint64_t>(atom.element));
    h = mix(h, static_cast<std::uint64_t>(atom.formal_charge + 16));
    h = mix(h, static_cast<std::uint64_t>(g.degree(i)));
    h = mix(h, static_cast<std::uint64_t>(g.hydrogen_count(i)));
    h = mix(h, atom.aromatic ? 1 : 0);
    h = mix(h, ring[i] ? 1 : 0);
    ids[i] = h;
    fp.set(static_cast<int>(h & mask));
  }

  std::vector<std::uint64_t> next(n);
  std::vector<std::pair<int, std::uint64_t>> env;
  for (int round = 1; round <= radius; ++round) {
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const Neighbor &nb: g.neighbors(i))
        env.emplace_back(static_cast<int>(g.bond(nb.bond).order),
                         ids[nb.atom]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = mix(static_cast<std::uint64_t>(round), ids[i]);
      for (const auto &[order, id]: env)
        h = mix(mix(h, static_cast<std::uint64_t>(order)), id);
      next[i] = h;
      fp.set(static_cast<int>(h & mask));
    }
    ids.swap(next);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width() != b.width() || a.radius() != b.radius())
    throw WidthMismatch("fingerprints differ in width or radius");
  int both = 0, either = 0;
  for (std::size_t k = 0; k < a.words().size(); ++k) {
    both += std::popcount(a.words()[k] & b.words()[k]);
    either += std::popcount(a.words()[k] | b.words()[k]);
  }
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / either;
}

}  // namespace polish
