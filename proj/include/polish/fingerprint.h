//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_FINGERPRINT_H_
#define POLISH_FINGERPRINT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "polish/molgraph.h"

namespace polish {

class Fingerprint {
public:
  Fingerprint() = default;
  // width must be a positive power of two.
  Fingerprint(int width, int radius);

  int width() const { return width_; }
  int radius() const { return radius_; }

  bool test(int bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1; }
  void set(int bit) { words_[bit >> 6] |= std::uint64_t { 1 } << (bit & 63); }
  int count() const;

  const std::vector<std::uint64_t> &words() const { return words_; }

  // width/4 hex digits; bit 0 is the most significant bit of the first digit.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, int radius);

  bool operator==(const Fingerprint &) const = default;

private:
  int width_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

inline constexpr int kDefaultFingerprintRadius = 2;
inline constexpr int kDefaultFingerprintWidth = 2048;

// ECFP-style circular fingerprint. Atom invariants: element, charge, degree,
// hydrogen count, aromatic flag, ring membership. Every round's identifiers
// are folded into the bitset.
Fingerprint morgan_fingerprint(const MolGraph &g,
                               int radius = kDefaultFingerprintRadius,
                               int width = kDefaultFingerprintWidth);

// |a & b| / |a | b|; 1.0 when both are empty. Throws WidthMismatch unless
// width and radius agree.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace polish

#endif  // POLISH_FINGERPRINT_H_
