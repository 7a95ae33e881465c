//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_ELEMENTS_H_
#define POLISH_ELEMENTS_H_

#include <span>
#include <string_view>

namespace polish {

// Atomic number 0 is the attachment/dummy atom written as "*".
inline constexpr int kDummyElement = 0;
inline constexpr int kMaxElement = 118;

std::string_view element_symbol(int atomic_number);

// Returns the atomic number, or -1 if the symbol is not a periodic-table
// element. Lookup is case-sensitive ("Cl", not "CL").
int element_from_symbol(std::string_view symbol);

bool is_organic_subset(int atomic_number);
bool is_aromatizable(int atomic_number);

// Standard valences in ascending order for the element isoelectronic with
// (atomic_number - charge). Empty when the element has no tabulated valence
// (metals etc.), in which case no valence limit is enforced.
std::span<const int> standard_valences(int atomic_number, int charge = 0);

}  // namespace polish

#endif  // POLISH_ELEMENTS_H_
