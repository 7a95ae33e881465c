//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/elements.h"

#include <array>
#include <span>
#include <string_view>

namespace polish {
namespace {
  constexpr std::array<std::string_view, kMaxElement + 1> kSymbols {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
  };

  constexpr int kValH[] = { 1 };
  constexpr int kValZero[] = { 0 };
  constexpr int kValB[] = { 3 };
  constexpr int kValC[] = { 4 };
  constexpr int kValN[] = { 3 };
  constexpr int kValO[] = { 2 };
  constexpr int kValHalogen[] = { 1 };
  constexpr int kValSi[] = { 4 };
  constexpr int kValP[] = { 3, 5 };
  constexpr int kValS[] = { 2, 4, 6 };

  std::span<const int> valences_of(int z) {
    switch (z) {
    case 1:
      return kValH;
    case 2:
    case 10:
    case 18:
    case 36:
    case 54:
      return kValZero;
    case 5:
    case 13:
      return kValB;
    case 6:
      return kValC;
    case 7:
      return kValN;
    case 8:
      return kValO;
    case 9:
    case 17:
    case 35:
    case 53:
      return kValHalogen;
    case 14:
    case 32:
      return kValSi;
    case 15:
    case 33:
      return kValP;
    case 16:
    case 34:
      return kValS;
    default:
      return {};
    }
  }
}  // namespace

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 0 || atomic_number > kMaxElement)
    return "?";
  return kSymbols[atomic_number];
}

int element_from_symbol(std::string_view symbol) {
  for (int z = 1; z <= kMaxElement; ++z) {
    if (kSymbols[z] == symbol)
      return z;
  }
  return -1;
}

bool is_organic_subset(int atomic_number) {
  switch (atomic_number) {
  case 5:
  case 6:
  case 7:
  case 8:
  case 9:
  case 15:
  case 16:
  case 17:
  case 35:
  case 53:
    return true;
  default:
    return false;
  }
}

bool is_aromatizable(int atomic_number) {
  switch (atomic_number) {
  case 5:
  case 6:
  case 7:
  case 8:
  case 15:
  case 16:
    return true;
  default:
    return false;
  }
}

std::span<const int> standard_valences(int atomic_number, int charge) {
  if (atomic_number <= 0)
    return {};
  // Only main-group elements get the isoelectronic shift; the shift must not
  // leave the block the element lives in.
  if (valences_of(atomic_number).empty())
    return {};
  const int shifted = atomic_number - charge;
  if (shifted <= 0 || shifted > kMaxElement)
    return {};
  return valences_of(shifted);
}

}  // namespace polish
