#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace molblocks {

/// Periodic table entry. Atomic number 0 is the wildcard "*".
struct Element {
  int atomic_number;
  std::string_view symbol;
  double mass;  // standard atomic weight, u
};

const Element& element(int atomic_number);
std::optional<int> atomic_number_of(std::string_view symbol);
int max_atomic_number();

/// True for B, C, N, O, P, S, F, Cl, Br, I (writable without brackets).
bool is_organic_subset(int atomic_number);

/// Symbols that may appear lowercase (aromatic) in SMILES.
bool can_be_aromatic(int atomic_number);

/// Allowed valences of an element with the given formal charge, ascending.
/// Empty when the element is not valence-checked (metals, noble gases, ...).
std::span<const int> allowed_valences(int atomic_number, int formal_charge);

/// Default implicit-hydrogen valence list for unbracketed organic atoms.
std::span<const int> default_valences(int atomic_number);

}  // namespace molblocks
