#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molblocks {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

/// Bond order as counted toward valence; aromatic bonds count as 1 here and
/// the aromatic pi contribution is handled per atom.
int valence_contribution(BondOrder order);

/// Tetrahedral parity as written in SMILES: "@" is anticlockwise looking
/// from the first reference neighbour, "@@" clockwise.
enum class Chirality : std::uint8_t { kNone, kAnticlockwise, kClockwise };

/// Directional single-bond marker for double-bond geometry: kUp is "/",
/// kDown is "\", both read from Bond::begin toward Bond::end.
enum class BondDirection : std::uint8_t { kNone, kUp, kDown };

/// Placeholder inside Atom::chiral_neighbors for the atom's implicit hydrogen.
inline constexpr int kImplicitHydrogen = -1;

struct Atom {
  int atomic_number = 6;
  int formal_charge = 0;
  int isotope = 0;  // 0 = unspecified
  bool aromatic = false;
  int implicit_h = 0;  // hydrogens not represented as graph atoms
  Chirality chirality = Chirality::kNone;
  std::vector<int> chiral_neighbors;  // reference order for `chirality`

  bool is_wildcard() const { return atomic_number == 0; }
  bool is_hydrogen() const { return atomic_number == 1; }
  std::string_view symbol() const;
};

struct Bond {
  int begin = -1;
  int end = -1;
  BondOrder order = BondOrder::kSingle;
  BondDirection direction = BondDirection::kNone;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

/// Attributed molecular graph. Ring information is refreshed by
/// perceive_rings() (called by sanitize()).
class Molecule {
 public:
  int add_atom(Atom atom);
  /// Throws InvalidArgument on self-bonds, duplicate bonds, or bad indices.
  int add_bond(int begin, int end, BondOrder order,
               BondDirection direction = BondDirection::kNone);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }

  std::span<const Neighbor> neighbors(int atom) const {
    return adjacency_[static_cast<std::size_t>(atom)];
  }
  int degree(int atom) const { return static_cast<int>(neighbors(atom).size()); }
  std::optional<int> bond_between(int a, int b) const;

  /// Implicit hydrogens plus explicit hydrogen neighbours.
  int total_h(int atom) const;
  /// Sum of valence contributions of incident bonds.
  int bond_order_sum(int atom) const;
  bool has_multiple_bond(int atom) const;

  /// Atoms that are neither hydrogen nor wildcard.
  int heavy_atom_count() const;
  int wildcard_count() const;

  bool atom_in_ring(int atom) const { return atom_in_ring_[static_cast<std::size_t>(atom)]; }
  bool bond_in_ring(int bond) const { return bond_in_ring_[static_cast<std::size_t>(bond)]; }
  /// All simple cycles of 3..7 atoms, each as an atom sequence.
  const std::vector<std::vector<int>>& small_rings() const { return rings_; }
  void perceive_rings();
  /// Copies ring data from `src` through `atom_map` (src index -> index here,
  /// -1 when absent). Valid only when no ring of `src` was broken apart.
  void inherit_rings(const Molecule& src, std::span<const int> atom_map);

  /// Atom index sets of connected components, each sorted ascending.
  std::vector<std::vector<int>> components() const;

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<bool> atom_in_ring_;
  std::vector<bool> bond_in_ring_;
  std::vector<std::vector<int>> rings_;
  std::string name_;
};

/// Builds a new molecule from the atoms in `keep` (any order; output order
/// follows `keep`) and the bonds among them. `old_to_new` receives the index
/// map (-1 for dropped atoms) when non-null. Chiral references to dropped
/// atoms are removed along with the parity.
/// With `inherit_rings`, ring data is carried over from `m` instead of being
/// perceived again (valid when `keep` splits no ring).
Molecule induced_subgraph(const Molecule& m, std::span<const int> keep,
                          std::vector<int>* old_to_new = nullptr, bool inherit_rings = false);

/// Copy with atoms renumbered: new index of old atom i is order[i]. Used by
/// permutation tests.
Molecule permute_atoms(const Molecule& m, std::span<const int> order);

/// Copy with all stereo annotations removed.
Molecule strip_stereo(const Molecule& m);

}  // namespace molblocks
