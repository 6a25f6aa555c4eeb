#pragma once

#include <string>

#include "molblocks/molecule.h"

namespace molblocks {

struct Descriptors {
  double molecular_weight = 0.0;  // u, implicit hydrogens included
  int heavy_atom_count = 0;
  int hbd = 0;  // N/O atoms carrying at least one hydrogen
  int hba = 0;  // N/O atoms
  int rotatable_bonds = 0;
  int aromatic_ring_count = 0;
};

Descriptors compute_descriptors(const Molecule& m);

/// Hill-order formula ("C29H31N7O"); wildcards are skipped.
std::string molecular_formula(const Molecule& m);

}  // namespace molblocks
