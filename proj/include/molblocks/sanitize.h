#pragma once

#include "molblocks/molecule.h"

namespace molblocks {

/// Hydrogen count an unbracketed SMILES atom would receive given its current
/// bonds, or -1 when the atom cannot be written without brackets (element
/// outside the organic subset, or bonds exceeding every default valence).
int default_implicit_h(const Molecule& m, int atom);

/// True when an aromatic atom donates a lone pair to the ring (pyrrole-type
/// N, furan O, thiophene S, carbanion).
bool is_lone_pair_donor(const Molecule& m, int atom);

/// Ring perception, aromatic-flag consistency, aromaticity perception for
/// Kekulé rings of 5-7 atoms, and valence checking. Throws SanitizationError.
void sanitize(Molecule& m);

/// Replaces plain explicit hydrogen atoms ("[H]") by implicit hydrogen
/// counts on their heavy neighbour. Isotopic or charged hydrogens are kept.
Molecule fold_explicit_hydrogens(const Molecule& m);

}  // namespace molblocks
