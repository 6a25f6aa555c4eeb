#pragma once

#include <vector>

#include "molblocks/molecule.h"

namespace molblocks {

/// Canonical atom ranking: a permutation of 0..n-1 that depends only on the
/// graph (element, isotope, charge, aromaticity, degree, hydrogen count and
/// bond orders), not on input atom order. Stereo annotations are ignored.
std::vector<int> canonical_ranks(const Molecule& m);

}  // namespace molblocks
