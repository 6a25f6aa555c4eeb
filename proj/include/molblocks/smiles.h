#pragma once

#include <string>
#include <string_view>

#include "molblocks/molecule.h"

namespace molblocks {

struct SmilesParseOptions {
  bool sanitize = true;
  bool fold_hydrogens = true;  // "[H]" atoms become implicit counts
};

/// Parses a SMILES string. Throws SmilesSyntaxError on malformed text and
/// SanitizationError when sanitization rejects the graph.
Molecule parse_smiles(std::string_view text, const SmilesParseOptions& opts = {});

struct SmilesWriteOptions {
  bool canonical = true;   // false writes atoms in input order
  bool isomeric = false;   // emit @/@@ and / \ annotations
};

/// Writes a SMILES string. Canonical output is identical for isomorphic
/// molecules (stereo ignored when ranking).
std::string write_smiles(const Molecule& m, const SmilesWriteOptions& opts = {});

/// write_smiles(parse_smiles(text)).
std::string canonical_smiles(std::string_view text);

/// One record of a SMILES file: the SMILES and an optional name.
struct SmilesRecord {
  std::string smiles;
  std::string name;
};

/// Splits "<smiles> [name...]". Returns false for blank and '#' lines.
bool split_smiles_record(std::string_view line, SmilesRecord& out);

}  // namespace molblocks
