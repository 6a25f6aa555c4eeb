#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "molblocks/brics.h"
#include "molblocks/vocab.h"

namespace molblocks {

enum class TokenizeMode { kBfe, kNaiveBrics };

struct Fragmentation {
  std::vector<Block> blocks;                // path order, [2*] of block i meets [1*] of i+1
  std::vector<std::uint64_t> frequencies;   // aligned with blocks; empty until scored
  TokenizeMode mode = TokenizeMode::kBfe;
  std::vector<int> cut_bonds;               // ascending bond indices
};

inline constexpr int kDefaultMaxBonds = 16;

/// One candidate per non-branching subset of the BRICS bonds, sorted by
/// block count, then by the sequence of canonical block keys. Throws
/// TooManyBondsError beyond `max_bonds`.
std::vector<Fragmentation> enumerate_decompositions(const Molecule& m,
                                                    int max_bonds = kDefaultMaxBonds);

/// Sample standard deviation; 0 for fewer than two values.
double frequency_spread(std::span<const std::uint64_t> freqs);

/// Smallest block count with a candidate whose blocks all reach f_min, then
/// the least spread among those; the finest candidate when none qualifies.
/// Candidates must be sorted as enumerate_decompositions returns them.
Fragmentation select_decomposition(std::span<const Fragmentation> candidates,
                                   const Vocabulary& vocab);

/// Throws InvalidArgument when a naive layout branches.
Fragmentation tokenize(const Molecule& m, const Vocabulary& vocab,
                       TokenizeMode mode = TokenizeMode::kBfe, int max_bonds = kDefaultMaxBonds);

/// Rejoins adjacent blocks and sanitizes. Throws InvalidArgument when
/// neighbours lack complementary wildcards, SanitizationError on bad valence.
Molecule detokenize(const Fragmentation& f);

/// Canonical parent scaffold SMILES -> common name.
class NameTable {
 public:
  /// Tab-separated "<scaffold SMILES>\t<name>", '#' comments. Keys are
  /// re-canonicalized on load. Throws FormatError.
  static NameTable parse(std::string_view text);
  static NameTable load(const std::string& path);
  /// The curated table shipped with the library.
  static const NameTable& standard();

  std::optional<std::string> lookup(const std::string& scaffold_key) const;
  /// Name of the block's parent scaffold; falls back to the scaffold's ring
  /// system, then to "unnamed".
  std::string name_for(const Block& block) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

/// Block with wildcards replaced by hydrogen, as canonical SMILES.
std::string parent_scaffold(const Molecule& block);

enum class RenderStyle {
  kFull,   // "name [SMILES] -> ..."
  kNames,  // "name -> ..."
};

std::string render(const Fragmentation& f, const NameTable& names,
                   RenderStyle style = RenderStyle::kFull);
/// JSON array of {smiles, name, frequency}.
std::string to_json(const Fragmentation& f, const NameTable& names);

/// Vocabulary shipped for demonstrations (the imatinib blocks).
const Vocabulary& demo_vocabulary();

}  // namespace molblocks
