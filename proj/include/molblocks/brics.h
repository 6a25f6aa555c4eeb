#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molblocks/molecule.h"
#include "molblocks/smarts.h"

namespace molblocks {

/// Table-driven BRICS rule set: environment patterns and allowed pairs.
class BricsRules {
 public:
  struct Environment {
    int label;  // numeric part of "L<n>"
    SmartsPattern pattern;
  };

  /// Parses the rule-table text format; throws FormatError.
  static BricsRules parse(std::string_view text);
  static BricsRules load(const std::string& path);
  /// The rule table shipped with the library.
  static const BricsRules& standard();

  const std::string& version() const { return version_; }
  std::span<const Environment> environments() const { return envs_; }
  /// Allowed (label, label) pairs in table order.
  std::span<const std::pair<int, int>> pairs() const { return pairs_; }

 private:
  std::string version_;
  std::vector<Environment> envs_;
  std::vector<std::pair<int, int>> pairs_;
};

struct BricsBond {
  int bond_index = -1;
  int env_begin = 0;  // environment label of Bond::begin
  int env_end = 0;

  friend bool operator==(const BricsBond&, const BricsBond&) = default;
};

/// Every single acyclic bond whose two atom environments form an allowed
/// pair, ordered by bond index.
std::vector<BricsBond> find_brics_bonds(const Molecule& m,
                                        const BricsRules& rules = BricsRules::standard());

/// Wildcard isotope labels used inside path layouts.
inline constexpr int kBackwardLabel = 1;  // "[1*]": attaches to the previous block
inline constexpr int kForwardLabel = 2;   // "[2*]": attaches to the next block

struct Block {
  Molecule graph;             // fragment with 0-2 labeled wildcard atoms
  std::string canonical_key;  // canonical SMILES with labels, stereo stripped
  std::string vocab_key;      // canonical SMILES with unlabeled "*" wildcards
  int attachment_count = 0;
};

/// Canonical keys for a fragment graph (labels kept / dropped).
std::string block_smiles(const Molecule& fragment);
std::string unlabeled_block_smiles(const Molecule& fragment);
Block make_block(Molecule fragment);

/// Result of cutting a set of bonds.
struct DecompositionLayout {
  std::vector<Block> fragments;  // path order when is_path
  std::vector<int> cut_bonds;    // bond indices, ascending
  bool is_path = true;
};

/// Raw cut: each bond is replaced by two unlabeled wildcard atoms and the
/// connected components are returned (atom order follows the input).
/// `wildcard_cut` receives, per fragment, the cut-bond index behind each
/// wildcard atom (-1 for ordinary atoms) when non-null.
std::vector<Molecule> fragment_on_bonds(const Molecule& m, std::span<const int> bonds,
                                        std::vector<std::vector<int>>* wildcard_cut = nullptr);

/// The fragment holding `seed` after cutting `cut_bonds`; every cut bond
/// crossed by the fragment becomes a wildcard whose isotope is `labels[i]`
/// (0 when `labels` is empty).
Molecule extract_fragment(const Molecule& m, std::span<const int> cut_bonds, int seed,
                          std::span<const int> labels = {});

/// Breaks the given BRICS bonds. Path layouts are ordered, labeled so that
/// block i's forward wildcard is [2*] and block i+1's backward wildcard is
/// [1*], and oriented so that the sequence of canonical keys is the
/// lexicographically larger of the two traversal directions. Branched
/// layouts keep unlabeled wildcards and list fragments by canonical key.
/// Throws InvalidArgument if a bond is not a BRICS bond of `m`.
DecompositionLayout break_molecule(const Molecule& m, std::span<const int> bonds,
                                   const BricsRules& rules = BricsRules::standard());
DecompositionLayout break_molecule(const Molecule& m, std::span<const BricsBond> cuts);

bool has_branch(const DecompositionLayout& layout);

/// Joins two fragments: bonds the neighbour of `a`'s wildcard labeled
/// `label_a` to the neighbour of `b`'s wildcard labeled `label_b` and drops
/// both wildcards. No sanitization. Throws InvalidArgument when a label is
/// missing.
Molecule join_fragments(const Molecule& a, int label_a, const Molecule& b, int label_b);

}  // namespace molblocks
