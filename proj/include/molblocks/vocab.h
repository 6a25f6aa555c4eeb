#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "molblocks/brics.h"
#include "molblocks/molecule.h"

namespace molblocks {

inline constexpr int kDefaultFMin = 20;

struct Vocabulary {
  std::unordered_map<std::string, std::uint64_t> counts;  // label-free block key -> count
  int f_min = kDefaultFMin;
  std::uint64_t corpus_size = 0;
  bool include_full = false;
  std::string version = "bfe-vocab v1";

  std::uint64_t frequency(const std::string& key) const;
  /// (key, count) sorted by descending count, then ascending key.
  std::vector<std::pair<std::string, std::uint64_t>> sorted() const;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

/// Every block delimited by a 2-subset of the BRICS bonds plus two virtual
/// terminal bonds, as label-free keys. `breaks` is incremented once per
/// 2-subset visited, binom(k + 2, 2) for k BRICS bonds.
std::vector<std::string> enumerate_blocks(const Molecule& m, bool include_full,
                                          std::uint64_t* breaks = nullptr,
                                          const BricsRules& rules = BricsRules::standard());

struct VocabConfig {
  int f_min = kDefaultFMin;
  bool include_full = false;
  int threads = 1;  // corpus partitions counted independently, then merged
};

struct VocabBuild {
  Vocabulary vocab;
  std::uint64_t skipped = 0;  // unparseable records
  std::uint64_t breaks = 0;
};

/// Throws InvalidArgument on an empty corpus or f_min < 1.
VocabBuild build_vocabulary(std::span<const std::string> smiles, const VocabConfig& config);
/// Reads SMILES records ("smiles [name]" per line, '#' comments) from a stream.
VocabBuild build_vocabulary(std::istream& corpus, const VocabConfig& config);

void save_vocabulary(const Vocabulary& v, std::ostream& out);
void save_vocabulary(const Vocabulary& v, const std::string& path);
/// Throws FormatError on a malformed file.
Vocabulary load_vocabulary(std::istream& in);
Vocabulary load_vocabulary(const std::string& path);
Vocabulary parse_vocabulary(std::string_view text);

}  // namespace molblocks
