#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "molblocks/brics.h"
#include "molblocks/vocab.h"

namespace molblocks {

/// Joins a's [2*] to b's [1*] and fully sanitizes the result. Throws
/// InvalidArgument without complementary wildcards, SanitizationError on a
/// bad valence.
Molecule merge_fragments(const Block& a, const Block& b);

struct GraphBpeBuild {
  Vocabulary vocab;                  // primitives plus one entry per merged block
  std::vector<std::string> merges;   // merged block keys in merge order
  std::uint64_t merge_ops = 0;       // merge_fragments calls
  std::uint64_t primitives = 0;      // sum of primitive counts over the corpus
  bool reached_target = false;
};

/// Each molecule starts as its full BRICS path; the most frequent adjacent
/// pair (ties: smallest pair key) is merged everywhere until the vocabulary
/// holds `target_vocab_size` keys or no pair remains. Throws InvalidArgument
/// for a branching or unparseable molecule.
GraphBpeBuild graph_bpe_build(std::span<const std::string> corpus, std::size_t target_vocab_size);

struct BenchRow {
  int size = 0;
  double break_mean_s = 0;
  double merge_mean_s = 0;
  double ratio = 0;
  int samples = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

struct BenchConfig {
  std::vector<int> sizes{10, 15, 20};
  int samples = 300;
  int repetitions = 3;
  std::uint64_t seed = 42;
};

/// Seeded molecule with exactly `heavy_atoms` heavy atoms: aryl rings joined
/// by ether links ending in an alkyl chain. Needs heavy_atoms >= 9.
std::string benchmark_molecule(int heavy_atoms, std::uint64_t seed);

/// Mean seconds per break (cut of one 2-subset of BRICS bonds) and per merge
/// (rejoin of the two halves of one cut, with sanitization), median over
/// repetitions, after one untimed warm-up pass.
BenchReport benchmark_break_vs_merge(const BenchConfig& config);

void write_bench_csv(const BenchReport& r, std::ostream& out);
void write_bench_table(const BenchReport& r, std::ostream& out);

}  // namespace molblocks
