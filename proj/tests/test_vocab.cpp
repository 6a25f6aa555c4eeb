#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "molblocks/errors.h"
#include "molblocks/smiles.h"
#include "molblocks/vocab.h"
#include "synthetic.h"
#include "test_util.h"

using namespace molblocks;
using namespace molblocks::testing;

namespace {

std::vector<std::string> sorted_blocks(const std::string& smi, bool include_full,
                                       std::uint64_t* breaks = nullptr) {
  auto keys = enumerate_blocks(parse_smiles(smi), include_full, breaks);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string saved(const Vocabulary& v) {
  std::ostringstream out;
  save_vocabulary(v, out);
  return out.str();
}

}  // namespace

TEST(EnumerateBlocks, FourPrimitivePath) {
  const auto kinds = chain_kinds(4);
  const auto smi = chain_smiles(kinds);
  ASSERT_EQ(find_brics_bonds(parse_smiles(smi)).size(), 3u);
  const auto keys = sorted_blocks(smi, false);
  EXPECT_EQ(keys.size(), 9u);
  EXPECT_EQ(keys, contiguous_runs(kinds, false));
  const auto full = sorted_blocks(smi, true);
  EXPECT_EQ(full.size(), 10u);
  EXPECT_EQ(full, contiguous_runs(kinds, true));
}

TEST(EnumerateBlocks, MatchesContiguousRuns) {
  for (int n = 2; n <= 8; ++n) {
    for (int salt = 0; salt < 5; ++salt) {
      const auto kinds = chain_kinds(n, salt);
      const auto smi = chain_smiles(kinds);
      for (bool full : {false, true}) {
        std::uint64_t breaks = 0;
        EXPECT_EQ(sorted_blocks(smi, full, &breaks), contiguous_runs(kinds, full)) << smi;
        EXPECT_EQ(breaks, static_cast<std::uint64_t>(n * (n + 1) / 2));
      }
    }
  }
}

TEST(EnumerateBlocks, NoBricsBonds) {
  EXPECT_TRUE(sorted_blocks("c1ccccc1", false).empty());
  EXPECT_EQ(sorted_blocks("c1ccccc1", true), std::vector<std::string>{"c1ccccc1"});
}

TEST(EnumerateBlocks, BlocksHaveAtMostTwoAttachments) {
  const auto m = parse_smiles(kImatinib);
  std::uint64_t breaks = 0;
  const auto keys = enumerate_blocks(m, false, &breaks);
  EXPECT_EQ(breaks, 45u);  // binom(10, 2)
  EXPECT_EQ(keys.size(), 44u);
  for (const auto& k : keys) {
    const auto stars = std::count(k.begin(), k.end(), '*');
    EXPECT_GE(stars, 1);
    EXPECT_LE(stars, 2);
    EXPECT_NO_THROW(parse_smiles(k));
  }
}

TEST(BuildVocabulary, SinglePathMolecule) {
  const std::vector<std::string> corpus{chain_smiles(chain_kinds(4))};
  const auto build = build_vocabulary(corpus, {});
  EXPECT_EQ(build.vocab.counts.size(), 9u);
  for (const auto& [k, n] : build.vocab.counts) EXPECT_EQ(n, 1u) << k;
  EXPECT_EQ(build.vocab.corpus_size, 1u);
  EXPECT_EQ(build.breaks, 10u);
}

TEST(BuildVocabulary, Additive) {
  const auto a = chain_smiles(chain_kinds(4));
  const auto b = chain_smiles(chain_kinds(5, 2));
  const std::vector<std::string> twice{a, a};
  const auto v2 = build_vocabulary(twice, {}).vocab;
  EXPECT_EQ(v2.counts.size(), 9u);
  for (const auto& [k, n] : v2.counts) EXPECT_EQ(n, 2u) << k;

  const std::vector<std::string> both{a, b};
  const auto v = build_vocabulary(both, {}).vocab;
  std::unordered_map<std::string, std::uint64_t> expected;
  for (const auto& s : both) {
    for (const auto& k : enumerate_blocks(parse_smiles(s), false)) ++expected[k];
  }
  EXPECT_EQ(v.counts, expected);
}

TEST(BuildVocabulary, SkipsUnparseable) {
  const std::vector<std::string> corpus{"CCOc1ccccc1", "C1CC", "not smiles", "CC(=O)Nc1ccccc1"};
  const auto build = build_vocabulary(corpus, {});
  EXPECT_EQ(build.skipped, 2u);
  EXPECT_EQ(build.vocab.corpus_size, 2u);
}

TEST(BuildVocabulary, Errors) {
  const std::vector<std::string> none;
  EXPECT_THROW(build_vocabulary(none, {}), InvalidArgument);
  const std::vector<std::string> one{"CCO"};
  EXPECT_THROW(build_vocabulary(one, {.f_min = 0}), InvalidArgument);
}

TEST(BuildVocabulary, FromStream) {
  std::istringstream in("# header\nCCOc1ccccc1\tmol1\n\nCC(=O)Nc1ccccc1 mol2\n");
  const auto build = build_vocabulary(in, {});
  EXPECT_EQ(build.vocab.corpus_size, 2u);
}

TEST(BuildVocabulary, PartitionAndOrderIndependent) {
  auto corpus = corpus_smiles();
  corpus.resize(300);
  const std::string one = saved(build_vocabulary(corpus, {.threads = 1}).vocab);
  EXPECT_EQ(saved(build_vocabulary(corpus, {.threads = 4}).vocab), one);
  EXPECT_EQ(saved(build_vocabulary(corpus, {.threads = 8}).vocab), one);
  std::mt19937 rng(7);
  std::shuffle(corpus.begin(), corpus.end(), rng);
  EXPECT_EQ(saved(build_vocabulary(corpus, {.threads = 3}).vocab), one);
}

TEST(VocabularyFile, RoundTrip) {
  const std::vector<std::string> corpus{chain_smiles(chain_kinds(4)), chain_smiles(chain_kinds(4))};
  auto v = build_vocabulary(corpus, {.f_min = 20}).vocab;
  v.counts.begin()->second = 7;
  const auto text = saved(v);
  EXPECT_EQ(text.rfind("# bfe-vocab v1\n# f_min=20\n# corpus_size=2\n# include_full=false\n", 0), 0u);
  const auto back = parse_vocabulary(text);
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.f_min, 20);
}

TEST(VocabularyFile, RowOrder) {
  Vocabulary v;
  v.counts = {{"b", 2}, {"a", 2}, {"c", 5}};
  const auto text = saved(v);
  EXPECT_NE(text.find("c\t5\na\t2\nb\t2\n"), std::string::npos);
}

TEST(VocabularyFile, Malformed) {
  EXPECT_THROW(parse_vocabulary("c\t5\n"), FormatError);
  EXPECT_THROW(parse_vocabulary(""), FormatError);
  EXPECT_THROW(parse_vocabulary("# bfe-vocab v1\nc\tfive\n"), FormatError);
  EXPECT_THROW(parse_vocabulary("# bfe-vocab v1\nc\t5\nc\t6\n"), FormatError);
  EXPECT_THROW(parse_vocabulary("# bfe-vocab v1\nc\t0\n"), FormatError);
  EXPECT_THROW(parse_vocabulary("# bfe-vocab v1\nc 5\n"), FormatError);
  EXPECT_THROW(parse_vocabulary("# bfe-vocab v1\n# f_min=x\n"), FormatError);
  EXPECT_THROW(parse_vocabulary("# bfe-vocab v1\n# include_full=yes\n"), FormatError);
}

TEST(VocabularyFile, Frequency) {
  const auto v = parse_vocabulary("# bfe-vocab v1\n# f_min=3\n*c1ccccc1\t12\n");
  EXPECT_EQ(v.f_min, 3);
  EXPECT_EQ(v.frequency("*c1ccccc1"), 12u);
  EXPECT_EQ(v.frequency("*C"), 0u);
}
