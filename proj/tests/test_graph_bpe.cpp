#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "molblocks/errors.h"
#include "molblocks/graph_bpe.h"
#include "molblocks/smiles.h"
#include "synthetic.h"
#include "test_util.h"

using namespace molblocks;
using namespace molblocks::testing;

namespace {

Block block_of(const char* smi) { return make_block(parse_smiles(smi)); }

std::set<std::string> bfe_keys(const std::vector<std::string>& corpus) {
  std::set<std::string> out;
  for (const auto& s : corpus) {
    for (auto& k : enumerate_blocks(parse_smiles(s), true)) out.insert(std::move(k));
  }
  return out;
}

}  // namespace

TEST(MergeFragments, Methanol) {
  EXPECT_EQ(write_smiles(merge_fragments(block_of("[2*]C"), block_of("[1*]O"))), "CO");
}

TEST(MergeFragments, ImatinibNeighbours) {
  const auto m = parse_smiles(kImatinib);
  const auto bonds = find_brics_bonds(m);
  const auto layout = break_molecule(m, bonds);
  ASSERT_TRUE(layout.is_path);
  for (std::size_t i = 0; i + 1 < layout.fragments.size(); ++i) {
    const auto merged = merge_fragments(layout.fragments[i], layout.fragments[i + 1]);
    // equals a block obtained by leaving exactly one bond uncut
    const auto key = make_block(merged).vocab_key;
    bool found = false;
    for (std::size_t skip = 0; skip < bonds.size(); ++skip) {
      std::vector<int> rest;
      for (std::size_t j = 0; j < bonds.size(); ++j) {
        if (j != skip) rest.push_back(bonds[j].bond_index);
      }
      for (const auto& f : break_molecule(m, rest).fragments) found = found || f.vocab_key == key;
    }
    EXPECT_TRUE(found) << i;
  }
}

TEST(MergeFragments, Errors) {
  EXPECT_THROW(merge_fragments(block_of("[1*]C"), block_of("[1*]O")), InvalidArgument);
  EXPECT_THROW(merge_fragments(block_of("[2*]C"), block_of("[2*]O")), InvalidArgument);
  EXPECT_THROW(merge_fragments(block_of("[2*]=C(F)F"), block_of("[1*]C(F)(F)F")),
               SanitizationError);
}

TEST(GraphBpe, SinglePathFirstMerge) {
  const std::vector<std::string> corpus{chain_smiles(chain_kinds(3))};
  const auto build = graph_bpe_build(corpus, 4);
  EXPECT_EQ(build.primitives, 3u);
  ASSERT_EQ(build.merges.size(), 1u);
  EXPECT_EQ(build.merge_ops, 1u);
  EXPECT_TRUE(build.reached_target);
  EXPECT_EQ(build.vocab.counts.size(), 4u);
  EXPECT_TRUE(bfe_keys(corpus).count(build.merges[0]));
}

TEST(GraphBpe, SharedPairMergedFirst) {
  // A-B-C and A-B-D share the pair (A, B)
  const std::vector<int> abc{0, 1, 2};
  const std::vector<int> abd{0, 1, 3};
  const std::vector<std::string> corpus{chain_smiles(abc), chain_smiles(abd)};
  const auto build = graph_bpe_build(corpus, build_vocabulary(corpus, {}).vocab.counts.size());
  ASSERT_GE(build.merges.size(), 1u);
  const auto ab = canonical_smiles(run_smiles(abc, 0, 1, false, true));
  EXPECT_EQ(build.merges[0], ab);
  EXPECT_EQ(build.vocab.frequency(ab), 2u);
}

TEST(GraphBpe, FullCollapseCountsMerges) {
  std::vector<std::string> corpus;
  std::uint64_t expected = 0;
  for (int n = 2; n <= 6; ++n) {
    corpus.push_back(chain_smiles(chain_kinds(n, n)));
    expected += static_cast<std::uint64_t>(n - 1);
  }
  const auto build = graph_bpe_build(corpus, 100000);
  EXPECT_FALSE(build.reached_target);
  EXPECT_EQ(build.merge_ops, expected);
  EXPECT_EQ(build.primitives, 20u);
  const auto bfe = bfe_keys(corpus);
  for (const auto& [key, n] : build.vocab.counts) EXPECT_TRUE(bfe.count(key)) << key;
}

TEST(GraphBpe, Errors) {
  const std::vector<std::string> star{"c1ccc(cc1)-c1cc(-c2ccccc2)cc(-c2ccccc2)c1"};
  EXPECT_THROW(graph_bpe_build(star, 10), InvalidArgument);
  const std::vector<std::string> one{chain_smiles(chain_kinds(3))};
  EXPECT_THROW(graph_bpe_build(one, 2), InvalidArgument);
  EXPECT_THROW(graph_bpe_build({}, 2), InvalidArgument);
}

TEST(Benchmark, GeneratorHitsSize) {
  for (int n = 9; n <= 40; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto m = parse_smiles(benchmark_molecule(n, seed));
      EXPECT_EQ(m.heavy_atom_count(), n);
      EXPECT_GE(find_brics_bonds(m).size(), 2u);
    }
  }
  EXPECT_EQ(benchmark_molecule(15, 3), benchmark_molecule(15, 3));
  EXPECT_THROW(benchmark_molecule(8, 0), InvalidArgument);
}

TEST(Benchmark, ReportShape) {
  const auto r = benchmark_break_vs_merge({.sizes = {10, 20}, .samples = 20, .repetitions = 3});
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.break_mean_s, 0);
    EXPECT_GT(row.merge_mean_s, 0);
    EXPECT_GT(row.ratio, 1.0);
    EXPECT_EQ(row.samples, 20);
  }
  std::ostringstream csv;
  write_bench_csv(r, csv);
  EXPECT_EQ(csv.str().rfind("size,break_mean_s,merge_mean_s,ratio,samples\n10,", 0), 0u);
  std::ostringstream table;
  write_bench_table(r, table);
  EXPECT_NE(table.str().find("ratio"), std::string::npos);
  EXPECT_THROW(benchmark_break_vs_merge({.sizes = {20, 10}}), InvalidArgument);
}
