#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "molblocks/brics.h"
#include "molblocks/errors.h"
#include "molblocks/smiles.h"
#include "test_util.h"

using namespace molblocks;
using molblocks::testing::kImatinib;
using molblocks::testing::read_rows;

namespace {

std::vector<int> bond_indices(const std::vector<BricsBond>& bonds) {
  std::vector<int> out;
  for (const auto& b : bonds) out.push_back(b.bond_index);
  return out;
}

Molecule rejoin(const DecompositionLayout& layout) {
  Molecule acc = layout.fragments.front().graph;
  for (std::size_t i = 1; i < layout.fragments.size(); ++i) {
    acc = join_fragments(acc, kForwardLabel, layout.fragments[i].graph, kBackwardLabel);
  }
  return acc;
}

std::string pair_text(int a, int b) {
  if (a > b) std::swap(a, b);
  return std::to_string(a) + "-" + std::to_string(b);
}

}  // namespace

TEST(BricsRules, StandardTable) {
  const auto& rules = BricsRules::standard();
  EXPECT_EQ(rules.version(), "brics-rules v1");
  EXPECT_EQ(rules.environments().size(), 14u);
  EXPECT_FALSE(rules.pairs().empty());
}

TEST(BricsRules, ParseErrors) {
  EXPECT_THROW(BricsRules::parse(""), FormatError);
  EXPECT_THROW(BricsRules::parse("L1\t[C]\n"), FormatError);
  EXPECT_THROW(BricsRules::parse("# brics-rules v1\nL1\t[C]\t2\n"), FormatError);
  EXPECT_THROW(BricsRules::parse("# brics-rules v1\nL1\t[C]\nL1\t[N]\n"), FormatError);
  EXPECT_THROW(BricsRules::parse("# brics-rules v1\nL1\t[C\n"), FormatError);
  EXPECT_THROW(BricsRules::parse("# brics-rules v1\nLx\t[C]\n"), FormatError);
}

TEST(BricsRules, CustomTable) {
  const auto rules = BricsRules::parse("# brics-rules v9\nL1\t[N;!R]\t2\nL2\t[c]\n");
  const auto m = parse_smiles("Nc1ccccc1");
  const auto bonds = find_brics_bonds(m, rules);
  ASSERT_EQ(bonds.size(), 1u);
  EXPECT_EQ(bonds[0].env_begin, 1);
  EXPECT_EQ(bonds[0].env_end, 2);
}

TEST(FindBricsBonds, Imatinib) {
  const auto m = parse_smiles(kImatinib);
  EXPECT_EQ(find_brics_bonds(m).size(), 8u);
}

TEST(FindBricsBonds, NoRingOrMultipleBonds) {
  const auto m = parse_smiles(kImatinib);
  for (const auto& b : find_brics_bonds(m)) {
    EXPECT_FALSE(m.bond_in_ring(b.bond_index));
    EXPECT_EQ(m.bond(b.bond_index).order, BondOrder::kSingle);
  }
}

TEST(FindBricsBonds, MatchesReferenceCorpus) {
  int checked = 0;
  for (const auto& row : read_rows("corpus_reference.tsv")) {
    const auto m = parse_smiles(row[0]);
    std::multiset<std::string> expected;
    if (row.size() > 4 && !row[4].empty()) {
      std::size_t start = 0;
      while (true) {
        const auto comma = row[4].find(',', start);
        const auto p = row[4].substr(start, comma - start);
        if (p != "7-7") expected.insert(p);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    std::multiset<std::string> got;
    for (const auto& b : find_brics_bonds(m)) got.insert(pair_text(b.env_begin, b.env_end));
    EXPECT_EQ(got, expected) << row[0];
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(FragmentOnBonds, ConservesAtoms) {
  const auto m = parse_smiles(kImatinib);
  const auto bonds = bond_indices(find_brics_bonds(m));
  const auto frags = fragment_on_bonds(m, bonds);
  EXPECT_EQ(frags.size(), bonds.size() + 1);
  int heavy = 0;
  int stars = 0;
  for (const auto& f : frags) {
    heavy += f.heavy_atom_count();
    stars += f.wildcard_count();
  }
  EXPECT_EQ(heavy, m.heavy_atom_count());
  EXPECT_EQ(stars, 2 * static_cast<int>(bonds.size()));
}

TEST(FragmentOnBonds, RejectsBadIndices) {
  const auto m = parse_smiles("CCO");
  const std::vector<int> out_of_range{5};
  const std::vector<int> twice{0, 0};
  EXPECT_THROW(fragment_on_bonds(m, out_of_range), InvalidArgument);
  EXPECT_THROW(fragment_on_bonds(m, twice), InvalidArgument);
}

TEST(BreakMolecule, ImatinibFiveBlocks) {
  const auto m = parse_smiles(kImatinib);
  const auto all = bond_indices(find_brics_bonds(m));
  const std::vector<std::string> expected = {
      "[2*]c1cccnc1", "[2*]Nc1nccc([1*])n1", "[2*]c1ccc(C)c([1*])c1",
      "[1*]NC(=O)c1ccc([2*])cc1", "[1*]CN1CCN(C)CC1"};
  std::vector<std::string> expected_keys;
  for (const auto& s : expected) expected_keys.push_back(canonical_smiles(s));

  int hits = 0;
  const int n = static_cast<int>(all.size());
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != 4) continue;
    std::vector<int> cut;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) cut.push_back(all[static_cast<std::size_t>(i)]);
    }
    const auto layout = break_molecule(m, cut);
    std::vector<std::string> keys;
    for (const auto& b : layout.fragments) keys.push_back(b.canonical_key);
    if (keys == expected_keys) {
      ++hits;
      EXPECT_TRUE(layout.is_path);
    }
  }
  EXPECT_EQ(hits, 1);
}

TEST(BreakMolecule, OrientationIsDeterministic) {
  const auto a = parse_smiles(kImatinib);
  const auto b = parse_smiles("CN1CCN(Cc2ccc(C(=O)Nc3ccc(C)c(Nc4nccc(-c5cccnc5)n4)c3)cc2)CC1");
  auto keys = [](const Molecule& m) {
    const auto layout = break_molecule(m, find_brics_bonds(m));
    std::vector<std::string> out;
    for (const auto& f : layout.fragments) out.push_back(f.canonical_key);
    return out;
  };
  EXPECT_EQ(keys(a), keys(b));
}

TEST(BreakMolecule, StarIsBranched) {
  // three amide arms around one aromatic core
  const auto m = parse_smiles("O=C(NC)c1cc(C(=O)NC)cc(C(=O)NC)c1");
  const auto bonds = find_brics_bonds(m);
  ASSERT_GE(bonds.size(), 3u);
  const auto layout = break_molecule(m, bonds);
  EXPECT_TRUE(has_branch(layout));
  EXPECT_FALSE(layout.is_path);
  for (const auto& f : layout.fragments) {
    for (const auto& a : f.graph.atoms()) {
      if (a.is_wildcard()) EXPECT_EQ(a.isotope, 0);
    }
  }
}

TEST(BreakMolecule, RejectsNonBricsBond) {
  const auto m = parse_smiles("c1ccccc1");
  const std::vector<int> cut{0};
  EXPECT_THROW(break_molecule(m, cut), InvalidArgument);
}

TEST(BreakMolecule, EmptyCutIsWholeMolecule) {
  const auto m = parse_smiles(kImatinib);
  const auto layout = break_molecule(m, std::vector<int>{});
  ASSERT_EQ(layout.fragments.size(), 1u);
  EXPECT_EQ(layout.fragments[0].canonical_key, write_smiles(m));
  EXPECT_EQ(layout.fragments[0].attachment_count, 0);
}

TEST(BreakMolecule, LabelsFollowPathOrder) {
  const auto m = parse_smiles(kImatinib);
  const std::vector<int> cut = bond_indices(find_brics_bonds(m));
  for (std::size_t i = 0; i < cut.size(); ++i) {
    const std::vector<int> one{cut[i]};
    const auto layout = break_molecule(m, one);
    ASSERT_EQ(layout.fragments.size(), 2u);
    EXPECT_NE(layout.fragments[0].canonical_key.find("[2*]"), std::string::npos);
    EXPECT_NE(layout.fragments[1].canonical_key.find("[1*]"), std::string::npos);
    EXPECT_EQ(layout.fragments[0].vocab_key.find("[2*]"), std::string::npos);
  }
}

TEST(JoinFragments, Reversible) {
  // every path-shaped cut subset of small corpus molecules rejoins exactly
  int molecules = 0;
  int layouts = 0;
  for (const auto& smi : molblocks::testing::corpus_smiles()) {
    const auto m = parse_smiles(smi);
    const auto all = bond_indices(find_brics_bonds(m));
    if (all.empty() || all.size() > 8) continue;
    const std::string want = write_smiles(m);
    const int n = static_cast<int>(all.size());
    for (int mask = 1; mask < (1 << n); ++mask) {
      std::vector<int> cut;
      for (int i = 0; i < n; ++i) {
        if (mask & (1 << i)) cut.push_back(all[static_cast<std::size_t>(i)]);
      }
      const auto layout = break_molecule(m, cut);
      if (!layout.is_path) continue;
      EXPECT_EQ(write_smiles(rejoin(layout)), want) << smi << " mask " << mask;
      ++layouts;
    }
    if (++molecules == 300) break;
  }
  EXPECT_GT(layouts, 300);
}

TEST(JoinFragments, PreservesStereo) {
  const auto m = parse_smiles("C[C@H](N)C(=O)NC/C=C/c1ccccc1");
  const auto layout = break_molecule(m, find_brics_bonds(m));
  ASSERT_TRUE(layout.is_path);
  ASSERT_GT(layout.fragments.size(), 1u);
  const SmilesWriteOptions iso{.canonical = true, .isomeric = true};
  EXPECT_EQ(write_smiles(rejoin(layout), iso), write_smiles(m, iso));
}

TEST(JoinFragments, MissingLabel) {
  const auto a = parse_smiles("[2*]C", {.sanitize = false});
  const auto b = parse_smiles("[1*]N", {.sanitize = false});
  EXPECT_THROW(join_fragments(a, kBackwardLabel, b, kBackwardLabel), InvalidArgument);
  EXPECT_EQ(write_smiles(join_fragments(a, kForwardLabel, b, kBackwardLabel)), "CN");
}
