#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "molblocks/canon.h"
#include "molblocks/descriptors.h"
#include "molblocks/errors.h"
#include "molblocks/sanitize.h"
#include "molblocks/smiles.h"
#include "test_util.h"

using namespace molblocks;
using molblocks::testing::kImatinib;

namespace {

Molecule shuffled(const Molecule& m, std::mt19937& rng) {
  std::vector<int> order(static_cast<std::size_t>(m.atom_count()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return permute_atoms(m, order);
}

// Element/charge/aromatic multiset plus bond-type multiset; a cheap
// necessary condition for isomorphism used alongside canonical equality.
std::multiset<std::tuple<int, int, bool, int, int>> atom_profile(const Molecule& m) {
  std::multiset<std::tuple<int, int, bool, int, int>> s;
  for (int a = 0; a < m.atom_count(); ++a) {
    const Atom& x = m.atom(a);
    s.insert({x.atomic_number, x.formal_charge, x.aromatic, m.degree(a), m.total_h(a)});
  }
  return s;
}

std::multiset<std::tuple<int, int, int>> bond_profile(const Molecule& m) {
  std::multiset<std::tuple<int, int, int>> s;
  for (const auto& b : m.bonds()) {
    int x = m.atom(b.begin).atomic_number;
    int y = m.atom(b.end).atomic_number;
    if (x > y) std::swap(x, y);
    s.insert({x, y, static_cast<int>(b.order)});
  }
  return s;
}

}  // namespace

TEST(ParseSmiles, Methane) {
  const Molecule m = parse_smiles("C");
  ASSERT_EQ(m.atom_count(), 1);
  EXPECT_EQ(m.bond_count(), 0);
  EXPECT_EQ(m.atom(0).implicit_h, 4);
}

TEST(ParseSmiles, Benzene) {
  const Molecule m = parse_smiles("c1ccccc1");
  ASSERT_EQ(m.atom_count(), 6);
  ASSERT_EQ(m.bond_count(), 6);
  for (const auto& a : m.atoms()) {
    EXPECT_TRUE(a.aromatic);
    EXPECT_EQ(a.implicit_h, 1);
  }
  for (const auto& b : m.bonds()) EXPECT_EQ(b.order, BondOrder::kAromatic);
  ASSERT_EQ(m.small_rings().size(), 1u);
  EXPECT_EQ(m.small_rings()[0].size(), 6u);
}

TEST(ParseSmiles, Imatinib) {
  const Molecule m = parse_smiles(kImatinib);
  EXPECT_EQ(m.heavy_atom_count(), 37);
  EXPECT_EQ(molecular_formula(m), "C29H31N7O");
}

TEST(ParseSmiles, BracketAtoms) {
  const Molecule m = parse_smiles("[13CH3][NH3+].[O-]C(=O)[2H]");
  EXPECT_EQ(m.atom(0).isotope, 13);
  EXPECT_EQ(m.atom(0).implicit_h, 3);
  EXPECT_EQ(m.atom(1).formal_charge, 1);
  EXPECT_EQ(m.atom(2).formal_charge, -1);
  EXPECT_EQ(m.atom_count(), 6);  // isotopic hydrogen stays explicit
  EXPECT_EQ(m.components().size(), 2u);
}

TEST(ParseSmiles, ExplicitHydrogensFold) {
  const Molecule m = parse_smiles("[H]C([H])([H])O[H]");
  EXPECT_EQ(m.atom_count(), 2);
  EXPECT_EQ(write_smiles(m), "CO");
}

TEST(ParseSmiles, ChargeForms) {
  EXPECT_EQ(parse_smiles("[Fe++]").atom(0).formal_charge, 2);
  EXPECT_EQ(parse_smiles("[Fe+2]").atom(0).formal_charge, 2);
  EXPECT_EQ(parse_smiles("[O--]").atom(0).formal_charge, -2);
}

TEST(ParseSmiles, PercentRingClosure) {
  EXPECT_EQ(canonical_smiles("C%12CCCCC%12"), canonical_smiles("C1CCCCC1"));
}

TEST(ParseSmiles, WildcardsWithLabels) {
  const Molecule m = parse_smiles("[1*]CC[2*]");
  EXPECT_TRUE(m.atom(0).is_wildcard());
  EXPECT_EQ(m.atom(0).isotope, 1);
  EXPECT_EQ(m.atom(3).isotope, 2);
  EXPECT_EQ(m.atom(1).implicit_h, 2);
  EXPECT_EQ(m.wildcard_count(), 2);
  EXPECT_EQ(m.heavy_atom_count(), 2);
}

TEST(ParseSmiles, SyntaxErrors) {
  for (const char* bad : {"", "C(", "C)", "C1CC", "C((C))", "[Xx]", "C=", "Q", "C..C", "[C",
                          "(C)", "1CC1", "C%1", "C11", "C=1CC-1"}) {
    EXPECT_THROW(parse_smiles(bad), SmilesSyntaxError) << bad;
  }
}

TEST(ParseSmiles, ValenceErrors) {
  for (const char* bad : {"C(C)(C)(C)(C)C", "O(C)(C)C", "FC(F)(F)(F)F", "c1ccccc1(C)C", "cC",
                          "N(=O)(=O)=O"}) {
    EXPECT_THROW(parse_smiles(bad), SanitizationError) << bad;
  }
}

TEST(ParseSmiles, UnkekulizableAromatics) {
  for (const char* bad : {"c1cccc1", "n1cccc1", "c1ccccc1c"}) {
    EXPECT_THROW(parse_smiles(bad), SanitizationError) << bad;
  }
  EXPECT_NO_THROW(parse_smiles("c1cc[nH]c1"));
  EXPECT_NO_THROW(parse_smiles("c1ccc2c(c1)Cc1ccccc12"));
}

TEST(ParseSmiles, HypervalentAllowed) {
  EXPECT_NO_THROW(parse_smiles("CS(=O)(=O)C"));
  EXPECT_NO_THROW(parse_smiles("OP(=O)(O)O"));
  EXPECT_NO_THROW(parse_smiles("C[N+](C)(C)C"));
  EXPECT_NO_THROW(parse_smiles("[O-][n+]1ccccc1"));
}

TEST(Aromaticity, KekuleFormsMatchAromatic) {
  EXPECT_EQ(canonical_smiles("C1=CC=CC=C1"), canonical_smiles("c1ccccc1"));
  EXPECT_EQ(canonical_smiles("C1=CC=NC=C1"), canonical_smiles("c1ccncc1"));
  EXPECT_EQ(canonical_smiles("C1=CNC=C1"), canonical_smiles("c1cc[nH]c1"));
  EXPECT_EQ(canonical_smiles("C1=COC=C1"), canonical_smiles("c1ccoc1"));
  EXPECT_EQ(canonical_smiles("C1=CSC=C1"), canonical_smiles("c1ccsc1"));
  EXPECT_EQ(canonical_smiles("C1=CC=C2C=CC=CC2=C1"), canonical_smiles("c1ccc2ccccc2c1"));
  EXPECT_EQ(canonical_smiles("O=C1C=CC=CN1"), canonical_smiles("O=c1cccc[nH]1"));
}

TEST(Aromaticity, NonAromaticRingsStayAliphatic) {
  const Molecule m = parse_smiles("C1=CCC=C1");
  for (const auto& a : m.atoms()) EXPECT_FALSE(a.aromatic);
  const Molecule c = parse_smiles("C1CCCCC1");
  for (const auto& a : c.atoms()) EXPECT_FALSE(a.aromatic);
}

TEST(Aromaticity, KekuleCorpusAgreesWithAromaticSpelling) {
  int checked = 0;
  for (const auto& row : molblocks::testing::read_rows("kekule.smi")) {
    EXPECT_EQ(canonical_smiles(row[0]), canonical_smiles(row[1])) << row[0];
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(WriteSmiles, KekuleAromaticEquivalence) {
  EXPECT_EQ(write_smiles(parse_smiles("C1=CC=CC=C1")), write_smiles(parse_smiles("c1ccccc1")));
}

TEST(WriteSmiles, AtomOrderInvariance) {
  EXPECT_EQ(write_smiles(parse_smiles("OCC")), write_smiles(parse_smiles("CCO")));
}

TEST(WriteSmiles, DistinguishesIsomers) {
  EXPECT_NE(canonical_smiles("CCO"), canonical_smiles("COC"));
  EXPECT_NE(canonical_smiles("Cc1ccccc1C"), canonical_smiles("Cc1cccc(C)c1"));
  EXPECT_NE(canonical_smiles("C1CC1C1CC1"), canonical_smiles("C1CCCC=C1"));
}

TEST(WriteSmiles, BiarylSingleBondWrittenExplicitly) {
  const std::string s = canonical_smiles("c1ccccc1-c1ccccc1");
  EXPECT_NE(s.find('-'), std::string::npos);
  EXPECT_EQ(canonical_smiles(s), s);
}

TEST(WriteSmiles, CorpusRoundTripIsomorphic) {
  const auto corpus = molblocks::testing::corpus_smiles();
  ASSERT_GE(corpus.size(), 500u);
  for (const auto& s : corpus) {
    const Molecule m = parse_smiles(s);
    const std::string w = write_smiles(m);
    const Molecule back = parse_smiles(w);
    EXPECT_EQ(atom_profile(m), atom_profile(back)) << s;
    EXPECT_EQ(bond_profile(m), bond_profile(back)) << s;
    EXPECT_EQ(write_smiles(back), w) << s;
  }
}

TEST(WriteSmiles, CorpusPermutationInvariance) {
  std::mt19937 rng(12345);
  const auto corpus = molblocks::testing::corpus_smiles();
  for (const auto& s : corpus) {
    const Molecule m = parse_smiles(s);
    const std::string ref = write_smiles(m);
    for (int i = 0; i < 100; ++i) {
      const std::string got = write_smiles(shuffled(m, rng));
      ASSERT_EQ(got, ref) << s << " permutation " << i;
    }
  }
}

TEST(WriteSmiles, ReferenceHeavyAtomsAndFormula) {
  for (const auto& row : molblocks::testing::read_rows("corpus_reference.tsv")) {
    const Molecule m = parse_smiles(row[0]);
    EXPECT_EQ(m.heavy_atom_count(), std::stoi(row[1])) << row[0];
    EXPECT_EQ(molecular_formula(m), row[2]) << row[0];
  }
}

TEST(WriteSmiles, IsomericTetrahedral) {
  const std::string r = write_smiles(parse_smiles("C[C@H](N)O"), {true, true});
  const std::string s = write_smiles(parse_smiles("C[C@@H](N)O"), {true, true});
  EXPECT_NE(r, s);
  EXPECT_EQ(write_smiles(parse_smiles("N[C@@H](C)O"), {true, true}), r);
  EXPECT_EQ(write_smiles(parse_smiles("C[C@H](N)O")), write_smiles(parse_smiles("C[C@@H](N)O")));
}

TEST(WriteSmiles, IsomericStableUnderPermutation) {
  std::mt19937 rng(99);
  for (const char* s : {"C[C@H](N)O", "F/C=C/F", "F/C=C\\F",
                        "O[C@@H]1CCCC[C@H]1Cl", "[C@@H](F)(Cl)Br", "C/C=C/c1ccccc1"}) {
    const Molecule m = parse_smiles(s);
    const std::string ref = write_smiles(m, {true, true});
    for (int i = 0; i < 50; ++i) {
      ASSERT_EQ(write_smiles(shuffled(m, rng), {true, true}), ref) << s;
    }
    EXPECT_EQ(write_smiles(parse_smiles(ref), {true, true}), ref) << s;
  }
  EXPECT_NE(write_smiles(parse_smiles("F/C=C/F"), {true, true}),
            write_smiles(parse_smiles("F/C=C\\F"), {true, true}));
  EXPECT_EQ(write_smiles(parse_smiles("F/C=C/F"), {true, true}),
            write_smiles(parse_smiles("F\\C=C\\F"), {true, true}));
}

TEST(CanonicalRanks, IsPermutation) {
  const Molecule m = parse_smiles(kImatinib);
  auto r = canonical_ranks(m);
  std::sort(r.begin(), r.end());
  for (int i = 0; i < static_cast<int>(r.size()); ++i) EXPECT_EQ(r[static_cast<std::size_t>(i)], i);
}

TEST(CanonicalRanks, BenzeneRotations) {
  std::mt19937 rng(3);
  const Molecule m = parse_smiles("c1ccccc1");
  for (int i = 0; i < 20; ++i) {
    const Molecule p = shuffled(m, rng);
    EXPECT_EQ(write_smiles(p), write_smiles(m));
  }
}

TEST(CanonicalRanks, DistinctElements) {
  const Molecule m = parse_smiles("CCO");
  const auto r = canonical_ranks(m);
  EXPECT_NE(r[2], r[0]);
  EXPECT_NE(r[2], r[1]);
}

TEST(CanonicalRanks, ImatinibStableUnderShuffle) {
  std::mt19937 rng(11);
  const Molecule m = parse_smiles(kImatinib);
  auto by_rank = [](const Molecule& x) {
    const auto r = canonical_ranks(x);
    std::vector<std::pair<int, int>> v(r.size());
    for (int a = 0; a < x.atom_count(); ++a) {
      v[static_cast<std::size_t>(r[static_cast<std::size_t>(a)])] = {x.atom(a).atomic_number,
                                                                     x.degree(a)};
    }
    return v;
  };
  const auto base = by_rank(m);
  for (int t = 0; t < 50; ++t) EXPECT_EQ(by_rank(shuffled(m, rng)), base);
}

TEST(Descriptors, Benzene) {
  const Descriptors d = compute_descriptors(parse_smiles("c1ccccc1"));
  EXPECT_NEAR(d.molecular_weight, 78.11, 0.01);
  EXPECT_EQ(d.hbd, 0);
  EXPECT_EQ(d.hba, 0);
  EXPECT_EQ(d.rotatable_bonds, 0);
  EXPECT_EQ(d.aromatic_ring_count, 1);
  EXPECT_EQ(d.heavy_atom_count, 6);
}

TEST(Descriptors, Water) {
  const Descriptors d = compute_descriptors(parse_smiles("O"));
  EXPECT_NEAR(d.molecular_weight, 18.02, 0.01);
  EXPECT_EQ(d.hbd, 1);
  EXPECT_EQ(d.hba, 1);
}

TEST(Descriptors, RotatableBondsSkipAmide) {
  // butane: one rotatable bond; N-methylacetamide: amide C-N excluded
  EXPECT_EQ(compute_descriptors(parse_smiles("CCCC")).rotatable_bonds, 1);
  EXPECT_EQ(compute_descriptors(parse_smiles("CC(=O)NC")).rotatable_bonds, 0);
  EXPECT_EQ(compute_descriptors(parse_smiles(kImatinib)).aromatic_ring_count, 4);
}
