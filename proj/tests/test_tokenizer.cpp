#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "molblocks/errors.h"
#include "molblocks/smiles.h"
#include "molblocks/tokenizer.h"
#include "selection_oracle.h"
#include "synthetic.h"
#include "test_util.h"

using namespace molblocks;
using namespace molblocks::testing;

namespace {

std::vector<std::string> keys_of(const Fragmentation& f) {
  std::vector<std::string> out;
  for (const auto& b : f.blocks) out.push_back(b.canonical_key);
  return out;
}

const std::vector<std::string>& imatinib_blocks() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const char* s : {"[2*]c1cccnc1", "[2*]Nc1nccc([1*])n1", "[2*]c1ccc(C)c([1*])c1",
                          "[1*]NC(=O)c1ccc([2*])cc1", "[1*]CN1CCN(C)CC1"}) {
      out.push_back(canonical_smiles(s));
    }
    return out;
  }();
  return keys;
}

const Vocabulary& corpus_vocab() {
  static const Vocabulary v = [] {
    auto corpus = corpus_smiles();
    auto built = build_vocabulary(corpus, {.f_min = 3}).vocab;
    return built;
  }();
  return v;
}

}  // namespace

TEST(EnumerateDecompositions, NoBricsBonds) {
  const auto cands = enumerate_decompositions(parse_smiles("c1ccccc1"));
  ASSERT_EQ(cands.size(), 1u);
  ASSERT_EQ(cands[0].blocks.size(), 1u);
  EXPECT_EQ(cands[0].blocks[0].canonical_key, "c1ccccc1");
}

TEST(EnumerateDecompositions, ThreePrimitivePath) {
  const auto cands = enumerate_decompositions(parse_smiles(chain_smiles(chain_kinds(3))));
  ASSERT_EQ(cands.size(), 4u);
  EXPECT_EQ(cands[0].blocks.size(), 1u);
  EXPECT_EQ(cands[1].blocks.size(), 2u);
  EXPECT_EQ(cands[2].blocks.size(), 2u);
  EXPECT_EQ(cands[3].blocks.size(), 3u);
  EXPECT_LT(keys_of(cands[1]), keys_of(cands[2]));
}

TEST(EnumerateDecompositions, StarSkipsBranchedLayouts) {
  const auto m = parse_smiles("c1ccc(cc1)-c1cc(-c2ccccc2)cc(-c2ccccc2)c1");
  ASSERT_EQ(find_brics_bonds(m).size(), 3u);
  const auto cands = enumerate_decompositions(m);
  EXPECT_EQ(cands.size(), 7u);
  for (const auto& c : cands) EXPECT_LE(c.blocks.size(), 3u);
}

TEST(EnumerateDecompositions, AgreesWithBreakMolecule) {
  const auto m = parse_smiles(kImatinib);
  const auto cands = enumerate_decompositions(m);
  EXPECT_EQ(cands.size(), 256u);  // a path: every subset qualifies
  for (const auto& c : cands) {
    const auto layout = break_molecule(m, c.cut_bonds);
    std::vector<std::string> keys;
    for (const auto& b : layout.fragments) keys.push_back(b.canonical_key);
    EXPECT_EQ(keys, keys_of(c));
  }
}

TEST(EnumerateDecompositions, TooManyBonds) {
  const auto m = parse_smiles(kImatinib);
  EXPECT_THROW(enumerate_decompositions(m, 7), TooManyBondsError);
  EXPECT_THROW(tokenize(m, demo_vocabulary(), TokenizeMode::kBfe, 7), TooManyBondsError);
}

TEST(SelectDecomposition, LeastSpreadWins) {
  const auto cands = enumerate_decompositions(parse_smiles(chain_smiles(chain_kinds(3))));
  Vocabulary v;
  v.f_min = 20;
  // the two 2-block candidates: {AB, C} gets (100, 100), {A, BC} gets (50, 150)
  v.counts[cands[1].blocks[0].vocab_key] = 100;
  v.counts[cands[1].blocks[1].vocab_key] = 100;
  v.counts[cands[2].blocks[0].vocab_key] = 50;
  v.counts[cands[2].blocks[1].vocab_key] = 150;
  // only valid when the blocks are distinct
  ASSERT_EQ(v.counts.size(), 4u);
  auto pick = select_decomposition(cands, v);
  EXPECT_EQ(keys_of(pick), keys_of(cands[1]));
  EXPECT_EQ(pick.frequencies, (std::vector<std::uint64_t>{100, 100}));

  v.counts[cands[1].blocks[0].vocab_key] = 50;
  v.counts[cands[1].blocks[1].vocab_key] = 150;
  v.counts[cands[2].blocks[0].vocab_key] = 100;
  v.counts[cands[2].blocks[1].vocab_key] = 100;
  EXPECT_EQ(keys_of(select_decomposition(cands, v)), keys_of(cands[2]));
}

TEST(SelectDecomposition, ThresholdGate) {
  const auto cands = enumerate_decompositions(parse_smiles(chain_smiles(chain_kinds(3))));
  Vocabulary v;
  v.f_min = 20;
  v.counts[cands[0].blocks[0].vocab_key] = 5;
  v.counts[cands[2].blocks[0].vocab_key] = 30;
  v.counts[cands[2].blocks[1].vocab_key] = 30;
  EXPECT_EQ(keys_of(select_decomposition(cands, v)), keys_of(cands[2]));
}

TEST(SelectDecomposition, FallbackIsFinest) {
  const auto cands = enumerate_decompositions(parse_smiles(chain_smiles(chain_kinds(3))));
  const auto pick = select_decomposition(cands, Vocabulary{});
  EXPECT_EQ(pick.blocks.size(), 3u);
  EXPECT_EQ(pick.frequencies, (std::vector<std::uint64_t>{0, 0, 0}));
}

TEST(FrequencySpread, SampleDeviation) {
  const std::uint64_t a[] = {50, 150};
  EXPECT_NEAR(frequency_spread(a), 70.710678, 1e-6);
  const std::uint64_t one[] = {9};
  EXPECT_EQ(frequency_spread(one), 0.0);
}

TEST(Tokenize, ImatinibDemo) {
  const auto m = parse_smiles(kImatinib);
  const auto f = tokenize(m, demo_vocabulary());
  EXPECT_EQ(keys_of(f), imatinib_blocks());
  EXPECT_EQ(f.frequencies, std::vector<std::uint64_t>(5, 100));

  std::ifstream golden(data_path("imatinib_render.txt"));
  std::string expected;
  std::getline(golden, expected);
  EXPECT_EQ(render(f, NameTable::standard(), RenderStyle::kNames), expected);

  const auto full = render(f, NameTable::standard());
  EXPECT_EQ(full.rfind("pyridine [" + imatinib_blocks()[0] + "] -> 2-aminopyrimidine [", 0), 0u);
}

TEST(Tokenize, ImatinibNaive) {
  const auto m = parse_smiles(kImatinib);
  const auto f = tokenize(m, demo_vocabulary(), TokenizeMode::kNaiveBrics);
  EXPECT_EQ(f.blocks.size(), 9u);
  EXPECT_EQ(f.mode, TokenizeMode::kNaiveBrics);
  EXPECT_EQ(write_smiles(detokenize(f)), write_smiles(m));
}

TEST(Tokenize, NaiveBranchingIsError) {
  const auto m = parse_smiles("c1ccc(cc1)-c1cc(-c2ccccc2)cc(-c2ccccc2)c1");
  EXPECT_THROW(tokenize(m, demo_vocabulary(), TokenizeMode::kNaiveBrics), InvalidArgument);
}

TEST(Tokenize, CoarserThanNaive) {
  const auto kinds = chain_kinds(4);
  const auto m = parse_smiles(chain_smiles(kinds));
  Vocabulary rich;
  for (const auto& k : enumerate_blocks(m, true)) rich.counts[k] = 1000;
  EXPECT_EQ(tokenize(m, rich).blocks.size(), 1u);
  EXPECT_EQ(tokenize(m, rich, TokenizeMode::kNaiveBrics).blocks.size(), 4u);
}

TEST(Tokenize, ZeroBondMolecule) {
  const auto m = parse_smiles("c1ccc2ccccc2c1");
  EXPECT_EQ(tokenize(m, demo_vocabulary()).blocks.size(), 1u);
  EXPECT_EQ(tokenize(m, demo_vocabulary(), TokenizeMode::kNaiveBrics).blocks.size(), 1u);
}

TEST(Tokenize, RejectsDisconnected) {
  EXPECT_THROW(tokenize(parse_smiles("CCO.Cl"), demo_vocabulary()), InvalidArgument);
}

TEST(Tokenize, CorpusRoundTripAndSelection) {
  const auto& vocab = corpus_vocab();
  int round_trips = 0;
  int naive = 0;
  int oracle = 0;
  for (const auto& smi : corpus_smiles()) {
    const auto m = parse_smiles(smi);
    if (m.components().size() != 1) continue;
    const auto bonds = find_brics_bonds(m).size();
    if (bonds > 16) continue;
    const auto f = tokenize(m, vocab);
    const std::string want = write_smiles(m);
    EXPECT_EQ(write_smiles(detokenize(f)), want) << smi;
    ++round_trips;
    for (const auto& b : f.blocks) {
      EXPECT_LE(b.attachment_count, 2);
      EXPECT_NO_THROW(parse_smiles(b.canonical_key));
    }
    const auto layout = break_molecule(m, find_brics_bonds(m));
    if (layout.is_path) {
      const auto nf = tokenize(m, vocab, TokenizeMode::kNaiveBrics);
      EXPECT_EQ(write_smiles(detokenize(nf)), want) << smi;
      ++naive;
    }
    if (bonds <= 10) {
      const auto cands = enumerate_decompositions(m);
      const auto& expect = cands[brute_force_pick(cands, vocab)];
      EXPECT_EQ(keys_of(f), keys_of(expect)) << smi;
      // no qualifying candidate is strictly smaller
      for (const auto& c : cands) {
        if (c.blocks.size() >= f.blocks.size()) break;
        bool pass = true;
        for (const auto& b : c.blocks) pass = pass && vocab.frequency(b.vocab_key) >= 3;
        EXPECT_FALSE(pass) << smi;
      }
      ++oracle;
    }
  }
  EXPECT_GE(round_trips, 900);
  EXPECT_GT(naive, 500);
  EXPECT_GT(oracle, 900);
}

TEST(Detokenize, SingleBlock) {
  Fragmentation f;
  f.blocks.push_back(make_block(parse_smiles("CCO")));
  EXPECT_EQ(write_smiles(detokenize(f)), "CCO");
}

TEST(Detokenize, Errors) {
  Fragmentation same;
  same.blocks.push_back(make_block(parse_smiles("[1*]CC")));
  same.blocks.push_back(make_block(parse_smiles("[1*]N")));
  EXPECT_THROW(detokenize(same), InvalidArgument);

  Fragmentation dangling;
  dangling.blocks.push_back(make_block(parse_smiles("[2*]CC[1*]")));
  dangling.blocks.push_back(make_block(parse_smiles("[1*]N")));
  EXPECT_THROW(detokenize(dangling), InvalidArgument);

  Fragmentation valence;
  valence.blocks.push_back(make_block(parse_smiles("[2*]=C(F)F")));
  valence.blocks.push_back(make_block(parse_smiles("[1*]C(F)(F)F")));
  EXPECT_THROW(detokenize(valence), SanitizationError);

  EXPECT_THROW(detokenize(Fragmentation{}), InvalidArgument);
}

TEST(NameTable, Lookup) {
  const auto& names = NameTable::standard();
  EXPECT_GE(names.size(), 100u);
  EXPECT_EQ(parent_scaffold(parse_smiles("[2*]c1cccnc1")), canonical_smiles("c1ccncc1"));
  EXPECT_EQ(names.name_for(make_block(parse_smiles("[2*]c1cccnc1"))), "pyridine");
  EXPECT_EQ(names.name_for(make_block(parse_smiles("[1*]CN1CCN(C)CC1"))), "piperazine");
  EXPECT_EQ(names.name_for(make_block(parse_smiles("[1*]C(C)(C)CCCCC#N"))), "unnamed");
  EXPECT_EQ(names.lookup(canonical_smiles("C1CCNCC1")), "piperidine");
}

TEST(NameTable, Render) {
  Fragmentation f;
  f.blocks.push_back(make_block(parse_smiles("[2*]c1cccnc1")));
  f.blocks.push_back(make_block(parse_smiles("[1*]C(C)(C)CCCCC#N")));
  const auto text = render(f, NameTable::standard());
  EXPECT_EQ(text, "pyridine [" + f.blocks[0].canonical_key + "] -> unnamed [" +
                      f.blocks[1].canonical_key + "]");
  f.frequencies = {4, 0};
  const auto j = nlohmann::json::parse(to_json(f, NameTable::standard()));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["name"], "pyridine");
  EXPECT_EQ(j[0]["frequency"], 4);
  EXPECT_EQ(j[1]["smiles"], f.blocks[1].canonical_key);
}

TEST(NameTable, ParseErrors) {
  EXPECT_THROW(NameTable::parse("c1ccccc1\n"), FormatError);
  EXPECT_THROW(NameTable::parse("c1cccc\tbroken\n"), FormatError);
  EXPECT_THROW(NameTable::parse("c1ccccc1\t\n"), FormatError);
  const auto t = NameTable::parse("# comment\nC1=CC=CC=C1\tbenzene\n");
  EXPECT_EQ(t.lookup("c1ccccc1"), "benzene");
}
