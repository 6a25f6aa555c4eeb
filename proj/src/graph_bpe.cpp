#include "molblocks/graph_bpe.h"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>

#include "molblocks/errors.h"
#include "molblocks/sanitize.h"
#include "molblocks/smiles.h"

namespace molblocks {

namespace {

bool has_label(const Molecule& g, int label) {
  for (const auto& a : g.atoms()) {
    if (a.is_wildcard() && a.isotope == label) return true;
  }
  return false;
}

}  // namespace

Molecule merge_fragments(const Block& a, const Block& b) {
  if (!has_label(a.graph, kForwardLabel) || !has_label(b.graph, kBackwardLabel)) {
    throw InvalidArgument("merge needs a [2*] on the left block and a [1*] on the right block");
  }
  Molecule out = join_fragments(a.graph, kForwardLabel, b.graph, kBackwardLabel);
  sanitize(out);
  return out;
}

namespace {

// Canonical key of a block read in the opposite direction ([1*] <-> [2*]).
class SwappedKeys {
 public:
  const std::string& operator()(const Block& b) {
    auto it = cache_.find(b.canonical_key);
    if (it != cache_.end()) return it->second;
    Molecule g = b.graph;
    for (int i = 0; i < g.atom_count(); ++i) {
      auto& atom = g.atom(i);
      if (!atom.is_wildcard()) continue;
      if (atom.isotope == kForwardLabel) {
        atom.isotope = kBackwardLabel;
      } else if (atom.isotope == kBackwardLabel) {
        atom.isotope = kForwardLabel;
      }
    }
    return cache_.emplace(b.canonical_key, block_smiles(g)).first->second;
  }

 private:
  std::map<std::string, std::string> cache_;
};

std::string pair_key(const Block& x, const Block& y, SwappedKeys& swapped) {
  std::string fwd = x.canonical_key + " " + y.canonical_key;
  std::string rev = swapped(y) + " " + swapped(x);
  return std::min(fwd, rev);
}

}  // namespace

GraphBpeBuild graph_bpe_build(std::span<const std::string> corpus, std::size_t target_vocab_size) {
  if (corpus.empty()) throw InvalidArgument("empty corpus");
  GraphBpeBuild out;
  std::vector<std::vector<Block>> paths;
  for (const auto& smi : corpus) {
    const Molecule m = parse_smiles(smi);
    auto layout = break_molecule(m, find_brics_bonds(m));
    if (!layout.is_path) throw InvalidArgument("branching molecule: " + smi);
    for (const auto& b : layout.fragments) ++out.vocab.counts[b.vocab_key];
    out.primitives += layout.fragments.size();
    paths.push_back(std::move(layout.fragments));
  }
  out.vocab.corpus_size = corpus.size();
  out.vocab.include_full = true;
  if (target_vocab_size <= out.vocab.counts.size()) {
    throw InvalidArgument("target vocabulary size must exceed the primitive vocabulary (" +
                          std::to_string(out.vocab.counts.size()) + ")");
  }

  SwappedKeys swapped;
  while (out.vocab.counts.size() < target_vocab_size) {
    std::map<std::string, std::uint64_t> pairs;
    for (const auto& path : paths) {
      for (std::size_t i = 0; i + 1 < path.size(); ++i) ++pairs[pair_key(path[i], path[i + 1], swapped)];
    }
    if (pairs.empty()) break;
    auto best = pairs.begin();
    for (auto it = pairs.begin(); it != pairs.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const std::string chosen = best->first;
    std::string merged_key;
    for (auto& path : paths) {
      std::vector<Block> next;
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (i + 1 < path.size() && pair_key(path[i], path[i + 1], swapped) == chosen) {
          Block merged = make_block(merge_fragments(path[i], path[i + 1]));
          ++out.merge_ops;
          ++out.vocab.counts[merged.vocab_key];
          merged_key = merged.vocab_key;
          next.push_back(std::move(merged));
          ++i;
        } else {
          next.push_back(std::move(path[i]));
        }
      }
      path = std::move(next);
    }
    out.merges.push_back(merged_key);
  }
  out.reached_target = out.vocab.counts.size() >= target_vocab_size;
  return out;
}

std::string benchmark_molecule(int heavy_atoms, std::uint64_t seed) {
  if (heavy_atoms < 9) throw InvalidArgument("benchmark molecules need at least 9 heavy atoms");
  struct Ring {
    const char* text;
    int size;
  };
  static constexpr Ring kRings[] = {
      {"c{r}ccc({R})cc{r}", 6}, {"c{r}ccc({R})nc{r}", 6},
      {"c{r}ccc({R})s{r}", 5},  {"c{r}ccc({R})o{r}", 5},
  };
  std::mt19937_64 rng(seed);
  const int max_rings = std::max(1, (heavy_atoms - 2) / 6);
  const int rings = std::uniform_int_distribution<int>(1, max_rings)(rng);
  std::vector<int> kinds;
  int used = 0;
  for (int i = 0; i < rings; ++i) {
    int kind = std::uniform_int_distribution<int>(0, 3)(rng);
    const int left = heavy_atoms - used - rings - 2;  // room once links and chain are set aside
    const int after = (rings - i - 1) * 5;
    if (kRings[kind].size + after > left) kind = 2 + kind % 2;
    kinds.push_back(kind);
    used += kRings[kind].size;
  }
  const int chain = heavy_atoms - used - rings;
  std::string tail = "O" + std::string(static_cast<std::size_t>(chain), 'C');
  for (int i = rings - 1; i >= 0; --i) {
    std::string t = kRings[kinds[static_cast<std::size_t>(i)]].text;
    const std::string digit = std::to_string(i % 9 + 1);
    for (auto p = t.find("{r}"); p != std::string::npos; p = t.find("{r}")) t.replace(p, 3, digit);
    t.replace(t.find("{R}"), 3, tail);
    tail = i > 0 ? "O" + t : t;
  }
  return tail;
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchReport benchmark_break_vs_merge(const BenchConfig& config) {
  if (config.samples < 1 || config.repetitions < 1) {
    throw InvalidArgument("samples and repetitions must be >= 1");
  }
  if (!std::is_sorted(config.sizes.begin(), config.sizes.end()) ||
      std::adjacent_find(config.sizes.begin(), config.sizes.end()) != config.sizes.end()) {
    throw InvalidArgument("sizes must be strictly increasing");
  }
  BenchReport report;
  std::mt19937_64 rng(config.seed);
  for (int size : config.sizes) {
    struct Sample {
      Molecule mol;
      std::vector<int> pair;
      Block left;
      Block right;
    };
    std::vector<Sample> samples;
    for (int s = 0; s < config.samples; ++s) {
      Sample sm;
      sm.mol = parse_smiles(benchmark_molecule(size, rng()));
      const auto bonds = find_brics_bonds(sm.mol);
      if (bonds.size() < 2) throw InvalidArgument("generated molecule lacks two BRICS bonds");
      std::vector<int> idx;
      for (const auto& b : bonds) idx.push_back(b.bond_index);
      std::shuffle(idx.begin(), idx.end(), rng);
      sm.pair = {idx[0], idx[1]};
      const int one[] = {idx[0]};
      auto halves = break_molecule(sm.mol, one);
      sm.left = std::move(halves.fragments[0]);
      sm.right = std::move(halves.fragments[1]);
      samples.push_back(std::move(sm));
    }

    std::size_t sink = 0;
    auto time_breaks = [&] {
      const auto t0 = Clock::now();
      for (const auto& sm : samples) sink += fragment_on_bonds(sm.mol, sm.pair).size();
      return std::chrono::duration<double>(Clock::now() - t0).count();
    };
    auto time_merges = [&] {
      const auto t0 = Clock::now();
      for (const auto& sm : samples) sink += merge_fragments(sm.left, sm.right).atom_count();
      return std::chrono::duration<double>(Clock::now() - t0).count();
    };
    time_breaks();
    time_merges();
    std::vector<double> breaks;
    std::vector<double> merges;
    for (int r = 0; r < config.repetitions; ++r) {
      breaks.push_back(time_breaks() / static_cast<double>(samples.size()));
      merges.push_back(time_merges() / static_cast<double>(samples.size()));
    }
    if (sink == 0) throw Error("benchmark produced no work");
    BenchRow row;
    row.size = size;
    row.samples = config.samples;
    row.break_mean_s = median(breaks);
    row.merge_mean_s = median(merges);
    if (row.break_mean_s <= 0 || row.merge_mean_s <= 0) {
      throw Error("timing below clock resolution");
    }
    row.ratio = row.merge_mean_s / row.break_mean_s;
    report.rows.push_back(row);
  }
  return report;
}

void write_bench_csv(const BenchReport& r, std::ostream& out) {
  out << "size,break_mean_s,merge_mean_s,ratio,samples\n";
  for (const auto& row : r.rows) {
    out << row.size << ',' << std::scientific << std::setprecision(6) << row.break_mean_s << ','
        << row.merge_mean_s << ',' << std::fixed << std::setprecision(3) << row.ratio << ','
        << row.samples << '\n';
  }
  out << std::defaultfloat;
}

void write_bench_table(const BenchReport& r, std::ostream& out) {
  out << std::left << std::setw(6) << "size" << std::right << std::setw(14) << "break (us)"
      << std::setw(14) << "merge (us)" << std::setw(10) << "ratio" << std::setw(9) << "samples"
      << '\n';
  for (const auto& row : r.rows) {
    out << std::left << std::setw(6) << row.size << std::right << std::fixed
        << std::setprecision(3) << std::setw(14) << row.break_mean_s * 1e6 << std::setw(14)
        << row.merge_mean_s * 1e6 << std::setw(10) << row.ratio << std::setw(9) << row.samples
        << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace molblocks
