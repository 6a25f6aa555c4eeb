#include "molblocks/tokenizer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "embedded_data.h"
#include "molblocks/errors.h"
#include "molblocks/sanitize.h"
#include "molblocks/smiles.h"

namespace molblocks {

namespace {

// Subsets of the BRICS bonds viewed as cuts of the primitive tree (the
// fragments left by cutting every BRICS bond). Blocks are cached by
// (primitive set, forward bond) so each distinct block is built once.
class Decomposer {
 public:
  struct Candidate {
    std::uint32_t cut_mask = 0;
    std::vector<const Block*> blocks;
  };

  Decomposer(const Molecule& m, int max_bonds) : m_(m) {
    if (max_bonds < 0 || max_bonds > 24) throw InvalidArgument("max_bonds must be in [0, 24]");
    for (const auto& b : find_brics_bonds(m)) bonds_.push_back(b.bond_index);
    k_ = static_cast<int>(bonds_.size());
    if (m.atom_count() == 0) throw InvalidArgument("empty molecule");
    if (m.components().size() != 1) throw InvalidArgument("molecule has several components");
    if (k_ > max_bonds) throw TooManyBondsError(k_, max_bonds);

    std::vector<int> cut_of(static_cast<std::size_t>(m.bond_count()), 0);
    for (int b : bonds_) cut_of[static_cast<std::size_t>(b)] = 1;
    prim_of_.assign(static_cast<std::size_t>(m.atom_count()), -1);
    for (int a = 0; a < m.atom_count(); ++a) {
      if (prim_of_[static_cast<std::size_t>(a)] >= 0) continue;
      const int id = static_cast<int>(seed_.size());
      seed_.push_back(a);
      std::vector<int> stack{a};
      prim_of_[static_cast<std::size_t>(a)] = id;
      while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        for (const auto& nb : m.neighbors(x)) {
          if (cut_of[static_cast<std::size_t>(nb.bond)]) continue;
          if (prim_of_[static_cast<std::size_t>(nb.atom)] < 0) {
            prim_of_[static_cast<std::size_t>(nb.atom)] = id;
            stack.push_back(nb.atom);
          }
        }
      }
    }
    for (int b : bonds_) {
      const Bond& bond = m.bond(b);
      ends_.emplace_back(prim_of_[static_cast<std::size_t>(bond.begin)],
                         prim_of_[static_cast<std::size_t>(bond.end)]);
    }
  }

  int bond_count() const { return k_; }
  int bond_index(int edge) const { return bonds_[static_cast<std::size_t>(edge)]; }

  // Path layout for the given cut mask, or an empty candidate when it branches.
  Candidate layout(std::uint32_t mask) {
    const int n = static_cast<int>(seed_.size());
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (int e = 0; e < k_; ++e) {
      if (mask & (1u << e)) continue;
      const auto [a, b] = ends_[static_cast<std::size_t>(e)];
      parent[static_cast<std::size_t>(find(a))] = find(b);
    }
    std::vector<std::uint32_t> members(static_cast<std::size_t>(n), 0);
    for (int p = 0; p < n; ++p) members[static_cast<std::size_t>(find(p))] |= 1u << p;
    // adjacency of blocks (identified by root) through cut edges
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
    for (int e = 0; e < k_; ++e) {
      if (!(mask & (1u << e))) continue;
      const int ra = find(ends_[static_cast<std::size_t>(e)].first);
      const int rb = find(ends_[static_cast<std::size_t>(e)].second);
      adj[static_cast<std::size_t>(ra)].emplace_back(e, rb);
      adj[static_cast<std::size_t>(rb)].emplace_back(e, ra);
      if (adj[static_cast<std::size_t>(ra)].size() > 2 || adj[static_cast<std::size_t>(rb)].size() > 2) {
        return {};
      }
    }
    int start = find(0);
    for (int p = 0; p < n; ++p) {
      if (find(p) == p && adj[static_cast<std::size_t>(p)].size() <= 1) {
        start = p;
        break;
      }
    }
    std::vector<int> order{start};
    std::vector<int> via;
    int prev_edge = -1;
    while (true) {
      int next = -1;
      int edge = -1;
      for (const auto& [e, r] : adj[static_cast<std::size_t>(order.back())]) {
        if (e != prev_edge) {
          next = r;
          edge = e;
        }
      }
      if (next < 0) break;
      via.push_back(edge);
      order.push_back(next);
      prev_edge = edge;
    }

    const std::size_t len = order.size();
    auto labeled = [&](bool reversed) {
      std::vector<const Block*> seq;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t pos = reversed ? len - 1 - i : i;
        const int fwd = reversed ? (pos > 0 ? via[pos - 1] : -1)
                                 : (pos + 1 < len ? via[pos] : -1);
        seq.push_back(&block(members[static_cast<std::size_t>(order[pos])], fwd));
      }
      return seq;
    };
    Candidate c{mask, labeled(false)};
    if (len > 1) {
      auto back = labeled(true);
      if (key_less(c.blocks, back)) c.blocks = std::move(back);
    }
    return c;
  }

  static bool key_less(const std::vector<const Block*>& a, const std::vector<const Block*>& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [](const Block* x, const Block* y) { return x->canonical_key < y->canonical_key; });
  }

  std::vector<Candidate> all() {
    std::vector<Candidate> out;
    for (std::uint32_t mask = 0; mask < (1u << k_); ++mask) {
      auto c = layout(mask);
      if (!c.blocks.empty()) out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
      if (a.blocks.size() != b.blocks.size()) return a.blocks.size() < b.blocks.size();
      return key_less(a.blocks, b.blocks);
    });
    return out;
  }

  Fragmentation materialize(const Candidate& c) const {
    Fragmentation f;
    for (const Block* b : c.blocks) f.blocks.push_back(*b);
    for (int e = 0; e < k_; ++e) {
      if (c.cut_mask & (1u << e)) f.cut_bonds.push_back(bonds_[static_cast<std::size_t>(e)]);
    }
    std::sort(f.cut_bonds.begin(), f.cut_bonds.end());
    return f;
  }

 private:
  const Block& block(std::uint32_t members, int fwd) {
    const auto key = std::make_pair(members, fwd);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<int> cut;
    std::vector<int> labels;
    for (int e = 0; e < k_; ++e) {
      const auto [a, b] = ends_[static_cast<std::size_t>(e)];
      const bool in_a = members & (1u << a);
      const bool in_b = members & (1u << b);
      if (in_a == in_b) continue;
      cut.push_back(bonds_[static_cast<std::size_t>(e)]);
      labels.push_back(e == fwd ? kForwardLabel : kBackwardLabel);
    }
    const int first = std::countr_zero(members);
    Molecule g = extract_fragment(m_, cut, seed_[static_cast<std::size_t>(first)], labels);
    return cache_.emplace(key, make_block(std::move(g))).first->second;
  }

  const Molecule& m_;
  std::vector<int> bonds_;
  int k_ = 0;
  std::vector<int> prim_of_;
  std::vector<int> seed_;
  std::vector<std::pair<int, int>> ends_;
  std::map<std::pair<std::uint32_t, int>, Block> cache_;
};

// Exact spread key for a fixed block count: k * sum(x^2) - (sum x)^2 orders
// candidates the same way as their standard deviation.
unsigned __int128 spread_key(const std::vector<std::uint64_t>& f) {
  unsigned __int128 sum = 0;
  unsigned __int128 sq = 0;
  for (auto x : f) {
    sum += x;
    sq += static_cast<unsigned __int128>(x) * x;
  }
  return static_cast<unsigned __int128>(f.size()) * sq - sum * sum;
}

// Index chosen by the selection rule; `freqs_of(i)` yields candidate i's frequencies.
template <typename Sizes, typename Freqs>
std::size_t select_index(std::size_t n, Sizes size_of, Freqs freqs_of, std::uint64_t f_min) {
  std::size_t best = n;
  unsigned __int128 best_key = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best < n && size_of(i) != size_of(best)) break;
    const std::vector<std::uint64_t> f = freqs_of(i);
    if (!std::all_of(f.begin(), f.end(), [&](std::uint64_t x) { return x >= f_min; })) continue;
    const auto key = spread_key(f);
    if (best == n || key < best_key) {
      best = i;
      best_key = key;
    }
  }
  if (best < n) return best;
  // fallback: finest decomposition, first in candidate order
  std::size_t finest = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (size_of(i) > size_of(finest)) finest = i;
  }
  return finest;
}

std::vector<std::uint64_t> block_frequencies(const std::vector<Block>& blocks, const Vocabulary& v) {
  std::vector<std::uint64_t> out;
  for (const auto& b : blocks) out.push_back(v.frequency(b.vocab_key));
  return out;
}

}  // namespace

std::vector<Fragmentation> enumerate_decompositions(const Molecule& m, int max_bonds) {
  Decomposer d(m, max_bonds);
  std::vector<Fragmentation> out;
  for (const auto& c : d.all()) out.push_back(d.materialize(c));
  return out;
}

double frequency_spread(std::span<const std::uint64_t> freqs) {
  if (freqs.size() < 2) return 0.0;
  double mean = 0.0;
  for (auto f : freqs) mean += static_cast<double>(f);
  mean /= static_cast<double>(freqs.size());
  double ss = 0.0;
  for (auto f : freqs) ss += (static_cast<double>(f) - mean) * (static_cast<double>(f) - mean);
  return std::sqrt(ss / static_cast<double>(freqs.size() - 1));
}

Fragmentation select_decomposition(std::span<const Fragmentation> candidates,
                                   const Vocabulary& vocab) {
  if (candidates.empty()) throw InvalidArgument("no candidates");
  const auto i = select_index(
      candidates.size(), [&](std::size_t j) { return candidates[j].blocks.size(); },
      [&](std::size_t j) { return block_frequencies(candidates[j].blocks, vocab); },
      static_cast<std::uint64_t>(vocab.f_min));
  Fragmentation f = candidates[i];
  f.frequencies = block_frequencies(f.blocks, vocab);
  f.mode = TokenizeMode::kBfe;
  return f;
}

Fragmentation tokenize(const Molecule& m, const Vocabulary& vocab, TokenizeMode mode,
                       int max_bonds) {
  if (mode == TokenizeMode::kNaiveBrics) {
    const auto layout = break_molecule(m, find_brics_bonds(m));
    if (!layout.is_path) throw InvalidArgument("naive BRICS layout branches");
    Fragmentation f;
    f.blocks = layout.fragments;
    f.cut_bonds = layout.cut_bonds;
    f.mode = mode;
    f.frequencies = block_frequencies(f.blocks, vocab);
    return f;
  }
  Decomposer d(m, max_bonds);
  const auto cands = d.all();
  std::unordered_map<const Block*, std::uint64_t> freq;
  auto freqs_of = [&](std::size_t j) {
    std::vector<std::uint64_t> out;
    for (const Block* b : cands[j].blocks) {
      auto it = freq.find(b);
      if (it == freq.end()) it = freq.emplace(b, vocab.frequency(b->vocab_key)).first;
      out.push_back(it->second);
    }
    return out;
  };
  const auto i = select_index(
      cands.size(), [&](std::size_t j) { return cands[j].blocks.size(); }, freqs_of,
      static_cast<std::uint64_t>(vocab.f_min));
  Fragmentation f = d.materialize(cands[i]);
  f.frequencies = freqs_of(i);
  f.mode = mode;
  return f;
}

Molecule detokenize(const Fragmentation& f) {
  if (f.blocks.empty()) throw InvalidArgument("empty fragmentation");
  Molecule acc = f.blocks.front().graph;
  for (std::size_t i = 1; i < f.blocks.size(); ++i) {
    acc = join_fragments(acc, kForwardLabel, f.blocks[i].graph, kBackwardLabel);
  }
  if (f.blocks.size() > 1 && acc.wildcard_count() > 0) {
    throw InvalidArgument("fragmentation leaves dangling attachment points");
  }
  sanitize(acc);
  return acc;
}

namespace {

// Removes the atoms not in `keep`, adding one hydrogen per removed single bond.
std::optional<Molecule> cap_with_hydrogen(const Molecule& m, const std::vector<bool>& keep) {
  Molecule work = strip_stereo(m);
  std::vector<int> kept;
  for (int a = 0; a < work.atom_count(); ++a) {
    if (!keep[static_cast<std::size_t>(a)]) continue;
    kept.push_back(a);
    for (const auto& nb : work.neighbors(a)) {
      if (keep[static_cast<std::size_t>(nb.atom)]) continue;
      if (work.bond(nb.bond).order != BondOrder::kSingle) return std::nullopt;
      ++work.atom(a).implicit_h;
    }
  }
  if (kept.empty()) return std::nullopt;
  return induced_subgraph(work, kept);
}

}  // namespace

std::string parent_scaffold(const Molecule& block) {
  std::vector<bool> keep(static_cast<std::size_t>(block.atom_count()));
  for (int a = 0; a < block.atom_count(); ++a) keep[static_cast<std::size_t>(a)] = !block.atom(a).is_wildcard();
  const auto capped = cap_with_hydrogen(block, keep);
  return capped ? write_smiles(*capped) : std::string();
}

NameTable NameTable::parse(std::string_view text) {
  NameTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw FormatError("name table line " + std::to_string(lineno) + ": expected smiles<TAB>name");
    }
    std::string key;
    try {
      key = canonical_smiles(line.substr(0, tab));
    } catch (const Error& e) {
      throw FormatError("name table line " + std::to_string(lineno) + ": " + e.what());
    }
    t.entries_[key] = line.substr(tab + 1);
  }
  return t;
}

NameTable NameTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open name table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const NameTable& NameTable::standard() {
  static const NameTable table = parse(embedded::names());
  return table;
}

std::optional<std::string> NameTable::lookup(const std::string& scaffold_key) const {
  const auto it = entries_.find(scaffold_key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string NameTable::name_for(const Block& block) const {
  const Molecule& g = block.graph;
  if (auto hit = lookup(parent_scaffold(g))) return *hit;
  // ring system of the scaffold
  std::vector<bool> ring(static_cast<std::size_t>(g.atom_count()));
  bool any = false;
  bool all = true;
  for (int a = 0; a < g.atom_count(); ++a) {
    const bool r = g.atom_in_ring(a);
    ring[static_cast<std::size_t>(a)] = r;
    any = any || r;
    all = all && (r || g.atom(a).is_wildcard());
  }
  if (any && !all) {
    if (const auto capped = cap_with_hydrogen(g, ring); capped && capped->components().size() == 1) {
      if (auto hit = lookup(write_smiles(*capped))) return *hit;
    }
  }
  return "unnamed";
}

std::string render(const Fragmentation& f, const NameTable& names, RenderStyle style) {
  std::string out;
  for (std::size_t i = 0; i < f.blocks.size(); ++i) {
    if (i > 0) out += " -> ";
    out += names.name_for(f.blocks[i]);
    if (style == RenderStyle::kFull) out += " [" + f.blocks[i].canonical_key + "]";
  }
  return out;
}

std::string to_json(const Fragmentation& f, const NameTable& names) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < f.blocks.size(); ++i) {
    arr.push_back({{"smiles", f.blocks[i].canonical_key},
                   {"name", names.name_for(f.blocks[i])},
                   {"frequency", i < f.frequencies.size() ? f.frequencies[i] : 0}});
  }
  return arr.dump();
}

const Vocabulary& demo_vocabulary() {
  static const Vocabulary v = parse_vocabulary(embedded::demo_vocab());
  return v;
}

}  // namespace molblocks
