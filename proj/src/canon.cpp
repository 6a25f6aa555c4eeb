#include "molblocks/canon.h"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace molblocks {

namespace {

int bond_code(BondOrder o) { return static_cast<int>(o); }

// Assigns rank = number of atoms whose key compares strictly smaller, so
// tied atoms share the lowest rank of their class. Returns the class count.
template <typename Key>
int rank_by_keys(const std::vector<Key>& keys, std::vector<int>& rank) {
  const std::size_t n = keys.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return keys[static_cast<std::size_t>(x)] < keys[static_cast<std::size_t>(y)];
  });
  int classes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cur = static_cast<std::size_t>(order[i]);
    if (i == 0 || keys[static_cast<std::size_t>(order[i - 1])] < keys[cur]) {
      ++classes;
      rank[cur] = static_cast<int>(i);
    } else {
      rank[cur] = rank[static_cast<std::size_t>(order[i - 1])];
    }
  }
  return classes;
}

int refine(const Molecule& m, std::vector<int>& rank, int classes) {
  const int n = m.atom_count();
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  std::vector<Key> keys(static_cast<std::size_t>(n));
  while (classes < n) {
    for (int a = 0; a < n; ++a) {
      auto& k = keys[static_cast<std::size_t>(a)];
      k.first = rank[static_cast<std::size_t>(a)];
      k.second.clear();
      for (const auto& nb : m.neighbors(a)) {
        k.second.emplace_back(rank[static_cast<std::size_t>(nb.atom)],
                              bond_code(m.bond(nb.bond).order));
      }
      std::sort(k.second.begin(), k.second.end());
    }
    const int next = rank_by_keys(keys, rank);
    if (next == classes) break;
    classes = next;
  }
  return classes;
}

}  // namespace

std::vector<int> canonical_ranks(const Molecule& m) {
  const int n = m.atom_count();
  std::vector<int> rank(static_cast<std::size_t>(n), 0);
  if (n == 0) return rank;

  using Invariant = std::tuple<int, int, int, bool, int, int>;
  std::vector<Invariant> inv(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const Atom& atom = m.atom(a);
    inv[static_cast<std::size_t>(a)] = {atom.atomic_number, atom.isotope, atom.formal_charge,
                                        atom.aromatic, m.degree(a), m.total_h(a)};
  }
  int classes = rank_by_keys(inv, rank);
  classes = refine(m, rank, classes);

  while (classes < n) {
    // Split the lowest-ranked tied class: its first atom keeps the rank,
    // the rest move one up.
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (int r : rank) ++count[static_cast<std::size_t>(r)];
    int tied = -1;
    for (int r = 0; r < n; ++r) {
      if (count[static_cast<std::size_t>(r)] > 1) {
        tied = r;
        break;
      }
    }
    bool first = true;
    for (int a = 0; a < n; ++a) {
      if (rank[static_cast<std::size_t>(a)] != tied) continue;
      if (first) {
        first = false;
      } else {
        rank[static_cast<std::size_t>(a)] = tied + 1;
      }
    }
    classes = refine(m, rank, classes + 1);
  }
  return rank;
}

}  // namespace molblocks
