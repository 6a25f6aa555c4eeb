#include "molblocks/molecule.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <tuple>

#include "molblocks/element.h"
#include "molblocks/errors.h"

namespace molblocks {

int valence_contribution(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return 1;
    case BondOrder::kDouble: return 2;
    case BondOrder::kTriple: return 3;
    case BondOrder::kAromatic: return 1;
  }
  return 1;
}

std::string_view Atom::symbol() const { return element(atomic_number).symbol; }

int Molecule::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  atom_in_ring_.push_back(false);
  return atom_count() - 1;
}

int Molecule::add_bond(int begin, int end, BondOrder order,
                       BondDirection direction) {
  if (begin < 0 || end < 0 || begin >= atom_count() || end >= atom_count()) {
    throw InvalidArgument("bond endpoint out of range");
  }
  if (begin == end) throw InvalidArgument("self-bond on atom " + std::to_string(begin));
  if (bond_between(begin, end)) {
    throw InvalidArgument("duplicate bond " + std::to_string(begin) + "-" +
                          std::to_string(end));
  }
  bonds_.push_back(Bond{begin, end, order, direction});
  const int idx = bond_count() - 1;
  adjacency_[static_cast<std::size_t>(begin)].push_back({end, idx});
  adjacency_[static_cast<std::size_t>(end)].push_back({begin, idx});
  bond_in_ring_.push_back(false);
  return idx;
}

std::optional<int> Molecule::bond_between(int a, int b) const {
  for (const auto& n : neighbors(a)) {
    if (n.atom == b) return n.bond;
  }
  return std::nullopt;
}

int Molecule::total_h(int a) const {
  int h = atom(a).implicit_h;
  for (const auto& n : neighbors(a)) {
    if (atom(n.atom).is_hydrogen()) ++h;
  }
  return h;
}

int Molecule::bond_order_sum(int a) const {
  int sum = 0;
  for (const auto& n : neighbors(a)) sum += valence_contribution(bond(n.bond).order);
  return sum;
}

bool Molecule::has_multiple_bond(int a) const {
  for (const auto& n : neighbors(a)) {
    const auto o = bond(n.bond).order;
    if (o == BondOrder::kDouble || o == BondOrder::kTriple) return true;
  }
  return false;
}

int Molecule::heavy_atom_count() const {
  return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(), [](const Atom& a) {
    return !a.is_hydrogen() && !a.is_wildcard();
  }));
}

int Molecule::wildcard_count() const {
  return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(),
                                        [](const Atom& a) { return a.is_wildcard(); }));
}

void Molecule::perceive_rings() {
  const int n = atom_count();
  std::fill(atom_in_ring_.begin(), atom_in_ring_.end(), false);
  std::fill(bond_in_ring_.begin(), bond_in_ring_.end(), false);
  rings_.clear();

  // Bridges (iterative Tarjan); every non-bridge bond lies on a cycle.
  std::vector<int> disc(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<bool> bridge(static_cast<std::size_t>(bond_count()), false);
  int timer = 0;
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto nbrs = neighbors(f.atom);
      if (f.next < nbrs.size()) {
        const Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        const auto v = static_cast<std::size_t>(nb.atom);
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          auto& l = low[static_cast<std::size_t>(f.atom)];
          l = std::min(l, disc[v]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const auto u = static_cast<std::size_t>(stack.back().atom);
          const auto w = static_cast<std::size_t>(done.atom);
          low[u] = std::min(low[u], low[w]);
          if (low[w] > disc[u]) bridge[static_cast<std::size_t>(done.parent_bond)] = true;
        }
      }
    }
  }
  for (int b = 0; b < bond_count(); ++b) {
    if (bridge[static_cast<std::size_t>(b)]) continue;
    bond_in_ring_[static_cast<std::size_t>(b)] = true;
    atom_in_ring_[static_cast<std::size_t>(bonds_[static_cast<std::size_t>(b)].begin)] = true;
    atom_in_ring_[static_cast<std::size_t>(bonds_[static_cast<std::size_t>(b)].end)] = true;
  }

  // Simple cycles up to 7 atoms. Each cycle is found from its smallest atom
  // and kept in the orientation whose second atom is smaller than its last.
  constexpr std::size_t kMaxRing = 7;
  std::vector<int> path;
  std::vector<bool> on_path(static_cast<std::size_t>(n), false);
  std::function<void(int, int)> extend = [&](int start, int current) {
    for (const auto& nb : neighbors(current)) {
      if (!bond_in_ring_[static_cast<std::size_t>(nb.bond)]) continue;
      if (nb.atom == start && path.size() >= 3) {
        if (path[1] < path.back()) rings_.push_back(path);
        continue;
      }
      if (nb.atom <= start || on_path[static_cast<std::size_t>(nb.atom)]) continue;
      if (path.size() >= kMaxRing) continue;
      path.push_back(nb.atom);
      on_path[static_cast<std::size_t>(nb.atom)] = true;
      extend(start, nb.atom);
      on_path[static_cast<std::size_t>(nb.atom)] = false;
      path.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    if (!atom_in_ring_[static_cast<std::size_t>(s)]) continue;
    path = {s};
    on_path[static_cast<std::size_t>(s)] = true;
    extend(s, s);
    on_path[static_cast<std::size_t>(s)] = false;
  }
  std::sort(rings_.begin(), rings_.end());
}

void Molecule::inherit_rings(const Molecule& src, std::span<const int> atom_map) {
  atom_in_ring_.assign(atoms_.size(), false);
  bond_in_ring_.assign(bonds_.size(), false);
  rings_.clear();
  for (int a = 0; a < src.atom_count(); ++a) {
    const int t = atom_map[static_cast<std::size_t>(a)];
    if (t >= 0 && src.atom_in_ring(a)) atom_in_ring_[static_cast<std::size_t>(t)] = true;
  }
  for (int b = 0; b < src.bond_count(); ++b) {
    if (!src.bond_in_ring(b)) continue;
    const int u = atom_map[static_cast<std::size_t>(src.bond(b).begin)];
    const int v = atom_map[static_cast<std::size_t>(src.bond(b).end)];
    if (u < 0 || v < 0) continue;
    if (const auto nb = bond_between(u, v)) bond_in_ring_[static_cast<std::size_t>(*nb)] = true;
  }
  for (const auto& ring : src.small_rings()) {
    std::vector<int> mapped;
    for (int a : ring) mapped.push_back(atom_map[static_cast<std::size_t>(a)]);
    if (std::find(mapped.begin(), mapped.end(), -1) != mapped.end()) continue;
    // keep the orientation convention: smallest atom first, second < last
    const auto first = std::min_element(mapped.begin(), mapped.end());
    std::rotate(mapped.begin(), first, mapped.end());
    if (mapped[1] > mapped.back()) std::reverse(mapped.begin() + 1, mapped.end());
    rings_.push_back(std::move(mapped));
  }
  std::sort(rings_.begin(), rings_.end());
}

std::vector<std::vector<int>> Molecule::components() const {
  std::vector<int> comp(static_cast<std::size_t>(atom_count()), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < atom_count(); ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      out.back().push_back(a);
      for (const auto& nb : neighbors(a)) {
        if (comp[static_cast<std::size_t>(nb.atom)] < 0) {
          comp[static_cast<std::size_t>(nb.atom)] = id;
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

namespace {

void remap_chirality(Atom& atom, const std::vector<int>& old_to_new) {
  if (atom.chirality == Chirality::kNone) return;
  for (int& r : atom.chiral_neighbors) {
    if (r == kImplicitHydrogen) continue;
    r = old_to_new[static_cast<std::size_t>(r)];
    if (r < 0) {
      atom.chirality = Chirality::kNone;
      atom.chiral_neighbors.clear();
      return;
    }
  }
}

BondDirection flipped(BondDirection d) {
  switch (d) {
    case BondDirection::kUp: return BondDirection::kDown;
    case BondDirection::kDown: return BondDirection::kUp;
    default: return d;
  }
}

}  // namespace

Molecule induced_subgraph(const Molecule& m, std::span<const int> keep,
                          std::vector<int>* old_to_new_out, bool inherit_rings) {
  std::vector<int> old_to_new(static_cast<std::size_t>(m.atom_count()), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    old_to_new[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  }
  Molecule out;
  for (int old : keep) {
    Atom a = m.atom(old);
    remap_chirality(a, old_to_new);
    out.add_atom(std::move(a));
  }
  for (const auto& b : m.bonds()) {
    const int u = old_to_new[static_cast<std::size_t>(b.begin)];
    const int v = old_to_new[static_cast<std::size_t>(b.end)];
    if (u >= 0 && v >= 0) out.add_bond(u, v, b.order, b.direction);
  }
  out.set_name(m.name());
  if (inherit_rings) {
    out.inherit_rings(m, old_to_new);
  } else {
    out.perceive_rings();
  }
  if (old_to_new_out) *old_to_new_out = std::move(old_to_new);
  return out;
}

Molecule permute_atoms(const Molecule& m, std::span<const int> order) {
  std::vector<int> keep(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) {
    keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
  }
  std::vector<int> old_to_new(order.begin(), order.end());
  Molecule out;
  for (int old : keep) {
    Atom a = m.atom(old);
    remap_chirality(a, old_to_new);
    out.add_atom(std::move(a));
  }
  std::vector<Bond> bonds(m.bonds().begin(), m.bonds().end());
  for (auto& b : bonds) {
    b.begin = old_to_new[static_cast<std::size_t>(b.begin)];
    b.end = old_to_new[static_cast<std::size_t>(b.end)];
    if (b.begin > b.end) {
      std::swap(b.begin, b.end);
      b.direction = flipped(b.direction);
    }
  }
  std::sort(bonds.begin(), bonds.end(), [](const Bond& x, const Bond& y) {
    return std::tie(x.begin, x.end) < std::tie(y.begin, y.end);
  });
  for (const auto& b : bonds) out.add_bond(b.begin, b.end, b.order, b.direction);
  out.set_name(m.name());
  out.perceive_rings();
  return out;
}

Molecule strip_stereo(const Molecule& m) {
  Molecule out = m;
  for (int i = 0; i < out.atom_count(); ++i) {
    out.atom(i).chirality = Chirality::kNone;
    out.atom(i).chiral_neighbors.clear();
  }
  for (int i = 0; i < out.bond_count(); ++i) out.bond(i).direction = BondDirection::kNone;
  return out;
}

}  // namespace molblocks
