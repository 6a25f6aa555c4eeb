#include "molblocks/sanitize.h"

#include <algorithm>
#include <string>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/max_cardinality_matching.hpp>

#include "molblocks/element.h"
#include "molblocks/errors.h"

namespace molblocks {

int default_implicit_h(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  if (!is_organic_subset(atom.atomic_number)) return -1;
  const auto valences = default_valences(atom.atomic_number);
  const int used = m.bond_order_sum(a);
  if (atom.aromatic) {
    return std::max(0, valences.front() - used - 1);
  }
  for (int v : valences) {
    if (v >= used) return v - used;
  }
  return -1;
}

bool is_lone_pair_donor(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  if (m.has_multiple_bond(a)) return false;
  switch (atom.atomic_number) {
    case 7:
    case 15:
    case 33:
      if (atom.formal_charge == -1) return true;
      return atom.formal_charge == 0 && (m.total_h(a) > 0 || m.degree(a) == 3);
    case 8:
    case 16:
    case 34:
    case 52:
      return atom.formal_charge == 0 && m.degree(a) == 2;
    case 6:
      return atom.formal_charge == -1;
    default:
      return false;
  }
}

namespace {

// Pi electrons contributed by ring atom `a` of `ring`, or -1 when the atom
// rules the ring out. Evaluated on Kekulé bond orders; `aromatic_atom`
// holds atoms of rings already found aromatic.
int pi_electrons(const Molecule& m, int a, const std::vector<int>& ring,
                 const std::vector<bool>& aromatic_atom) {
  const Atom& atom = m.atom(a);
  if (!can_be_aromatic(atom.atomic_number)) return -1;
  if (atom.aromatic) return is_lone_pair_donor(m, a) ? 2 : 1;

  int doubles = 0;
  int partner = -1;
  for (const auto& nb : m.neighbors(a)) {
    const auto order = m.bond(nb.bond).order;
    if (order == BondOrder::kTriple) return -1;
    if (order == BondOrder::kDouble) {
      ++doubles;
      partner = nb.atom;
    }
  }
  if (doubles > 1) return -1;
  if (doubles == 1) {
    const bool in_ring = std::find(ring.begin(), ring.end(), partner) != ring.end();
    if (in_ring || aromatic_atom[static_cast<std::size_t>(partner)] ||
        m.atom(partner).aromatic) {
      return 1;
    }
    // Exocyclic C=O, C=S, C=N contribute no electrons; C=C rules the ring out.
    const int pz = m.atom(partner).atomic_number;
    const bool hetero = pz == 7 || pz == 8 || pz == 16;
    return atom.atomic_number == 6 && hetero ? 0 : -1;
  }
  if (is_lone_pair_donor(m, a)) return 2;
  if (atom.atomic_number == 6 && atom.formal_charge == 1) return 0;
  if (atom.atomic_number == 5 && atom.formal_charge == 0) return 0;
  return -1;
}

void perceive_aromaticity(Molecule& m) {
  const auto& rings = m.small_rings();
  std::vector<bool> ring_aromatic(rings.size(), false);
  std::vector<bool> aromatic_atom(static_cast<std::size_t>(m.atom_count()), false);

  // Rings written entirely in aromatic form are taken as given.
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const auto& ring = rings[r];
    const bool all = std::all_of(ring.begin(), ring.end(),
                                 [&](int a) { return m.atom(a).aromatic; });
    if (!all) continue;
    bool bonds_aromatic = true;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const int b = *m.bond_between(ring[i], ring[(i + 1) % ring.size()]);
      if (m.bond(b).order != BondOrder::kAromatic) bonds_aromatic = false;
    }
    if (bonds_aromatic) {
      ring_aromatic[r] = true;
      for (int a : ring) aromatic_atom[static_cast<std::size_t>(a)] = true;
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < rings.size(); ++r) {
      if (ring_aromatic[r]) continue;
      const auto& ring = rings[r];
      if (ring.size() < 5 || ring.size() > 7) continue;
      int electrons = 0;
      bool ok = true;
      for (int a : ring) {
        const int e = pi_electrons(m, a, ring, aromatic_atom);
        if (e < 0) {
          ok = false;
          break;
        }
        electrons += e;
      }
      if (!ok || electrons % 4 != 2) continue;
      ring_aromatic[r] = true;
      for (int a : ring) aromatic_atom[static_cast<std::size_t>(a)] = true;
      changed = true;
    }
  }

  for (std::size_t r = 0; r < rings.size(); ++r) {
    if (!ring_aromatic[r]) continue;
    const auto& ring = rings[r];
    for (std::size_t i = 0; i < ring.size(); ++i) {
      m.atom(ring[i]).aromatic = true;
      const int b = *m.bond_between(ring[i], ring[(i + 1) % ring.size()]);
      m.bond(b).order = BondOrder::kAromatic;
    }
  }
}

void check_valence(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  const auto allowed = allowed_valences(atom.atomic_number, atom.formal_charge);
  if (allowed.empty()) return;
  int used = m.bond_order_sum(a) + atom.implicit_h;
  if (atom.aromatic && !m.has_multiple_bond(a) && !is_lone_pair_donor(m, a)) ++used;
  if (used > allowed.back()) {
    throw SanitizationError("valence " + std::to_string(used) + " exceeds maximum " +
                            std::to_string(allowed.back()) + " for " +
                            std::string(atom.symbol()) + " atom " + std::to_string(a));
  }
}

// An aromatic atom that must take one double bond inside the aromatic
// system: not a lone-pair donor, no exocyclic multiple bond, not an empty-p
// cation or borane.
bool needs_pi_bond(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  if (!atom.aromatic || is_lone_pair_donor(m, a) || m.has_multiple_bond(a)) return false;
  if (atom.atomic_number == 6 && atom.formal_charge == 1) return false;
  if (atom.atomic_number == 5 && atom.formal_charge == 0) return false;
  return true;
}

// Aromatic systems must admit a Kekule structure: a perfect matching of the
// atoms that need a double bond over aromatic bonds.
void check_kekulizable(const Molecule& m) {
  std::vector<int> vertex(static_cast<std::size_t>(m.atom_count()), -1);
  int n = 0;
  for (int a = 0; a < m.atom_count(); ++a) {
    if (needs_pi_bond(m, a)) vertex[static_cast<std::size_t>(a)] = n++;
  }
  if (n == 0) return;
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
  Graph g(static_cast<std::size_t>(n));
  for (const auto& b : m.bonds()) {
    if (b.order != BondOrder::kAromatic) continue;
    const int u = vertex[static_cast<std::size_t>(b.begin)];
    const int v = vertex[static_cast<std::size_t>(b.end)];
    if (u >= 0 && v >= 0) boost::add_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v), g);
  }
  std::vector<boost::graph_traits<Graph>::vertex_descriptor> mate(static_cast<std::size_t>(n));
  boost::edmonds_maximum_cardinality_matching(g, &mate[0]);
  if (2 * static_cast<int>(boost::matching_size(g, &mate[0])) != n) {
    throw SanitizationError("cannot kekulize aromatic system");
  }
}

}  // namespace

void sanitize(Molecule& m) {
  m.perceive_rings();
  for (int b = 0; b < m.bond_count(); ++b) {
    Bond& bond = m.bond(b);
    if (bond.order != BondOrder::kAromatic) continue;
    if (!m.atom(bond.begin).aromatic || !m.atom(bond.end).aromatic) {
      throw SanitizationError("aromatic bond between non-aromatic atoms " +
                              std::to_string(bond.begin) + " and " +
                              std::to_string(bond.end));
    }
    if (!m.bond_in_ring(b)) bond.order = BondOrder::kSingle;
  }
  for (int a = 0; a < m.atom_count(); ++a) {
    if (m.atom(a).aromatic && !m.atom_in_ring(a)) {
      throw SanitizationError("aromatic atom " + std::to_string(a) + " is not in a ring");
    }
  }
  perceive_aromaticity(m);
  check_kekulizable(m);
  for (int a = 0; a < m.atom_count(); ++a) check_valence(m, a);
}

Molecule fold_explicit_hydrogens(const Molecule& m) {
  std::vector<bool> drop(static_cast<std::size_t>(m.atom_count()), false);
  Molecule work = m;
  for (int a = 0; a < m.atom_count(); ++a) {
    const Atom& atom = m.atom(a);
    if (!atom.is_hydrogen() || atom.isotope != 0 || atom.formal_charge != 0) continue;
    if (m.degree(a) != 1 || atom.implicit_h != 0) continue;
    const Neighbor nb = m.neighbors(a).front();
    if (m.atom(nb.atom).is_hydrogen() || m.bond(nb.bond).order != BondOrder::kSingle) continue;
    drop[static_cast<std::size_t>(a)] = true;
    Atom& heavy = work.atom(nb.atom);
    ++heavy.implicit_h;
    std::replace(heavy.chiral_neighbors.begin(), heavy.chiral_neighbors.end(), a,
                 kImplicitHydrogen);
  }
  if (std::none_of(drop.begin(), drop.end(), [](bool d) { return d; })) return m;
  std::vector<int> keep;
  for (int a = 0; a < m.atom_count(); ++a) {
    if (!drop[static_cast<std::size_t>(a)]) keep.push_back(a);
  }
  return induced_subgraph(work, keep);
}

}  // namespace molblocks
