#include "molblocks/descriptors.h"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "molblocks/element.h"

namespace molblocks {

namespace {

bool is_amide_cn(const Molecule& m, const Bond& b) {
  int c = b.begin;
  int n = b.end;
  if (m.atom(c).atomic_number != 6) std::swap(c, n);
  if (m.atom(c).atomic_number != 6 || m.atom(n).atomic_number != 7) return false;
  for (const auto& nb : m.neighbors(c)) {
    if (m.bond(nb.bond).order == BondOrder::kDouble && m.atom(nb.atom).atomic_number == 8) {
      return true;
    }
  }
  return false;
}

int heavy_degree(const Molecule& m, int a) {
  int d = 0;
  for (const auto& nb : m.neighbors(a)) {
    const Atom& x = m.atom(nb.atom);
    if (!x.is_hydrogen() && !x.is_wildcard()) ++d;
  }
  return d;
}

}  // namespace

Descriptors compute_descriptors(const Molecule& m) {
  Descriptors d;
  const double h_mass = element(1).mass;
  for (int a = 0; a < m.atom_count(); ++a) {
    const Atom& atom = m.atom(a);
    if (atom.is_wildcard()) continue;
    d.molecular_weight += atom.isotope ? atom.isotope : element(atom.atomic_number).mass;
    d.molecular_weight += atom.implicit_h * h_mass;
    if (atom.atomic_number == 7 || atom.atomic_number == 8) {
      ++d.hba;
      if (m.total_h(a) > 0) ++d.hbd;
    }
  }
  d.heavy_atom_count = m.heavy_atom_count();
  for (int b = 0; b < m.bond_count(); ++b) {
    const Bond& bond = m.bond(b);
    if (bond.order != BondOrder::kSingle || m.bond_in_ring(b)) continue;
    const Atom& x = m.atom(bond.begin);
    const Atom& y = m.atom(bond.end);
    if (x.is_hydrogen() || y.is_hydrogen() || x.is_wildcard() || y.is_wildcard()) continue;
    if (heavy_degree(m, bond.begin) < 2 || heavy_degree(m, bond.end) < 2) continue;
    if (is_amide_cn(m, bond)) continue;
    ++d.rotatable_bonds;
  }
  for (const auto& ring : m.small_rings()) {
    bool aromatic = true;
    for (std::size_t i = 0; i < ring.size() && aromatic; ++i) {
      const int b = *m.bond_between(ring[i], ring[(i + 1) % ring.size()]);
      aromatic = m.bond(b).order == BondOrder::kAromatic;
    }
    if (aromatic) ++d.aromatic_ring_count;
  }
  return d;
}

std::string molecular_formula(const Molecule& m) {
  std::map<std::string, int> counts;
  int carbon = 0;
  int hydrogen = 0;
  int charge = 0;
  for (int a = 0; a < m.atom_count(); ++a) {
    const Atom& atom = m.atom(a);
    if (atom.is_wildcard()) continue;
    hydrogen += atom.implicit_h;
    charge += atom.formal_charge;
    if (atom.atomic_number == 6) {
      ++carbon;
    } else if (atom.is_hydrogen()) {
      ++hydrogen;
    } else {
      ++counts[std::string(atom.symbol())];
    }
  }
  std::string out;
  auto put = [&](const std::string& sym, int n) {
    if (n == 0) return;
    out += sym;
    if (n > 1) out += std::to_string(n);
  };
  if (carbon > 0) {
    put("C", carbon);
    put("H", hydrogen);
  } else {
    counts["H"] += hydrogen;
  }
  for (const auto& [sym, n] : counts) put(sym, n);
  if (charge != 0) {
    out += charge > 0 ? '+' : '-';
    if (std::abs(charge) > 1) out += std::to_string(std::abs(charge));
  }
  return out;
}

}  // namespace molblocks
