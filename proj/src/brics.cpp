#include "molblocks/brics.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "embedded_data.h"
#include "molblocks/errors.h"
#include "molblocks/smiles.h"

namespace molblocks {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(s.substr(start, p - start));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}

int parse_label(const std::string& text, int line) {
  std::string t = text;
  if (!t.empty() && t[0] == 'L') t.erase(0, 1);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used == t.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("rule table line " + std::to_string(line) + ": bad label '" + text + "'");
}

BondDirection flip(BondDirection d) {
  if (d == BondDirection::kUp) return BondDirection::kDown;
  if (d == BondDirection::kDown) return BondDirection::kUp;
  return d;
}

BondDirection dir_from(const Bond& b, int from) {
  return b.begin == from ? b.direction : flip(b.direction);
}

}  // namespace

BricsRules BricsRules::parse(std::string_view text) {
  BricsRules rules;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::vector<std::pair<int, std::vector<int>>> partners;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (rules.version_.empty()) {
        const std::string tag = "# brics-rules ";
        if (line.rfind(tag, 0) != 0) {
          throw FormatError("rule table: missing '# brics-rules v<N>' header");
        }
        rules.version_ = line.substr(2);
      }
      continue;
    }
    if (rules.version_.empty()) throw FormatError("rule table: missing '# brics-rules v<N>' header");
    const auto cols = split(line, '\t');
    if (cols.size() < 2 || cols.size() > 3) {
      throw FormatError("rule table line " + std::to_string(lineno) + ": expected 2-3 columns");
    }
    const int label = parse_label(cols[0], lineno);
    for (const auto& e : rules.envs_) {
      if (e.label == label) {
        throw FormatError("rule table line " + std::to_string(lineno) + ": duplicate label");
      }
    }
    rules.envs_.push_back({label, SmartsPattern::parse(cols[1])});
    std::vector<int> ps;
    if (cols.size() == 3 && !cols[2].empty()) {
      for (const auto& p : split(cols[2], ',')) ps.push_back(parse_label(p, lineno));
    }
    partners.emplace_back(label, std::move(ps));
  }
  if (rules.version_.empty()) throw FormatError("rule table: missing header");
  if (rules.envs_.empty()) throw FormatError("rule table: no environments");
  for (const auto& [label, ps] : partners) {
    for (int p : ps) {
      const bool known = std::any_of(rules.envs_.begin(), rules.envs_.end(),
                                     [&](const Environment& e) { return e.label == p; });
      if (!known) throw FormatError("rule table: unknown partner label L" + std::to_string(p));
      rules.pairs_.emplace_back(label, p);
    }
  }
  return rules;
}

BricsRules BricsRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rule table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const BricsRules& BricsRules::standard() {
  static const BricsRules rules = parse(embedded::brics_rules());
  return rules;
}

std::vector<BricsBond> find_brics_bonds(const Molecule& m, const BricsRules& rules) {
  const auto envs = rules.environments();
  int max_label = 0;
  for (const auto& e : envs) max_label = std::max(max_label, e.label);
  std::vector<int> env_index(static_cast<std::size_t>(max_label) + 1, -1);
  for (std::size_t i = 0; i < envs.size(); ++i) {
    env_index[static_cast<std::size_t>(envs[i].label)] = static_cast<int>(i);
  }
  // memo[atom * envs + env]: -1 unknown, 0/1 result
  std::vector<signed char> memo(static_cast<std::size_t>(m.atom_count()) * envs.size(), -1);
  auto matches = [&](int atom, int label) {
    const auto e = static_cast<std::size_t>(env_index[static_cast<std::size_t>(label)]);
    auto& slot = memo[static_cast<std::size_t>(atom) * envs.size() + e];
    if (slot < 0) slot = envs[e].pattern.matches_at(m, atom) ? 1 : 0;
    return slot == 1;
  };

  std::vector<BricsBond> out;
  for (int b = 0; b < m.bond_count(); ++b) {
    const Bond& bond = m.bond(b);
    if (bond.order != BondOrder::kSingle || m.bond_in_ring(b)) continue;
    for (const auto& [l1, l2] : rules.pairs()) {
      if (matches(bond.begin, l1) && matches(bond.end, l2)) {
        out.push_back({b, l1, l2});
        break;
      }
      if (matches(bond.begin, l2) && matches(bond.end, l1)) {
        out.push_back({b, l2, l1});
        break;
      }
    }
  }
  return out;
}

std::string block_smiles(const Molecule& fragment) { return write_smiles(fragment); }

std::string unlabeled_block_smiles(const Molecule& fragment) {
  bool labeled = false;
  for (const auto& a : fragment.atoms()) labeled = labeled || (a.is_wildcard() && a.isotope != 0);
  if (!labeled) return write_smiles(fragment);
  Molecule copy = fragment;
  for (int i = 0; i < copy.atom_count(); ++i) {
    if (copy.atom(i).is_wildcard()) copy.atom(i).isotope = 0;
  }
  return write_smiles(copy);
}

Block make_block(Molecule fragment) {
  Block b;
  b.attachment_count = fragment.wildcard_count();
  b.canonical_key = block_smiles(fragment);
  b.vocab_key = unlabeled_block_smiles(fragment);
  b.graph = std::move(fragment);
  return b;
}

namespace {

// Copy of `m` with each listed bond replaced by two wildcard atoms appended
// after the original atoms; cut_of maps every atom to its cut-bond index or -1.
Molecule cut_graph(const Molecule& m, std::span<const int> bonds, std::span<const int> labels,
                   std::vector<int>& cut_of) {
  std::vector<int> slot(static_cast<std::size_t>(m.bond_count()), -1);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const int b = bonds[i];
    if (b < 0 || b >= m.bond_count()) throw InvalidArgument("bond index out of range");
    if (slot[static_cast<std::size_t>(b)] >= 0) throw InvalidArgument("bond listed twice");
    slot[static_cast<std::size_t>(b)] = static_cast<int>(i);
  }
  Molecule work;
  for (const auto& a : m.atoms()) work.add_atom(a);
  for (int b = 0; b < m.bond_count(); ++b) {
    if (slot[static_cast<std::size_t>(b)] >= 0) continue;
    const Bond& bond = m.bond(b);
    work.add_bond(bond.begin, bond.end, bond.order, bond.direction);
  }
  cut_of.assign(static_cast<std::size_t>(m.atom_count()), -1);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const Bond& bond = m.bond(bonds[i]);
    for (int side : {bond.begin, bond.end}) {
      const int partner = bond.other(side);
      Atom w;
      w.atomic_number = 0;
      w.implicit_h = 0;
      w.isotope = labels.empty() ? 0 : labels[i];
      const int wi = work.add_atom(w);
      cut_of.push_back(bonds[i]);
      work.add_bond(side, wi, bond.order, dir_from(bond, side));
      auto& refs = work.atom(side).chiral_neighbors;
      std::replace(refs.begin(), refs.end(), partner, wi);
    }
  }
  const bool acyclic = std::none_of(bonds.begin(), bonds.end(), [&](int b) { return m.bond_in_ring(b); });
  if (acyclic) {
    std::vector<int> same(static_cast<std::size_t>(m.atom_count()));
    std::iota(same.begin(), same.end(), 0);
    work.inherit_rings(m, same);
  } else {
    work.perceive_rings();
  }
  return work;
}

}  // namespace

std::vector<Molecule> fragment_on_bonds(const Molecule& m, std::span<const int> bonds,
                                        std::vector<std::vector<int>>* wildcard_cut) {
  std::vector<int> cut_of;
  const Molecule work = cut_graph(m, bonds, {}, cut_of);
  std::vector<Molecule> out;
  if (wildcard_cut) wildcard_cut->clear();
  for (const auto& comp : work.components()) {
    out.push_back(induced_subgraph(work, comp, nullptr, true));
    if (wildcard_cut) {
      std::vector<int> wc;
      for (int a : comp) wc.push_back(cut_of[static_cast<std::size_t>(a)]);
      wildcard_cut->push_back(std::move(wc));
    }
  }
  return out;
}

Molecule extract_fragment(const Molecule& m, std::span<const int> cut_bonds, int seed,
                          std::span<const int> labels) {
  if (seed < 0 || seed >= m.atom_count()) throw InvalidArgument("seed atom out of range");
  if (!labels.empty() && labels.size() != cut_bonds.size()) {
    throw InvalidArgument("labels must align with cut bonds");
  }
  std::vector<int> cut_of;
  const Molecule work = cut_graph(m, cut_bonds, labels, cut_of);
  std::vector<bool> seen(static_cast<std::size_t>(work.atom_count()), false);
  std::vector<int> stack{seed};
  std::vector<int> keep;
  seen[static_cast<std::size_t>(seed)] = true;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    keep.push_back(a);
    for (const auto& nb : work.neighbors(a)) {
      if (!seen[static_cast<std::size_t>(nb.atom)]) {
        seen[static_cast<std::size_t>(nb.atom)] = true;
        stack.push_back(nb.atom);
      }
    }
  }
  std::sort(keep.begin(), keep.end());
  return induced_subgraph(work, keep, nullptr, true);
}

namespace {

DecompositionLayout layout_from_cut(const Molecule& m, std::vector<int> bonds) {
  std::sort(bonds.begin(), bonds.end());
  std::vector<std::vector<int>> wc;
  auto frags = fragment_on_bonds(m, bonds, &wc);
  DecompositionLayout layout;
  layout.cut_bonds = bonds;

  const std::size_t n = frags.size();
  // cut bond -> the two fragments it joined
  std::map<int, std::vector<int>> ends;
  std::vector<int> degree(n, 0);
  for (std::size_t f = 0; f < n; ++f) {
    for (int c : wc[f]) {
      if (c < 0) continue;
      ends[c].push_back(static_cast<int>(f));
      ++degree[f];
    }
  }
  layout.is_path = n == bonds.size() + 1 &&
                   std::all_of(degree.begin(), degree.end(), [](int d) { return d <= 2; });

  if (!layout.is_path) {
    for (auto& f : frags) layout.fragments.push_back(make_block(std::move(f)));
    std::sort(layout.fragments.begin(), layout.fragments.end(),
              [](const Block& x, const Block& y) { return x.canonical_key < y.canonical_key; });
    return layout;
  }

  // Walk the path from an end fragment.
  std::vector<int> order;
  std::vector<int> via;  // via[i]: cut joining order[i] and order[i+1]
  int start = 0;
  while (degree[static_cast<std::size_t>(start)] > 1) ++start;
  int prev_cut = -1;
  int cur = start;
  while (true) {
    order.push_back(cur);
    int next_cut = -1;
    for (int c : wc[static_cast<std::size_t>(cur)]) {
      if (c >= 0 && c != prev_cut) next_cut = c;
    }
    if (next_cut < 0) break;
    const auto& e = ends[next_cut];
    cur = e[0] == cur ? e[1] : e[0];
    via.push_back(next_cut);
    prev_cut = next_cut;
  }

  auto labeled = [&](bool reversed) {
    std::vector<Molecule> seq;
    const std::size_t k = order.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t pos = reversed ? k - 1 - i : i;
      const auto f = static_cast<std::size_t>(order[pos]);
      // cut toward the next block in this orientation
      const int fwd = reversed ? (pos > 0 ? via[pos - 1] : -1) : (pos + 1 < k ? via[pos] : -1);
      Molecule g = frags[f];
      for (int a = 0; a < g.atom_count(); ++a) {
        const int c = wc[f][static_cast<std::size_t>(a)];
        if (c < 0) continue;
        g.atom(a).isotope = c == fwd ? kForwardLabel : kBackwardLabel;
      }
      seq.push_back(std::move(g));
    }
    return seq;
  };
  auto forward = labeled(false);
  std::vector<Block> fblocks;
  for (auto& g : forward) fblocks.push_back(make_block(std::move(g)));
  if (order.size() > 1) {
    auto backward = labeled(true);
    std::vector<Block> bblocks;
    for (auto& g : backward) bblocks.push_back(make_block(std::move(g)));
    const bool take_backward = std::lexicographical_compare(
        fblocks.begin(), fblocks.end(), bblocks.begin(), bblocks.end(),
        [](const Block& x, const Block& y) { return x.canonical_key < y.canonical_key; });
    if (take_backward) fblocks = std::move(bblocks);
  }
  layout.fragments = std::move(fblocks);
  return layout;
}

}  // namespace

DecompositionLayout break_molecule(const Molecule& m, std::span<const int> bonds,
                                   const BricsRules& rules) {
  const auto brics = find_brics_bonds(m, rules);
  for (int b : bonds) {
    const bool ok = std::any_of(brics.begin(), brics.end(),
                                [&](const BricsBond& x) { return x.bond_index == b; });
    if (!ok) throw InvalidArgument("bond " + std::to_string(b) + " is not a BRICS bond");
  }
  return layout_from_cut(m, std::vector<int>(bonds.begin(), bonds.end()));
}

DecompositionLayout break_molecule(const Molecule& m, std::span<const BricsBond> cuts) {
  std::vector<int> bonds;
  for (const auto& c : cuts) bonds.push_back(c.bond_index);
  return break_molecule(m, bonds);
}

bool has_branch(const DecompositionLayout& layout) { return !layout.is_path; }

Molecule join_fragments(const Molecule& a, int label_a, const Molecule& b, int label_b) {
  auto find_wildcard = [](const Molecule& g, int label) {
    for (int i = 0; i < g.atom_count(); ++i) {
      const Atom& x = g.atom(i);
      if (x.is_wildcard() && x.isotope == label) {
        if (g.degree(i) != 1) throw InvalidArgument("wildcard must have exactly one neighbour");
        return i;
      }
    }
    throw InvalidArgument("fragment has no [" + std::to_string(label) + "*] attachment point");
  };
  const int wa = find_wildcard(a, label_a);
  const int wb = find_wildcard(b, label_b);
  const Neighbor na = a.neighbors(wa).front();
  const Neighbor nb = b.neighbors(wb).front();
  const int offset = a.atom_count();

  Molecule work;
  for (const auto& x : a.atoms()) work.add_atom(x);
  for (const auto& x : b.atoms()) {
    Atom y = x;
    for (int& r : y.chiral_neighbors) {
      if (r != kImplicitHydrogen) r += offset;
    }
    work.add_atom(std::move(y));
  }
  for (const auto& bond : a.bonds()) {
    if (bond.begin == wa || bond.end == wa) continue;
    work.add_bond(bond.begin, bond.end, bond.order, bond.direction);
  }
  for (const auto& bond : b.bonds()) {
    if (bond.begin == wb || bond.end == wb) continue;
    work.add_bond(bond.begin + offset, bond.end + offset, bond.order, bond.direction);
  }
  const Bond& ba = a.bond(na.bond);
  const BondOrder order = ba.order;
  work.add_bond(na.atom, nb.atom + offset, order, dir_from(ba, na.atom));
  {
    auto& refs = work.atom(na.atom).chiral_neighbors;
    std::replace(refs.begin(), refs.end(), wa, nb.atom + offset);
    auto& refs_b = work.atom(nb.atom + offset).chiral_neighbors;
    std::replace(refs_b.begin(), refs_b.end(), wb + offset, na.atom);
  }
  std::vector<int> keep;
  for (int i = 0; i < work.atom_count(); ++i) {
    if (i != wa && i != wb + offset) keep.push_back(i);
  }
  return induced_subgraph(work, keep);
}

}  // namespace molblocks
