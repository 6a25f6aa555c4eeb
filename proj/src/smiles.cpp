#include "molblocks/smiles.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "molblocks/canon.h"
#include "molblocks/element.h"
#include "molblocks/errors.h"
#include "molblocks/sanitize.h"

namespace molblocks {

namespace {

constexpr int kPendingSlot = -2;

struct BondSpec {
  std::optional<BondOrder> order;
  BondDirection direction = BondDirection::kNone;
  bool given() const { return order.has_value() || direction != BondDirection::kNone; }
};

struct OpenRing {
  int atom;
  BondSpec spec;
  std::size_t slot;  // index into the opener's chiral neighbour list
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Molecule run() {
    if (s_.empty()) throw SmilesSyntaxError("empty SMILES", 0);
    std::vector<int> branch_stack;
    int prev = -1;
    BondSpec pending;
    bool dot = false;

    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') {
        if (prev < 0) fail("branch without preceding atom");
        if (pending.given()) fail("bond symbol before branch");
        if (pos_ > 0 && s_[pos_ - 1] == '(') fail("branch cannot start with '('");
        branch_stack.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branch_stack.empty()) fail("unbalanced ')'");
        if (pending.given()) fail("dangling bond symbol");
        if (pos_ > 0 && s_[pos_ - 1] == '(') fail("empty branch");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending.given()) fail("bond symbol before '.'");
        if (prev < 0) fail("'.' without preceding atom");
        if (!branch_stack.empty()) fail("'.' inside branch");
        prev = -1;
        dot = true;
        ++pos_;
      } else if (is_bond_char(c)) {
        if (pending.given()) fail("consecutive bond symbols");
        if (prev < 0) fail("bond symbol without preceding atom");
        pending = read_bond();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (prev < 0) fail("ring closure without preceding atom");
        ring_closure(prev, read_ring_number(), pending);
        pending = {};
      } else {
        const std::size_t start = pos_;
        const int atom = read_atom();
        if (prev >= 0) {
          connect(prev, atom, pending, start);
        } else if (pending.given()) {
          fail("bond symbol without preceding atom");
        }
        pending = {};
        prev = atom;
        dot = false;
      }
    }
    if (pending.given()) fail("dangling bond symbol");
    if (!branch_stack.empty()) throw SmilesSyntaxError("unclosed branch '('", s_.size());
    if (dot) throw SmilesSyntaxError("trailing '.'", s_.size());
    if (!open_rings_.empty()) {
      throw SmilesSyntaxError("unclosed ring bond " + std::to_string(open_rings_.begin()->first),
                              s_.size());
    }
    finish();
    return std::move(mol_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SmilesSyntaxError(what, pos_); }

  static bool is_bond_char(char c) {
    return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\' || c == '$';
  }

  BondSpec read_bond() {
    BondSpec b;
    switch (s_[pos_]) {
      case '-': b.order = BondOrder::kSingle; break;
      case '=': b.order = BondOrder::kDouble; break;
      case '#': b.order = BondOrder::kTriple; break;
      case ':': b.order = BondOrder::kAromatic; break;
      case '/': b.direction = BondDirection::kUp; break;
      case '\\': b.direction = BondDirection::kDown; break;
      default: fail("quadruple bonds are not supported");
    }
    ++pos_;
    return b;
  }

  int read_ring_number() {
    if (s_[pos_] == '%') {
      ++pos_;
      if (pos_ + 1 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
        fail("'%' must be followed by two digits");
      }
      const int n = (s_[pos_] - '0') * 10 + (s_[pos_ + 1] - '0');
      pos_ += 2;
      return n;
    }
    return s_[pos_++] - '0';
  }

  BondOrder default_order(int a, int b) const {
    return mol_.atom(a).aromatic && mol_.atom(b).aromatic ? BondOrder::kAromatic
                                                          : BondOrder::kSingle;
  }

  void connect(int from, int to, const BondSpec& spec, std::size_t at) {
    if (mol_.bond_between(from, to)) throw SmilesSyntaxError("duplicate bond", at);
    const BondOrder order = spec.order.value_or(default_order(from, to));
    mol_.add_bond(from, to, order, spec.direction);
    order_[static_cast<std::size_t>(from)].push_back(to);
    order_[static_cast<std::size_t>(to)].insert(order_[static_cast<std::size_t>(to)].begin(),
                                                from);
  }

  void ring_closure(int atom, int number, const BondSpec& spec) {
    auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      auto& ord = order_[static_cast<std::size_t>(atom)];
      ord.push_back(kPendingSlot);
      open_rings_[number] = OpenRing{atom, spec, ord.size() - 1};
      return;
    }
    const OpenRing open = it->second;
    open_rings_.erase(it);
    if (open.atom == atom) fail("ring closure to the same atom");
    if (mol_.bond_between(open.atom, atom)) fail("ring closure duplicates an existing bond");
    if (open.spec.order && spec.order && *open.spec.order != *spec.order) {
      fail("conflicting ring-closure bond orders");
    }
    const BondOrder order =
        open.spec.order ? *open.spec.order : spec.order.value_or(default_order(open.atom, atom));
    BondDirection dir = open.spec.direction;
    if (dir == BondDirection::kNone) {
      dir = spec.direction == BondDirection::kUp     ? BondDirection::kDown
            : spec.direction == BondDirection::kDown ? BondDirection::kUp
                                                     : BondDirection::kNone;
    }
    mol_.add_bond(open.atom, atom, order, dir);
    order_[static_cast<std::size_t>(open.atom)][open.slot] = atom;
    order_[static_cast<std::size_t>(atom)].push_back(open.atom);
  }

  int read_atom() {
    Atom atom;
    bool bracket = false;
    if (s_[pos_] == '[') {
      bracket = true;
      atom = read_bracket_atom();
    } else if (s_[pos_] == '*') {
      atom.atomic_number = 0;
      ++pos_;
    } else {
      atom = read_organic_atom();
    }
    const int idx = mol_.add_atom(std::move(atom));
    bracketed_.push_back(bracket);
    order_.emplace_back();
    if (bracket_h_chiral_) {
      order_.back().push_back(kImplicitHydrogen);
      bracket_h_chiral_ = false;
    }
    return idx;
  }

  Atom read_organic_atom() {
    static constexpr std::string_view kTwo[] = {"Cl", "Br"};
    Atom atom;
    for (auto sym : kTwo) {
      if (s_.substr(pos_, 2) == sym) {
        atom.atomic_number = *atomic_number_of(sym);
        pos_ += 2;
        return atom;
      }
    }
    const char c = s_[pos_];
    switch (c) {
      case 'B': atom.atomic_number = 5; break;
      case 'C': atom.atomic_number = 6; break;
      case 'N': atom.atomic_number = 7; break;
      case 'O': atom.atomic_number = 8; break;
      case 'P': atom.atomic_number = 15; break;
      case 'S': atom.atomic_number = 16; break;
      case 'F': atom.atomic_number = 9; break;
      case 'I': atom.atomic_number = 53; break;
      case 'b': atom.atomic_number = 5; atom.aromatic = true; break;
      case 'c': atom.atomic_number = 6; atom.aromatic = true; break;
      case 'n': atom.atomic_number = 7; atom.aromatic = true; break;
      case 'o': atom.atomic_number = 8; atom.aromatic = true; break;
      case 'p': atom.atomic_number = 15; atom.aromatic = true; break;
      case 's': atom.atomic_number = 16; atom.aromatic = true; break;
      default: fail(std::string("unexpected character '") + c + "'");
    }
    ++pos_;
    return atom;
  }

  int read_int() {
    int v = 0;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      any = true;
      if (v > 100000) fail("number too large");
    }
    return any ? v : -1;
  }

  Atom read_bracket_atom() {
    ++pos_;  // '['
    Atom atom;
    atom.implicit_h = 0;
    const int iso = read_int();
    if (iso == 0) fail("isotope 0 is reserved");
    if (iso > 0) atom.isotope = iso;

    if (pos_ >= s_.size()) fail("unterminated bracket atom");
    if (s_[pos_] == '*') {
      atom.atomic_number = 0;
      ++pos_;
    } else if (std::islower(static_cast<unsigned char>(s_[pos_]))) {
      static constexpr std::pair<std::string_view, int> kAromatic[] = {
          {"se", 34}, {"as", 33}, {"te", 52}, {"b", 5}, {"c", 6},
          {"n", 7},   {"o", 8},   {"p", 15},  {"s", 16}};
      bool found = false;
      for (const auto& [sym, z] : kAromatic) {
        if (s_.substr(pos_, sym.size()) == sym) {
          atom.atomic_number = z;
          atom.aromatic = true;
          pos_ += sym.size();
          found = true;
          break;
        }
      }
      if (!found) fail("unknown aromatic element");
    } else if (std::isupper(static_cast<unsigned char>(s_[pos_]))) {
      std::optional<int> z;
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        z = atomic_number_of(s_.substr(pos_, 2));
        if (z) pos_ += 2;
      }
      if (!z) {
        z = atomic_number_of(s_.substr(pos_, 1));
        if (!z) fail("unknown element");
        ++pos_;
      }
      atom.atomic_number = *z;
    } else {
      fail("expected element symbol");
    }

    if (pos_ < s_.size() && s_[pos_] == '@') {
      ++pos_;
      atom.chirality = Chirality::kAnticlockwise;
      if (pos_ < s_.size() && s_[pos_] == '@') {
        ++pos_;
        atom.chirality = Chirality::kClockwise;
      }
      if (pos_ < s_.size() && std::isupper(static_cast<unsigned char>(s_[pos_])) &&
          s_[pos_] != 'H') {
        fail("only tetrahedral @/@@ chirality is supported");
      }
    }
    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      const int h = read_int();
      atom.implicit_h = h < 0 ? 1 : h;
    }
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_++];
      int mag = 1;
      const int n = read_int();
      if (n >= 0) {
        mag = n;
      } else {
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++mag;
          ++pos_;
        }
      }
      atom.formal_charge = sign == '+' ? mag : -mag;
    }
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      if (read_int() < 0) fail("atom class must be a number");
    }
    if (pos_ >= s_.size() || s_[pos_] != ']') fail("expected ']'");
    ++pos_;
    if (atom.chirality != Chirality::kNone && atom.implicit_h == 1) bracket_h_chiral_ = true;
    return atom;
  }

  void finish() {
    for (int a = 0; a < mol_.atom_count(); ++a) {
      Atom& atom = mol_.atom(a);
      if (!bracketed_[static_cast<std::size_t>(a)]) {
        atom.implicit_h = atom.is_wildcard() ? 0 : std::max(0, default_implicit_h(mol_, a));
      }
      if (atom.chirality != Chirality::kNone) {
        const auto& ord = order_[static_cast<std::size_t>(a)];
        const std::size_t expected =
            static_cast<std::size_t>(mol_.degree(a)) + (atom.implicit_h == 1 ? 1 : 0);
        if (ord.size() == expected && ord.size() >= 3) {
          atom.chiral_neighbors = ord;
        } else {
          atom.chirality = Chirality::kNone;
        }
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  Molecule mol_;
  std::vector<bool> bracketed_;
  std::vector<std::vector<int>> order_;
  std::map<int, OpenRing> open_rings_;
  bool bracket_h_chiral_ = false;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// ---------------------------------------------------------------- writer

class Writer {
 public:
  Writer(const Molecule& m, const SmilesWriteOptions& opts) : m_(m), opts_(opts) {
    const int n = m.atom_count();
    if (opts.canonical) {
      rank_ = canonical_ranks(m);
    } else {
      rank_.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) rank_[static_cast<std::size_t>(i)] = i;
    }
    visited_.assign(static_cast<std::size_t>(n), false);
    children_.resize(static_cast<std::size_t>(n));
    ring_bonds_.resize(static_cast<std::size_t>(n));
    parent_.assign(static_cast<std::size_t>(n), -1);
    written_.assign(static_cast<std::size_t>(n), false);
    is_ring_bond_.assign(static_cast<std::size_t>(m.bond_count()), false);
    position_.assign(static_cast<std::size_t>(n), -1);
    text_dir_.assign(static_cast<std::size_t>(m.bond_count()), BondDirection::kNone);
  }

  std::string run() {
    const int n = m_.atom_count();
    std::vector<int> by_rank(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) by_rank[static_cast<std::size_t>(rank_[static_cast<std::size_t>(a)])] = a;
    std::vector<int> roots;
    for (int root : by_rank) {
      if (visited_[static_cast<std::size_t>(root)]) continue;
      plan(root);
      roots.push_back(root);
    }
    if (opts_.isomeric) assign_double_bond_marks();
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (i > 0) out_ += '.';
      emit(roots[i]);
    }
    return std::move(out_);
  }

 private:
  std::vector<Neighbor> sorted_neighbors(int a) const {
    auto nbs = m_.neighbors(a);
    std::vector<Neighbor> v(nbs.begin(), nbs.end());
    std::sort(v.begin(), v.end(), [&](const Neighbor& x, const Neighbor& y) {
      return rank_[static_cast<std::size_t>(x.atom)] < rank_[static_cast<std::size_t>(y.atom)];
    });
    return v;
  }

  // DFS that fixes tree children and ring-closure bonds.
  void plan(int root) {
    struct Frame {
      int atom;
      std::vector<Neighbor> nbs;
      std::size_t next;
    };
    std::vector<Frame> stack;
    visited_[static_cast<std::size_t>(root)] = true;
    position_[static_cast<std::size_t>(root)] = next_position_++;
    stack.push_back({root, sorted_neighbors(root), 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next == f.nbs.size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = f.nbs[f.next++];
      const auto a = static_cast<std::size_t>(f.atom);
      if (nb.atom == parent_[a]) continue;
      if (visited_[static_cast<std::size_t>(nb.atom)]) {
        if (!is_ring_bond_[static_cast<std::size_t>(nb.bond)]) {
          is_ring_bond_[static_cast<std::size_t>(nb.bond)] = true;
          ring_bonds_[static_cast<std::size_t>(nb.atom)].push_back({f.atom, nb.bond});
          ring_bonds_[a].push_back({nb.atom, nb.bond});
        }
        continue;
      }
      visited_[static_cast<std::size_t>(nb.atom)] = true;
      position_[static_cast<std::size_t>(nb.atom)] = next_position_++;
      parent_[static_cast<std::size_t>(nb.atom)] = f.atom;
      children_[a].push_back(nb.atom);
      const int child = nb.atom;
      stack.push_back({child, sorted_neighbors(child), 0});
    }
  }

  static BondDirection flip(BondDirection d) {
    if (d == BondDirection::kUp) return BondDirection::kDown;
    if (d == BondDirection::kDown) return BondDirection::kUp;
    return d;
  }

  // Stored direction of `bond` read from atom `from`.
  BondDirection stored_dir(int bond, int from) const {
    const Bond& b = m_.bond(bond);
    return b.begin == from ? b.direction : flip(b.direction);
  }

  bool in_small_ring(int a, int b) const {
    for (const auto& ring : m_.small_rings()) {
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const int x = ring[i];
        const int y = ring[(i + 1) % ring.size()];
        if ((x == a && y == b) || (x == b && y == a)) return true;
      }
    }
    return false;
  }

  // Substituent of `a` (other than `skip`) whose bond carries a stored
  // direction, or -1.
  int marked_neighbor(int a, int skip) const {
    for (const auto& nb : m_.neighbors(a)) {
      if (nb.atom != skip && m_.bond(nb.bond).direction != BondDirection::kNone) return nb.atom;
    }
    return -1;
  }

  int first_written_neighbor(int a, int skip) const {
    int best = -1;
    for (const auto& nb : m_.neighbors(a)) {
      if (nb.atom == skip) continue;
      if (best < 0 || position_[static_cast<std::size_t>(nb.atom)] <
                          position_[static_cast<std::size_t>(best)]) {
        best = nb.atom;
      }
    }
    return best;
  }

  // Direction of bond x-y read from x, expressed through text_dir_.
  BondDirection text_dir_from(int x, int y) const {
    const int bond = *m_.bond_between(x, y);
    const auto d = text_dir_[static_cast<std::size_t>(bond)];
    return position_[static_cast<std::size_t>(x)] < position_[static_cast<std::size_t>(y)]
               ? d
               : flip(d);
  }

  void set_text_dir_from(int x, int y, BondDirection d) {
    const int bond = *m_.bond_between(x, y);
    text_dir_[static_cast<std::size_t>(bond)] =
        position_[static_cast<std::size_t>(x)] < position_[static_cast<std::size_t>(y)] ? d
                                                                                        : flip(d);
  }

  // Re-derives "/" and "\\" marks from the stored geometry so that output
  // does not depend on which bonds carried marks in the input.
  void assign_double_bond_marks() {
    struct Stereo {
      int a, b, ref_a, ref_b;
      bool trans;
    };
    std::vector<Stereo> stereo;
    for (int i = 0; i < m_.bond_count(); ++i) {
      const Bond& bond = m_.bond(i);
      if (bond.order != BondOrder::kDouble) continue;
      int a = bond.begin;
      int b = bond.end;
      if (position_[static_cast<std::size_t>(a)] > position_[static_cast<std::size_t>(b)]) {
        std::swap(a, b);
      }
      const int la = marked_neighbor(a, b);
      const int rb = marked_neighbor(b, a);
      if (la < 0 || rb < 0 || in_small_ring(a, b)) continue;
      const bool trans = stored_dir(*m_.bond_between(la, a), la) ==
                         stored_dir(*m_.bond_between(b, rb), b);
      stereo.push_back({a, b, la, rb, trans});
    }
    std::sort(stereo.begin(), stereo.end(), [&](const Stereo& x, const Stereo& y) {
      return position_[static_cast<std::size_t>(x.a)] < position_[static_cast<std::size_t>(y.a)];
    });
    for (const auto& st : stereo) {
      const int l = first_written_neighbor(st.a, st.b);
      const int r = first_written_neighbor(st.b, st.a);
      const bool trans = (st.trans != (l != st.ref_a)) != (r != st.ref_b);
      BondDirection dl = text_dir_from(l, st.a);
      if (dl == BondDirection::kNone) {
        BondDirection dr = text_dir_from(st.b, r);
        if (dr != BondDirection::kNone) {
          set_text_dir_from(l, st.a, trans ? dr : flip(dr));
          continue;
        }
        dl = BondDirection::kUp;
        set_text_dir_from(l, st.a, dl);
      }
      if (text_dir_from(st.b, r) == BondDirection::kNone) {
        set_text_dir_from(st.b, r, trans ? dl : flip(dl));
      }
    }
  }

  int next_digit() {
    for (int d = 1;; ++d) {
      if (!digits_in_use_.count(d)) {
        digits_in_use_.insert(d);
        return d;
      }
    }
  }

  void write_digit(int d) {
    if (d < 10) {
      out_ += static_cast<char>('0' + d);
    } else {
      out_ += '%';
      out_ += std::to_string(d);
    }
  }

  // Bond symbol for the bond written from `from` toward `to`.
  std::string bond_symbol(int bond, int from) const {
    const Bond& b = m_.bond(bond);
    switch (b.order) {
      case BondOrder::kDouble: return "=";
      case BondOrder::kTriple: return "#";
      case BondOrder::kAromatic: return "";
      case BondOrder::kSingle: break;
    }
    const auto mark = text_dir_[static_cast<std::size_t>(bond)];
    if (mark != BondDirection::kNone) return mark == BondDirection::kUp ? "/" : "\\";
    const int to = b.other(from);
    if (m_.atom(from).aromatic && m_.atom(to).aromatic) return "-";
    return "";
  }

  // Neighbour order as it will appear in the output; -1 marks the implicit H.
  std::vector<int> output_order(int a, const std::vector<int>& ring_partners) const {
    std::vector<int> ord;
    const int p = parent_[static_cast<std::size_t>(a)];
    if (p >= 0) ord.push_back(p);
    if (m_.atom(a).implicit_h == 1) ord.push_back(kImplicitHydrogen);
    for (int r : ring_partners) ord.push_back(r);
    for (int c : children_[static_cast<std::size_t>(a)]) ord.push_back(c);
    return ord;
  }

  Chirality output_chirality(int a, const std::vector<int>& ring_partners) const {
    const Atom& atom = m_.atom(a);
    if (!opts_.isomeric || atom.chirality == Chirality::kNone) return Chirality::kNone;
    const auto ord = output_order(a, ring_partners);
    const auto& ref = atom.chiral_neighbors;
    if (ord.size() != ref.size()) return Chirality::kNone;
    std::vector<int> perm;
    for (int x : ord) {
      auto it = std::find(ref.begin(), ref.end(), x);
      if (it == ref.end()) return Chirality::kNone;
      perm.push_back(static_cast<int>(it - ref.begin()));
    }
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      for (std::size_t j = i + 1; j < perm.size(); ++j) {
        if (perm[i] > perm[j]) ++inversions;
      }
    }
    if (inversions % 2 == 0) return atom.chirality;
    return atom.chirality == Chirality::kClockwise ? Chirality::kAnticlockwise
                                                   : Chirality::kClockwise;
  }

  void write_atom(int a, Chirality chir) {
    const Atom& atom = m_.atom(a);
    std::string sym(atom.symbol());
    if (atom.is_wildcard()) sym = "*";
    if (atom.aromatic) {
      for (auto& ch : sym) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    bool bracket = atom.formal_charge != 0 || atom.isotope != 0 || chir != Chirality::kNone;
    if (atom.is_wildcard()) {
      bracket = bracket || atom.implicit_h != 0;
    } else if (!is_organic_subset(atom.atomic_number)) {
      bracket = true;
    } else if (default_implicit_h(m_, a) != atom.implicit_h) {
      bracket = true;
    }
    if (!bracket) {
      out_ += sym;
      return;
    }
    out_ += '[';
    if (atom.isotope) out_ += std::to_string(atom.isotope);
    out_ += sym;
    if (chir == Chirality::kAnticlockwise) out_ += "@";
    if (chir == Chirality::kClockwise) out_ += "@@";
    if (atom.implicit_h > 0) {
      out_ += 'H';
      if (atom.implicit_h > 1) out_ += std::to_string(atom.implicit_h);
    }
    if (atom.formal_charge != 0) {
      out_ += atom.formal_charge > 0 ? '+' : '-';
      const int mag = std::abs(atom.formal_charge);
      if (mag > 1) out_ += std::to_string(mag);
    }
    out_ += ']';
  }

  void emit(int root) {
    struct Item {
      int atom;  // -1 closes a branch
      int from;
      bool open_paren;
    };
    std::vector<Item> stack{{root, -1, false}};
    while (!stack.empty()) {
      const Item it = stack.back();
      stack.pop_back();
      if (it.atom < 0) {
        out_ += ')';
        continue;
      }
      if (it.open_paren) out_ += '(';
      const int a = it.atom;
      if (it.from >= 0) out_ += bond_symbol(*m_.bond_between(it.from, a), it.from);

      // Ring bonds at this atom: closures first, then openings.
      auto rings = ring_bonds_[static_cast<std::size_t>(a)];
      std::sort(rings.begin(), rings.end(), [&](const Neighbor& x, const Neighbor& y) {
        return rank_[static_cast<std::size_t>(x.atom)] < rank_[static_cast<std::size_t>(y.atom)];
      });
      std::vector<Neighbor> closes;
      std::vector<Neighbor> opens;
      for (const auto& r : rings) {
        (written_[static_cast<std::size_t>(r.atom)] ? closes : opens).push_back(r);
      }
      std::vector<int> partners;
      for (const auto& r : closes) partners.push_back(r.atom);
      for (const auto& r : opens) partners.push_back(r.atom);

      write_atom(a, output_chirality(a, partners));
      written_[static_cast<std::size_t>(a)] = true;

      std::vector<int> freed;
      for (const auto& r : closes) {
        const int d = ring_digit_.at(r.bond);
        write_digit(d);
        freed.push_back(d);
      }
      for (const auto& r : opens) {
        const int d = next_digit();
        ring_digit_[r.bond] = d;
        out_ += bond_symbol(r.bond, a);
        write_digit(d);
      }
      for (int d : freed) digits_in_use_.erase(d);

      const auto& kids = children_[static_cast<std::size_t>(a)];
      // Push in reverse so the first child is emitted first; all but the
      // last child are branches.
      for (std::size_t i = kids.size(); i-- > 0;) {
        const bool branch = i + 1 < kids.size();
        if (branch) stack.push_back({-1, -1, false});
        stack.push_back({kids[i], a, branch});
      }
    }
  }

  const Molecule& m_;
  SmilesWriteOptions opts_;
  std::vector<int> rank_;
  std::vector<bool> visited_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<Neighbor>> ring_bonds_;
  std::vector<int> parent_;
  std::vector<bool> written_;
  std::vector<bool> is_ring_bond_;
  std::vector<int> position_;
  int next_position_ = 0;
  std::vector<BondDirection> text_dir_;  // marks read from earlier to later atom
  std::map<int, int> ring_digit_;
  std::set<int> digits_in_use_;
  std::string out_;
};

}  // namespace

Molecule parse_smiles(std::string_view text, const SmilesParseOptions& opts) {
  const std::string_view t = trim(text);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::isspace(static_cast<unsigned char>(t[i]))) {
      throw SmilesSyntaxError("whitespace inside SMILES", i);
    }
  }
  Molecule m = Parser(t).run();
  if (opts.fold_hydrogens) m = fold_explicit_hydrogens(m);
  if (opts.sanitize) {
    sanitize(m);
  } else {
    m.perceive_rings();
  }
  return m;
}

std::string write_smiles(const Molecule& m, const SmilesWriteOptions& opts) {
  return Writer(m, opts).run();
}

std::string canonical_smiles(std::string_view text) { return write_smiles(parse_smiles(text)); }

bool split_smiles_record(std::string_view line, SmilesRecord& out) {
  const std::string_view t = trim(line);
  if (t.empty() || t.front() == '#') return false;
  std::size_t end = 0;
  while (end < t.size() && !std::isspace(static_cast<unsigned char>(t[end]))) ++end;
  out.smiles = std::string(t.substr(0, end));
  out.name = std::string(trim(t.substr(end)));
  return true;
}

}  // namespace molblocks
