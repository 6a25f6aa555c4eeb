#include "molblocks/smarts.h"

#include <algorithm>
#include <cctype>
#include <optional>

#include "molblocks/element.h"
#include "molblocks/errors.h"

namespace molblocks {

struct SmartsPattern::Expr {
  enum class Kind { kAnd, kOr, kNot, kPrimitive };
  enum class Prim {
    kElement,      // value = atomic number, flag = -1 any / 0 aliphatic / 1 aromatic
    kAnyAtom,
    kAromatic,
    kAliphatic,
    kDegree,
    kTotalH,
    kConnectivity,
    kRing,         // value -1: in any ring, 0: not in a ring
    kCharge,
    kRecursive,
    kBondSingle,
    kBondDouble,
    kBondTriple,
    kBondAromatic,
    kBondAny,
    kBondRing,
  };
  Kind kind = Kind::kPrimitive;
  std::vector<Expr> children;
  Prim prim = Prim::kAnyAtom;
  int value = 0;
  int flag = -1;
  std::shared_ptr<SmartsPattern> recursive;
};

struct SmartsPattern::PatternAtom {
  Expr atom;
  int parent = -1;
  std::optional<Expr> bond;  // empty: single or aromatic
};

namespace {

using Expr = SmartsPattern::Expr;
using Prim = Expr::Prim;

Expr primitive(Prim p, int value = 0, int flag = -1) {
  Expr e;
  e.prim = p;
  e.value = value;
  e.flag = flag;
  return e;
}

Expr combine(Expr::Kind kind, std::vector<Expr> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Expr e;
  e.kind = kind;
  e.children = std::move(parts);
  return e;
}

class SmartsParser {
 public:
  explicit SmartsParser(std::string_view text) : s_(text) {}

  std::vector<SmartsPattern::PatternAtom> run() {
    std::vector<SmartsPattern::PatternAtom> atoms;
    std::vector<int> branches;
    int prev = -1;
    std::optional<Expr> bond;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') {
        if (prev < 0) fail("branch without atom");
        branches.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) fail("unbalanced ')'");
        prev = branches.back();
        branches.pop_back();
        ++pos_;
      } else if (is_bond_start(c)) {
        if (prev < 0) fail("bond without preceding atom");
        bond = parse_bond_expr();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        fail("ring closures are not supported");
      } else {
        SmartsPattern::PatternAtom pa;
        pa.atom = parse_atom();
        pa.parent = prev;
        pa.bond = std::move(bond);
        bond.reset();
        if (prev < 0 && !atoms.empty()) fail("disconnected pattern");
        atoms.push_back(std::move(pa));
        prev = static_cast<int>(atoms.size()) - 1;
      }
    }
    if (!branches.empty()) fail("unclosed branch");
    if (bond) fail("dangling bond");
    if (atoms.empty()) fail("empty pattern");
    return atoms;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("SMARTS '" + std::string(s_) + "': " + what + " at position " +
                      std::to_string(pos_));
  }

  static bool is_bond_start(char c) {
    return c == '-' || c == '=' || c == '#' || c == ':' || c == '~' || c == '@' || c == '!';
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }

  int read_number(int fallback) {
    if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) return fallback;
    int v = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (s_[pos_++] - '0');
    return v;
  }

  // ---- bonds
  Expr parse_bond_expr() { return bond_low_and(); }

  Expr bond_low_and() {
    std::vector<Expr> parts{bond_or()};
    while (peek() == ';') {
      ++pos_;
      parts.push_back(bond_or());
    }
    return combine(Expr::Kind::kAnd, std::move(parts));
  }

  Expr bond_or() {
    std::vector<Expr> parts{bond_high_and()};
    while (peek() == ',') {
      ++pos_;
      parts.push_back(bond_high_and());
    }
    return combine(Expr::Kind::kOr, std::move(parts));
  }

  Expr bond_high_and() {
    std::vector<Expr> parts{bond_unary()};
    while (true) {
      if (peek() == '&') {
        ++pos_;
        parts.push_back(bond_unary());
      } else if (is_bond_start(peek())) {
        parts.push_back(bond_unary());
      } else {
        break;
      }
    }
    return combine(Expr::Kind::kAnd, std::move(parts));
  }

  Expr bond_unary() {
    if (peek() == '!') {
      ++pos_;
      Expr e;
      e.kind = Expr::Kind::kNot;
      e.children.push_back(bond_unary());
      return e;
    }
    switch (peek()) {
      case '-': ++pos_; return primitive(Prim::kBondSingle);
      case '=': ++pos_; return primitive(Prim::kBondDouble);
      case '#': ++pos_; return primitive(Prim::kBondTriple);
      case ':': ++pos_; return primitive(Prim::kBondAromatic);
      case '~': ++pos_; return primitive(Prim::kBondAny);
      case '@': ++pos_; return primitive(Prim::kBondRing);
      default: fail("expected bond primitive");
    }
  }

  // ---- atoms
  Expr parse_atom() {
    const char c = peek();
    if (c == '[') {
      ++pos_;
      Expr e = atom_low_and();
      if (peek() != ']') fail("expected ']'");
      ++pos_;
      return e;
    }
    if (c == '*') {
      ++pos_;
      return primitive(Prim::kAnyAtom);
    }
    if (c == 'a') {
      ++pos_;
      return primitive(Prim::kAromatic);
    }
    if (c == 'A') {
      ++pos_;
      return primitive(Prim::kAliphatic);
    }
    for (std::string_view two : {"Cl", "Br"}) {
      if (s_.substr(pos_, 2) == two) {
        pos_ += 2;
        return primitive(Prim::kElement, *atomic_number_of(two), 0);
      }
    }
    static constexpr std::pair<char, int> kBare[] = {
        {'B', 5}, {'C', 6}, {'N', 7}, {'O', 8}, {'P', 15}, {'S', 16}, {'F', 9}, {'I', 53},
    };
    for (const auto& [ch, z] : kBare) {
      if (c == ch) {
        ++pos_;
        return primitive(Prim::kElement, z, 0);
      }
    }
    static constexpr std::pair<char, int> kAromaticBare[] = {
        {'b', 5}, {'c', 6}, {'n', 7}, {'o', 8}, {'p', 15}, {'s', 16},
    };
    for (const auto& [ch, z] : kAromaticBare) {
      if (c == ch) {
        ++pos_;
        return primitive(Prim::kElement, z, 1);
      }
    }
    fail("expected atom");
  }

  Expr atom_low_and() {
    std::vector<Expr> parts{atom_or()};
    while (peek() == ';') {
      ++pos_;
      parts.push_back(atom_or());
    }
    return combine(Expr::Kind::kAnd, std::move(parts));
  }

  Expr atom_or() {
    std::vector<Expr> parts{atom_high_and()};
    while (peek() == ',') {
      ++pos_;
      parts.push_back(atom_high_and());
    }
    return combine(Expr::Kind::kOr, std::move(parts));
  }

  Expr atom_high_and() {
    std::vector<Expr> parts{atom_unary()};
    while (!at_end() && peek() != ']' && peek() != ',' && peek() != ';') {
      if (peek() == '&') ++pos_;
      parts.push_back(atom_unary());
    }
    return combine(Expr::Kind::kAnd, std::move(parts));
  }

  Expr atom_unary() {
    if (peek() == '!') {
      ++pos_;
      Expr e;
      e.kind = Expr::Kind::kNot;
      e.children.push_back(atom_unary());
      return e;
    }
    return atom_primitive();
  }

  Expr atom_primitive() {
    const char c = peek();
    if (c == '$') {
      ++pos_;
      if (peek() != '(') fail("expected '(' after '$'");
      const std::size_t start = ++pos_;
      int depth = 1;
      while (!at_end() && depth > 0) {
        if (peek() == '(') ++depth;
        if (peek() == ')') --depth;
        ++pos_;
      }
      if (depth != 0) fail("unterminated recursive SMARTS");
      Expr e = primitive(Prim::kRecursive);
      e.recursive = std::make_shared<SmartsPattern>(
          SmartsPattern::parse(s_.substr(start, pos_ - 1 - start)));
      return e;
    }
    if (c == '#') {
      ++pos_;
      const int z = read_number(-1);
      if (z < 0) fail("expected atomic number after '#'");
      return primitive(Prim::kElement, z, -1);
    }
    if (c == '*') {
      ++pos_;
      return primitive(Prim::kAnyAtom);
    }
    if (c == '+' || c == '-') {
      ++pos_;
      int mag = read_number(-1);
      if (mag < 0) {
        mag = 1;
        while (peek() == c) {
          ++mag;
          ++pos_;
        }
      }
      return primitive(Prim::kCharge, c == '+' ? mag : -mag);
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        if (auto z = atomic_number_of(s_.substr(pos_, 2))) {
          pos_ += 2;
          return primitive(Prim::kElement, *z, 0);
        }
      }
      ++pos_;
      switch (c) {
        case 'D': return primitive(Prim::kDegree, read_number(1));
        case 'H': return primitive(Prim::kTotalH, read_number(1));
        case 'X': return primitive(Prim::kConnectivity, read_number(1));
        case 'R': return primitive(Prim::kRing, read_number(-1));
        case 'A': return primitive(Prim::kAliphatic);
        default: break;
      }
      if (auto z = atomic_number_of(std::string_view(&c, 1))) {
        return primitive(Prim::kElement, *z, 0);
      }
      --pos_;
      fail("unknown atom primitive");
    }
    if (c == 'a') {
      ++pos_;
      return primitive(Prim::kAromatic);
    }
    static constexpr std::pair<std::string_view, int> kAromatic[] = {
        {"se", 34}, {"as", 33}, {"b", 5}, {"c", 6}, {"n", 7}, {"o", 8}, {"p", 15}, {"s", 16},
    };
    for (const auto& [sym, z] : kAromatic) {
      if (s_.substr(pos_, sym.size()) == sym) {
        pos_ += sym.size();
        return primitive(Prim::kElement, z, 1);
      }
    }
    fail("unknown atom primitive");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool eval_atom(const Expr& e, const Molecule& m, int a) {
  switch (e.kind) {
    case Expr::Kind::kAnd:
      for (const auto& c : e.children) {
        if (!eval_atom(c, m, a)) return false;
      }
      return true;
    case Expr::Kind::kOr:
      for (const auto& c : e.children) {
        if (eval_atom(c, m, a)) return true;
      }
      return false;
    case Expr::Kind::kNot:
      return !eval_atom(e.children.front(), m, a);
    case Expr::Kind::kPrimitive:
      break;
  }
  const Atom& atom = m.atom(a);
  switch (e.prim) {
    case Prim::kElement:
      if (atom.atomic_number != e.value) return false;
      return e.flag < 0 || atom.aromatic == (e.flag == 1);
    case Prim::kAnyAtom: return true;
    case Prim::kAromatic: return atom.aromatic;
    case Prim::kAliphatic: return !atom.aromatic;
    case Prim::kDegree: return m.degree(a) == e.value;
    case Prim::kTotalH: return m.total_h(a) == e.value;
    case Prim::kConnectivity: return m.degree(a) + atom.implicit_h == e.value;
    case Prim::kRing: return e.value == 0 ? !m.atom_in_ring(a) : m.atom_in_ring(a);
    case Prim::kCharge: return atom.formal_charge == e.value;
    case Prim::kRecursive: return e.recursive->matches_at(m, a);
    default: return false;
  }
}

bool eval_bond(const Expr& e, const Molecule& m, int b) {
  switch (e.kind) {
    case Expr::Kind::kAnd:
      for (const auto& c : e.children) {
        if (!eval_bond(c, m, b)) return false;
      }
      return true;
    case Expr::Kind::kOr:
      for (const auto& c : e.children) {
        if (eval_bond(c, m, b)) return true;
      }
      return false;
    case Expr::Kind::kNot:
      return !eval_bond(e.children.front(), m, b);
    case Expr::Kind::kPrimitive:
      break;
  }
  const BondOrder o = m.bond(b).order;
  switch (e.prim) {
    case Prim::kBondSingle: return o == BondOrder::kSingle;
    case Prim::kBondDouble: return o == BondOrder::kDouble;
    case Prim::kBondTriple: return o == BondOrder::kTriple;
    case Prim::kBondAromatic: return o == BondOrder::kAromatic;
    case Prim::kBondAny: return true;
    case Prim::kBondRing: return m.bond_in_ring(b);
    default: return false;
  }
}

bool bond_ok(const std::optional<Expr>& e, const Molecule& m, int b) {
  if (!e) {
    const BondOrder o = m.bond(b).order;
    return o == BondOrder::kSingle || o == BondOrder::kAromatic;
  }
  return eval_bond(*e, m, b);
}

bool extend(const std::vector<SmartsPattern::PatternAtom>& pat, std::size_t i, const Molecule& m,
            std::vector<int>& mapped) {
  if (i == pat.size()) return true;
  const auto& pa = pat[i];
  const int host = mapped[static_cast<std::size_t>(pa.parent)];
  for (const auto& nb : m.neighbors(host)) {
    if (std::find(mapped.begin(), mapped.begin() + static_cast<std::ptrdiff_t>(i), nb.atom) !=
        mapped.begin() + static_cast<std::ptrdiff_t>(i)) {
      continue;
    }
    if (!bond_ok(pa.bond, m, nb.bond) || !eval_atom(pa.atom, m, nb.atom)) continue;
    mapped[i] = nb.atom;
    if (extend(pat, i + 1, m, mapped)) return true;
  }
  return false;
}

}  // namespace

SmartsPattern SmartsPattern::parse(std::string_view text) {
  SmartsPattern p;
  p.text_ = std::string(text);
  p.atoms_ = std::make_shared<const std::vector<PatternAtom>>(SmartsParser(text).run());
  return p;
}

bool SmartsPattern::matches_at(const Molecule& m, int atom) const {
  const auto& pat = *atoms_;
  if (!eval_atom(pat.front().atom, m, atom)) return false;
  std::vector<int> mapped(pat.size(), -1);
  mapped[0] = atom;
  return extend(pat, 1, m, mapped);
}

}  // namespace molblocks
