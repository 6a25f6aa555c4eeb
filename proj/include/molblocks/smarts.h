#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "molblocks/molecule.h"

namespace molblocks {

/// Tree-shaped SMARTS subset used by the BRICS rule table: bracket and bare
/// atoms, element / #n / * / a / A / D / H / X / R / charge primitives,
/// recursive $(...), logic operators ! & , ; and bond primitives - = # : ~ @.
/// Ring-closure digits are not supported.
class SmartsPattern {
 public:
  /// Throws FormatError on unsupported or malformed input.
  static SmartsPattern parse(std::string_view text);

  /// True when the pattern matches with its first atom mapped to `atom`.
  bool matches_at(const Molecule& m, int atom) const;

  const std::string& text() const { return text_; }

  struct Expr;
  struct PatternAtom;

 private:
  std::string text_;
  std::shared_ptr<const std::vector<PatternAtom>> atoms_;
};

}  // namespace molblocks
