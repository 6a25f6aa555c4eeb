#pragma once

#include <stdexcept>
#include <string>

namespace molblocks {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed SMILES text (unbalanced branches, dangling ring closures, ...).
class SmilesSyntaxError : public Error {
 public:
  SmilesSyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// An atom exceeds its element's allowed valence, or aromatic flags are
/// inconsistent with the ring structure.
class SanitizationError : public Error {
 public:
  using Error::Error;
};

/// A structured input file (vocabulary, name table, rule table, PDB, ...)
/// does not follow its format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by its arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A molecule has more BRICS bonds than exhaustive enumeration allows.
class TooManyBondsError : public Error {
 public:
  TooManyBondsError(int bonds, int limit)
      : Error(std::to_string(bonds) + " BRICS bonds exceed the enumeration limit of " +
              std::to_string(limit)),
        bonds_(bonds) {}
  int bonds() const { return bonds_; }

 private:
  int bonds_;
};

}  // namespace molblocks
