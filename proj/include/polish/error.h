//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_ERROR_H_
#define POLISH_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polish {

class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when an atom's bond-order sum exceeds its largest allowed valence.
class ValenceError: public Error {
public:
  ValenceError(int atom, const std::string &what)
      : Error(what), atom_(atom) { }

  int atom() const { return atom_; }

private:
  int atom_;
};

class SmilesError: public Error {
public:
  enum class Kind {
    kSyntax,
    kRingClosure,
    kValence,
    kUnsupported,
  };

  SmilesError(Kind kind, std::size_t position, const std::string &what)
      : Error(what + " at offset " + std::to_string(position)), kind_(kind),
        position_(position) { }

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

private:
  Kind kind_;
  std::size_t position_;
};

class WidthMismatch: public Error {
public:
  using Error::Error;
};

// No atom of the source shares an element with the target.
class NoCandidate: public Error {
public:
  using Error::Error;
};

class NoValidAttachment: public Error {
public:
  using Error::Error;
};

class BudgetExceeded: public Error {
public:
  using Error::Error;
};

class NonFinite: public Error {
public:
  using Error::Error;
};

class DomainError: public Error {
public:
  using Error::Error;
};

class MissingProperty: public Error {
public:
  using Error::Error;
};

class IoError: public Error {
public:
  using Error::Error;
};

}  // namespace polish

#endif  // POLISH_ERROR_H_
