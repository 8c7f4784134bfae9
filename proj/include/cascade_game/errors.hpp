#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cascade_game {

// Base class of everything the library throws on bad input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed grid-file line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// An edge or strategy names a node the network does not contain.
class ReferenceError : public Error {
 public:
  ReferenceError(long long node, const std::string& what)
      : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  long long node() const noexcept { return node_; }

 private:
  long long node_;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

// Precondition on a numeric argument or structural input violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An exhaustive enumeration would exceed its configured limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade_game
