#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpp {

// Input violates an operation's preconditions (maps to CLI exit code 1).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed coefficient text. `position` is 1-based; one past the end of the
// input means the parser ran out of characters.
class ParseError : public PreconditionError {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// A numerical stage failed to converge or produced an invalid result
// (maps to CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& message);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace kpp
