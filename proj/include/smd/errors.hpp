#pragma once

#include <stdexcept>
#include <string>

namespace smd {

// Malformed problem, argument, or file content. CLI exit code 2.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Problem-file syntax or consistency error; carries the 1-based line number.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_) + ": " + message), line(line_) {}
};

// Instance exceeds a hard enumeration guard. CLI exit code 3.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated internal invariant (e.g. bound monotonicity). CLI exit code 1.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// Pairwise term with e00 + e11 > e01 + e10; carries the offending term index.
struct SubmodularityError : std::invalid_argument {
  std::size_t term_index;
  explicit SubmodularityError(std::size_t index)
      : std::invalid_argument("pairwise term " + std::to_string(index) + " is not submodular"),
        term_index(index) {}
};

}  // namespace smd
