#pragma once

#include <stdexcept>
#include <string>

namespace schemabind {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed inputs: bad schema text, bad file contents, bad CLI data.
struct DataError : Error {
  using Error::Error;
};

// Shape mismatches and invalid dimensions in tensor code.
struct DimensionError : Error {
  using Error::Error;
};

// Non-finite values, undefined similarities, failed numeric invariants.
struct NumericError : Error {
  using Error::Error;
};

// Schema DSL parse failure with source location.
struct ParseError : DataError {
  ParseError(const std::string& msg, int line, int col)
      : DataError("parse error at line " + std::to_string(line) + ", col " +
                  std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

}  // namespace schemabind
