#pragma once

#include <stdexcept>
#include <string>

namespace arcas {

// every failure the library raises goes through one of these, so callers can
// distinguish "your file is malformed" from "the math went sideways".
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// infeasible generator or strategy specification (num_blocks > n, ...)
class SpecError : public Error {
public:
  using Error::Error;
};

// dense SVD oracle refused: problem exceeds desk scale
class OracleUnavailableError : public Error {
public:
  using Error::Error;
};

// malformed input file; message carries filename and 1-based line number
class FormatError : public Error {
public:
  FormatError(const std::string& file, long line, const std::string& detail)
      : Error(file + ":" + std::to_string(line) + ": " + detail),
        line_number(line) {}
  long line_number;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

// loaded system has no solution (residual of the least-squares fit too large)
class InconsistentSystemError : public Error {
public:
  using Error::Error;
};

// a selection strategy produced a direction w with M^T w = 0 (or w = 0)
class DegenerateDirectionError : public Error {
public:
  using Error::Error;
};

// an internal invariant that should hold by construction failed; indicates a
// bug or a strategy violating its contract, message names the iteration
class ContractViolationError : public Error {
public:
  using Error::Error;
};

// diagnostics detected a violation of a guaranteed property (used by
// self-check paths that promise to throw rather than return garbage)
class DiagnosticsError : public Error {
public:
  using Error::Error;
};

// subset enumeration would exceed the configured budget
class EnumerationBudgetError : public Error {
public:
  using Error::Error;
};

// bad user-facing configuration: unknown strategy kind, bad parameter, ...
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace arcas
