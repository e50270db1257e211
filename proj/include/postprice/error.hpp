#pragma once

#include <stdexcept>
#include <string>

namespace postprice {

// Malformed distribution or instance (bad masses, unsorted support, ...).
class MalformedInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A schedule or tree that does not fit the instance it is evaluated on.
class InvalidMechanism : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Enumeration or table size above the caller's budget. Callers must coarsen
// the problem (raise epsilon, override grid parameters, shrink the instance).
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance probabilities are not on the 1/(10 n^2) grid.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// JSON input that does not follow the documented schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace postprice
