#pragma once

#include <stdexcept>
#include <string>

namespace cropwarp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input file does not match the expected schema (header, column set).
struct SchemaError : Error {
  using Error::Error;
};

// A record or argument violates a stated invariant.
struct ValidationError : Error {
  using Error::Error;
};

// Conflicting entries for the same key (e.g. duplicate label rows).
struct ConflictError : Error {
  using Error::Error;
};

// Math domain problem: zero denominator, zero-norm vector, negative radicand.
struct DomainError : Error {
  using Error::Error;
};

// Bad algorithm parameter (even smoothing window, zero step, ...).
struct ParamError : Error {
  using Error::Error;
};

// A series does not span the requested time range.
struct CoverageError : Error {
  using Error::Error;
};

// No finite warping path exists inside the band.
struct NoPathError : Error {
  using Error::Error;
};

// Gap filling impossible: the series has no clear sample.
struct UnfillableError : Error {
  using Error::Error;
};

// Every candidate distance was non-finite.
struct UnclassifiableError : Error {
  using Error::Error;
};

}  // namespace cropwarp
