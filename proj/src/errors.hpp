#pragma once

#include <stdexcept>
#include <string>

namespace tag {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/graph dimension mismatches and invalid extents.
struct ShapeError : Error {
  using Error::Error;
};

// Config parsing, validation, unknown keys, unsupported versions.
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Operation not valid for the object's current state (e.g. tape reuse).
struct StateError : Error {
  using Error::Error;
};

// Problem size exceeds a configured cap (dense solves).
struct CapacityError : Error {
  using Error::Error;
};

}  // namespace tag
