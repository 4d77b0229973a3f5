#ifndef SEBCOMM_ERRORS_HPP_
#define SEBCOMM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sebcomm {

// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument values (K out of range, bad sizes, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Tensor/image dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Containers whose internal bookkeeping is inconsistent (counts, indices).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf inputs or numeric divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Object used before it was initialized.
class StateError : public Error {
 public:
  using Error::Error;
};

// File ingestion failures; the message names the offending path.
class IngestError : public Error {
 public:
  using Error::Error;
};

// Checkpoint/config incompatibilities.
class IncompatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sebcomm

#endif  // SEBCOMM_ERRORS_HPP_
