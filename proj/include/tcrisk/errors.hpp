#pragma once

#include <stdexcept>
#include <string>

namespace tcrisk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files or configuration values.
class InputError : public Error {
public:
  using Error::Error;
};

class ProbabilityError : public Error {
public:
  using Error::Error;
};

/// Multiple roots, time gaps, unknown parents, early leaves.
class StructureError : public Error {
public:
  using Error::Error;
};

class UnknownNode : public Error {
public:
  using Error::Error;
};

class TimeOrderError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class EmptyConditionalSpace : public Error {
public:
  using Error::Error;
};

class PrefixMismatch : public Error {
public:
  using Error::Error;
};

class EnumerationLimit : public Error {
public:
  using Error::Error;
};

class OverflowGuard : public Error {
public:
  using Error::Error;
};

class NoUniformMaximizer : public Error {
public:
  using Error::Error;
};

class MismatchedInputs : public Error {
public:
  using Error::Error;
};

}  // namespace tcrisk
