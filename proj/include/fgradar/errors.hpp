#pragma once

#include <stdexcept>
#include <string>

namespace fgradar {

/// Base of every error the library raises. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative distance, t outside a chirp).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Inconsistent or invalid configuration (bad windows, channel count mismatch, empty pose grid).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Degenerate or non-uniform geometry.
class GeometryError : public Error {
  public:
    using Error::Error;
};

/// Grid coverage violations while assembling a signal matrix.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// A peak search found nothing (all-zero input, flat image).
class NoPeakError : public Error {
  public:
    using Error::Error;
};

/// Grids or depth maps whose shapes disagree.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Malformed or truncated file contents.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// A referenced input file could not be opened.
class MissingInputError : public Error {
  public:
    using Error::Error;
};

}  // namespace fgradar
