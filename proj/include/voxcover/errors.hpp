#ifndef VOXCOVER_ERRORS_HPP
#define VOXCOVER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace voxcover {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument values: non-positive sizes, empty inputs, malformed ranges.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Structurally invalid file content (truncated blocks, bad magic, bad cards).
class FormatError : public Error {
public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Well-formed content outside the supported subset (e.g. unsupported BITPIX).
class UnsupportedError : public Error {
public:
  explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

// Shape mismatches between volumes, decompositions, or label fields.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures: missing files, unreadable or unwritable paths.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace voxcover

#endif
