#pragma once

#include <stdexcept>
#include <string>

namespace crowdprop {

/// Input data violates a contract: bad schema, unknown identifier,
/// inconsistent corpora. Maps to exit code 1 in the CLI.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure: missing file, short read, unwritable output.
/// Maps to exit code 2 in the CLI.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crowdprop
