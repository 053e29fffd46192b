#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lpspul {

/// Invalid argument to a library call (bad dimension, out-of-range value, ...).
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed file content. Carries the byte offset where reading stopped.
class format_error : public std::runtime_error {
 public:
  format_error(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Problem with dataset content (ragged rows, missing classes, ...).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure during optimization (non-finite loss, NaN gradients, ...).
class training_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpspul
