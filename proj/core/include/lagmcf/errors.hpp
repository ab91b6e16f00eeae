#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagmcf {

/// Rejected parameters or inputs (bad grid, sigma out of range, unknown preset...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File opened fine but its contents are malformed (wrong magic, truncated, bad CSV).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical blowup: a non-finite value appeared, or the angle oscillation alarm fired.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, std::size_t first_index, double time)
      : std::runtime_error(what), first_index_(first_index), time_(time) {}

  [[nodiscard]] std::size_t first_index() const { return first_index_; }
  [[nodiscard]] double time() const { return time_; }

 private:
  std::size_t first_index_;
  double time_;
};

}  // namespace lagmcf
