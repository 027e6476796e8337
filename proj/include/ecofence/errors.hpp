#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ecofence {

// Input outside an operation's mathematical domain (negative speed, bad weight...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The emission model produced something it cannot represent (NaN, inf).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or inconsistent configuration, e.g. a coefficient table without an entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem too large for an exhaustive routine.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A file failed validation. Carries every violation found, not just the first.
class LoadError : public std::runtime_error {
 public:
  LoadError(std::string source, std::vector<std::string> diagnostics);

  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string source_;
  std::vector<std::string> diagnostics_;
};

}  // namespace ecofence
