#pragma once

#include <stdexcept>
#include <string>

namespace distlab {

// Bad or malformed input (scene files, norm specs, CLI arguments). CLI exit 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& m) : std::runtime_error(m) {}
};

// Resource limits (memory cap, piece-count overflow). CLI exit 3.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& m) : std::runtime_error(m) {}
};

// Domain violations (query outside grid, level outside field range). CLI exit 4.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};

// A hard invariant of the computation was falsified at runtime. CLI exit 5.
class FalsificationError : public std::runtime_error {
 public:
  explicit FalsificationError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace distlab
