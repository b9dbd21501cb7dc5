#pragma once

#include <stdexcept>
#include <string>

namespace ctri {

// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or configuration (bad rotation, bad schedule, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// The consistent region is empty; no estimate exists.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

// Numerical breakdown: rank-deficient system, point at infinity,
// iteration cap, failure to bracket.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace ctri
