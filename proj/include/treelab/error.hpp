#pragma once
#include <stdexcept>
#include <string>

namespace treelab {

// Errors caused by malformed or degenerate input data (CSV ingestion,
// dataset invariant violations, empty feature sets).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Errors caused by invalid configuration values.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Mathematically undefined requests: correlation of a constant input,
// AUC with a single class present, t-test with zero variance, and so on.
class MathError : public std::runtime_error {
public:
  explicit MathError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace treelab
