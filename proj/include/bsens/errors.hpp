// Copyright 2026
// See LICENSE.txt

#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsens {

// Base error. `where` carries module provenance ("empirical_bayes.bracket"),
// used by the CLI when logging runtime failures.
class Error : public std::runtime_error {
 public:
  Error(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced while evaluating a density or estimator.
class NumericError : public Error {
 public:
  NumericError(std::string where, const std::string& what, std::size_t index)
      : Error(std::move(where), what + " (term " + std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Evaluation at a boundary point where the density or its derivative is
// undefined (e.g. a stick at 1). Carries the offending index (stick or draw).
class SingularityError : public Error {
 public:
  SingularityError(std::string where, const std::string& what, std::size_t index)
      : Error(std::move(where), what + " (index " + std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class NoisyObjectiveError : public Error {
 public:
  using Error::Error;
};

class NonIdentifiedError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class DiagnosticsError : public Error {
 public:
  using Error::Error;
};

class ConvexityError : public Error {
 public:
  using Error::Error;
};

// Config validation collects every issue before failing.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, std::vector<std::string> issues)
      : Error(std::move(where), join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += "; ";
      s += e;
    }
    return s;
  }
  std::vector<std::string> issues_;
};

}  // namespace bsens
