#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace partout {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (N-Triples, SPARQL, query logs, update files).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string reason)
      : Error("line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// Syntactically valid input that uses a feature outside the supported subset.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Persisted files (catalog, fragmentation, dictionary) that cannot be read.
class FormatError : public Error {
 public:
  using Error::Error;
};

class AllocationError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

/// Failures of the distributed runtime: lost workers, protocol violations.
class ClusterError : public Error {
 public:
  using Error::Error;
};

}  // namespace partout
