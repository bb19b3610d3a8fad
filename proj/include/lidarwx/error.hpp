#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidarwx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary payload (wrong length, bad magic, truncated section).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// One or more records of an otherwise well-formed file are invalid.
class RecordError : public Error {
 public:
  RecordError(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// Text input that cannot be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Caller violated a documented precondition (shape mismatch, bad config).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Numeric argument outside the domain of a physical formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lidarwx
