#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsm {

// Base of every error raised by the library. The CLI maps the kind to an
// exit code (config 1, numeric/consistency 2, io 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Raised by inverse_fft when the spectrum is not Hermitian enough to give a
// real volume.
class SymmetryError : public NumericError {
 public:
  SymmetryError(const std::string& what, double residue)
      : NumericError(what), residue_(residue) {}
  double residue() const noexcept { return residue_; }

 private:
  double residue_;
};

// A symbol evaluated to a non-finite value at some grid frequency.
class SymbolDomainError : public NumericError {
 public:
  SymbolDomainError(const std::string& what, std::size_t flat_index)
      : NumericError(what), flat_index_(flat_index) {}
  std::size_t flat_index() const noexcept { return flat_index_; }

 private:
  std::size_t flat_index_;
};

class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed volume file. Carries the byte offset where parsing stopped.
class FormatError : public IoError {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : IoError(what + " (at byte " + std::to_string(offset) + ")"),
        detail_(what),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  /// The message without the offset suffix, for re-wrapping.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

}  // namespace qsm
