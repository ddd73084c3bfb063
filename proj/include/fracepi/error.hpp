#ifndef FRACEPI_ERROR_HPP
#define FRACEPI_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracepi {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Numerical failures (CLI exit code 1)

class NumericalError : public Error {
public:
  using Error::Error;
};

class IntegrationDiverged : public NumericalError {
public:
  explicit IntegrationDiverged(std::size_t step)
      : NumericalError("integration diverged: non-finite state at step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

class NoConvergence : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// A quantity is mathematically undefined at the supplied point (division by zero, R0 = 0, ...).
class UndefinedValue : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Lookup of a frozen trajectory outside its time span.
class OutOfRange : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// Invalid arguments and configuration (CLI exit code 2)

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class InvalidPopulation : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// Configuration problem tied to a dotted key path such as "control.m_max".
class ConfigError : public InvalidArgument {
public:
  ConfigError(std::string key, const std::string& what)
      : InvalidArgument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

// ---------------------------------------------------------------------------
// Data and I/O problems (CLI exit code 3)

class DataError : public Error {
public:
  using Error::Error;
};

class IoError : public DataError {
public:
  using DataError::DataError;
};

class ParseError : public DataError {
public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ValidationError : public DataError {
public:
  using DataError::DataError;
};

class GapError : public ValidationError {
public:
  explicit GapError(const std::string& missing_date)
      : ValidationError("case series has a gap: missing date " + missing_date),
        missing_date_(missing_date) {}
  const std::string& missing_date() const noexcept { return missing_date_; }

private:
  std::string missing_date_;
};

/// Two time series that must share a grid do not.
class AlignmentError : public DataError {
public:
  using DataError::DataError;
};

/// CLI exit code contract: 0 success, 1 numerical, 2 config, 3 data/IO.
inline int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const NumericalError*>(&e)) return 1;
  if (dynamic_cast<const InvalidArgument*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 1;
}

}  // namespace fracepi

#endif  // FRACEPI_ERROR_HPP
