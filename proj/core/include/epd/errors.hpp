#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epd {

/// Invalid user-supplied configuration (unknown model, bad bounds, ...).
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A model right-hand side produced a non-finite value.
class EvaluationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// The ODE solver could not reach the requested output times.
class IntegrationFailure : public std::runtime_error
{
public:
  IntegrationFailure(const std::string& what, double last_time)
    : std::runtime_error(what + " (reached t=" + std::to_string(last_time) + ")")
    , last_time_(last_time)
  {
  }

  double last_time() const noexcept { return last_time_; }

private:
  double last_time_;
};

/// Malformed input file; carries the 1-based line number (0 if not tied to a line).
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
    , line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Failure of the estimation pipeline as a whole (e.g. no fit succeeded).
class EstimationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace epd
