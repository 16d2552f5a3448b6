#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace redbench {

/// Base class for every error raised by the library. `stage()` names the
/// pipeline stage so the CLI can prefix diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Missing or unknown column in a CSV header.
class SchemaError : public Error {
 public:
  SchemaError(std::string stage, std::string column, const std::string& message)
      : Error(std::move(stage), message), column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A data row that cannot be interpreted. `line()` is 1-based and counts the
/// header row.
class RowError : public Error {
 public:
  RowError(std::string stage, std::size_t line, const std::string& message)
      : Error(std::move(stage), message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// SQL text the analyzer refuses to interpret. `span()` is the offending slice.
class AnalysisError : public Error {
 public:
  AnalysisError(std::string span, const std::string& message)
      : Error("analyze", message), span_(std::move(span)) {}

  const std::string& span() const noexcept { return span_; }

 private:
  std::string span_;
};

/// Argument outside an operation's mathematical domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

}  // namespace redbench
