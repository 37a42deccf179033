#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chroma_boltz {

// Process exit codes used by the CLI, one per error family.
enum class ErrorFamily { Parse = 2, Validation = 3, Numeric = 4, Timeout = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, const std::string& what)
      : std::runtime_error(what), family_(family) {}

  ErrorFamily family() const noexcept { return family_; }
  int exit_code() const noexcept { return static_cast<int>(family_); }

 private:
  ErrorFamily family_;
};

// Grammar errors carry a 1-based source position.
class SourceError : public Error {
 public:
  SourceError(const std::string& what, std::size_t line, std::size_t column)
      : Error(ErrorFamily::Parse, std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SyntaxError : public SourceError {
 public:
  using SourceError::SourceError;
};

class UnknownName : public SourceError {
 public:
  using SourceError::SourceError;
};

class DuplicateDefinition : public SourceError {
 public:
  using SourceError::SourceError;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorFamily::Validation, what) {}
};

#define CHROMA_BOLTZ_NUMERIC_ERROR(Name)                                        \
  class Name : public Error {                                                   \
   public:                                                                      \
    explicit Name(const std::string& what) : Error(ErrorFamily::Numeric, what) {} \
  };

// x at or above the dominant singularity, or an iteration that never settles.
CHROMA_BOLTZ_NUMERIC_ERROR(DivergenceError)
CHROMA_BOLTZ_NUMERIC_ERROR(InvalidParameter)
CHROMA_BOLTZ_NUMERIC_ERROR(NoSolution)
CHROMA_BOLTZ_NUMERIC_ERROR(CapExceeded)
CHROMA_BOLTZ_NUMERIC_ERROR(NoProfile)
CHROMA_BOLTZ_NUMERIC_ERROR(DepthExceeded)
CHROMA_BOLTZ_NUMERIC_ERROR(InsufficientData)

#undef CHROMA_BOLTZ_NUMERIC_ERROR

class Timeout : public Error {
 public:
  explicit Timeout(const std::string& what) : Error(ErrorFamily::Timeout, what) {}
};

}  // namespace chroma_boltz
