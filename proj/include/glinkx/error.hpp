#pragma once

#include <stdexcept>
#include <string>

namespace glinkx {

// Base of every error raised by the library. `code()` is a stable
// machine-readable identifier surfaced by the CLI in its stderr JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error("format_error", message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error("numerical_error", message) {}
};

// Ingestion failures carry the file and 1-based line they refer to.
class IngestError : public Error {
 public:
  IngestError(const std::string& file, std::size_t line,
              const std::string& message)
      : Error("ingest_error",
              file + ":" + std::to_string(line) + ": " + message),
        file_(file),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Raised by the three-stage pipeline; the stage tag names where it failed.
class PipelineError : public Error {
 public:
  PipelineError(const std::string& stage, const std::string& message)
      : Error("pipeline_error", "[" + stage + "] " + message), stage_(stage) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace glinkx
