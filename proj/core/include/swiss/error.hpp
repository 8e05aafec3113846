#pragma once

#include <exception>
#include <optional>
#include <string>

namespace swiss {

enum class ErrorKind {
  InvalidArgument,
  Data,
  Parse,
  Io,
  InsufficientSamples,
  NotPositiveDefinite,
  DecompositionFailure,
  Convergence,
};

const char* to_string(ErrorKind kind);

/// Base of every exception thrown by the library.
///
/// Errors raised while processing one batch of a collection carry the
/// batch id; `attach_batch` is used by the collection-level routines before
/// rethrowing so the caller sees which shard failed.
class Error : public std::exception {
 public:
  Error(ErrorKind kind, std::string message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }
  std::optional<int> batch_id() const noexcept { return batch_id_; }

  /// True for failures of the numerical machinery (exit code 2 in the CLI).
  bool is_numerical() const noexcept;

  /// Sets the batch id unless one is already attached.
  void attach_batch(int batch_id);
  void replace_batch(int batch_id);
  void attach_context(const std::string& context);

  const char* what() const noexcept override { return what_.c_str(); }

 private:
  void rebuild();

  ErrorKind kind_;
  std::string message_;
  std::string context_;
  std::optional<int> batch_id_;
  std::string what_;
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(std::string message)
      : Error(ErrorKind::InvalidArgument, std::move(message)) {}
};

class DataError : public Error {
 public:
  explicit DataError(std::string message)
      : Error(ErrorKind::Data, std::move(message)) {}
};

class ParseError : public Error {
 public:
  ParseError(std::string source, long line, std::string message);
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class IoError : public Error {
 public:
  explicit IoError(std::string message)
      : Error(ErrorKind::Io, std::move(message)) {}
};

class InsufficientSamplesError : public Error {
 public:
  InsufficientSamplesError(long samples, long dim);
};

class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(std::string where, double offending_value);
  double offending_value() const noexcept { return value_; }

 private:
  double value_;
};

class DecompositionFailureError : public Error {
 public:
  DecompositionFailureError(int sweeps, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(std::string what, int iterations, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace swiss
