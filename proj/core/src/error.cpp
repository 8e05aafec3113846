#include "swiss/error.hpp"

#include <cstdio>

namespace swiss {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::InsufficientSamples: return "insufficient samples";
    case ErrorKind::NotPositiveDefinite: return "not positive definite";
    case ErrorKind::DecompositionFailure: return "decomposition failure";
    case ErrorKind::Convergence: return "convergence failure";
  }
  return "error";
}

Error::Error(ErrorKind kind, std::string message)
    : kind_(kind), message_(std::move(message)) {
  rebuild();
}

bool Error::is_numerical() const noexcept {
  switch (kind_) {
    case ErrorKind::InsufficientSamples:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::DecompositionFailure:
    case ErrorKind::Convergence:
      return true;
    default:
      return false;
  }
}

void Error::attach_batch(int batch_id) {
  if (!batch_id_) {
    batch_id_ = batch_id;
    rebuild();
  }
}

void Error::replace_batch(int batch_id) {
  batch_id_ = batch_id;
  rebuild();
}

void Error::attach_context(const std::string& context) {
  context_ = context_.empty() ? context : context + ": " + context_;
  rebuild();
}

void Error::rebuild() {
  what_.clear();
  if (!context_.empty()) what_ += context_ + ": ";
  if (batch_id_) what_ += "batch " + std::to_string(*batch_id_) + ": ";
  what_ += to_string(kind_);
  what_ += ": ";
  what_ += message_;
}

ParseError::ParseError(std::string source, long line, std::string message)
    : Error(ErrorKind::Parse,
            source + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

InsufficientSamplesError::InsufficientSamplesError(long samples, long dim)
    : Error(ErrorKind::InsufficientSamples,
            "need more than d = " + std::to_string(dim) +
                " draws to estimate a covariance, got " +
                std::to_string(samples)) {}

NotPositiveDefiniteError::NotPositiveDefiniteError(std::string where,
                                                   double offending_value)
    : Error(ErrorKind::NotPositiveDefinite,
            where + " (offending eigenvalue/pivot " +
                format_double(offending_value) + ")"),
      value_(offending_value) {}

DecompositionFailureError::DecompositionFailureError(int sweeps,
                                                     double residual)
    : Error(ErrorKind::DecompositionFailure,
            "Jacobi iteration did not converge after " +
                std::to_string(sweeps) + " sweeps (off-diagonal residual " +
                format_double(residual) + ")"),
      residual_(residual) {}

ConvergenceError::ConvergenceError(std::string what, int iterations,
                                   double residual)
    : Error(ErrorKind::Convergence,
            what + " did not converge after " + std::to_string(iterations) +
                " iterations (residual " + format_double(residual) + ")"),
      residual_(residual) {}

}  // namespace swiss
