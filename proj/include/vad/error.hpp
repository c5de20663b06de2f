#pragma once

#include <stdexcept>
#include <string>

namespace vad {

enum class ErrorKind {
  MalformedHeader,
  UnsupportedEncoding,
  InvalidConfig,
  DimensionMismatch,
  EmptyDataset,
  SingleClass,
  TooFewRows,
  SingleClassPartition,
  LengthMismatch,
  IterationLimit,
  BadValue,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::SingleClassPartition: return "SingleClassPartition";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::BadValue: return "BadValue";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace vad
