#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scopeflow {

enum class ErrorCode {
  // flowio
  BadMagic,
  Truncated,
  BadDims,
  BadBitDepth,
  BadChannelCount,
  OutOfRange,
  Io,
  // sampling / scoping
  OutOfBounds,
  TooLarge,
  EmptyCategory,
  InvalidStrategy,
  CropTooLarge,
  // augmentation
  BadConfig,
  SingularTransform,
  // flowops
  DimMismatch,
  NoValidPixels,
  // schedule
  SchemaError,
  ValidationError,
  UnknownStage,
  EpochOutOfRange,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::BadBitDepth: return "BadBitDepth";
    case ErrorCode::BadChannelCount: return "BadChannelCount";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Io: return "Io";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EmptyCategory: return "EmptyCategory";
    case ErrorCode::InvalidStrategy: return "InvalidStrategy";
    case ErrorCode::CropTooLarge: return "CropTooLarge";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NoValidPixels: return "NoValidPixels";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownStage: return "UnknownStage";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library.  The code is
/// stable and intended for programmatic dispatch (the CLI maps codes to exit
/// statuses); the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration failure carrying the offending field path and, when known,
/// the 1-based source line.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::string field, int line, const std::string& message)
      : Error(code, format(field, line, message)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, int line, const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + message;
  }

  std::string field_;
  int line_;
};

}  // namespace scopeflow
