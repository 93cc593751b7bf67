#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ofae {

enum class ErrorKind {
  NonUnitDirection,
  RankDeficient,
  TooFewSamples,
  DegenerateData,
  EmptyData,
  UnknownLeaf,
  DimensionMismatch,
  ConfigInvalid,
  InfeasibleCode,
  IterationLimit,
  ParseError,
  RaggedRows,
  UnsupportedFormat,
  CorruptHeader,
  NotAnImage,
  SizesExceedData,
  VersionMismatch,
  SchemaError,
  LengthMismatch,
  ShapeMismatch,
  ChannelMismatch,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonUnitDirection: return "NonUnitDirection";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::UnknownLeaf: return "UnknownLeaf";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::InfeasibleCode: return "InfeasibleCode";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptHeader: return "CorruptHeader";
    case ErrorKind::NotAnImage: return "NotAnImage";
    case ErrorKind::SizesExceedData: return "SizesExceedData";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ChannelMismatch: return "ChannelMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ofae
