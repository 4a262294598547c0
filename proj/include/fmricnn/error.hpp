#pragma once

#include <stdexcept>
#include <string>

namespace fmricnn {

// Typed failure classes. The CLI maps each class to a process exit code:
// 2 = usage error, 3 = data/format error, 4 = numeric failure.
enum class Errc {
  // byte formats
  TooShort,
  BadMagic,
  UnsupportedDatatype,
  BadDims,
  TruncatedData,
  NonFiniteVoxel,
  FormatError,
  // dataset
  DropTooLarge,
  EmptyVolume,
  BadFractions,
  EmptyIndexSet,
  CountMismatch,
  // layers
  ShapeMismatch,
  IndivisibleExtent,
  BadLabel,
  // training
  NonFiniteLoss,
  EpochOutOfRange,
  EmptySplit,
  // cross-validation
  TooFewRecords,
  EmptyResults,
  // inspection
  NoSuchLayer,
  NotAConvLayer,
  // generic
  BadArgument,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::TooShort: return "TooShort";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedDatatype: return "UnsupportedDatatype";
    case Errc::BadDims: return "BadDims";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::NonFiniteVoxel: return "NonFiniteVoxel";
    case Errc::FormatError: return "FormatError";
    case Errc::DropTooLarge: return "DropTooLarge";
    case Errc::EmptyVolume: return "EmptyVolume";
    case Errc::BadFractions: return "BadFractions";
    case Errc::EmptyIndexSet: return "EmptyIndexSet";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::IndivisibleExtent: return "IndivisibleExtent";
    case Errc::BadLabel: return "BadLabel";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::EpochOutOfRange: return "EpochOutOfRange";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::TooFewRecords: return "TooFewRecords";
    case Errc::EmptyResults: return "EmptyResults";
    case Errc::NoSuchLayer: return "NoSuchLayer";
    case Errc::NotAConvLayer: return "NotAConvLayer";
    case Errc::BadArgument: return "BadArgument";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

inline int errc_exit_code(Errc c) {
  switch (c) {
    case Errc::BadArgument:
    case Errc::EpochOutOfRange:
      return 2;
    case Errc::NonFiniteLoss:
      return 4;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }
  int exit_code() const { return errc_exit_code(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace fmricnn
