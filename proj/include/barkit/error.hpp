#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace barkit {

enum class ErrorKind {
  // volume / file format
  BadMagic,
  UnsupportedDtype,
  UnsupportedLayout,
  TruncatedFile,
  NonFiniteData,
  IoFailure,
  InvalidVolume,
  // atlas
  NonIntegerLabels,
  DuplicateLutId,
  UnknownRegionInVolume,
  InvalidLut,
  UnknownRegionId,
  DimsMismatch,
  AffineMismatch,
  // augmentation
  KTooLarge,
  EmptyRegionSelection,
  EmptyBrain,
  RatioOutOfRange,
  LengthMismatch,
  InvalidLabel,
  InvalidArgument,
  EmptyMask,
  // contrastive loss
  NoValidAnchors,
  DegenerateNorm,
  InvalidBatch,
  // pipeline
  DimsNotPoolable,
  EmptyTestSet,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_alignment() const noexcept {
    return kind_ == ErrorKind::DimsMismatch ||
           kind_ == ErrorKind::AffineMismatch;
  }

 private:
  ErrorKind kind_;
};

}  // namespace barkit
