#include "barkit/error.hpp"

namespace barkit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::UnsupportedLayout: return "UnsupportedLayout";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::NonFiniteData: return "NonFiniteData";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidVolume: return "InvalidVolume";
    case ErrorKind::NonIntegerLabels: return "NonIntegerLabels";
    case ErrorKind::DuplicateLutId: return "DuplicateLutId";
    case ErrorKind::UnknownRegionInVolume: return "UnknownRegionInVolume";
    case ErrorKind::InvalidLut: return "InvalidLut";
    case ErrorKind::UnknownRegionId: return "UnknownRegionId";
    case ErrorKind::DimsMismatch: return "DimsMismatch";
    case ErrorKind::AffineMismatch: return "AffineMismatch";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::EmptyRegionSelection: return "EmptyRegionSelection";
    case ErrorKind::EmptyBrain: return "EmptyBrain";
    case ErrorKind::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidLabel: return "InvalidLabel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::NoValidAnchors: return "NoValidAnchors";
    case ErrorKind::DegenerateNorm: return "DegenerateNorm";
    case ErrorKind::InvalidBatch: return "InvalidBatch";
    case ErrorKind::DimsNotPoolable: return "DimsNotPoolable";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace barkit
