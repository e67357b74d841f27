#include "reptex/error.hpp"

namespace reptex {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::UnreadableFile: return "UnreadableFile";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::ZeroDimension: return "ZeroDimension";
    case Errc::UnknownLabelValue: return "UnknownLabelValue";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::NoBackgroundPixels: return "NoBackgroundPixels";
    case Errc::PixelOutOfBounds: return "PixelOutOfBounds";
    case Errc::MaskEmpty: return "MaskEmpty";
    case Errc::AcceptanceFloor: return "AcceptanceFloor";
    case Errc::TooFewCandidates: return "TooFewCandidates";
    case Errc::DivergedTraining: return "DivergedTraining";
    case Errc::UntrainedModel: return "UntrainedModel";
    case Errc::TooFewVectors: return "TooFewVectors";
    case Errc::DuplicateCentroids: return "DuplicateCentroids";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegeneratePatch: return "DegeneratePatch";
    case Errc::UnwritableOutput: return "UnwritableOutput";
    case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

} // namespace reptex
