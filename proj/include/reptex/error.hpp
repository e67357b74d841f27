#pragma once

#include <stdexcept>
#include <string>

namespace reptex {

enum class Errc {
    UnreadableFile,
    UnsupportedFormat,
    ZeroDimension,
    UnknownLabelValue,
    UnknownClass,
    OutOfBounds,
    NoBackgroundPixels,
    PixelOutOfBounds,
    MaskEmpty,
    AcceptanceFloor,
    TooFewCandidates,
    DivergedTraining,
    UntrainedModel,
    TooFewVectors,
    DuplicateCentroids,
    DimensionMismatch,
    DegeneratePatch,
    UnwritableOutput,
    InvalidConfig,
};

const char* errc_name(Errc code) noexcept;

// All failures in the library surface as this exception; code() names the
// failure kind so callers (and the report writer) can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace reptex
