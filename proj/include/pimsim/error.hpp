#pragma once

#include <stdexcept>
#include <string>

namespace pimsim {

enum class Errc {
    ZeroOperand,
    InvalidOperand,
    InvalidArgument,
    WidthTooLarge,
    AddressOutOfRange,
    WriteDuringCompute,
    ComputeDisabled,
    LengthMismatch,
    PrecisionMismatch,
    OverCapacityFilter,
    MaskShapeMismatch,
    GeometryMismatch,
    MalformedRow,
    ShapeMismatch,
    InvalidScale,
    EmptyFile,
    DimensionMismatch,
    UnknownCorner,
    Io,
};

const char* errc_name(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace pimsim
