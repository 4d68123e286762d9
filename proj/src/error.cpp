#include "pimsim/error.hpp"

namespace pimsim {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::ZeroOperand: return "ZeroOperand";
        case Errc::InvalidOperand: return "InvalidOperand";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::WidthTooLarge: return "WidthTooLarge";
        case Errc::AddressOutOfRange: return "AddressOutOfRange";
        case Errc::WriteDuringCompute: return "WriteDuringCompute";
        case Errc::ComputeDisabled: return "ComputeDisabled";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::PrecisionMismatch: return "PrecisionMismatch";
        case Errc::OverCapacityFilter: return "OverCapacityFilter";
        case Errc::MaskShapeMismatch: return "MaskShapeMismatch";
        case Errc::GeometryMismatch: return "GeometryMismatch";
        case Errc::MalformedRow: return "MalformedRow";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::InvalidScale: return "InvalidScale";
        case Errc::EmptyFile: return "EmptyFile";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::UnknownCorner: return "UnknownCorner";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace pimsim
