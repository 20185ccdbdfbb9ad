#include "uwpde/error.hpp"

namespace uwpde {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptData: return "CorruptData";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidBufferState: return "InvalidBufferState";
        case ErrorCode::ChannelOutOfRange: return "ChannelOutOfRange";
        case ErrorCode::NotColourImage: return "NotColourImage";
        case ErrorCode::ImageTooSmallForTiling: return "ImageTooSmallForTiling";
        case ErrorCode::InvalidMap: return "InvalidMap";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::StabilityBudgetExceeded: return "StabilityBudgetExceeded";
        case ErrorCode::UnknownPipeline: return "UnknownPipeline";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

}  // namespace uwpde
