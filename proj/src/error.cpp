#include "vizpod/error.hpp"

namespace vizpod {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoSpeakerLabelsFound: return "NoSpeakerLabelsFound";
        case ErrorCode::EmptyTurn: return "EmptyTurn";
        case ErrorCode::EmptyTranscript: return "EmptyTranscript";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::EmbeddingDimMismatch: return "EmbeddingDimMismatch";
        case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
        case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
        case ErrorCode::ExtractorUnavailable: return "ExtractorUnavailable";
        case ErrorCode::NoValidSpan: return "NoValidSpan";
        case ErrorCode::PromptGenUnavailable: return "PromptGenUnavailable";
        case ErrorCode::WrongCardinality: return "WrongCardinality";
        case ErrorCode::ImageServiceUnavailable: return "ImageServiceUnavailable";
        case ErrorCode::VlmUnavailable: return "VlmUnavailable";
        case ErrorCode::EmptyGeneration: return "EmptyGeneration";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InputMissing: return "InputMissing";
        case ErrorCode::CacheCorrupt: return "CacheCorrupt";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_retryable(ErrorCode code) {
    switch (code) {
        case ErrorCode::ProviderUnavailable:
        case ErrorCode::JudgeUnavailable:
        case ErrorCode::ExtractorUnavailable:
        case ErrorCode::PromptGenUnavailable:
        case ErrorCode::ImageServiceUnavailable:
        case ErrorCode::VlmUnavailable:
            return true;
        default:
            return false;
    }
}

}  // namespace vizpod
