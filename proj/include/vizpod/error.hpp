/// @file error.hpp
/// @brief Error codes shared by every vizpod module.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vizpod {

enum class ErrorCode {
    // transcript
    NoSpeakerLabelsFound,
    EmptyTurn,
    EmptyTranscript,
    // style metrics
    TooShort,
    EmptyInput,
    // grounding
    DimensionMismatch,
    ZeroVector,
    ProviderUnavailable,
    EmbeddingDimMismatch,
    // judge
    UnparseableVerdict,
    JudgeUnavailable,
    // datagen
    ExtractorUnavailable,
    NoValidSpan,
    PromptGenUnavailable,
    WrongCardinality,
    ImageServiceUnavailable,
    // genclient
    VlmUnavailable,
    EmptyGeneration,
    // cli / infrastructure
    ConfigInvalid,
    InputMissing,
    CacheCorrupt,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Transient failures that a retry policy may re-attempt.
bool is_retryable(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    bool retryable() const noexcept { return is_retryable(code_); }

private:
    ErrorCode code_;
};

}  // namespace vizpod
