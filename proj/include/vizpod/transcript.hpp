/// @file transcript.hpp
/// @brief Speaker-labeled dialogue parsing with exact word accounting.
///
/// A speaker label is a line-initial run of at most `label_max_words` tokens
/// followed by a colon ("Speaker 1:", "Host:", "Alex:"). Markdown emphasis
/// around the label ("**Speaker 1:**") is tolerated. Lines without a label
/// continue the preceding turn.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vizpod {

/// Speaker label as written, compared case-insensitively after trimming.
class SpeakerId {
public:
    SpeakerId() = default;
    explicit SpeakerId(std::string_view label);

    const std::string& label() const noexcept { return label_; }
    const std::string& key() const noexcept { return key_; }

    friend bool operator==(const SpeakerId& a, const SpeakerId& b) { return a.key_ == b.key_; }

private:
    std::string label_;
    std::string key_;
};

struct Turn {
    std::size_t index = 0;
    SpeakerId speaker;
    std::string text;
    std::size_t word_count = 0;
};

struct Transcript {
    std::string source_id;
    std::vector<Turn> turns;
    std::size_t total_words = 0;
    /// Tokens spent on speaker labels, one label per turn. Not part of total_words.
    std::size_t label_words = 0;
    /// Non-fatal parse findings (dropped empty turns, preamble text).
    std::vector<std::string> warnings;
};

struct ParseConfig {
    std::size_t label_max_words = 3;
    bool merge_adjacent_same_speaker = true;
    bool strip_stage_directions = false;
};

/// Whitespace-token count. Punctuation stays attached to its token.
std::size_t word_count(std::string_view text);
std::size_t word_count(std::string_view text, bool strip_stage_directions);

/// Throws Error(NoSpeakerLabelsFound) when no label is found and
/// Error(EmptyTranscript) when every labeled block is empty.
Transcript parse_transcript(std::string_view raw, const ParseConfig& cfg = {}, std::string source_id = {});

/// Merges consecutive same-speaker turns and renumbers. Idempotent.
Transcript canonicalize(Transcript t);

/// Distinct speakers in order of first appearance.
std::vector<SpeakerId> speakers(const Transcript& t);

/// "Label: text" lines; parse_transcript(to_labeled_text(t)) reproduces t's turns.
std::string to_labeled_text(const Transcript& t);

/// Word total including speaker labels, the convention of hand-reported script lengths.
inline std::size_t document_word_count(const Transcript& t) { return t.total_words + t.label_words; }

nlohmann::json to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

}  // namespace vizpod
