#include "vizpod/transcript.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <optional>

#include "vizpod/error.hpp"
#include "vizpod/text.hpp"

namespace vizpod {
namespace {

struct LabeledLine {
    std::string label;
    std::string rest;
};

bool forbidden_in_label(char c) {
    switch (c) {
        case ',': case '!': case '?': case ';': case ':': case '"':
        case '(': case ')': case '[': case ']': case '{': case '}':
            return true;
        default:
            return false;
    }
}

bool starts_alnum(std::string_view s) {
    if (s.empty()) return false;
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    int32_t i = 0;
    UChar32 c;
    U8_NEXT(bytes, i, static_cast<int32_t>(s.size()), c);
    return c >= 0 && u_isalnum(c);
}

std::string_view strip_emphasis(std::string_view s) {
    while (!s.empty() && (s.front() == '*' || s.front() == '_')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '*' || s.back() == '_')) s.remove_suffix(1);
    return s;
}

std::optional<LabeledLine> match_label(std::string_view line, std::size_t max_words) {
    std::size_t b = 0;
    while (b < line.size() && (line[b] == ' ' || line[b] == '\t')) ++b;
    line.remove_prefix(b);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;

    std::size_t after = colon + 1;
    while (after < line.size() && (line[after] == '*' || line[after] == '_')) ++after;
    if (after < line.size() && line[after] != ' ' && line[after] != '\t') return std::nullopt;

    const std::string_view candidate = strip_emphasis(line.substr(0, colon));
    const std::string collapsed = text::collapse_whitespace(candidate);
    if (collapsed.empty() || !starts_alnum(collapsed)) return std::nullopt;
    for (char c : collapsed) {
        if (forbidden_in_label(c) || c == '*') return std::nullopt;
    }
    const std::size_t tokens = text::count_tokens(collapsed);
    if (tokens == 0 || tokens > max_words) return std::nullopt;

    return LabeledLine{collapsed, std::string(line.substr(after))};
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) nl = s.size();
        auto line = s.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

void renumber(Transcript& t) {
    t.total_words = 0;
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        t.turns[i].index = i;
        t.total_words += t.turns[i].word_count;
    }
    t.label_words = 0;
    for (const auto& turn : t.turns) t.label_words += text::count_tokens(turn.speaker.label());
}

}  // namespace

SpeakerId::SpeakerId(std::string_view label)
    : label_(text::collapse_whitespace(text::nfc(label))), key_(text::lowercase(label_)) {}

std::size_t word_count(std::string_view t) { return text::count_tokens(t); }

std::size_t word_count(std::string_view t, bool strip_stage_directions) {
    if (!strip_stage_directions) return text::count_tokens(t);
    return text::count_tokens(text::strip_stage_directions(t));
}

Transcript parse_transcript(std::string_view raw, const ParseConfig& cfg, std::string source_id) {
    if (cfg.label_max_words < 1) throw Error(ErrorCode::InvalidArgument, "label_max_words must be >= 1");

    const std::string normalized = text::nfc(raw);
    Transcript t;
    t.source_id = std::move(source_id);

    struct Block {
        SpeakerId speaker;
        std::string body;
    };
    std::vector<Block> blocks;
    std::size_t preamble_words = 0;

    for (std::string_view line : split_lines(normalized)) {
        if (auto labeled = match_label(line, cfg.label_max_words)) {
            blocks.push_back({SpeakerId(labeled->label), labeled->rest});
        } else if (!blocks.empty()) {
            blocks.back().body.append(" ").append(line);
        } else {
            preamble_words += text::count_tokens(line);
        }
    }

    if (blocks.empty()) throw Error(ErrorCode::NoSpeakerLabelsFound, "no line-initial speaker label in input");
    if (preamble_words > 0) {
        t.warnings.push_back("ignored " + std::to_string(preamble_words) + " words before the first speaker label");
    }

    for (auto& block : blocks) {
        std::string body = cfg.strip_stage_directions ? text::strip_stage_directions(block.body) : block.body;
        body = text::collapse_whitespace(body);
        const std::size_t words = text::count_tokens(body);
        if (words == 0) {
            t.warnings.push_back(std::string(to_string(ErrorCode::EmptyTurn)) + ": dropped empty turn for '" +
                                 block.speaker.label() + "'");
            continue;
        }
        t.turns.push_back(Turn{0, std::move(block.speaker), std::move(body), words});
    }

    if (t.turns.empty()) throw Error(ErrorCode::EmptyTranscript, "every labeled block was empty");

    if (cfg.merge_adjacent_same_speaker) return canonicalize(std::move(t));
    renumber(t);
    return t;
}

Transcript canonicalize(Transcript t) {
    std::vector<Turn> merged;
    merged.reserve(t.turns.size());
    for (auto& turn : t.turns) {
        if (!merged.empty() && merged.back().speaker == turn.speaker) {
            auto& prev = merged.back();
            prev.text.append(" ").append(turn.text);
            prev.word_count += turn.word_count;
        } else {
            merged.push_back(std::move(turn));
        }
    }
    t.turns = std::move(merged);
    renumber(t);
    return t;
}

std::vector<SpeakerId> speakers(const Transcript& t) {
    std::vector<SpeakerId> out;
    for (const auto& turn : t.turns) {
        bool seen = false;
        for (const auto& s : out) seen = seen || s == turn.speaker;
        if (!seen) out.push_back(turn.speaker);
    }
    return out;
}

std::string to_labeled_text(const Transcript& t) {
    std::string out;
    for (const auto& turn : t.turns) {
        out.append(turn.speaker.label()).append(": ").append(turn.text).append("\n");
    }
    return out;
}

nlohmann::json to_json(const Transcript& t) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& turn : t.turns) {
        turns.push_back({{"speaker", turn.speaker.label()}, {"text", turn.text}, {"words", turn.word_count}});
    }
    return {{"id", t.source_id}, {"turns", std::move(turns)}, {"total_words", t.total_words}};
}

Transcript transcript_from_json(const nlohmann::json& j) {
    Transcript t;
    t.source_id = j.value("id", std::string());
    for (const auto& jt : j.at("turns")) {
        Turn turn;
        turn.speaker = SpeakerId(jt.at("speaker").get<std::string>());
        turn.text = text::collapse_whitespace(jt.at("text").get<std::string>());
        turn.word_count = text::count_tokens(turn.text);
        if (turn.word_count == 0) continue;
        t.turns.push_back(std::move(turn));
    }
    if (t.turns.empty()) throw Error(ErrorCode::EmptyTranscript, "record '" + t.source_id + "' has no non-empty turns");
    renumber(t);
    return t;
}

}  // namespace vizpod
