/// @file datagen.hpp
/// @brief Three-stage image–dialogue dataset construction: excerpt extraction,
/// image-prompt generation and image synthesis, plus the manifest store.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/clients.hpp"
#include "vizpod/content_cache.hpp"
#include "vizpod/retry.hpp"
#include "vizpod/transcript.hpp"

namespace vizpod {

inline constexpr std::size_t kScenesPerExcerpt = 5;
inline constexpr std::size_t kMinImagesPerSample = 2;

/// One source episode in the corpus ingestion format
/// {episode_id, turns: [{speaker, text}]}.
struct Episode {
    std::string episode_id;
    Transcript transcript;  ///< canonicalized
};

Episode episode_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Episode& e);
/// Converts a plain-text labeled transcript into an Episode.
Episode episode_from_text(std::string_view raw, std::string episode_id, const ParseConfig& cfg = {});

struct FilterCriteria {
    std::size_t required_speakers = 2;
    std::size_t min_words = 500;
    std::size_t min_turns = 8;
    double max_speaker_share = 0.8;  ///< largest single-speaker share of words
};

struct FilterOutcome {
    std::vector<Episode> kept;
    std::vector<std::pair<std::string, std::string>> rejected;  ///< (episode_id, reason)
};

/// Reason the episode fails the criteria, or empty when it passes.
std::optional<std::string> filter_reason(const Episode& e, const FilterCriteria& c);
FilterOutcome filter_episodes(const std::vector<Episode>& episodes, const FilterCriteria& c);

struct WordBand {
    std::size_t min_words = 500;
    std::size_t max_words = 2000;
    std::size_t target_min = 900;
    std::size_t target_max = 1100;

    bool accepts(std::size_t words) const { return words >= min_words && words <= max_words; }
    /// 0 inside the target window, otherwise the distance to it in words.
    std::size_t distance_to_target(std::size_t words) const;
};

struct Excerpt {
    std::string excerpt_id;
    std::string episode_id;
    std::size_t first_turn = 0;
    std::size_t last_turn = 0;  ///< inclusive
    Transcript transcript;
    std::size_t word_count = 0;
    std::vector<std::string> speaker_labels;
};

nlohmann::json to_json(const Excerpt& e);
Excerpt excerpt_from_json(const nlohmann::json& j);

/// Candidate span proposed by an extractor, in episode turn indices.
struct SpanCandidate {
    std::size_t first_turn = 0;
    std::size_t last_turn = 0;
    std::string reason;
};

class ExcerptExtractor {
public:
    virtual ~ExcerptExtractor() = default;
    /// Throws Error(ExtractorUnavailable) on transient failure.
    virtual std::vector<SpanCandidate> propose(const Episode& episode) = 0;
    virtual std::string name() const = 0;
};

class ImagePromptGenerator {
public:
    virtual ~ImagePromptGenerator() = default;
    /// Throws Error(PromptGenUnavailable) on transient failure.
    virtual std::vector<std::string> generate(const Excerpt& excerpt) = 0;
    virtual std::string name() const = 0;
};

/// Chat-completion backed stage clients. Replies are JSON
/// {"spans": [{"first_turn", "last_turn", "reason"}]} and {"prompts": [...]}.
std::unique_ptr<ExcerptExtractor> make_chat_extractor(ChatClient& client, std::string model = {});
std::unique_ptr<ImagePromptGenerator> make_chat_prompt_generator(ChatClient& client, std::string model = {});

struct ExtractOptions {
    WordBand band;
    std::size_t max_excerpts_per_episode = 1;
    RetryPolicy retry;
    ContentCache* cache = nullptr;
};

struct ExtractOutcome {
    std::vector<Excerpt> excerpts;
    std::vector<std::string> dropped;  ///< one line per invalid span
};

/// Validates proposed spans (bounds, word band, exactly two speakers) and keeps
/// the best-ranked ones, in-target spans first. Throws NoValidSpan when none
/// survive and ExtractorUnavailable after retries.
ExtractOutcome extract_excerpts(const Episode& episode, ExcerptExtractor& extractor, const ExtractOptions& opts = {});
Excerpt make_excerpt(const Episode& episode, std::size_t first_turn, std::size_t last_turn);

struct ImagePrompt {
    std::string excerpt_id;
    std::size_t scene_index = 0;  ///< 1..5
    std::string prompt_text;
};

struct PromptOptions {
    RetryPolicy retry;
    ContentCache* cache = nullptr;
};

/// Exactly five non-empty prompts. A wrong count is retried once, then
/// Error(WrongCardinality).
std::vector<ImagePrompt> generate_image_prompts(const Excerpt& excerpt, ImagePromptGenerator& generator,
                                                const PromptOptions& opts = {});

struct ImageRecord {
    std::size_t scene_index = 0;
    std::string path;  ///< relative to the output directory; empty when blocked
    bool blocked = false;
    std::string reason;
};

struct SynthOptions {
    std::filesystem::path out_dir;  ///< images land in out_dir/images/<sample_id>/scene_<k>.<ext>
    RetryPolicy retry;
    ContentCache* cache = nullptr;
};

/// One record per prompt. Blocked prompts are recorded, transient failures
/// throw ImageServiceUnavailable after retries.
std::vector<ImageRecord> synthesize_images(const std::string& sample_id, const std::vector<ImagePrompt>& prompts,
                                           ImageClient& client, const SynthOptions& opts);

struct SampleManifest {
    std::string sample_id;
    Excerpt excerpt;
    std::vector<ImagePrompt> prompts;
    std::vector<ImageRecord> images;
    std::size_t image_count = 0;
    std::size_t blocked_count = 0;

    /// image_count + blocked_count == prompts and the counts match the records.
    bool consistent() const;
};

SampleManifest make_manifest(Excerpt excerpt, std::vector<ImagePrompt> prompts, std::vector<ImageRecord> images);
nlohmann::json to_json(const SampleManifest& m);
SampleManifest manifest_from_json(const nlohmann::json& j);

std::string sanitize_id(std::string_view id);

}  // namespace vizpod
