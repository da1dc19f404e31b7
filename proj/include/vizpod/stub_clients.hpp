/// @file stub_clients.hpp
/// @brief Deterministic offline stand-ins for every model-backed client.
///
/// Used by --dry-run and the tests. Each stub's output is a pure function of
/// its input (and construction options), so pipeline reruns are reproducible.
#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "vizpod/clients.hpp"
#include "vizpod/datagen.hpp"
#include "vizpod/grounding.hpp"

namespace vizpod::stub {

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Proposes the consecutive-turn window whose word count is nearest 1000.
class StubExcerptExtractor : public ExcerptExtractor {
public:
    struct Options {
        bool emit_invalid_span = false;  ///< prepend an out-of-range span
        std::size_t target_words = 1000;
    };
    StubExcerptExtractor() = default;
    explicit StubExcerptExtractor(Options o) : opts_(o) {}
    std::vector<SpanCandidate> propose(const Episode& episode) override;
    std::string name() const override { return "stub-extractor"; }

private:
    Options opts_;
};

/// One prompt per fifth of the excerpt, built from its most frequent content words.
class StubImagePromptGenerator : public ImagePromptGenerator {
public:
    enum class Mode { Normal, AlwaysFour, FourThenFive };
    StubImagePromptGenerator() = default;
    explicit StubImagePromptGenerator(Mode m) : mode_(m) {}
    std::vector<std::string> generate(const Excerpt& excerpt) override;
    std::string name() const override { return "stub-promptgen"; }
    std::size_t calls() const { return calls_; }

private:
    Mode mode_ = Mode::Normal;
    std::atomic<std::size_t> calls_{0};
    std::mutex mu_;
    std::set<std::string> seen_;
};

/// Returns an 8×8 binary PPM whose header comment carries the prompt, so the
/// stub embedder can recover the depicted text.
class StubImageClient : public ImageClient {
public:
    struct Options {
        std::vector<std::string> restricted_terms = {"weapon", "gore"};
        unsigned block_permille = 0;  ///< additionally block this share of prompts, by prompt hash
        unsigned unavailable_first_calls = 0;  ///< throw ImageServiceUnavailable for the first N calls
    };
    StubImageClient() = default;
    explicit StubImageClient(Options o) : opts_(std::move(o)) {}
    ImageResult generate(const std::string& prompt) override;
    std::string name() const override { return "stub-image"; }
    std::size_t calls() const { return calls_; }

private:
    Options opts_;
    std::atomic<std::size_t> calls_{0};
};

/// Text of a stub PPM's "# prompt:" comment, or empty.
std::string ppm_prompt(std::string_view bytes);
std::string make_ppm(std::string_view prompt);

/// Signed feature hashing over lowercase word tokens. Images are embedded
/// through their PPM prompt comment, otherwise from a byte hash.
class StubEmbeddingProvider : public EmbeddingProvider {
public:
    explicit StubEmbeddingProvider(std::size_t dim = 256) : dim_(dim) {}
    EmbeddingVector embed_text(std::string_view text) override;
    EmbeddingVector embed_image(std::string_view image_bytes) override;
    std::string name() const override { return "stub-embed"; }
    std::size_t calls() const { return calls_; }

private:
    std::size_t dim_;
    std::atomic<std::size_t> calls_{0};
};

/// Fixed lookup tables; unknown keys throw InvalidArgument.
class TableEmbeddingProvider : public EmbeddingProvider {
public:
    std::map<std::string, std::vector<double>> texts;
    std::map<std::string, std::vector<double>> images;
    EmbeddingVector embed_text(std::string_view text) override;
    EmbeddingVector embed_image(std::string_view image_bytes) override;
    std::string name() const override { return "table-embed"; }
};

/// Chat-completion judge stand-in reading the two transcripts out of the prompt.
class StubJudge : public ChatClient {
public:
    enum class Mode {
        Content,         ///< prefers the transcript with longer average turns
        AlwaysA,         ///< pure position bias
        Garbage,         ///< replies without any verdict object
        Unavailable,     ///< always throws JudgeUnavailable
    };
    StubJudge(std::string id, Mode m, unsigned unavailable_first_calls = 0)
        : id_(std::move(id)), mode_(m), flaky_(unavailable_first_calls) {}
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return id_; }
    std::size_t calls() const { return calls_; }

private:
    std::string id_;
    Mode mode_;
    unsigned flaky_;
    std::atomic<std::size_t> calls_{0};
};

/// Manually advanced clock, in seconds.
class FakeClock {
public:
    double now() const {
        std::lock_guard lk(mu_);
        return t_;
    }
    void advance(double s) {
        std::lock_guard lk(mu_);
        t_ += s;
    }

private:
    mutable std::mutex mu_;
    double t_ = 0.0;
};

/// Vision-language model stand-in producing a labeled dialogue about the
/// attached stub images. Base produces short, descriptive turns; Finetuned
/// longer anecdotal ones.
class StubVlm : public ChatClient {
public:
    enum class Profile { Base, Finetuned };
    struct Options {
        Profile profile = Profile::Finetuned;
        FakeClock* clock = nullptr;
        double seconds_per_call = 20.0;
        double seconds_per_word = 0.02;
        std::size_t target_words = 800;
        bool empty_reply = false;
    };
    StubVlm(std::string id, Options o) : id_(std::move(id)), opts_(o) {}
    std::string complete(const ChatRequest& request) override;
    std::string name() const override { return id_; }

private:
    std::string id_;
    Options opts_;
};

/// Stage clients by name, for the dry-run pipeline.
struct StubSuite {
    StubExcerptExtractor extractor;
    StubImagePromptGenerator promptgen;
    StubImageClient images;
    StubEmbeddingProvider embedder;
};

}  // namespace vizpod::stub
