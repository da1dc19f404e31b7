#include "vizpod/datagen.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>

#include "vizpod/error.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/text.hpp"
#include "vizpod/util.hpp"

namespace vizpod {

// ---------------------------------------------------------------------------
// Episodes and filtering

Episode episode_from_json(const nlohmann::json& j) {
    Episode e;
    e.episode_id = j.at("episode_id").get<std::string>();
    nlohmann::json tj = {{"id", e.episode_id}, {"turns", j.at("turns")}};
    e.transcript = canonicalize(transcript_from_json(tj));
    return e;
}

nlohmann::json to_json(const Episode& e) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : e.transcript.turns) turns.push_back({{"speaker", t.speaker.label()}, {"text", t.text}});
    return {{"episode_id", e.episode_id}, {"turns", std::move(turns)}};
}

Episode episode_from_text(std::string_view raw, std::string episode_id, const ParseConfig& cfg) {
    Episode e;
    e.transcript = parse_transcript(raw, cfg, episode_id);
    if (!cfg.merge_adjacent_same_speaker) e.transcript = canonicalize(std::move(e.transcript));
    e.episode_id = std::move(episode_id);
    return e;
}

std::optional<std::string> filter_reason(const Episode& e, const FilterCriteria& c) {
    const auto& t = e.transcript;
    const auto who = speakers(t);
    if (who.size() != c.required_speakers) {
        return fmt::format("{} speakers (need {})", who.size(), c.required_speakers);
    }
    if (t.total_words < c.min_words) return fmt::format("{} words < {}", t.total_words, c.min_words);
    if (t.turns.size() < c.min_turns) return fmt::format("{} turns < {}", t.turns.size(), c.min_turns);
    std::map<std::string, std::size_t> words;
    for (const auto& turn : t.turns) words[turn.speaker.key()] += turn.word_count;
    std::size_t top = 0;
    for (const auto& [_, w] : words) top = std::max(top, w);
    const double share = static_cast<double>(top) / static_cast<double>(t.total_words);
    if (share > c.max_speaker_share) {
        return fmt::format("dominant speaker share {:.3f} > {:.3f}", share, c.max_speaker_share);
    }
    return std::nullopt;
}

FilterOutcome filter_episodes(const std::vector<Episode>& episodes, const FilterCriteria& c) {
    FilterOutcome out;
    for (const auto& e : episodes) {
        if (auto reason = filter_reason(e, c)) {
            out.rejected.emplace_back(e.episode_id, *reason);
        } else {
            out.kept.push_back(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Excerpts

std::size_t WordBand::distance_to_target(std::size_t words) const {
    if (words < target_min) return target_min - words;
    if (words > target_max) return words - target_max;
    return 0;
}

std::string sanitize_id(std::string_view id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

Excerpt make_excerpt(const Episode& episode, std::size_t first_turn, std::size_t last_turn) {
    const auto& turns = episode.transcript.turns;
    if (first_turn > last_turn || last_turn >= turns.size()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("span [{}, {}] outside {} turns", first_turn, last_turn,
                                                            turns.size()));
    }
    Excerpt ex;
    ex.episode_id = episode.episode_id;
    ex.first_turn = first_turn;
    ex.last_turn = last_turn;
    ex.excerpt_id = sanitize_id(fmt::format("{}-t{}-{}", episode.episode_id, first_turn, last_turn));
    ex.transcript.source_id = ex.excerpt_id;
    ex.transcript.turns.assign(turns.begin() + static_cast<std::ptrdiff_t>(first_turn),
                               turns.begin() + static_cast<std::ptrdiff_t>(last_turn) + 1);
    ex.transcript = canonicalize(std::move(ex.transcript));
    ex.word_count = ex.transcript.total_words;
    for (const auto& s : speakers(ex.transcript)) ex.speaker_labels.push_back(s.label());
    return ex;
}

nlohmann::json to_json(const Excerpt& e) {
    return {{"excerpt_id", e.excerpt_id},
            {"episode_id", e.episode_id},
            {"first_turn", e.first_turn},
            {"last_turn", e.last_turn},
            {"word_count", e.word_count},
            {"speakers", e.speaker_labels},
            {"text", to_labeled_text(e.transcript)}};
}

Excerpt excerpt_from_json(const nlohmann::json& j) {
    Excerpt e;
    e.excerpt_id = j.at("excerpt_id").get<std::string>();
    e.episode_id = j.at("episode_id").get<std::string>();
    e.first_turn = j.value("first_turn", std::size_t{0});
    e.last_turn = j.value("last_turn", std::size_t{0});
    e.transcript = parse_transcript(j.at("text").get<std::string>(), {}, e.excerpt_id);
    e.word_count = e.transcript.total_words;
    for (const auto& s : speakers(e.transcript)) e.speaker_labels.push_back(s.label());
    return e;
}

namespace {

std::string numbered_turns(const Episode& e) {
    std::string out;
    for (const auto& t : e.transcript.turns) {
        out += fmt::format("[{}] ({} words) {}: {}\n", t.index, t.word_count, t.speaker.label(), t.text);
    }
    return out;
}

class ChatExtractor final : public ExcerptExtractor {
public:
    ChatExtractor(ChatClient& client, std::string model) : client_(client), model_(std::move(model)) {}

    std::vector<SpanCandidate> propose(const Episode& episode) override {
        ChatRequest req;
        req.model = model_;
        req.messages.push_back({"system",
                                "You select passages from podcast transcripts for an image-generation dataset.", {}});
        req.messages.push_back(
            {"user",
             "The episode below has numbered turns. Find contiguous segments containing rich visual description: "
             "scenes, objects and actions a listener could vividly picture. Each segment must include both "
             "speakers and should run roughly 900 to 1,100 words (never under 500 or over 2,000).\n\n" +
                 numbered_turns(episode) +
                 "\nReply with JSON only: {\"spans\": [{\"first_turn\": <int>, \"last_turn\": <int>, \"reason\": "
                 "\"<why it is visual>\"}]}",
             {}});
        const std::string reply = client_.complete(req);
        const auto j = first_json_object(reply, [](const nlohmann::json& o) {
            return o.contains("spans") && o["spans"].is_array();
        });
        if (!j) throw Error(ErrorCode::NoValidSpan, "extractor reply has no {\"spans\": [...]} object");
        std::vector<SpanCandidate> spans;
        for (const auto& s : (*j)["spans"]) {
            if (!s.contains("first_turn") || !s.contains("last_turn")) continue;
            if (!s["first_turn"].is_number_integer() || !s["last_turn"].is_number_integer()) continue;
            const auto first = s["first_turn"].get<long long>();
            const auto last = s["last_turn"].get<long long>();
            if (first < 0 || last < 0) continue;
            spans.push_back({static_cast<std::size_t>(first), static_cast<std::size_t>(last),
                             s.value("reason", std::string())});
        }
        return spans;
    }

    std::string name() const override { return "chat-extractor:" + client_.name(); }

private:
    ChatClient& client_;
    std::string model_;
};

class ChatPromptGenerator final : public ImagePromptGenerator {
public:
    ChatPromptGenerator(ChatClient& client, std::string model) : client_(client), model_(std::move(model)) {}

    std::vector<std::string> generate(const Excerpt& excerpt) override {
        ChatRequest req;
        req.model = model_;
        req.messages.push_back(
            {"user",
             "Read this podcast excerpt and write exactly five detailed text-to-image prompts, one per key visual "
             "scene, in the order the scenes occur. Be concrete about objects, materials, colours and lighting, and "
             "stay faithful to what the speakers describe.\n\n" +
                 to_labeled_text(excerpt.transcript) +
                 "\nReply with JSON only: {\"prompts\": [\"<scene 1>\", \"<scene 2>\", \"<scene 3>\", \"<scene 4>\", "
                 "\"<scene 5>\"]}",
             {}});
        const std::string reply = client_.complete(req);
        const auto j = first_json_object(reply, [](const nlohmann::json& o) {
            return o.contains("prompts") && o["prompts"].is_array();
        });
        if (!j) return {};
        std::vector<std::string> prompts;
        for (const auto& p : (*j)["prompts"]) {
            if (p.is_string()) prompts.push_back(p.get<std::string>());
        }
        return prompts;
    }

    std::string name() const override { return "chat-promptgen:" + client_.name(); }

private:
    ChatClient& client_;
    std::string model_;
};

nlohmann::json spans_json(const std::vector<SpanCandidate>& spans) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : spans) out.push_back({{"first_turn", s.first_turn}, {"last_turn", s.last_turn}, {"reason", s.reason}});
    return out;
}

std::string episode_digest(const Episode& e) { return util::sha256_hex(to_json(e).dump()); }

}  // namespace

std::unique_ptr<ExcerptExtractor> make_chat_extractor(ChatClient& client, std::string model) {
    return std::make_unique<ChatExtractor>(client, std::move(model));
}

std::unique_ptr<ImagePromptGenerator> make_chat_prompt_generator(ChatClient& client, std::string model) {
    return std::make_unique<ChatPromptGenerator>(client, std::move(model));
}

ExtractOutcome extract_excerpts(const Episode& episode, ExcerptExtractor& extractor, const ExtractOptions& opts) {
    const std::string request = "extract:" + extractor.name() + ":" + episode_digest(episode);
    const std::string payload = cached_call(opts.cache, request, [&] {
        return spans_json(with_retry(opts.retry, [&] { return extractor.propose(episode); }, extractor.name()))
            .dump();
    });

    ExtractOutcome out;
    struct Ranked {
        std::size_t distance;
        std::size_t order;
        Excerpt excerpt;
    };
    std::vector<Ranked> valid;
    std::size_t order = 0;
    for (const auto& s : nlohmann::json::parse(payload)) {
        const auto first = s.at("first_turn").get<std::size_t>();
        const auto last = s.at("last_turn").get<std::size_t>();
        const std::string where = fmt::format("{} [{}, {}]", episode.episode_id, first, last);
        if (first > last || last >= episode.transcript.turns.size()) {
            out.dropped.push_back(where + ": span outside the episode");
            continue;
        }
        Excerpt ex = make_excerpt(episode, first, last);
        if (!opts.band.accepts(ex.word_count)) {
            out.dropped.push_back(fmt::format("{}: {} words outside [{}, {}]", where, ex.word_count,
                                              opts.band.min_words, opts.band.max_words));
            continue;
        }
        if (ex.speaker_labels.size() != 2) {
            out.dropped.push_back(fmt::format("{}: {} speakers, need exactly 2", where, ex.speaker_labels.size()));
            continue;
        }
        valid.push_back({opts.band.distance_to_target(ex.word_count), order++, std::move(ex)});
    }
    for (const auto& d : out.dropped) spdlog::info("dropped span {}", d);
    if (valid.empty()) {
        throw Error(ErrorCode::NoValidSpan, episode.episode_id + ": no proposed span passed validation");
    }

    std::stable_sort(valid.begin(), valid.end(), [](const Ranked& a, const Ranked& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.order < b.order;
    });
    for (auto& r : valid) {
        if (out.excerpts.size() >= opts.max_excerpts_per_episode) break;
        // overlapping spans would duplicate dialogue across samples
        const bool overlaps = std::any_of(out.excerpts.begin(), out.excerpts.end(), [&](const Excerpt& kept) {
            return r.excerpt.first_turn <= kept.last_turn && kept.first_turn <= r.excerpt.last_turn;
        });
        if (!overlaps) out.excerpts.push_back(std::move(r.excerpt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prompts and images

std::vector<ImagePrompt> generate_image_prompts(const Excerpt& excerpt, ImagePromptGenerator& generator,
                                                const PromptOptions& opts) {
    const std::string base = "promptgen:" + generator.name() + ":" + util::sha256_hex(to_json(excerpt).dump());
    std::vector<std::string> texts;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        // the attempt number is part of the key so a retry really re-asks the provider
        const std::string payload = cached_call(opts.cache, base + ":attempt" + std::to_string(attempt), [&] {
            return nlohmann::json(with_retry(opts.retry, [&] { return generator.generate(excerpt); }, generator.name()))
                .dump();
        });
        texts = nlohmann::json::parse(payload).get<std::vector<std::string>>();
        const bool all_filled = std::all_of(texts.begin(), texts.end(),
                                            [](const std::string& t) { return !text::trim(t).empty(); });
        if (texts.size() == kScenesPerExcerpt && all_filled) break;
        if (attempt == 2) {
            throw Error(ErrorCode::WrongCardinality,
                        fmt::format("{}: expected {} non-empty prompts, got {}", excerpt.excerpt_id, kScenesPerExcerpt,
                                    texts.size()));
        }
        spdlog::warn("{}: prompt generator returned {} prompts; asking again", excerpt.excerpt_id, texts.size());
    }

    std::vector<ImagePrompt> prompts;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        prompts.push_back({excerpt.excerpt_id, i + 1, text::trim(texts[i])});
    }
    return prompts;
}

std::vector<ImageRecord> synthesize_images(const std::string& sample_id, const std::vector<ImagePrompt>& prompts,
                                           ImageClient& client, const SynthOptions& opts) {
    std::vector<ImageRecord> records;
    const std::string dir_id = sanitize_id(sample_id);
    for (const auto& p : prompts) {
        const std::string payload = cached_call(opts.cache, "image:" + client.name() + ":" + p.prompt_text, [&] {
            return with_retry(opts.retry, [&] { return client.generate(p.prompt_text); }, client.name()).to_json().dump();
        });
        const ImageResult result = ImageResult::from_json(nlohmann::json::parse(payload));

        ImageRecord rec;
        rec.scene_index = p.scene_index;
        if (result.status == ImageResult::Status::Blocked) {
            rec.blocked = true;
            rec.reason = result.reason;
        } else {
            const std::string rel = fmt::format("images/{}/scene_{}.{}", dir_id, p.scene_index, sanitize_id(result.format));
            const auto full = opts.out_dir / rel;
            std::error_code ec;
            if (!std::filesystem::exists(full, ec) || util::read_file(full) != result.bytes) {
                util::write_file_atomic(full, result.bytes);
            }
            rec.path = rel;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Manifests

bool SampleManifest::consistent() const {
    std::size_t ok = 0;
    std::size_t blocked = 0;
    for (const auto& r : images) (r.blocked ? blocked : ok) += 1;
    return ok == image_count && blocked == blocked_count && image_count + blocked_count == prompts.size();
}

SampleManifest make_manifest(Excerpt excerpt, std::vector<ImagePrompt> prompts, std::vector<ImageRecord> images) {
    SampleManifest m;
    m.sample_id = excerpt.excerpt_id;
    m.excerpt = std::move(excerpt);
    m.prompts = std::move(prompts);
    m.images = std::move(images);
    for (const auto& r : m.images) (r.blocked ? m.blocked_count : m.image_count) += 1;
    return m;
}

nlohmann::json to_json(const SampleManifest& m) {
    nlohmann::json prompts = nlohmann::json::array();
    for (const auto& p : m.prompts) prompts.push_back({{"scene_index", p.scene_index}, {"prompt", p.prompt_text}});
    nlohmann::json images = nlohmann::json::array();
    for (const auto& r : m.images) {
        if (r.blocked) {
            images.push_back({{"scene_index", r.scene_index}, {"blocked", true}, {"reason", r.reason}});
        } else {
            images.push_back({{"scene_index", r.scene_index}, {"path", r.path}});
        }
    }
    return {{"sample_id", m.sample_id},
            {"excerpt", to_json(m.excerpt)},
            {"prompts", std::move(prompts)},
            {"images", std::move(images)},
            {"image_count", m.image_count},
            {"blocked_count", m.blocked_count}};
}

SampleManifest manifest_from_json(const nlohmann::json& j) {
    SampleManifest m;
    m.sample_id = j.at("sample_id").get<std::string>();
    m.excerpt = excerpt_from_json(j.at("excerpt"));
    for (const auto& p : j.at("prompts")) {
        m.prompts.push_back({m.sample_id, p.at("scene_index").get<std::size_t>(), p.at("prompt").get<std::string>()});
    }
    for (const auto& r : j.at("images")) {
        ImageRecord rec;
        rec.scene_index = r.at("scene_index").get<std::size_t>();
        rec.blocked = r.value("blocked", false);
        rec.reason = r.value("reason", std::string());
        rec.path = r.value("path", std::string());
        m.images.push_back(std::move(rec));
    }
    m.image_count = j.at("image_count").get<std::size_t>();
    m.blocked_count = j.value("blocked_count", std::size_t{0});
    return m;
}

}  // namespace vizpod
