#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_support.hpp"
#include "vizpod/datagen.hpp"
#include "vizpod/error.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/pipeline.hpp"
#include "vizpod/stub_clients.hpp"

using namespace vizpod;

namespace {

/// Alternating two-speaker episode with the given per-turn word counts.
Episode make_episode(const std::string& id, const std::vector<std::size_t>& turn_words,
                     const std::vector<std::string>& names = {"Host", "Guest"}) {
    std::string raw;
    for (std::size_t i = 0; i < turn_words.size(); ++i) {
        raw += names[i % names.size()] + ":";
        for (std::size_t w = 0; w < turn_words[i]; ++w) raw += " w" + std::to_string((i * 31 + w) % 97);
        raw += "\n";
    }
    return episode_from_text(raw, id);
}

class FixedExtractor : public ExcerptExtractor {
public:
    explicit FixedExtractor(std::vector<SpanCandidate> spans) : spans_(std::move(spans)) {}
    std::vector<SpanCandidate> propose(const Episode&) override {
        ++calls;
        return spans_;
    }
    std::string name() const override { return "fixed"; }
    std::size_t calls = 0;

private:
    std::vector<SpanCandidate> spans_;
};

class FixedPromptGen : public ImagePromptGenerator {
public:
    explicit FixedPromptGen(std::vector<std::string> p) : prompts_(std::move(p)) {}
    std::vector<std::string> generate(const Excerpt&) override { return prompts_; }
    std::string name() const override { return "fixed"; }

private:
    std::vector<std::string> prompts_;
};

std::vector<ImagePrompt> five_prompts(const std::string& id, std::size_t blocked) {
    std::vector<ImagePrompt> out;
    for (std::size_t k = 1; k <= kScenesPerExcerpt; ++k) {
        const bool block = k > kScenesPerExcerpt - blocked;
        out.push_back({id, k, block ? "a scene with a weapon " + std::to_string(k) : "a calm kitchen " + std::to_string(k)});
    }
    return out;
}

}  // namespace

TEST(Filter, MonologueExcluded) {
    const auto e = make_episode("mono", std::vector<std::size_t>(15, 70), {"Host"});
    const auto reason = filter_reason(e, {});
    ASSERT_TRUE(reason.has_value());
    EXPECT_NE(reason->find("1 speakers"), std::string::npos);
}

TEST(Filter, TwoSpeakersThousandWordsIncluded) {
    std::vector<std::size_t> turns(15, 66);
    turns[0] = 76;
    const auto e = make_episode("ok", turns);
    ASSERT_EQ(e.transcript.total_words, 1000u);
    EXPECT_FALSE(filter_reason(e, {}).has_value());
    EXPECT_EQ(filter_episodes({e}, {}).kept.size(), 1u);
}

TEST(Filter, ThresholdSweepMatchesBruteForce) {
    std::mt19937 rng(99);
    std::vector<Episode> corpus;
    for (int i = 0; i < 10; ++i) {
        std::uniform_int_distribution<std::size_t> nturns(3, 20), words(5, 120);
        std::vector<std::size_t> tw(nturns(rng));
        for (auto& w : tw) w = words(rng);
        std::vector<std::string> names = i % 4 == 0 ? std::vector<std::string>{"A"}
                                         : i % 4 == 1 ? std::vector<std::string>{"A", "B", "C"}
                                                      : std::vector<std::string>{"A", "B"};
        corpus.push_back(make_episode("e" + std::to_string(i), tw, names));
    }
    // Independent predicate on the raw per-turn data.
    auto brute = [](const Episode& e, const FilterCriteria& c) {
        std::map<std::string, std::size_t> per;
        std::size_t total = 0;
        for (const auto& t : e.transcript.turns) {
            per[t.speaker.key()] += word_count(t.text);
            total += word_count(t.text);
        }
        std::size_t top = 0;
        for (auto& [k, v] : per) top = std::max(top, v);
        return per.size() == c.required_speakers && total >= c.min_words &&
               e.transcript.turns.size() >= c.min_turns && top <= c.max_speaker_share * total;
    };
    std::size_t checked = 0;
    for (std::size_t mw : {0, 200, 500, 900}) {
        for (std::size_t mt : {0, 5, 8, 12}) {
            for (double share : {0.5, 0.6, 0.8, 1.0}) {
                FilterCriteria c{2, mw, mt, share};
                const auto out = filter_episodes(corpus, c);
                std::set<std::string> kept;
                for (const auto& e : out.kept) kept.insert(e.episode_id);
                for (const auto& e : corpus) {
                    EXPECT_EQ(kept.count(e.episode_id) == 1, brute(e, c)) << e.episode_id << " " << mw << " " << mt;
                    ++checked;
                }
                EXPECT_EQ(out.kept.size() + out.rejected.size(), corpus.size());
            }
        }
    }
    EXPECT_EQ(checked, 640u);
}

TEST(Extract, NineHundredFiftyWordSpanAccepted) {
    std::vector<std::size_t> turns(20, 95);  // spans of 10 turns are 950 words
    const auto e = make_episode("ep", turns);
    FixedExtractor x({{0, 9, "visual"}});
    const auto out = extract_excerpts(e, x);
    ASSERT_EQ(out.excerpts.size(), 1u);
    EXPECT_EQ(out.excerpts[0].word_count, 950u);
    EXPECT_EQ(out.excerpts[0].speaker_labels.size(), 2u);
}

TEST(Extract, ShortSpanIsNoValidSpan) {
    const auto e = make_episode("ep", std::vector<std::size_t>(20, 50));
    FixedExtractor x({{0, 5, "too short"}});
    try {
        extract_excerpts(e, x);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::NoValidSpan);
    }
}

TEST(Extract, InvalidSpansDroppedWithReasons) {
    const auto e = make_episode("ep", std::vector<std::size_t>(30, 100));
    FixedExtractor x({{40, 50, "out of range"}, {3, 2, "reversed"}, {0, 0, "single speaker"}, {10, 19, "good"}});
    const auto out = extract_excerpts(e, x);
    ASSERT_EQ(out.excerpts.size(), 1u);
    EXPECT_EQ(out.excerpts[0].first_turn, 10u);
    EXPECT_EQ(out.dropped.size(), 3u);
}

TEST(Extract, RanksInTargetFirst) {
    const auto e = make_episode("ep", std::vector<std::size_t>(30, 100));
    FixedExtractor x({{14, 18, "500"}, {0, 13, "1400"}, {20, 29, "1000"}, {22, 26, "overlap"}});
    ExtractOptions o;
    o.max_excerpts_per_episode = 2;
    const auto out = extract_excerpts(e, x, o);
    ASSERT_EQ(out.excerpts.size(), 2u);
    EXPECT_EQ(out.excerpts[0].word_count, 1000u);
    EXPECT_EQ(out.excerpts[1].word_count, 1400u);
}

TEST(Extract, PastaExcerptAcceptedWithWidenedBand) {
    const auto e = episode_from_text(tsupport::slurp(tsupport::fixture("pasta_excerpt.txt")), "pasta");
    const auto n = e.transcript.turns.size();
    FixedExtractor x({{0, n - 1, "whole excerpt"}});
    ExtractOptions o;
    o.band.min_words = 500;
    o.band.max_words = 1000000;
    const auto out = extract_excerpts(e, x, o);
    ASSERT_EQ(out.excerpts.size(), 1u);
    EXPECT_GE(out.excerpts[0].word_count, 500u);
    EXPECT_EQ(out.excerpts[0].speaker_labels, (std::vector<std::string>{"Host", "Guest"}));
}

TEST(Extract, UnavailableAfterRetries) {
    struct Down : ExcerptExtractor {
        std::vector<SpanCandidate> propose(const Episode&) override {
            throw Error(ErrorCode::ExtractorUnavailable, "503");
        }
        std::string name() const override { return "down"; }
    } down;
    ExtractOptions o;
    o.retry = RetryPolicy::no_wait(2);
    const auto e = make_episode("ep", std::vector<std::size_t>(20, 95));
    try {
        extract_excerpts(e, down, o);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::ExtractorUnavailable);
    }
}

TEST(Prompts, FivePromptsSucceed) {
    const auto e = make_episode("ep", std::vector<std::size_t>(20, 95));
    const auto ex = make_excerpt(e, 0, 9);
    stub::StubImagePromptGenerator g;
    const auto ps = generate_image_prompts(ex, g);
    ASSERT_EQ(ps.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(ps[i].scene_index, i + 1);
        EXPECT_FALSE(ps[i].prompt_text.empty());
        EXPECT_EQ(ps[i].excerpt_id, ex.excerpt_id);
    }
}

TEST(Prompts, FourIsWrongCardinalityAfterOneRetry) {
    const auto ex = make_excerpt(make_episode("ep", std::vector<std::size_t>(20, 95)), 0, 9);
    stub::StubImagePromptGenerator g(stub::StubImagePromptGenerator::Mode::AlwaysFour);
    try {
        generate_image_prompts(ex, g);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::WrongCardinality);
    }
    EXPECT_EQ(g.calls(), 2u);
    stub::StubImagePromptGenerator recovering(stub::StubImagePromptGenerator::Mode::FourThenFive);
    EXPECT_EQ(generate_image_prompts(ex, recovering).size(), 5u);
    EXPECT_EQ(recovering.calls(), 2u);
}

TEST(Prompts, PastaFixtureScenes) {
    const auto expected = nlohmann::json::parse(tsupport::slurp(tsupport::fixture("pasta_prompts.json")))
                              .get<std::vector<std::string>>();
    const auto e = episode_from_text(tsupport::slurp(tsupport::fixture("pasta_excerpt.txt")), "pasta");
    const auto ex = make_excerpt(e, 0, e.transcript.turns.size() - 1);
    FixedPromptGen g(expected);
    const auto ps = generate_image_prompts(ex, g);
    ASSERT_EQ(ps.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(ps[i].prompt_text, expected[i]);
    EXPECT_NE(ps[1].prompt_text.find("sticky, shaggy pasta dough"), std::string::npos);
}

TEST(Synth, BlockedCounts) {
    tsupport::ScratchDir dir("synth");
    stub::StubImageClient client;
    SynthOptions o;
    o.out_dir = dir.path();
    for (auto [blocked, expected] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 5}, {1, 4}, {4, 1}}) {
        const auto id = "s" + std::to_string(blocked);
        const auto prompts = five_prompts(id, blocked);
        const auto recs = synthesize_images(id, prompts, client, o);
        ASSERT_EQ(recs.size(), 5u);
        const auto m = make_manifest(Excerpt{id, "ep"}, prompts, recs);
        EXPECT_EQ(m.image_count, expected);
        EXPECT_EQ(m.blocked_count, blocked);
        EXPECT_TRUE(m.consistent());
        for (const auto& r : recs) {
            if (!r.blocked) EXPECT_TRUE(std::filesystem::exists(dir.path() / r.path)) << r.path;
        }
    }
}

TEST(Synth, StageExcludesSamplesBelowMinimum) {
    tsupport::ScratchDir dir("synth-stage");
    stub::StubImageClient client;
    std::vector<PromptedExcerpt> prompted;
    for (std::size_t blocked : {0u, 1u, 4u}) {
        const auto id = "s" + std::to_string(blocked);
        prompted.push_back({Excerpt{id, "ep"}, five_prompts(id, blocked)});
    }
    PipelineOptions o;
    o.out_dir = dir.path();
    const auto manifests = run_synth_stage(prompted, client, o);
    ASSERT_EQ(manifests.size(), 2u);
    EXPECT_EQ(manifests[1].image_count, 4u);
    const auto excluded = read_jsonl(dir.path() / "excluded.jsonl");
    ASSERT_EQ(excluded.size(), 1u);
    EXPECT_EQ(excluded[0]["sample_id"], "s4");
    EXPECT_NE(excluded[0]["reason"].get<std::string>().find("only 1 images"), std::string::npos);
}

TEST(Synth, TransientFailureRetriedThenSucceeds) {
    tsupport::ScratchDir dir("synth-retry");
    stub::StubImageClient client({{}, 0, 2});
    SynthOptions o;
    o.out_dir = dir.path();
    o.retry = RetryPolicy::no_wait(3);
    const auto recs = synthesize_images("s", five_prompts("s", 0), client, o);
    EXPECT_EQ(recs.size(), 5u);
    stub::StubImageClient down({{}, 0, 100});
    EXPECT_THROW(synthesize_images("s", five_prompts("s", 0), down, o), Error);
}

TEST(Manifest, JsonRoundTripAndConsistency) {
    const auto e = make_episode("ep", std::vector<std::size_t>(20, 95));
    auto ex = make_excerpt(e, 0, 9);
    std::vector<ImageRecord> recs;
    for (std::size_t k = 1; k <= 5; ++k) recs.push_back({k, k == 3 ? "" : "images/x.ppm", k == 3, k == 3 ? "nsfw" : ""});
    const auto m = make_manifest(ex, five_prompts(ex.excerpt_id, 0), recs);
    EXPECT_TRUE(m.consistent());
    const auto back = manifest_from_json(to_json(m));
    EXPECT_EQ(to_json(back), to_json(m));
    auto broken = m;
    broken.image_count = 5;
    EXPECT_FALSE(broken.consistent());
}

TEST(Manifest, ResumableThroughCache) {
    tsupport::ScratchDir dir("resume");
    ContentCache cache(dir.path() / "cache");
    const auto e = make_episode("ep", std::vector<std::size_t>(20, 95));
    const auto ex = make_excerpt(e, 0, 9);
    stub::StubImagePromptGenerator g;
    stub::StubImageClient images;
    PromptOptions po;
    po.cache = &cache;
    SynthOptions so;
    so.out_dir = dir.path();
    so.cache = &cache;
    const auto p1 = generate_image_prompts(ex, g, po);
    const auto r1 = synthesize_images(ex.excerpt_id, p1, images, so);
    const auto calls_g = g.calls(), calls_i = images.calls();
    const auto p2 = generate_image_prompts(ex, g, po);
    const auto r2 = synthesize_images(ex.excerpt_id, p2, images, so);
    EXPECT_EQ(g.calls(), calls_g);
    EXPECT_EQ(images.calls(), calls_i);
    EXPECT_EQ(to_json(make_manifest(ex, p1, r1)), to_json(make_manifest(ex, p2, r2)));
}
