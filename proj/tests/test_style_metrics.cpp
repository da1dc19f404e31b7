#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "test_support.hpp"
#include "vizpod/error.hpp"
#include "vizpod/style_metrics.hpp"

using namespace vizpod;
using tsupport::fixture;
using tsupport::slurp;

namespace {

Transcript uniform(std::size_t turns, std::size_t words_per_turn) {
    std::string raw;
    for (std::size_t k = 0; k < turns; ++k) {
        raw += k % 2 ? "Guest:" : "Host:";
        for (std::size_t w = 0; w < words_per_turn; ++w) raw += " w" + std::to_string(k * 1000 + w);
        raw += "\n";
    }
    return parse_transcript(raw);
}

Transcript sample(const std::string& name) { return parse_transcript(slurp(fixture("sample_transcripts/" + name))); }

}  // namespace

TEST(StyleMetrics, AvgTurnLength) {
    EXPECT_DOUBLE_EQ(avg_turn_length(uniform(4, 10)), 10.0);
    EXPECT_DOUBLE_EQ(avg_turn_length(parse_transcript("Speaker 1: Hello there.\nSpeaker 2: Hi!")), 1.5);
}

TEST(StyleMetrics, SwitchRate) {
    EXPECT_DOUBLE_EQ(switch_rate(uniform(1, 500)), 2.0);
    EXPECT_NEAR(switch_rate(15.8, 972.1), 16.25, 0.005);
    EXPECT_NEAR(switch_rate(24.5, 918.6), 26.67, 0.005);
    EXPECT_THROW(switch_rate(1.0, 0.0), Error);
}

TEST(StyleMetrics, DistinctN) {
    EXPECT_DOUBLE_EQ(distinct_n(parse_transcript("A: one two three four"), 2), 1.0);
    EXPECT_NEAR(distinct_n(parse_transcript("A: a a a a"), 2), 1.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(distinct_n(parse_transcript("A: The cat\nB: the CAT"), 2), 2.0 / 3.0);
    try {
        distinct_n(parse_transcript("A: solo"), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooShort);
    }
}

TEST(StyleMetrics, DistinctNMatchesBruteForceOnFixtures) {
    for (const auto& f : tsupport::sample_transcript_files()) {
        const auto t = sample(f);
        for (std::size_t n : {1u, 2u, 3u}) {
            EXPECT_EQ(distinct_n(t, static_cast<int>(n)), tsupport::oracle_distinct_n(t, n)) << f << " n=" << n;
        }
    }
}

TEST(StyleMetrics, DistinctNMatchesBruteForceOnRandomTranscripts) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        const auto t = parse_transcript(tsupport::random_dialogue(rng, 1 + rng() % 30));
        if (t.total_words < 2) continue;
        EXPECT_EQ(distinct_n(t, 2), tsupport::oracle_distinct_n(t, 2)) << i;
    }
}

TEST(StyleMetrics, DistinctNBounds) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto t = parse_transcript(tsupport::random_dialogue(rng, 5));
        if (t.total_words < 3) continue;
        const double d = distinct_n(t, 2);
        EXPECT_GT(d, 0.0);
        EXPECT_LE(d, 1.0);
    }
}

TEST(StyleMetrics, ReportComposition) {
    const auto r = style_report(parse_transcript("Speaker 1: Hello there.\nSpeaker 2: Hi!"));
    EXPECT_EQ(r.turn_count, 2u);
    EXPECT_EQ(r.total_words, 3u);
    EXPECT_DOUBLE_EQ(r.avg_turn_length, 1.5);
    EXPECT_NEAR(r.switch_rate, 666.7, 0.05);
    EXPECT_DOUBLE_EQ(r.distinct_n.at(2), 1.0);
}

TEST(StyleMetrics, WeddingFinetunedHasThreeSpeakers) {
    const auto who = speakers(sample("b2_wedding_32b_finetuned.txt"));
    ASSERT_EQ(who.size(), 3u);
    EXPECT_EQ(who[2].label(), "Speaker 3");
}

TEST(StyleMetrics, WeddingLargeBaseTurnCountEqualsLabeledBlocks) {
    const auto raw = slurp(fixture("sample_transcripts/b3_wedding_235b_base.txt"));
    const std::regex label("^Speaker [0-9]+:", std::regex::multiline);
    const auto blocks = std::distance(std::sregex_iterator(raw.begin(), raw.end(), label), std::sregex_iterator());
    EXPECT_EQ(style_report(parse_transcript(raw)).turn_count, static_cast<std::size_t>(blocks));
}

TEST(StyleMetrics, MonologueHasOneSpeaker) {
    EXPECT_EQ(speakers(parse_transcript("Host: a b c\nand more")).size(), 1u);
}

TEST(StyleMetrics, MeanStd) {
    const std::vector<double> flat = {10, 10, 10};
    EXPECT_DOUBLE_EQ(mean_std(flat).mean, 10.0);
    EXPECT_DOUBLE_EQ(mean_std(flat).std, 0.0);
    const std::vector<double> two = {8, 12};
    EXPECT_DOUBLE_EQ(mean_std(two).mean, 10.0);
    EXPECT_NEAR(mean_std(two).std, 2.828, 5e-4);
    EXPECT_EQ(format_mean_std(MeanStd{972.1, 83.1, 50}), "972.1 ± 83.1");
}

TEST(StyleMetrics, AggregateMacroAndPooled) {
    const auto a = style_report(uniform(10, 10));  // 100 words, avg 10
    const auto b = style_report(uniform(5, 60));   // 300 words, avg 60
    const auto c = aggregate_reports({a, b});
    EXPECT_DOUBLE_EQ(c.avg_turn_length.mean, 35.0);
    EXPECT_DOUBLE_EQ(c.pooled_turn_length, 400.0 / 15.0);
    EXPECT_DOUBLE_EQ(c.switch_rate.mean, (100.0 + 1000.0 / 60.0) / 2.0);
    EXPECT_DOUBLE_EQ(c.pooled_switch_rate, 1000.0 * 15.0 / 400.0);
    EXPECT_EQ(c.sample_count, 2u);
    EXPECT_THROW(aggregate_reports({}), Error);
}

TEST(StyleMetrics, TableHasAllRows) {
    const auto c = aggregate_reports({style_report(uniform(4, 10))});
    const auto table = format_style_table({{"32B", c, 20.39}, {"235B", c, std::nullopt}});
    for (const char* row : {"CLIPScore", "Avg. Turn Length", "Switch Rate (/1k words)", "Number of Turns",
                            "Distinct-2", "20.39"}) {
        EXPECT_NE(table.find(row), std::string::npos) << row;
    }
}
