#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "vizpod/error.hpp"
#include "vizpod/text.hpp"
#include "vizpod/transcript.hpp"

using namespace vizpod;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected vizpod::Error";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Text, TokenizeKeepsPunctuationAttached) {
    const auto toks = text::tokenize("Wait,  you're\tthe one—who rides?");
    ASSERT_EQ(toks.size(), 5u);
    EXPECT_EQ(toks[0], "Wait,");
    EXPECT_EQ(toks[3], "one—who");
}

TEST(Text, CountTokensTreatsUnicodeSpaceAsSeparator) {
    EXPECT_EQ(text::count_tokens("a b c"), 3u);
    EXPECT_EQ(text::count_tokens("   "), 0u);
    EXPECT_EQ(text::count_tokens(""), 0u);
}

TEST(Text, LowercaseHandlesNonAscii) {
    EXPECT_EQ(text::lowercase("ÉCOLE Café"), "école café");
    EXPECT_EQ(text::lowercase("plain"), "plain");
}

TEST(Text, NfcComposes) { EXPECT_EQ(text::nfc("é"), "é"); }

TEST(Text, StripStageDirections) {
    EXPECT_EQ(text::collapse_whitespace(text::strip_stage_directions("Hi (laughs) there [music]")), "Hi there");
    EXPECT_EQ(text::strip_stage_directions("open (paren"), "open (paren");
}

TEST(Transcript, ParsesSpeakerNumberLabels) {
    const auto t = parse_transcript("Speaker 1: Hello there.\nSpeaker 2: Hi! How are you?\n");
    ASSERT_EQ(t.turns.size(), 2u);
    EXPECT_EQ(t.turns[0].speaker.label(), "Speaker 1");
    EXPECT_EQ(t.turns[1].text, "Hi! How are you?");
    EXPECT_EQ(t.total_words, 6u);
    EXPECT_EQ(t.label_words, 4u);
    EXPECT_EQ(document_word_count(t), 10u);
}

TEST(Transcript, NamedLabelsAndEmphasis) {
    const auto t = parse_transcript("**Alex:** So.\n_Jamie_: Yes.\nAlex: Right.");
    ASSERT_EQ(t.turns.size(), 3u);
    EXPECT_EQ(t.turns[0].speaker.label(), "Alex");
    EXPECT_EQ(t.turns[1].speaker.label(), "Jamie");
    EXPECT_TRUE(t.turns[0].speaker == t.turns[2].speaker);
}

TEST(Transcript, ContinuationLinesJoinPreviousTurn) {
    const auto t = parse_transcript("Host: first line\nsecond line\n\nthird\nGuest: ok");
    ASSERT_EQ(t.turns.size(), 2u);
    EXPECT_EQ(t.turns[0].text, "first line second line third");
    EXPECT_EQ(t.turns[0].word_count, 5u);
}

TEST(Transcript, ColonInsideSentenceIsNotALabel) {
    const auto t = parse_transcript("Host: The rule is simple: eat.\nNote this, though: it's late\nGuest: ok");
    ASSERT_EQ(t.turns.size(), 2u);
    EXPECT_EQ(t.turns[0].text, "The rule is simple: eat. Note this, though: it's late");
}

TEST(Transcript, TimeLikeColonIsNotALabel) {
    const auto t = parse_transcript("Host: we met at\n10:30 sharp\nGuest: yes");
    ASSERT_EQ(t.turns.size(), 2u);
    EXPECT_EQ(t.turns[0].word_count, 5u);
}

TEST(Transcript, AdjacentSameSpeakerMerged) {
    const auto t = parse_transcript("A: one\nA: two\nB: three");
    ASSERT_EQ(t.turns.size(), 2u);
    EXPECT_EQ(t.turns[0].text, "one two");
    EXPECT_EQ(t.turns[0].word_count, 2u);
    EXPECT_EQ(t.label_words, 2u);

    ParseConfig keep;
    keep.merge_adjacent_same_speaker = false;
    EXPECT_EQ(parse_transcript("A: one\nA: two\nB: three", keep).turns.size(), 3u);
}

TEST(Transcript, SpeakerMatchingIsCaseInsensitive) {
    const auto t = parse_transcript("HOST: one\nhost: two\nGuest: three");
    EXPECT_EQ(t.turns.size(), 2u);
    EXPECT_EQ(speakers(t).size(), 2u);
}

TEST(Transcript, PreambleDroppedWithWarning) {
    const auto t = parse_transcript("Episode 12 notes\nHost: hi\nGuest: hey");
    EXPECT_EQ(t.turns.size(), 2u);
    ASSERT_EQ(t.warnings.size(), 1u);
    EXPECT_NE(t.warnings[0].find("3 words"), std::string::npos);
}

TEST(Transcript, EmptyTurnDroppedWithWarning) {
    const auto t = parse_transcript("Host:\nGuest: hey\nHost: again");
    EXPECT_EQ(t.turns.size(), 2u);
    EXPECT_FALSE(t.warnings.empty());
}

TEST(Transcript, Errors) {
    EXPECT_EQ(code_of([] { parse_transcript("just prose without labels"); }), ErrorCode::NoSpeakerLabelsFound);
    EXPECT_EQ(code_of([] { parse_transcript(""); }), ErrorCode::NoSpeakerLabelsFound);
    EXPECT_EQ(code_of([] { parse_transcript("Host:\nGuest:   \n"); }), ErrorCode::EmptyTranscript);
}

TEST(Transcript, StageDirectionsOptionallyStripped) {
    ParseConfig cfg;
    cfg.strip_stage_directions = true;
    const auto t = parse_transcript("Host: hi (laughs) there\nGuest: [music] ok", cfg);
    EXPECT_EQ(t.total_words, 3u);
    EXPECT_EQ(parse_transcript("Host: hi (laughs) there\nGuest: [music] ok").total_words, 5u);
}

TEST(Transcript, RoundTripThroughLabeledText) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto t = parse_transcript(tsupport::random_dialogue(rng, 2 + rng() % 20));
        const auto back = parse_transcript(to_labeled_text(t));
        ASSERT_EQ(back.turns.size(), t.turns.size());
        for (std::size_t k = 0; k < t.turns.size(); ++k) {
            EXPECT_EQ(back.turns[k].text, t.turns[k].text);
            EXPECT_TRUE(back.turns[k].speaker == t.turns[k].speaker);
        }
        EXPECT_EQ(back.total_words, t.total_words);
    }
}

TEST(Transcript, ParsingIsIdempotentAndTabInvariant) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 30; ++i) {
        const auto raw = tsupport::random_dialogue(rng, 10);
        std::string spaced = raw;
        std::replace(spaced.begin(), spaced.end(), '\t', ' ');
        EXPECT_EQ(parse_transcript(raw).total_words, parse_transcript(spaced).total_words);
        const auto once = canonicalize(parse_transcript(raw));
        const auto twice = canonicalize(once);
        EXPECT_EQ(once.turns.size(), twice.turns.size());
    }
}

TEST(Transcript, JsonRoundTrip) {
    const auto t = parse_transcript("Host: hello there\nGuest: hi", {}, "s1");
    const auto back = transcript_from_json(to_json(t));
    EXPECT_EQ(back.source_id, "s1");
    ASSERT_EQ(back.turns.size(), 2u);
    EXPECT_EQ(back.total_words, 3u);
}

TEST(Transcript, WordCountsAreSumOfTurns) {
    for (const auto& f : tsupport::sample_transcript_files()) {
        const auto t = parse_transcript(tsupport::slurp(tsupport::fixture("sample_transcripts/" + f)));
        std::size_t sum = 0;
        for (const auto& turn : t.turns) sum += turn.word_count;
        EXPECT_EQ(sum, t.total_words) << f;
        EXPECT_EQ(t.label_words, 2 * t.turns.size() - (f.find("b1") == 0 || f.find("b4") == 0 ? t.turns.size() : 0))
            << f;
    }
}

TEST(Transcript, MotoLargeBaseMatchesStatedCount) {
    const auto t = parse_transcript(tsupport::slurp(tsupport::fixture("sample_transcripts/b6_moto_235b_base.txt")));
    EXPECT_EQ(document_word_count(t), 910u);
}
