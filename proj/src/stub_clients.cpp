#include "vizpod/stub_clients.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <random>

#include "vizpod/error.hpp"
#include "vizpod/style_metrics.hpp"
#include "vizpod/text.hpp"

namespace vizpod::stub {
namespace {

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "about", "after", "again", "actually", "always", "because", "before", "being", "could", "didn't",
        "doesn't", "don't", "every", "going", "gonna", "great", "really", "right", "should", "something",
        "still", "there", "these", "thing", "things", "think", "those", "through", "totally", "where",
        "which", "while", "would", "yeah", "you're", "that's", "there's", "they're", "kind", "little",
        "maybe", "other", "people", "pretty", "their", "first", "never", "today", "we're", "just"};
    return words;
}

// Lowercased word with surrounding ASCII punctuation removed.
std::string bare_word(std::string_view token) {
    std::string w = text::lowercase(token);
    auto is_punct = [](unsigned char c) { return c < 0x80 && !std::isalnum(c) && c != '\''; };
    while (!w.empty() && is_punct(static_cast<unsigned char>(w.back()))) w.pop_back();
    std::size_t b = 0;
    while (b < w.size() && is_punct(static_cast<unsigned char>(w[b]))) ++b;
    return w.substr(b);
}

std::vector<std::string> content_words(std::string_view s, std::size_t top) {
    std::map<std::string, std::size_t> freq;
    for (const auto& tok : text::tokenize(s)) {
        auto w = bare_word(tok);
        if (w.size() < 5 || stopwords().count(w)) continue;
        ++freq[w];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < top; ++i) out.push_back(ranked[i].first);
    return out;
}

std::string extract_block(const std::string& prompt, std::string_view open, std::string_view close) {
    const auto b = prompt.find(open);
    if (b == std::string::npos) return {};
    const auto start = b + open.size();
    const auto e = prompt.find(close, start);
    if (e == std::string::npos) return {};
    return prompt.substr(start, e - start);
}

}  // namespace

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------

std::vector<SpanCandidate> StubExcerptExtractor::propose(const Episode& episode) {
    const auto& turns = episode.transcript.turns;
    const WordBand band;
    std::vector<SpanCandidate> out;
    if (opts_.emit_invalid_span) out.push_back({turns.size(), turns.size() + 3, "out of range"});

    bool found = false;
    std::size_t best_first = 0, best_last = 0, best_dist = 0;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        std::size_t words = 0;
        std::set<std::string> who;
        for (std::size_t j = i; j < turns.size(); ++j) {
            words += turns[j].word_count;
            who.insert(turns[j].speaker.key());
            if (words > band.max_words) break;
            if (words < band.min_words || who.size() != 2) continue;
            const auto dist = words > opts_.target_words ? words - opts_.target_words : opts_.target_words - words;
            if (!found || dist < best_dist) {
                found = true;
                best_first = i;
                best_last = j;
                best_dist = dist;
            }
        }
    }
    if (found) out.push_back({best_first, best_last, fmt::format("window {} words from target", best_dist)});
    return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> StubImagePromptGenerator::generate(const Excerpt& excerpt) {
    ++calls_;
    const auto& turns = excerpt.transcript.turns;
    const double total = std::max<double>(1.0, static_cast<double>(excerpt.transcript.total_words));
    std::vector<std::string> segments(kScenesPerExcerpt);
    double before = 0.0;
    for (const auto& t : turns) {
        const double mid = (before + t.word_count / 2.0) / total;
        const auto k = std::min<std::size_t>(kScenesPerExcerpt - 1, static_cast<std::size_t>(mid * kScenesPerExcerpt));
        segments[k] += t.text + " ";
        before += t.word_count;
    }

    std::vector<std::string> prompts;
    for (const auto& seg : segments) {
        auto words = content_words(seg.empty() ? to_labeled_text(excerpt.transcript) : seg, 3);
        if (words.empty()) {
            prompts.push_back("Photorealistic scene of two people talking at a kitchen table, soft natural light");
            continue;
        }
        std::string subject = words[0];
        for (std::size_t i = 1; i < words.size(); ++i) subject += (i + 1 == words.size() ? " and " : ", ") + words[i];
        prompts.push_back(fmt::format("Photorealistic scene featuring {}, soft natural light, candid documentary style",
                                      subject));
    }

    bool short_reply = mode_ == Mode::AlwaysFour;
    if (mode_ == Mode::FourThenFive) {
        std::lock_guard lk(mu_);
        short_reply = seen_.insert(excerpt.excerpt_id).second;
    }
    if (short_reply) prompts.pop_back();
    return prompts;
}

// ---------------------------------------------------------------------------

std::string make_ppm(std::string_view prompt) {
    std::string comment(prompt);
    std::replace(comment.begin(), comment.end(), '\n', ' ');
    std::string out = "P6\n# prompt: " + comment + "\n8 8\n255\n";
    std::mt19937_64 rng(fnv1a(prompt));
    for (int i = 0; i < 8 * 8 * 3; ++i) out.push_back(static_cast<char>(rng() & 0xff));
    return out;
}

std::string ppm_prompt(std::string_view bytes) {
    constexpr std::string_view head = "P6\n# prompt: ";
    if (bytes.substr(0, head.size()) != head) return {};
    const auto e = bytes.find('\n', head.size());
    if (e == std::string_view::npos) return {};
    return std::string(bytes.substr(head.size(), e - head.size()));
}

ImageResult StubImageClient::generate(const std::string& prompt) {
    const auto n = calls_++;
    if (n < opts_.unavailable_first_calls) {
        throw Error(ErrorCode::ImageServiceUnavailable, "stub image service warming up");
    }
    ImageResult r;
    const auto lower = text::lowercase(prompt);
    for (const auto& term : opts_.restricted_terms) {
        if (lower.find(term) != std::string::npos) {
            r.status = ImageResult::Status::Blocked;
            r.reason = "restricted term '" + term + "'";
            return r;
        }
    }
    if (fnv1a(prompt) % 1000 < opts_.block_permille) {
        r.status = ImageResult::Status::Blocked;
        r.reason = "content filter";
        return r;
    }
    r.bytes = make_ppm(prompt);
    r.format = "ppm";
    return r;
}

// ---------------------------------------------------------------------------

EmbeddingVector StubEmbeddingProvider::embed_text(std::string_view s) {
    ++calls_;
    EmbeddingVector v;
    v.values.assign(dim_, 0.0);
    for (const auto& tok : text::tokenize(s)) {
        const auto w = bare_word(tok);
        if (w.empty()) continue;
        const auto h = fnv1a(w);
        v.values[h % dim_] += ((h >> 32) & 1U) ? 1.0 : -1.0;
    }
    if (std::all_of(v.values.begin(), v.values.end(), [](double x) { return x == 0.0; })) v.values[0] = 1.0;
    return v;
}

EmbeddingVector StubEmbeddingProvider::embed_image(std::string_view bytes) {
    const auto prompt = ppm_prompt(bytes);
    if (!prompt.empty()) return embed_text(prompt);
    ++calls_;
    std::mt19937_64 rng(fnv1a(bytes));
    EmbeddingVector v;
    for (std::size_t i = 0; i < dim_; ++i) v.values.push_back(static_cast<double>(rng() % 2001) / 1000.0 - 1.0);
    return v;
}

EmbeddingVector TableEmbeddingProvider::embed_text(std::string_view s) {
    const auto it = texts.find(std::string(s));
    if (it == texts.end()) throw Error(ErrorCode::InvalidArgument, "no table entry for text '" + std::string(s) + "'");
    return {it->second};
}

EmbeddingVector TableEmbeddingProvider::embed_image(std::string_view bytes) {
    const auto it = images.find(std::string(bytes));
    if (it == images.end()) throw Error(ErrorCode::InvalidArgument, "no table entry for image");
    return {it->second};
}

// ---------------------------------------------------------------------------

std::string StubJudge::complete(const ChatRequest& request) {
    const auto n = calls_++;
    if (mode_ == Mode::Unavailable || n < flaky_) throw Error(ErrorCode::JudgeUnavailable, id_ + " unavailable");
    if (mode_ == Mode::Garbage) return "Both transcripts have their charms; I would rather not pick one.";
    if (mode_ == Mode::AlwaysA) {
        return R"({"winner": "A", "rationale": "The first transcript reads better."})";
    }

    const auto& prompt = request.messages.empty() ? std::string() : request.messages.back().text;
    const auto a = extract_block(prompt, "=== Transcript A ===\n", "=== End of Transcript A ===");
    const auto b = extract_block(prompt, "=== Transcript B ===\n", "=== End of Transcript B ===");
    std::string winner = "tie";
    try {
        const double la = avg_turn_length(parse_transcript(a));
        const double lb = avg_turn_length(parse_transcript(b));
        if (la > lb) winner = "A";
        if (lb > la) winner = "B";
    } catch (const Error&) {
    }
    nlohmann::json reply = {{"winner", winner},
                            {"rationale", "Fuller turns with personal stories sound less scripted."},
                            {"criteria", {{"conversational flow", winner}, {"reaction speed", winner}}}};
    return "Here is my verdict.\n" + reply.dump();
}

// ---------------------------------------------------------------------------

std::string StubVlm::complete(const ChatRequest& request) {
    std::string seed_text;
    std::string topics_src;
    for (const auto& m : request.messages) {
        seed_text += m.text;
        for (const auto& img : m.images) {
            const auto p = ppm_prompt(img.bytes);
            topics_src += p + " ";
            seed_text += p;
        }
    }
    if (opts_.empty_reply) return "   ";

    std::mt19937_64 rng(fnv1a(seed_text, fnv1a(id_)));
    auto topics = content_words(topics_src, 12);
    if (topics.empty()) topics = {"kitchen", "window", "garden", "coffee", "market"};
    auto topic = [&] { return topics[rng() % topics.size()]; };

    const bool base = opts_.profile == Profile::Base;
    static const std::vector<std::string> reactions = {"Oh wow.", "Right, right.", "No, totally.", "Ha, yeah.",
                                                       "Wait, really?", "Mm-hm.", "Okay, okay."};
    auto sentence = [&]() -> std::string {
        if (base) {
            if (rng() % 4 == 0) return reactions[rng() % reactions.size()];
            switch (rng() % 4) {
                case 0: return fmt::format("There is a real sense of the {} here, and it connects to the {}.", topic(), topic());
                case 1: return fmt::format("What strikes me is how the {} frames everything around it.", topic());
                case 2: return fmt::format("You can see the {} in detail, which sets a calm, inviting tone.", topic());
                default: return fmt::format("It reminds us that the {} and the {} belong together.", topic(), topic());
            }
        }
        switch (rng() % 5) {
            case 0: return fmt::format("We used to drive past a {} every weekend and argue about it.", topic());
            case 1: return fmt::format("My cousin burned a whole {} once, true story.", topic());
            case 2: return fmt::format("I mean, the {} though?", topic());
            case 3: return fmt::format("Honestly I'd just sit by the {} all day.", topic());
            default: return fmt::format("Like, who even has a {} like that?", topic());
        }
    };

    const long jitter = static_cast<long>(rng() % 81) - 40;
    const std::size_t target = static_cast<std::size_t>(std::max<long>(50, static_cast<long>(opts_.target_words) + jitter));
    std::string out;
    std::size_t words = 0;
    for (std::size_t turn = 0; words < target; ++turn) {
        const std::size_t turn_target = base ? 8 + rng() % 50 : 30 + rng() % 70;
        std::string body;
        std::size_t turn_words = 0;
        while (turn_words < turn_target) {
            const auto s = sentence();
            turn_words += text::count_tokens(s);
            body += (body.empty() ? "" : " ") + s;
        }
        out += fmt::format("Speaker {}: {}\n", turn % 2 + 1, body);
        words += turn_words;
    }
    if (opts_.clock) opts_.clock->advance(opts_.seconds_per_call + opts_.seconds_per_word * static_cast<double>(words));
    return out;
}

}  // namespace vizpod::stub
