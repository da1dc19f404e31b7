#include "vizpod/synthetic_corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <random>

namespace vizpod {
namespace {

const std::vector<std::vector<std::string>> kThemes = {
    {"pasta", "dough", "flour", "kitchen", "rolling pin"},
    {"wedding", "bouquet", "veil", "chapel", "cake"},
    {"motorcycle", "helmet", "highway", "garage", "engine"},
    {"lighthouse", "harbor", "fishing boat", "seagull", "fog"},
    {"vinyl record", "turntable", "record shop", "speaker", "album cover"},
    {"mountain trail", "backpack", "campfire", "tent", "pine forest"},
    {"bakery", "sourdough", "oven", "croissant", "flour sack"},
    {"garden", "tomato vines", "watering can", "greenhouse", "soil"},
};

const std::vector<std::string> kOpeners = {"So", "Honestly,", "I mean,", "Okay so", "Yeah,", "Right, and", "Well,"};
const std::vector<std::string> kReactions = {"Yeah.", "Oh, totally.", "Right?", "No way.", "Ha!", "Mm-hm.",
                                             "That's wild.", "Exactly."};
const std::vector<std::string> kVerbs = {"remember", "love", "picture", "noticed", "tried", "miss", "found"};
const std::vector<std::string> kTails = {"when I was a kid", "last summer", "every single weekend",
                                         "with my grandmother", "before anyone was awake", "in the pouring rain"};

class Writer {
public:
    explicit Writer(std::uint64_t seed) : rng_(seed) {}

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    template <typename T>
    const T& any(const std::vector<T>& v) {
        return v[pick(v.size())];
    }

    std::string sentence(const std::vector<std::string>& theme) {
        switch (pick(4)) {
            case 0:
                return fmt::format("{} I {} the {} {}.", any(kOpeners), any(kVerbs), any(theme), any(kTails));
            case 1:
                return fmt::format("{} the {} next to the {} is what gets me.", any(kOpeners), any(theme), any(theme));
            case 2: return fmt::format("Have you ever seen a {} like that?", any(theme));
            default: return fmt::format("There was this {} and a {} {}.", any(theme), any(theme), any(kTails));
        }
    }

    std::string turn(const std::vector<std::string>& theme, std::size_t target_words) {
        if (target_words <= 2) return any(kReactions);
        std::string out;
        std::size_t words = 0;
        while (words < target_words) {
            const auto s = sentence(theme);
            words += static_cast<std::size_t>(std::count(s.begin(), s.end(), ' ')) + 1;
            out += (out.empty() ? "" : " ") + s;
        }
        return out;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace

std::vector<Episode> synthetic_episodes(const SyntheticCorpusOptions& opts) {
    std::vector<Episode> out;
    for (std::size_t i = 0; i < opts.episodes; ++i) {
        Writer w(opts.seed * 1000003ULL + i);
        const auto& theme = kThemes[(i + opts.seed) % kThemes.size()];
        const bool monologue = i % 10 == 7;
        const std::size_t target = i % 10 == 9 ? 300 : 1200 + w.pick(2800);

        std::string raw;
        std::size_t words = 0;
        for (std::size_t k = 0; words < target; ++k) {
            const std::size_t len = w.pick(5) == 0 ? 1 + w.pick(2) : 3 + w.pick(90);
            const auto body = w.turn(theme, len);
            const char* speaker = monologue || k % 2 == 0 ? "Host" : "Guest";
            raw += fmt::format("{}: {}\n", speaker, body);
            words += static_cast<std::size_t>(std::count(body.begin(), body.end(), ' ')) + 1;
        }
        out.push_back(episode_from_text(raw, fmt::format("synth-{:03d}", i)));
    }
    return out;
}

}  // namespace vizpod
