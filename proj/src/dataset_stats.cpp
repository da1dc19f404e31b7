#include "vizpod/dataset_stats.hpp"

#include <fmt/format.h>

#include "vizpod/error.hpp"

namespace vizpod {
namespace {

std::string thousands(std::size_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

void fill_percentages(std::vector<HistogramBin>& bins, std::size_t total) {
    for (auto& b : bins) b.percent_tenths = percent_tenths(b.count, total);
}

nlohmann::json bins_json(const std::vector<HistogramBin>& bins) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& b : bins) {
        nlohmann::json j = {{"label", b.label}, {"lo", b.lo}, {"count", b.count}, {"percent", b.percent()}};
        j["hi"] = b.hi ? nlohmann::json(*b.hi) : nlohmann::json(nullptr);
        out.push_back(std::move(j));
    }
    return out;
}

std::string bins_table(const std::string& heading, const std::vector<HistogramBin>& bins, bool skip_empty_first) {
    std::size_t total = 0;
    long tenths = 0;
    for (const auto& b : bins) {
        total += b.count;
        tenths += b.percent_tenths;
    }
    std::string out = fmt::format("{:<14}{:>10}{:>8}\n", heading, "Samples", "%");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (i == 0 && skip_empty_first && bins[i].count == 0) continue;
        out += fmt::format("{:<14}{:>10}{:>8.1f}\n", bins[i].label, thousands(bins[i].count), bins[i].percent());
    }
    out += fmt::format("{:<14}{:>10}{:>8.1f}\n", "Total", thousands(total), static_cast<double>(tenths) / 10.0);
    return out;
}

}  // namespace

long percent_tenths(std::size_t count, std::size_t total) {
    if (total == 0) return 0;
    // half-up: floor((2000 * count + total) / (2 * total))
    const auto num = 2000ULL * count + total;
    return static_cast<long>(num / (2ULL * total));
}

std::vector<HistogramBin> image_count_histogram(const std::vector<std::size_t>& image_counts) {
    std::vector<HistogramBin> bins = {
        {"0-1", 0, 2}, {"2", 2, 3}, {"3", 3, 4}, {"4", 4, 5}, {"5", 5, 6}, {"6+", 6, std::nullopt},
    };
    for (std::size_t c : image_counts) {
        for (auto& b : bins) {
            if (c >= b.lo && (!b.hi || c < *b.hi)) {
                ++b.count;
                break;
            }
        }
    }
    fill_percentages(bins, image_counts.size());
    return bins;
}

std::vector<HistogramBin> word_count_histogram(const std::vector<std::size_t>& word_counts) {
    std::vector<HistogramBin> bins;
    for (std::size_t i = 0; i < kWordBinEdges.size(); ++i) {
        HistogramBin b;
        b.lo = kWordBinEdges[i];
        if (i + 1 < kWordBinEdges.size()) {
            b.hi = kWordBinEdges[i + 1];
            b.label = fmt::format("{}-{}", thousands(b.lo), thousands(*b.hi));
        } else {
            b.label = thousands(b.lo) + "+";
        }
        bins.push_back(std::move(b));
    }
    for (std::size_t w : word_counts) {
        // last edge <= w
        std::size_t i = kWordBinEdges.size() - 1;
        while (w < kWordBinEdges[i]) --i;
        ++bins[i].count;
    }
    fill_percentages(bins, word_counts.size());
    return bins;
}

DatasetStats dataset_stats(const std::vector<SampleManifest>& manifests) {
    if (manifests.empty()) throw Error(ErrorCode::EmptyInput, "no manifests");
    DatasetStats s;
    s.sample_count = manifests.size();
    std::vector<std::size_t> images;
    std::vector<std::size_t> words;
    std::vector<StyleReport> style;
    for (const auto& m : manifests) {
        images.push_back(m.image_count);
        words.push_back(m.excerpt.word_count);
        style.push_back(style_report(m.excerpt.transcript, {2}));
    }
    s.image_counts = image_count_histogram(images);
    s.word_counts = word_count_histogram(words);
    s.source_style = aggregate_reports(style);
    return s;
}

nlohmann::json to_json(const DatasetStats& s) {
    return {{"sample_count", s.sample_count},
            {"image_counts", bins_json(s.image_counts)},
            {"word_counts", bins_json(s.word_counts)},
            {"source_style",
             {{"mean_switch_rate", s.source_style.switch_rate.mean},
              {"mean_words_per_turn", s.source_style.avg_turn_length.mean},
              {"mean_length_words", s.source_style.total_words.mean},
              {"corpus", to_json(s.source_style)}}}};
}

std::string format_dataset_stats(const DatasetStats& s) {
    std::string out = bins_table("# Images", s.image_counts, true);
    out += "\n";
    out += bins_table("Word Range", s.word_counts, false);
    out += fmt::format("\nSource excerpts: switch rate {:.1f} turns/1k words, {:.1f} words/turn, mean length {:.1f} words\n",
                       s.source_style.switch_rate.mean, s.source_style.avg_turn_length.mean,
                       s.source_style.total_words.mean);
    return out;
}

}  // namespace vizpod
