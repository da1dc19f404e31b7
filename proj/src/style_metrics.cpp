#include "vizpod/style_metrics.hpp"

#include <fmt/format.h>

#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "vizpod/error.hpp"
#include "vizpod/text.hpp"

namespace vizpod {
namespace {

void require_turns(const Transcript& t) {
    if (t.turns.empty() || t.total_words == 0) {
        throw Error(ErrorCode::EmptyTranscript, "transcript '" + t.source_id + "' has no words");
    }
}

// Lowercased token stream of all turns, interned to dense ids.
std::vector<uint32_t> token_ids(const Transcript& t) {
    std::unordered_map<std::string, uint32_t> vocab;
    std::vector<uint32_t> ids;
    ids.reserve(t.total_words);
    for (const auto& turn : t.turns) {
        for (auto& tok : text::tokenize(text::lowercase(turn.text))) {
            auto [it, inserted] = vocab.try_emplace(std::move(tok), static_cast<uint32_t>(vocab.size()));
            ids.push_back(it->second);
        }
    }
    return ids;
}

std::vector<double> column(const std::vector<StyleReport>& reports, auto&& get) {
    std::vector<double> out;
    out.reserve(reports.size());
    for (const auto& r : reports) out.push_back(static_cast<double>(get(r)));
    return out;
}

}  // namespace

std::string format_mean_std(const MeanStd& m, int precision) {
    return fmt::format("{:.{}f} ± {:.{}f}", m.mean, precision, m.std, precision);
}

double avg_turn_length(const Transcript& t) {
    require_turns(t);
    double sum = 0.0;
    for (const auto& turn : t.turns) sum += static_cast<double>(turn.word_count);
    return sum / static_cast<double>(t.turns.size());
}

double switch_rate(double turns, double words) {
    if (words <= 0.0) throw Error(ErrorCode::EmptyTranscript, "switch rate needs at least one word");
    return turns / words * 1000.0;
}

double switch_rate(const Transcript& t) {
    require_turns(t);
    return switch_rate(static_cast<double>(t.turns.size()), static_cast<double>(t.total_words));
}

double distinct_n(const Transcript& t, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    const auto ids = token_ids(t);
    const auto width = static_cast<std::size_t>(n);
    if (ids.size() < width) {
        throw Error(ErrorCode::TooShort, fmt::format("{} tokens < n = {}", ids.size(), n));
    }
    const std::size_t total = ids.size() - width + 1;
    std::unordered_set<std::string> unique;
    unique.reserve(total);
    std::string key(width * sizeof(uint32_t), '\0');
    for (std::size_t i = 0; i < total; ++i) {
        std::memcpy(key.data(), ids.data() + i, key.size());
        unique.insert(key);
    }
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

StyleReport style_report(const Transcript& t, const std::vector<int>& ns) {
    StyleReport r;
    r.source_id = t.source_id;
    r.avg_turn_length = avg_turn_length(t);
    r.switch_rate = switch_rate(t);
    r.turn_count = t.turns.size();
    r.total_words = t.total_words;
    for (int n : ns) r.distinct_n[n] = distinct_n(t, n);
    return r;
}

CorpusStyleReport aggregate_reports(const std::vector<StyleReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no style reports to aggregate");
    CorpusStyleReport c;
    c.sample_count = reports.size();
    c.turn_count = mean_std(column(reports, [](const StyleReport& r) { return r.turn_count; }));
    c.total_words = mean_std(column(reports, [](const StyleReport& r) { return r.total_words; }));
    c.avg_turn_length = mean_std(column(reports, [](const StyleReport& r) { return r.avg_turn_length; }));
    c.switch_rate = mean_std(column(reports, [](const StyleReport& r) { return r.switch_rate; }));

    // only n values present in every report are aggregated
    for (const auto& [n, _] : reports.front().distinct_n) {
        std::vector<double> values;
        for (const auto& r : reports) {
            auto it = r.distinct_n.find(n);
            if (it == r.distinct_n.end()) break;
            values.push_back(it->second);
        }
        if (values.size() == reports.size()) c.distinct_n[n] = mean_std(values);
    }

    double turns = 0.0;
    double words = 0.0;
    for (const auto& r : reports) {
        turns += static_cast<double>(r.turn_count);
        words += static_cast<double>(r.total_words);
    }
    c.pooled_turn_length = words / turns;
    c.pooled_switch_rate = switch_rate(turns, words);
    return c;
}

nlohmann::json to_json(const StyleReport& r) {
    nlohmann::json distinct = nlohmann::json::object();
    for (const auto& [n, v] : r.distinct_n) distinct[std::to_string(n)] = v;
    return {{"id", r.source_id},
            {"turn_count", r.turn_count},
            {"total_words", r.total_words},
            {"avg_turn_length", r.avg_turn_length},
            {"switch_rate", r.switch_rate},
            {"distinct_n", std::move(distinct)}};
}

namespace {
nlohmann::json ms_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }
}  // namespace

nlohmann::json to_json(const CorpusStyleReport& r) {
    nlohmann::json distinct = nlohmann::json::object();
    for (const auto& [n, m] : r.distinct_n) distinct[std::to_string(n)] = ms_json(m);
    return {{"sample_count", r.sample_count},
            {"turn_count", ms_json(r.turn_count)},
            {"total_words", ms_json(r.total_words)},
            {"avg_turn_length", ms_json(r.avg_turn_length)},
            {"switch_rate", ms_json(r.switch_rate)},
            {"distinct_n", std::move(distinct)},
            {"pooled_turn_length", r.pooled_turn_length},
            {"pooled_switch_rate", r.pooled_switch_rate}};
}

std::string format_style_table(const std::vector<StyleColumn>& columns) {
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    auto add_row = [&](std::string label, auto&& cell) {
        std::vector<std::string> cells;
        for (const auto& col : columns) cells.push_back(cell(col));
        rows.emplace_back(std::move(label), std::move(cells));
    };

    bool any_clip = false;
    for (const auto& col : columns) any_clip = any_clip || col.clip_score.has_value();
    if (any_clip) {
        add_row("CLIPScore", [](const StyleColumn& c) {
            return c.clip_score ? fmt::format("{:.2f}", *c.clip_score) : std::string("-");
        });
    }
    add_row("Avg. Turn Length", [](const StyleColumn& c) { return fmt::format("{:.1f}", c.report.avg_turn_length.mean); });
    add_row("Switch Rate (/1k words)", [](const StyleColumn& c) { return fmt::format("{:.1f}", c.report.switch_rate.mean); });
    add_row("Number of Turns", [](const StyleColumn& c) { return fmt::format("{:.1f}", c.report.turn_count.mean); });
    if (!columns.empty()) {
        for (const auto& [n, _] : columns.front().report.distinct_n) {
            add_row(fmt::format("Distinct-{}", n), [n = n](const StyleColumn& c) {
                auto it = c.report.distinct_n.find(n);
                return it == c.report.distinct_n.end() ? std::string("-") : fmt::format("{:.2f}", it->second.mean);
            });
        }
    }
    add_row("Avg. Word Count", [](const StyleColumn& c) { return format_mean_std(c.report.total_words); });
    add_row("Samples", [](const StyleColumn& c) { return std::to_string(c.report.sample_count); });

    std::size_t label_width = std::string("Metric").size();
    for (const auto& [label, _] : rows) label_width = std::max(label_width, label.size());
    std::vector<std::size_t> widths;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        std::size_t w = columns[i].name.size();
        for (const auto& [_, cells] : rows) w = std::max(w, cells[i].size());
        widths.push_back(w);
    }

    std::string out = fmt::format("{:<{}}", "Metric", label_width);
    for (std::size_t i = 0; i < columns.size(); ++i) out += fmt::format("  {:>{}}", columns[i].name, widths[i]);
    out += "\n";
    for (const auto& [label, cells] : rows) {
        out += fmt::format("{:<{}}", label, label_width);
        for (std::size_t i = 0; i < cells.size(); ++i) out += fmt::format("  {:>{}}", cells[i], widths[i]);
        out += "\n";
    }
    return out;
}

}  // namespace vizpod
