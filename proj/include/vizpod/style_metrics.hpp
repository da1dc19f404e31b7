/// @file style_metrics.hpp
/// @brief Conversational-style and lexical-diversity metrics.
///
/// Switch rate counts every turn start as a speaker change:
/// switch_rate = 1000 * turn_count / total_words.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/summary_stats.hpp"
#include "vizpod/transcript.hpp"

namespace vizpod {

struct StyleReport {
    std::string source_id;
    std::size_t turn_count = 0;
    std::size_t total_words = 0;
    double avg_turn_length = 0.0;
    double switch_rate = 0.0;
    std::map<int, double> distinct_n;
};

struct CorpusStyleReport {
    std::size_t sample_count = 0;
    MeanStd turn_count;
    MeanStd total_words;
    MeanStd avg_turn_length;  ///< macro: mean of per-sample means
    MeanStd switch_rate;
    std::map<int, MeanStd> distinct_n;
    /// Micro variants: pooled words / pooled turns and the matching rate.
    double pooled_turn_length = 0.0;
    double pooled_switch_rate = 0.0;
};

double avg_turn_length(const Transcript& t);
double switch_rate(const Transcript& t);
/// Rate from raw totals; also used to cross-check published means.
double switch_rate(double turns, double words);
double distinct_n(const Transcript& t, int n);

StyleReport style_report(const Transcript& t, const std::vector<int>& ns = {2});
CorpusStyleReport aggregate_reports(const std::vector<StyleReport>& reports);

nlohmann::json to_json(const StyleReport& r);
nlohmann::json to_json(const CorpusStyleReport& r);

struct StyleColumn {
    std::string name;
    CorpusStyleReport report;
    std::optional<double> clip_score;
};

/// Aligned text table, rows in the order: CLIPScore, Avg. Turn Length,
/// Switch Rate (/1k words), Number of Turns, Distinct-n.
std::string format_style_table(const std::vector<StyleColumn>& columns);

}  // namespace vizpod
