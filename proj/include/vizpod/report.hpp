/// @file report.hpp
/// @brief Evaluation report assembling style, grounding, judge and
/// generation-statistics sections.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/genclient.hpp"
#include "vizpod/judge.hpp"
#include "vizpod/style_metrics.hpp"
#include "vizpod/summary_stats.hpp"

namespace vizpod {

std::string tool_version();

struct EvaluationReport {
    std::string version = tool_version();
    std::vector<StyleColumn> style;                      ///< one column per system
    std::map<std::string, MeanStd> grounding;            ///< sequence CLIPScore per system
    std::map<std::string, std::vector<std::string>> unparsed;  ///< sample ids skipped per system
    std::vector<GenerationStats> generation;
    std::optional<WinRateReport> win_rate;
    nlohmann::json config;
};

struct ReportInputs {
    std::vector<GenerationRecord> records;
    /// grounding.jsonl lines: {"system", "id", "sequence_score", ...}
    std::vector<nlohmann::json> grounding;
    std::optional<WinRateReport> win_rate;
    nlohmann::json config = nlohmann::json::object();
    ParseConfig parse;
};

/// Throws EmptyInput when there are no generation records.
EvaluationReport build_report(const ReportInputs& in);
nlohmann::json to_json(const EvaluationReport& r);
std::string format_report(const EvaluationReport& r);

}  // namespace vizpod
