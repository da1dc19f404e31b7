#include "vizpod/report.hpp"

#include <fmt/format.h>

#include "vizpod/error.hpp"

namespace vizpod {

#ifndef VIZPOD_VERSION
#define VIZPOD_VERSION "dev"
#endif

std::string tool_version() { return VIZPOD_VERSION; }

EvaluationReport build_report(const ReportInputs& in) {
    if (in.records.empty()) throw Error(ErrorCode::EmptyInput, "report needs generation records");
    EvaluationReport r;
    r.config = in.config;
    r.win_rate = in.win_rate;
    r.generation = generation_stats(in.records);

    std::map<std::string, std::vector<double>> clip;
    for (const auto& g : in.grounding) {
        clip[g.at("system").get<std::string>()].push_back(g.at("sequence_score").get<double>());
    }
    for (const auto& [system, scores] : clip) r.grounding[system] = mean_std(scores);

    std::map<std::string, std::vector<StyleReport>> by_system;
    for (const auto& rec : in.records) {
        try {
            by_system[rec.model_id].push_back(
                style_report(parse_transcript(rec.transcript_text, in.parse, rec.sample_id)));
        } catch (const Error&) {
            r.unparsed[rec.model_id].push_back(rec.sample_id);
        }
    }
    for (const auto& g : r.generation) {
        const auto it = by_system.find(g.model_id);
        if (it == by_system.end()) continue;
        StyleColumn col{g.model_id, aggregate_reports(it->second), std::nullopt};
        if (const auto c = r.grounding.find(g.model_id); c != r.grounding.end()) col.clip_score = c->second.mean;
        r.style.push_back(std::move(col));
    }
    return r;
}

nlohmann::json to_json(const EvaluationReport& r) {
    nlohmann::json style = nlohmann::json::object();
    for (const auto& col : r.style) {
        auto j = to_json(col.report);
        j["clip_score"] = col.clip_score ? nlohmann::json(*col.clip_score) : nlohmann::json(nullptr);
        style[col.name] = std::move(j);
    }
    nlohmann::json grounding = nlohmann::json::object();
    for (const auto& [system, m] : r.grounding) grounding[system] = {{"mean", m.mean}, {"std", m.std}, {"n", m.n}};
    nlohmann::json generation = nlohmann::json::array();
    for (const auto& g : r.generation) generation.push_back(to_json(g));

    nlohmann::json j = {{"tool_version", r.version},
                        {"style", std::move(style)},
                        {"grounding", std::move(grounding)},
                        {"generation", std::move(generation)}};
    if (!r.unparsed.empty()) j["unparsed"] = r.unparsed;
    if (r.win_rate) j["win_rate"] = to_json(*r.win_rate);
    j["config"] = r.config;
    return j;
}

std::string format_report(const EvaluationReport& r) {
    std::string out = fmt::format("vizpod evaluation report (version {})\n\n", r.version);
    out += "== Conversational style ==\n" + format_style_table(r.style) + "\n";
    for (const auto& [system, ids] : r.unparsed) {
        out += fmt::format("note: {} transcript(s) from {} had no speaker labels and were skipped\n", ids.size(),
                           system);
    }
    out += "== Generation statistics ==\n" + format_generation_stats(r.generation) + "\n";
    if (r.win_rate) out += "== Naturalness (pairwise judges) ==\n" + format_win_rate(*r.win_rate) + "\n";
    out += "== Configuration ==\n" + r.config.dump(2) + "\n";
    return out;
}

}  // namespace vizpod
