/// @file judge.hpp
/// @brief Pairwise naturalness judging by a panel of chat-completion models.
///
/// Judges only ever see "Transcript A" / "Transcript B". Which system produced
/// which transcript stays in ComparisonTask::system_labels and is applied when
/// verdicts are aggregated. With debiasing on, each judge sees both
/// presentation orders; pairs whose resolved winners disagree are flagged as
/// position-inconsistent and both verdicts still count.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/clients.hpp"
#include "vizpod/content_cache.hpp"
#include "vizpod/retry.hpp"
#include "vizpod/transcript.hpp"

namespace vizpod {

enum class PresentationOrder { AB, BA };
enum class Winner { A, B, Tie };
enum class VerdictStatus { Parsed, Unparseable, Failed };

std::string_view to_string(PresentationOrder o);
std::string_view to_string(Winner w);

struct SystemLabels {
    std::string a;  ///< system that produced transcript_a
    std::string b;
};

struct ComparisonTask {
    std::string sample_id;
    Transcript transcript_a;
    Transcript transcript_b;
    SystemLabels system_labels;
};

struct Verdict {
    std::string sample_id;
    std::string judge_id;
    PresentationOrder order = PresentationOrder::AB;
    VerdictStatus status = VerdictStatus::Parsed;
    Winner winner = Winner::Tie;  ///< presentation label, meaningful when Parsed
    std::string rationale;
    std::map<std::string, Winner> criteria;  ///< optional per-dimension preferences
    std::string raw_reply;
    std::string error;
};

struct RubricDimension {
    std::string name;
    std::string description;
};

struct Rubric {
    std::vector<RubricDimension> dimensions;

    /// conversational flow, reaction speed, personality hallucination.
    static Rubric naturalness();
};

std::string build_judge_prompt(const ComparisonTask& task, const Rubric& rubric,
                               PresentationOrder order = PresentationOrder::AB);

/// Extracts the first well-formed {"winner": ...} object, tolerating prose
/// around it. Throws Error(UnparseableVerdict).
Verdict parse_verdict(std::string_view raw_reply);

struct JudgeEndpoint {
    std::string id;
    ChatClient* client = nullptr;
    std::string model;  ///< empty: the client's configured model
};

struct JudgeOptions {
    Rubric rubric = Rubric::naturalness();
    double temperature = 0.0;
    RetryPolicy retry;
    ContentCache* cache = nullptr;  ///< raw replies keyed by (judge, request)
};

/// One call per presentation order when debiasing, otherwise one AB call.
/// Unparseable replies and exhausted retries become non-Parsed verdicts.
std::vector<Verdict> run_pairwise(const ComparisonTask& task, const JudgeEndpoint& judge, bool debias,
                                  const JudgeOptions& opts = {});

/// All tasks × judges, ordered by (task, judge, presentation order). With
/// jobs > 1 judges run concurrently, each endpoint sequentially.
std::vector<Verdict> run_panel(const std::vector<ComparisonTask>& tasks, const std::vector<JudgeEndpoint>& judges,
                               bool debias, const JudgeOptions& opts = {}, std::size_t jobs = 1);

struct JudgeTally {
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t ties = 0;
    std::size_t unparseable = 0;
    std::size_t failed = 0;

    std::size_t decided() const { return wins + losses; }
    std::size_t calls() const { return wins + losses + ties + unparseable + failed; }
    /// wins / (wins + losses); empty when every parsed verdict was a tie.
    std::optional<double> rate() const;
};

struct WinRateReport {
    std::string focus_system;
    std::map<std::string, JudgeTally> per_judge;
    JudgeTally pooled;
    std::optional<double> pooled_rate;
    std::optional<double> mean_judge_rate;  ///< unweighted mean of per-judge rates
    std::map<std::string, JudgeTally> per_criterion;
    std::size_t pairs_checked = 0;  ///< (sample, judge) pairs seen in both orders
    std::size_t position_inconsistent = 0;
    std::vector<std::string> inconsistent_pairs;  ///< "sample_id/judge_id"
};

/// Which system a parsed verdict picked, or empty for a tie.
std::optional<std::string> resolve_winner(const Verdict& v, const SystemLabels& labels);

/// Throws EmptyInput when no verdict parsed.
WinRateReport aggregate_win_rate(const std::vector<Verdict>& verdicts,
                                 const std::map<std::string, SystemLabels>& system_labels,
                                 const std::string& focus_system);

nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WinRateReport& r);
std::string format_win_rate(const WinRateReport& r);

}  // namespace vizpod
