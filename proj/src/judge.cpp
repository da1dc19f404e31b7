#include "vizpod/judge.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <thread>

#include "vizpod/error.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/text.hpp"

namespace vizpod {
namespace {

std::optional<Winner> parse_winner(std::string value) {
    value = text::lowercase(text::trim(value));
    if (value == "a" || value == "transcript a") return Winner::A;
    if (value == "b" || value == "transcript b") return Winner::B;
    if (value == "tie" || value == "draw" || value == "equal" || value == "none") return Winner::Tie;
    return std::nullopt;
}

const Transcript& shown_as_a(const ComparisonTask& t, PresentationOrder o) {
    return o == PresentationOrder::AB ? t.transcript_a : t.transcript_b;
}
const Transcript& shown_as_b(const ComparisonTask& t, PresentationOrder o) {
    return o == PresentationOrder::AB ? t.transcript_b : t.transcript_a;
}

}  // namespace

std::string_view to_string(PresentationOrder o) { return o == PresentationOrder::AB ? "AB" : "BA"; }

std::string_view to_string(Winner w) {
    switch (w) {
        case Winner::A: return "A";
        case Winner::B: return "B";
        case Winner::Tie: return "tie";
    }
    return "tie";
}

Rubric Rubric::naturalness() {
    return Rubric{{
        {"conversational flow",
         "Do the speakers build on each other, interrupt and overlap the way people do, or do they take polite "
         "paragraph-length turns?"},
        {"reaction speed",
         "Are reactions quick and spontaneous, or does each speaker describe and deliberate before responding?"},
        {"personality hallucination",
         "Do the speakers invent plausible personal anecdotes, opinions and shared history that give them a voice, "
         "rather than only describing what is visible?"},
    }};
}

std::string build_judge_prompt(const ComparisonTask& task, const Rubric& rubric, PresentationOrder order) {
    std::string p;
    p += "You are judging two podcast transcripts. Decide which one sounds more like a natural, unscripted "
         "conversation between real people.\n\n";
    p += "Consider these criteria:\n";
    for (const auto& d : rubric.dimensions) p += fmt::format("- {}: {}\n", d.name, d.description);
    p += "\n=== Transcript A ===\n";
    p += to_labeled_text(shown_as_a(task, order));
    p += "=== End of Transcript A ===\n\n=== Transcript B ===\n";
    p += to_labeled_text(shown_as_b(task, order));
    p += "=== End of Transcript B ===\n\n";
    p += "Answer with one JSON object and nothing else, in exactly this form:\n";
    p += R"({"winner": "A" | "B" | "tie", "rationale": "<one or two sentences>", "criteria": {)";
    for (std::size_t i = 0; i < rubric.dimensions.size(); ++i) {
        if (i > 0) p += ", ";
        p += fmt::format(R"("{}": "A" | "B" | "tie")", rubric.dimensions[i].name);
    }
    p += "}}\n";
    return p;
}

Verdict parse_verdict(std::string_view raw) {
    const auto j = first_json_object(raw, [](const nlohmann::json& obj) {
        return obj.contains("winner") && obj["winner"].is_string() &&
               parse_winner(obj["winner"].get<std::string>()).has_value();
    });
    if (!j) throw Error(ErrorCode::UnparseableVerdict, "no {\"winner\": ...} object in judge reply");

    Verdict v;
    v.winner = *parse_winner((*j)["winner"].get<std::string>());
    v.raw_reply = std::string(raw);
    if (j->contains("rationale") && (*j)["rationale"].is_string()) v.rationale = (*j)["rationale"].get<std::string>();
    if (j->contains("criteria") && (*j)["criteria"].is_object()) {
        for (const auto& [name, value] : (*j)["criteria"].items()) {
            if (!value.is_string()) continue;
            if (auto w = parse_winner(value.get<std::string>())) v.criteria[name] = *w;
        }
    }
    return v;
}

std::vector<Verdict> run_pairwise(const ComparisonTask& task, const JudgeEndpoint& judge, bool debias,
                                  const JudgeOptions& opts) {
    if (judge.client == nullptr) throw Error(ErrorCode::InvalidArgument, "judge '" + judge.id + "' has no client");
    if (task.transcript_a.turns.empty() || task.transcript_b.turns.empty()) {
        throw Error(ErrorCode::EmptyTranscript, "comparison '" + task.sample_id + "' has an empty transcript");
    }

    std::vector<PresentationOrder> orders{PresentationOrder::AB};
    if (debias) orders.push_back(PresentationOrder::BA);

    std::vector<Verdict> out;
    for (auto order : orders) {
        ChatRequest req;
        req.model = judge.model;
        req.temperature = opts.temperature;
        req.messages.push_back({"user", build_judge_prompt(task, opts.rubric, order), {}});

        Verdict v;
        try {
            const std::string reply = cached_call(opts.cache, "judge:" + judge.id + "\n" + req.cache_key(), [&] {
                return with_retry(opts.retry, [&] { return judge.client->complete(req); }, "judge " + judge.id);
            });
            try {
                v = parse_verdict(reply);
            } catch (const Error& e) {
                v.status = VerdictStatus::Unparseable;
                v.raw_reply = reply;
                v.error = e.what();
            }
        } catch (const Error& e) {
            v.status = VerdictStatus::Failed;
            v.error = e.what();
        }
        v.sample_id = task.sample_id;
        v.judge_id = judge.id;
        v.order = order;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Verdict> run_panel(const std::vector<ComparisonTask>& tasks, const std::vector<JudgeEndpoint>& judges,
                               bool debias, const JudgeOptions& opts, std::size_t jobs) {
    // results[task][judge] keeps the output order independent of scheduling
    std::vector<std::vector<std::vector<Verdict>>> results(tasks.size(), std::vector<std::vector<Verdict>>(judges.size()));
    auto run_judge = [&](std::size_t j) {
        for (std::size_t t = 0; t < tasks.size(); ++t) results[t][j] = run_pairwise(tasks[t], judges[j], debias, opts);
    };
    if (jobs > 1 && judges.size() > 1) {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < judges.size(); ++j) pool.emplace_back(run_judge, j);
    } else {
        for (std::size_t j = 0; j < judges.size(); ++j) run_judge(j);
    }

    std::vector<Verdict> out;
    for (auto& per_task : results) {
        for (auto& per_judge : per_task) {
            for (auto& v : per_judge) out.push_back(std::move(v));
        }
    }
    return out;
}

std::optional<double> JudgeTally::rate() const {
    if (decided() == 0) return std::nullopt;
    return static_cast<double>(wins) / static_cast<double>(decided());
}

std::optional<std::string> resolve_winner(const Verdict& v, const SystemLabels& labels) {
    if (v.status != VerdictStatus::Parsed || v.winner == Winner::Tie) return std::nullopt;
    const bool first_slot = (v.order == PresentationOrder::AB) == (v.winner == Winner::A);
    return first_slot ? labels.a : labels.b;
}

WinRateReport aggregate_win_rate(const std::vector<Verdict>& verdicts,
                                 const std::map<std::string, SystemLabels>& system_labels,
                                 const std::string& focus_system) {
    WinRateReport r;
    r.focus_system = focus_system;

    auto tally = [&](JudgeTally& t, const Verdict& v, const SystemLabels& labels, Winner w) {
        if (w == Winner::Tie) {
            ++t.ties;
            return;
        }
        Verdict tmp;
        tmp.order = v.order;
        tmp.winner = w;
        (*resolve_winner(tmp, labels) == focus_system ? t.wins : t.losses) += 1;
    };

    // (sample, judge) -> resolved outcome per order; "" marks a tie
    std::map<std::pair<std::string, std::string>, std::map<PresentationOrder, std::string>> outcomes;
    std::size_t parsed = 0;

    for (const auto& v : verdicts) {
        auto& judge = r.per_judge[v.judge_id];
        if (v.status == VerdictStatus::Unparseable) {
            ++judge.unparseable;
            ++r.pooled.unparseable;
            continue;
        }
        if (v.status == VerdictStatus::Failed) {
            ++judge.failed;
            ++r.pooled.failed;
            continue;
        }
        const auto it = system_labels.find(v.sample_id);
        if (it == system_labels.end()) {
            throw Error(ErrorCode::InvalidArgument, "no system labels for sample '" + v.sample_id + "'");
        }
        const auto& labels = it->second;
        if (labels.a != focus_system && labels.b != focus_system) {
            throw Error(ErrorCode::InvalidArgument,
                        "focus system '" + focus_system + "' not in comparison '" + v.sample_id + "'");
        }
        ++parsed;
        tally(judge, v, labels, v.winner);
        tally(r.pooled, v, labels, v.winner);
        for (const auto& [criterion, w] : v.criteria) tally(r.per_criterion[criterion], v, labels, w);
        outcomes[{v.sample_id, v.judge_id}][v.order] = resolve_winner(v, labels).value_or("");
    }
    if (parsed == 0) throw Error(ErrorCode::EmptyInput, "no parsed verdicts to aggregate");

    r.pooled_rate = r.pooled.rate();
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [_, t] : r.per_judge) {
        if (auto rate = t.rate()) {
            sum += *rate;
            ++n;
        }
    }
    if (n > 0) r.mean_judge_rate = sum / static_cast<double>(n);

    for (const auto& [key, by_order] : outcomes) {
        if (by_order.size() < 2) continue;
        ++r.pairs_checked;
        if (by_order.at(PresentationOrder::AB) != by_order.at(PresentationOrder::BA)) {
            ++r.position_inconsistent;
            r.inconsistent_pairs.push_back(key.first + "/" + key.second);
        }
    }
    return r;
}

nlohmann::json to_json(const Verdict& v) {
    std::string status = v.status == VerdictStatus::Parsed ? "parsed"
                         : v.status == VerdictStatus::Unparseable ? "unparseable"
                                                                  : "failed";
    nlohmann::json j = {{"sample_id", v.sample_id},
                        {"judge_id", v.judge_id},
                        {"presentation_order", to_string(v.order)},
                        {"status", status}};
    if (v.status == VerdictStatus::Parsed) {
        j["winner"] = to_string(v.winner);
        j["rationale"] = v.rationale;
        nlohmann::json criteria = nlohmann::json::object();
        for (const auto& [k, w] : v.criteria) criteria[k] = to_string(w);
        j["criteria"] = std::move(criteria);
    } else {
        j["error"] = v.error;
    }
    return j;
}

Verdict verdict_from_json(const nlohmann::json& j) {
    Verdict v;
    v.sample_id = j.at("sample_id").get<std::string>();
    v.judge_id = j.at("judge_id").get<std::string>();
    v.order = j.at("presentation_order").get<std::string>() == "BA" ? PresentationOrder::BA : PresentationOrder::AB;
    const auto status = j.at("status").get<std::string>();
    if (status == "parsed") {
        v.status = VerdictStatus::Parsed;
        v.winner = parse_winner(j.at("winner").get<std::string>()).value_or(Winner::Tie);
        v.rationale = j.value("rationale", std::string());
        if (j.contains("criteria")) {
            for (const auto& [k, w] : j["criteria"].items()) {
                if (auto pw = parse_winner(w.get<std::string>())) v.criteria[k] = *pw;
            }
        }
    } else {
        v.status = status == "unparseable" ? VerdictStatus::Unparseable : VerdictStatus::Failed;
        v.error = j.value("error", std::string());
    }
    return v;
}

namespace {
nlohmann::json tally_json(const JudgeTally& t) {
    nlohmann::json j = {{"wins", t.wins},           {"losses", t.losses}, {"ties", t.ties},
                        {"unparseable", t.unparseable}, {"failed", t.failed}, {"calls", t.calls()}};
    if (auto rate = t.rate()) j["rate"] = *rate;
    return j;
}
}  // namespace

nlohmann::json to_json(const WinRateReport& r) {
    nlohmann::json per_judge = nlohmann::json::object();
    for (const auto& [id, t] : r.per_judge) per_judge[id] = tally_json(t);
    nlohmann::json per_criterion = nlohmann::json::object();
    for (const auto& [id, t] : r.per_criterion) per_criterion[id] = tally_json(t);
    nlohmann::json j = {{"focus_system", r.focus_system},
                        {"pooled", tally_json(r.pooled)},
                        {"per_judge", std::move(per_judge)},
                        {"per_criterion", std::move(per_criterion)},
                        {"pairs_checked", r.pairs_checked},
                        {"position_inconsistent", r.position_inconsistent},
                        {"inconsistent_pairs", r.inconsistent_pairs}};
    if (r.pooled_rate) j["pooled_rate"] = *r.pooled_rate;
    if (r.mean_judge_rate) j["mean_judge_rate"] = *r.mean_judge_rate;
    return j;
}

std::string format_win_rate(const WinRateReport& r) {
    auto rate = [](const std::optional<double>& x) { return x ? fmt::format("{:.1f}%", *x * 100.0) : std::string("n/a"); };
    std::string out = fmt::format("Win rate for {}\n", r.focus_system);
    out += fmt::format("{:<24}{:>6}{:>8}{:>6}{:>13}{:>8}{:>9}\n", "Judge", "Wins", "Losses", "Ties", "Unparseable",
                       "Failed", "Rate");
    for (const auto& [id, t] : r.per_judge) {
        out += fmt::format("{:<24}{:>6}{:>8}{:>6}{:>13}{:>8}{:>9}\n", id, t.wins, t.losses, t.ties, t.unparseable,
                           t.failed, rate(t.rate()));
    }
    const auto& p = r.pooled;
    out += fmt::format("{:<24}{:>6}{:>8}{:>6}{:>13}{:>8}{:>9}\n", "pooled", p.wins, p.losses, p.ties, p.unparseable,
                       p.failed, rate(r.pooled_rate));
    out += fmt::format("mean of judge rates: {}\n", rate(r.mean_judge_rate));
    out += fmt::format("position-inconsistent pairs: {}/{}\n", r.position_inconsistent, r.pairs_checked);
    for (const auto& [criterion, t] : r.per_criterion) {
        out += fmt::format("  {:<28} {} ({} decided)\n", criterion, rate(t.rate()), t.decided());
    }
    return out;
}

}  // namespace vizpod
