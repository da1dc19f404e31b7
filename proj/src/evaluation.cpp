#include "vizpod/evaluation.hpp"

#include <set>

#include "vizpod/error.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/util.hpp"

namespace vizpod {

std::vector<GenerationRequest> requests_from_manifests(const std::vector<SampleManifest>& manifests,
                                                       const std::filesystem::path& base_dir) {
    std::vector<GenerationRequest> out;
    for (const auto& m : manifests) {
        GenerationRequest r;
        r.sample_id = m.sample_id;
        for (const auto& img : m.images) {
            if (img.blocked || img.path.empty()) continue;
            std::filesystem::path p(img.path);
            r.image_paths.push_back(p.is_absolute() ? p : base_dir / p);
        }
        if (!r.image_paths.empty()) out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const GenerationRequest& r) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : r.image_paths) paths.push_back(p.generic_string());
    return {{"sample_id", r.sample_id},
            {"image_paths", std::move(paths)},
            {"sampling", {{"temperature", r.temperature}, {"top_p", r.top_p}, {"max_new_tokens", r.max_new_tokens}}}};
}

GenerationRequest generation_request_from_json(const nlohmann::json& j) {
    GenerationRequest r;
    r.sample_id = j.at("sample_id").get<std::string>();
    for (const auto& p : j.at("image_paths")) r.image_paths.emplace_back(p.get<std::string>());
    if (j.contains("prompt_text")) r.prompt_text = j["prompt_text"].get<std::string>();
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        r.temperature = s.value("temperature", r.temperature);
        r.top_p = s.value("top_p", r.top_p);
        r.max_new_tokens = s.value("max_new_tokens", r.max_new_tokens);
    }
    return r;
}

void write_requests(const std::filesystem::path& path, const std::vector<GenerationRequest>& requests) {
    const auto base = std::filesystem::absolute(path).parent_path();
    std::vector<nlohmann::json> lines;
    for (auto r : requests) {
        for (auto& p : r.image_paths) {
            auto rel = std::filesystem::absolute(p).lexically_normal().lexically_relative(base.lexically_normal());
            if (!rel.empty()) p = std::move(rel);
        }
        lines.push_back(to_json(r));
    }
    write_jsonl(path, lines);
}

std::vector<GenerationRequest> read_requests(const std::filesystem::path& path) {
    const auto lines = read_jsonl(path);
    const auto base = path.parent_path();
    if (!lines.empty() && lines.front().contains("excerpt")) {
        std::vector<SampleManifest> ms;
        for (const auto& j : lines) ms.push_back(manifest_from_json(j));
        return requests_from_manifests(ms, base);
    }
    std::vector<GenerationRequest> out;
    for (const auto& j : lines) {
        auto r = generation_request_from_json(j);
        for (auto& p : r.image_paths) {
            if (p.is_relative()) p = base / p;
        }
        out.push_back(std::move(r));
    }
    return out;
}

ComparisonSet comparison_tasks(const std::vector<GenerationRecord>& records, const std::string& focus,
                               const ParseConfig& parse) {
    std::map<std::string, std::map<std::string, const GenerationRecord*>> by_sample;
    std::set<std::string> systems;
    for (const auto& r : records) {
        by_sample[r.sample_id][r.model_id] = &r;
        systems.insert(r.model_id);
    }
    if (!systems.count(focus)) throw Error(ErrorCode::InvalidArgument, "focus system '" + focus + "' has no records");
    if (systems.size() < 2) throw Error(ErrorCode::InvalidArgument, "judging needs records from two systems");

    ComparisonSet out;
    for (const auto& [sample, per_system] : by_sample) {
        const auto f = per_system.find(focus);
        if (f == per_system.end()) continue;
        for (const auto& [system, rec] : per_system) {
            if (system == focus) continue;
            ComparisonTask task;
            task.sample_id = systems.size() > 2 ? sample + "|" + focus + "-vs-" + system : sample;
            task.system_labels = {focus, system};
            try {
                task.transcript_a = parse_transcript(f->second->transcript_text, parse, sample);
                task.transcript_b = parse_transcript(rec->transcript_text, parse, sample);
            } catch (const Error& e) {
                out.skipped.push_back(sample + "/" + system + ": " + e.what());
                continue;
            }
            out.labels[task.sample_id] = task.system_labels;
            out.tasks.push_back(std::move(task));
        }
    }
    return out;
}

nlohmann::json verdict_line(const Verdict& v, const SystemLabels& labels) {
    auto j = to_json(v);
    j["system_a"] = labels.a;
    j["system_b"] = labels.b;
    return j;
}

std::pair<Verdict, SystemLabels> verdict_line_from_json(const nlohmann::json& j) {
    return {verdict_from_json(j), {j.at("system_a").get<std::string>(), j.at("system_b").get<std::string>()}};
}

GroundingRun ground_records(const std::vector<GenerationRecord>& records,
                            const std::vector<GenerationRequest>& requests, EmbeddingProvider& provider,
                            const GroundingConfig& cfg, const RetryPolicy& retry, const ParseConfig& parse) {
    std::map<std::string, const GenerationRequest*> by_id;
    for (const auto& r : requests) by_id[r.sample_id] = &r;

    GroundingRun out;
    std::map<std::string, std::vector<std::string>> images;
    for (const auto& rec : records) {
        const auto it = by_id.find(rec.sample_id);
        if (it == by_id.end()) {
            out.errors.push_back(rec.sample_id + "/" + rec.model_id + ": no images for sample");
            continue;
        }
        auto& bytes = images[rec.sample_id];
        try {
            if (bytes.empty()) {
                for (const auto& p : it->second->image_paths) bytes.push_back(util::read_file(p));
            }
            auto report = sequence_clip_score(parse_transcript(rec.transcript_text, parse, rec.sample_id), bytes,
                                              provider, cfg, retry);
            auto j = to_json(report);
            j["system"] = rec.model_id;
            out.lines.push_back(std::move(j));
        } catch (const Error& e) {
            out.errors.push_back(rec.sample_id + "/" + rec.model_id + ": " + e.what());
            if (is_retryable(e.code())) throw;
        }
    }
    return out;
}

}  // namespace vizpod
