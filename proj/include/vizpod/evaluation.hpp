/// @file evaluation.hpp
/// @brief Glue between generation records and the metric, grounding and
/// judge modules.
#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "json.hpp"
#include "vizpod/datagen.hpp"
#include "vizpod/genclient.hpp"
#include "vizpod/grounding.hpp"
#include "vizpod/judge.hpp"

namespace vizpod {

/// One request per manifest with at least one image; relative image paths are
/// resolved against base_dir.
std::vector<GenerationRequest> requests_from_manifests(const std::vector<SampleManifest>& manifests,
                                                       const std::filesystem::path& base_dir);
nlohmann::json to_json(const GenerationRequest& r);
GenerationRequest generation_request_from_json(const nlohmann::json& j);

/// Image paths are stored relative to the file's directory so the file can
/// move with its outputs.
void write_requests(const std::filesystem::path& path, const std::vector<GenerationRequest>& requests);
/// Reads requests.jsonl or manifests.jsonl; relative paths resolve against
/// the file's directory.
std::vector<GenerationRequest> read_requests(const std::filesystem::path& path);

struct ComparisonSet {
    std::vector<ComparisonTask> tasks;
    std::map<std::string, SystemLabels> labels;  ///< by task sample_id
    std::vector<std::string> skipped;            ///< "<sample>/<system>: reason"
};

/// Pairs the focus system against every other system on each shared sample.
/// The focus transcript is always transcript_a; with more than two systems the
/// task id becomes "<sample>|<focus>-vs-<other>".
ComparisonSet comparison_tasks(const std::vector<GenerationRecord>& records, const std::string& focus,
                               const ParseConfig& parse = {});

/// Verdict line with the pair's system labels attached, and its inverse.
nlohmann::json verdict_line(const Verdict& v, const SystemLabels& labels);
std::pair<Verdict, SystemLabels> verdict_line_from_json(const nlohmann::json& j);

/// Sequence CLIPScore for every record whose sample has images. Lines carry
/// the record's system under "system". Failures are reported in `errors`.
struct GroundingRun {
    std::vector<nlohmann::json> lines;
    std::vector<std::string> errors;
};
GroundingRun ground_records(const std::vector<GenerationRecord>& records,
                            const std::vector<GenerationRequest>& requests, EmbeddingProvider& provider,
                            const GroundingConfig& cfg, const RetryPolicy& retry, const ParseConfig& parse = {});

}  // namespace vizpod
