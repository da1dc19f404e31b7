/// @file pipeline.hpp
/// @brief Stage runners that read and write the JSONL files between stages.
///
/// Every stage can run on its own from the previous stage's output. Samples
/// are independent work units processed with bounded parallelism; outputs are
/// written once, in input order, by the calling thread, so reruns against a
/// warm cache reproduce every file byte for byte.
#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "vizpod/dataset_stats.hpp"
#include "vizpod/datagen.hpp"

namespace vizpod {

struct PipelineOptions {
    std::filesystem::path out_dir;
    FilterCriteria filter;
    WordBand band;
    std::size_t max_excerpts_per_episode = 1;
    RetryPolicy retry;
    ContentCache* cache = nullptr;
    std::size_t jobs = 1;
};

struct PromptedExcerpt {
    Excerpt excerpt;
    std::vector<ImagePrompt> prompts;
};

nlohmann::json to_json(const PromptedExcerpt& p);
PromptedExcerpt prompted_excerpt_from_json(const nlohmann::json& j);

/// excerpts.jsonl + extract_log.jsonl
std::vector<Excerpt> run_extract_stage(const std::vector<Episode>& episodes, ExcerptExtractor& extractor,
                                       const PipelineOptions& opts);
/// prompts.jsonl + promptgen_log.jsonl
std::vector<PromptedExcerpt> run_promptgen_stage(const std::vector<Excerpt>& excerpts,
                                                 ImagePromptGenerator& generator, const PipelineOptions& opts);
/// manifests.jsonl + excluded.jsonl; images under images/
std::vector<SampleManifest> run_synth_stage(const std::vector<PromptedExcerpt>& prompted, ImageClient& client,
                                            const PipelineOptions& opts);
/// stats.json + stats.txt
DatasetStats run_stats_stage(const std::vector<SampleManifest>& manifests, const std::filesystem::path& out_dir);

struct PipelineClients {
    ExcerptExtractor* extractor = nullptr;
    ImagePromptGenerator* promptgen = nullptr;
    ImageClient* images = nullptr;
};

DatasetStats run_pipeline(const std::vector<Episode>& episodes, const PipelineClients& clients,
                          const PipelineOptions& opts);

std::vector<Episode> read_episodes(const std::filesystem::path& path);
std::vector<Excerpt> read_excerpts(const std::filesystem::path& path);
std::vector<PromptedExcerpt> read_prompted(const std::filesystem::path& path);
std::vector<SampleManifest> read_manifests(const std::filesystem::path& path);

}  // namespace vizpod
