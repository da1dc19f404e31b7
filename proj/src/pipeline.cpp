#include "vizpod/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <optional>

#include "vizpod/error.hpp"
#include "vizpod/jsonl.hpp"
#include "vizpod/parallel.hpp"
#include "vizpod/util.hpp"

namespace vizpod {
namespace {

std::string error_code_of(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->code()));
    return "Exception";
}

}  // namespace

nlohmann::json to_json(const PromptedExcerpt& p) {
    nlohmann::json prompts = nlohmann::json::array();
    for (const auto& ip : p.prompts) prompts.push_back({{"scene_index", ip.scene_index}, {"prompt", ip.prompt_text}});
    return {{"sample_id", p.excerpt.excerpt_id}, {"excerpt", to_json(p.excerpt)}, {"prompts", std::move(prompts)}};
}

PromptedExcerpt prompted_excerpt_from_json(const nlohmann::json& j) {
    PromptedExcerpt p;
    p.excerpt = excerpt_from_json(j.at("excerpt"));
    for (const auto& ip : j.at("prompts")) {
        p.prompts.push_back(
            {p.excerpt.excerpt_id, ip.at("scene_index").get<std::size_t>(), ip.at("prompt").get<std::string>()});
    }
    return p;
}

std::vector<Excerpt> run_extract_stage(const std::vector<Episode>& episodes, ExcerptExtractor& extractor,
                                       const PipelineOptions& opts) {
    const auto filtered = filter_episodes(episodes, opts.filter);
    std::vector<nlohmann::json> log;
    for (const auto& [id, reason] : filtered.rejected) {
        log.push_back({{"episode_id", id}, {"stage", "filter"}, {"reason", reason}});
    }

    ExtractOptions eo;
    eo.band = opts.band;
    eo.max_excerpts_per_episode = opts.max_excerpts_per_episode;
    eo.retry = opts.retry;
    eo.cache = opts.cache;

    std::vector<std::optional<ExtractOutcome>> outcomes(filtered.kept.size());
    std::vector<std::string> failures(filtered.kept.size());
    parallel_for(filtered.kept.size(), opts.jobs, [&](std::size_t i) {
        try {
            outcomes[i] = extract_excerpts(filtered.kept[i], extractor, eo);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });

    std::vector<Excerpt> excerpts;
    std::vector<nlohmann::json> records;
    for (std::size_t i = 0; i < filtered.kept.size(); ++i) {
        const auto& id = filtered.kept[i].episode_id;
        if (!outcomes[i]) {
            log.push_back({{"episode_id", id}, {"stage", "extract"}, {"reason", failures[i]}});
            continue;
        }
        for (const auto& d : outcomes[i]->dropped) {
            log.push_back({{"episode_id", id}, {"stage", "validate"}, {"reason", d}});
        }
        for (auto& ex : outcomes[i]->excerpts) {
            records.push_back(to_json(ex));
            excerpts.push_back(std::move(ex));
        }
    }
    write_jsonl(opts.out_dir / "excerpts.jsonl", records);
    write_jsonl(opts.out_dir / "extract_log.jsonl", log);
    spdlog::info("extract: {} episodes, {} passed filter, {} excerpts", episodes.size(), filtered.kept.size(),
                 excerpts.size());
    return excerpts;
}

std::vector<PromptedExcerpt> run_promptgen_stage(const std::vector<Excerpt>& excerpts,
                                                 ImagePromptGenerator& generator, const PipelineOptions& opts) {
    PromptOptions po{opts.retry, opts.cache};
    std::vector<std::optional<std::vector<ImagePrompt>>> prompts(excerpts.size());
    std::vector<std::string> failures(excerpts.size());
    parallel_for(excerpts.size(), opts.jobs, [&](std::size_t i) {
        try {
            prompts[i] = generate_image_prompts(excerpts[i], generator, po);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });

    std::vector<PromptedExcerpt> out;
    std::vector<nlohmann::json> records;
    std::vector<nlohmann::json> log;
    for (std::size_t i = 0; i < excerpts.size(); ++i) {
        if (!prompts[i]) {
            log.push_back({{"sample_id", excerpts[i].excerpt_id}, {"stage", "promptgen"}, {"reason", failures[i]}});
            continue;
        }
        PromptedExcerpt p{excerpts[i], std::move(*prompts[i])};
        records.push_back(to_json(p));
        out.push_back(std::move(p));
    }
    write_jsonl(opts.out_dir / "prompts.jsonl", records);
    write_jsonl(opts.out_dir / "promptgen_log.jsonl", log);
    spdlog::info("promptgen: {} excerpts, {} prompted", excerpts.size(), out.size());
    return out;
}

std::vector<SampleManifest> run_synth_stage(const std::vector<PromptedExcerpt>& prompted, ImageClient& client,
                                            const PipelineOptions& opts) {
    SynthOptions so{opts.out_dir, opts.retry, opts.cache};
    std::vector<std::optional<std::vector<ImageRecord>>> images(prompted.size());
    std::vector<std::string> failures(prompted.size());
    parallel_for(prompted.size(), opts.jobs, [&](std::size_t i) {
        try {
            images[i] = synthesize_images(prompted[i].excerpt.excerpt_id, prompted[i].prompts, client, so);
        } catch (const std::exception& e) {
            failures[i] = std::string(error_code_of(e)) + ": " + e.what();
        }
    });

    std::vector<SampleManifest> manifests;
    std::vector<nlohmann::json> records;
    std::vector<nlohmann::json> excluded;
    for (std::size_t i = 0; i < prompted.size(); ++i) {
        const auto& id = prompted[i].excerpt.excerpt_id;
        if (!images[i]) {
            excluded.push_back({{"sample_id", id}, {"stage", "synth"}, {"reason", failures[i]}});
            continue;
        }
        auto m = make_manifest(prompted[i].excerpt, prompted[i].prompts, std::move(*images[i]));
        if (m.image_count < kMinImagesPerSample) {
            excluded.push_back({{"sample_id", id},
                                {"stage", "synth"},
                                {"reason", "only " + std::to_string(m.image_count) + " images after safety blocks"},
                                {"manifest", to_json(m)}});
            continue;
        }
        records.push_back(to_json(m));
        manifests.push_back(std::move(m));
    }
    write_jsonl(opts.out_dir / "manifests.jsonl", records);
    write_jsonl(opts.out_dir / "excluded.jsonl", excluded);
    spdlog::info("synth: {} samples, {} retained, {} excluded", prompted.size(), manifests.size(), excluded.size());
    return manifests;
}

DatasetStats run_stats_stage(const std::vector<SampleManifest>& manifests, const std::filesystem::path& out_dir) {
    auto stats = dataset_stats(manifests);
    write_json(out_dir / "stats.json", to_json(stats));
    util::write_file_atomic(out_dir / "stats.txt", format_dataset_stats(stats));
    return stats;
}

DatasetStats run_pipeline(const std::vector<Episode>& episodes, const PipelineClients& clients,
                          const PipelineOptions& opts) {
    if (!clients.extractor || !clients.promptgen || !clients.images) {
        throw Error(ErrorCode::ConfigInvalid, "pipeline needs extractor, prompt generator and image clients");
    }
    const auto excerpts = run_extract_stage(episodes, *clients.extractor, opts);
    const auto prompted = run_promptgen_stage(excerpts, *clients.promptgen, opts);
    const auto manifests = run_synth_stage(prompted, *clients.images, opts);
    return run_stats_stage(manifests, opts.out_dir);
}

std::vector<Episode> read_episodes(const std::filesystem::path& path) {
    std::vector<Episode> out;
    for (const auto& j : read_jsonl(path)) out.push_back(episode_from_json(j));
    return out;
}

std::vector<Excerpt> read_excerpts(const std::filesystem::path& path) {
    std::vector<Excerpt> out;
    for (const auto& j : read_jsonl(path)) out.push_back(excerpt_from_json(j));
    return out;
}

std::vector<PromptedExcerpt> read_prompted(const std::filesystem::path& path) {
    std::vector<PromptedExcerpt> out;
    for (const auto& j : read_jsonl(path)) out.push_back(prompted_excerpt_from_json(j));
    return out;
}

std::vector<SampleManifest> read_manifests(const std::filesystem::path& path) {
    std::vector<SampleManifest> out;
    for (const auto& j : read_jsonl(path)) out.push_back(manifest_from_json(j));
    return out;
}

}  // namespace vizpod
