/// @file run_config.hpp
/// @brief Run configuration: provider endpoints, cache, and stage defaults.
///
/// Credentials are never part of the config; endpoints name the environment
/// variable that holds the bearer token. Any provider may instead select an
/// in-tree stub with "stub": "<kind>".
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/clients.hpp"
#include "vizpod/datagen.hpp"
#include "vizpod/grounding.hpp"
#include "vizpod/judge.hpp"
#include "vizpod/retry.hpp"
#include "vizpod/genclient.hpp"
#include "vizpod/stub_clients.hpp"
#include "vizpod/transcript.hpp"

namespace vizpod {

struct ProviderSpec {
    std::string name;
    std::optional<std::string> stub;  ///< stub kind; when set the endpoint is unused
    EndpointConfig endpoint;
};

struct RunConfig {
    std::filesystem::path cache_dir = ".vizpod-cache";
    std::size_t jobs = 4;

    std::vector<ProviderSpec> judges;
    std::vector<ProviderSpec> vlms;
    std::optional<ProviderSpec> extractor;
    std::optional<ProviderSpec> promptgen;
    std::optional<ProviderSpec> image;
    std::optional<ProviderSpec> embedding;

    ParseConfig parse;
    GroundingConfig grounding;
    bool judge_debias = true;
    double judge_temperature = 0.0;
    std::string focus_system;  ///< system whose win rate is reported
    FilterCriteria filter;
    WordBand band;
    std::size_t max_excerpts_per_episode = 1;
    std::size_t synthetic_episodes = 20;
    std::uint64_t synthetic_seed = 7;
    unsigned stub_block_permille = 40;

    int retry_max_attempts = 4;
    int retry_initial_backoff_ms = 500;
    int retry_max_backoff_ms = 8000;

    RetryPolicy retry_policy() const;
    /// Throws Error(ConfigInvalid) describing the first problem found.
    void validate() const;
};

/// Throws ConfigInvalid on malformed or unknown fields, and on any field that
/// looks like an inline secret.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// Every provider replaced by its offline stub. Without configured judges the
/// panel is two content judges and one position-biased judge.
RunConfig dry_run_config(RunConfig base = {});

/// Owns the clients built from a RunConfig.
class Providers {
public:
    explicit Providers(const RunConfig& cfg) : cfg_(cfg) {}

    std::vector<JudgeEndpoint> judges(const std::vector<std::string>& only = {});
    /// (system name, client, model id)
    struct Vlm {
        std::string name;
        ChatClient* client;
        std::string model;
    };
    std::vector<Vlm> vlms();
    ExcerptExtractor& extractor();
    ImagePromptGenerator& promptgen();
    ImageClient& image();
    EmbeddingProvider& embedding();
    /// Fake clock advanced by stub VLMs when any VLM is a stub, else the steady clock.
    Clock clock();

private:
    ChatClient& chat(const ProviderSpec& spec, ErrorCode unavailable);
    const ProviderSpec& require(const std::optional<ProviderSpec>& spec, const char* what) const;

    const RunConfig& cfg_;
    std::vector<std::unique_ptr<ChatClient>> chats_;
    std::unique_ptr<ExcerptExtractor> extractor_;
    std::unique_ptr<ImagePromptGenerator> promptgen_;
    std::unique_ptr<ImageClient> image_;
    std::unique_ptr<EmbeddingProvider> embedding_;
    stub::FakeClock fake_clock_;
};

}  // namespace vizpod
