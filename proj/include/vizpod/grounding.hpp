/// @file grounding.hpp
/// @brief CLIPScore visual grounding of a transcript against its image sequence.
///
/// score(text, image) = report_scale * w * max(cos(text, image), 0)
///
/// Transcripts are longer than CLIP-family text encoders accept, so the
/// label-free token stream is split into greedy windows; each image keeps the
/// best (or mean) window score and the sequence score is the mean over images.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vizpod/clients.hpp"
#include "vizpod/retry.hpp"
#include "vizpod/transcript.hpp"

namespace vizpod {

struct EmbeddingVector {
    std::vector<double> values;
    std::size_t dim() const noexcept { return values.size(); }
};

enum class ChunkAggregation { Max, Mean };

struct GroundingConfig {
    double w = 2.5;
    double report_scale = 100.0;
    std::size_t chunk_max_tokens = 60;
    ChunkAggregation chunk_aggregation = ChunkAggregation::Max;
    std::size_t max_concurrency = 4;

    void validate() const;
};

struct GroundingReport {
    std::string source_id;
    std::vector<double> per_image_scores;  ///< scaled by report_scale
    std::vector<double> per_image_raw;     ///< w * max(cos, 0)
    double sequence_score = 0.0;
    double sequence_raw = 0.0;
    std::size_t chunk_count = 0;
    GroundingConfig config;
};

/// Wire contract: request {kind: "text"|"image", payload}, response {dim, values}.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingVector embed_text(std::string_view text) = 0;
    virtual EmbeddingVector embed_image(std::string_view image_bytes) = 0;
    virtual std::string name() const = 0;
};

/// HTTP client for the embedding sidecar: POST {base_url}/embed.
std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(EndpointConfig cfg);

/// Throws DimensionMismatch or ZeroVector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
double clip_score_single(const EmbeddingVector& text_emb, const EmbeddingVector& image_emb, const GroundingConfig& cfg);
std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_max_tokens);

/// Embeds all chunks and images (concurrently, bounded by cfg.max_concurrency)
/// and assembles scores in index order. Throws ProviderUnavailable once the
/// retry policy is exhausted and EmbeddingDimMismatch when dims disagree.
GroundingReport sequence_clip_score(const Transcript& t, std::span<const std::string> images,
                                    EmbeddingProvider& provider, const GroundingConfig& cfg,
                                    const RetryPolicy& retry = RetryPolicy{});

nlohmann::json to_json(const GroundingConfig& cfg);
GroundingConfig grounding_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GroundingReport& r);

}  // namespace vizpod
