#include "vizpod/grounding.hpp"

#include <algorithm>
#include <cmath>

#include "vizpod/error.hpp"
#include "vizpod/parallel.hpp"
#include "vizpod/text.hpp"

namespace vizpod {
namespace {

// Sums in sorted order so the result does not depend on image order, bit for bit.
double order_free_mean(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

void GroundingConfig::validate() const {
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "grounding w must be > 0");
    if (!(report_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "report_scale must be > 0");
    if (chunk_max_tokens < 8) throw Error(ErrorCode::InvalidArgument, "chunk_max_tokens must be >= 8");
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        if (!std::isfinite(u.values[i]) || !std::isfinite(v.values[i])) {
            throw Error(ErrorCode::InvalidArgument, "non-finite embedding entry");
        }
        dot += u.values[i] * v.values[i];
        uu += u.values[i] * u.values[i];
        vv += v.values[i] * v.values[i];
    }
    if (uu == 0.0 || vv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double clip_score_single(const EmbeddingVector& text_emb, const EmbeddingVector& image_emb, const GroundingConfig& cfg) {
    return cfg.report_scale * cfg.w * std::max(cosine(text_emb, image_emb), 0.0);
}

std::vector<std::string> chunk_text(std::string_view input, std::size_t chunk_max_tokens) {
    if (chunk_max_tokens == 0) throw Error(ErrorCode::InvalidArgument, "chunk_max_tokens must be > 0");
    const auto tokens = text::tokenize(input);
    std::vector<std::string> chunks;
    for (std::size_t i = 0; i < tokens.size(); i += chunk_max_tokens) {
        std::string chunk;
        const std::size_t end = std::min(tokens.size(), i + chunk_max_tokens);
        for (std::size_t j = i; j < end; ++j) {
            if (j > i) chunk.push_back(' ');
            chunk += tokens[j];
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

GroundingReport sequence_clip_score(const Transcript& t, std::span<const std::string> images,
                                    EmbeddingProvider& provider, const GroundingConfig& cfg,
                                    const RetryPolicy& retry) {
    cfg.validate();
    if (images.empty()) throw Error(ErrorCode::InvalidArgument, "sequence_clip_score needs at least one image");

    std::string body;
    for (const auto& turn : t.turns) {
        if (!body.empty()) body.push_back(' ');
        body += turn.text;
    }
    const auto chunks = chunk_text(body, cfg.chunk_max_tokens);
    if (chunks.empty()) throw Error(ErrorCode::EmptyTranscript, "no text to ground");

    // jobs [0, chunks) are text, [chunks, chunks + images) are images
    std::vector<EmbeddingVector> embeddings(chunks.size() + images.size());
    parallel_for(embeddings.size(), cfg.max_concurrency, [&](std::size_t i) {
        embeddings[i] = with_retry(
            retry,
            [&] {
                return i < chunks.size() ? provider.embed_text(chunks[i])
                                         : provider.embed_image(images[i - chunks.size()]);
            },
            "embedding request");
    });

    const std::size_t dim = embeddings.front().dim();
    for (const auto& e : embeddings) {
        if (e.dim() != dim) {
            throw Error(ErrorCode::EmbeddingDimMismatch,
                        "provider returned dims " + std::to_string(dim) + " and " + std::to_string(e.dim()));
        }
    }

    GroundingReport report;
    report.source_id = t.source_id;
    report.chunk_count = chunks.size();
    report.config = cfg;
    for (std::size_t img = 0; img < images.size(); ++img) {
        const auto& image_emb = embeddings[chunks.size() + img];
        double scaled = 0.0;
        double raw = 0.0;
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            const double cos = cosine(embeddings[c], image_emb);
            const double s = clip_score_single(embeddings[c], image_emb, cfg);
            const double r = cfg.w * std::max(cos, 0.0);
            if (cfg.chunk_aggregation == ChunkAggregation::Max) {
                scaled = std::max(scaled, s);
                raw = std::max(raw, r);
            } else {
                scaled += s;
                raw += r;
            }
        }
        if (cfg.chunk_aggregation == ChunkAggregation::Mean) {
            scaled /= static_cast<double>(chunks.size());
            raw /= static_cast<double>(chunks.size());
        }
        report.per_image_scores.push_back(scaled);
        report.per_image_raw.push_back(raw);
    }

    report.sequence_score = order_free_mean(report.per_image_scores);
    report.sequence_raw = order_free_mean(report.per_image_raw);
    return report;
}

nlohmann::json to_json(const GroundingConfig& cfg) {
    return {{"w", cfg.w},
            {"report_scale", cfg.report_scale},
            {"chunk_max_tokens", cfg.chunk_max_tokens},
            {"chunk_aggregation", cfg.chunk_aggregation == ChunkAggregation::Max ? "max" : "mean"},
            {"image_aggregation", "mean"},
            {"max_concurrency", cfg.max_concurrency}};
}

GroundingConfig grounding_config_from_json(const nlohmann::json& j) {
    GroundingConfig cfg;
    cfg.w = j.value("w", cfg.w);
    cfg.report_scale = j.value("report_scale", cfg.report_scale);
    cfg.chunk_max_tokens = j.value("chunk_max_tokens", cfg.chunk_max_tokens);
    cfg.max_concurrency = j.value("max_concurrency", cfg.max_concurrency);
    const auto agg = j.value("chunk_aggregation", std::string("max"));
    if (agg == "max") {
        cfg.chunk_aggregation = ChunkAggregation::Max;
    } else if (agg == "mean") {
        cfg.chunk_aggregation = ChunkAggregation::Mean;
    } else {
        throw Error(ErrorCode::ConfigInvalid, "chunk_aggregation must be 'max' or 'mean'");
    }
    if (j.value("image_aggregation", std::string("mean")) != "mean") {
        throw Error(ErrorCode::ConfigInvalid, "image_aggregation supports only 'mean'");
    }
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const GroundingReport& r) {
    return {{"id", r.source_id},
            {"per_image_scores", r.per_image_scores},
            {"per_image_raw", r.per_image_raw},
            {"sequence_score", r.sequence_score},
            {"sequence_raw", r.sequence_raw},
            {"chunk_count", r.chunk_count},
            {"config", to_json(r.config)}};
}

}  // namespace vizpod
