/// @file genclient.hpp
/// @brief Transcript generation against a vision-language endpoint, the
/// generation-statistics table and the fine-tuning configuration document.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/clients.hpp"
#include "vizpod/retry.hpp"
#include "vizpod/summary_stats.hpp"

namespace vizpod {

/// The fixed inference prompt, byte for byte.
const std::string& inference_prompt();

struct GenerationRequest {
    std::string sample_id;
    std::vector<std::filesystem::path> image_paths;
    std::string prompt_text = inference_prompt();
    double temperature = 0.7;
    double top_p = 0.8;
    int max_new_tokens = 2048;
};

struct GenerationRecord {
    std::string sample_id;
    std::string model_id;
    std::string transcript_text;
    std::optional<double> latency_s;  ///< absent when measured under contention
    std::size_t word_count = 0;
};

nlohmann::json to_json(const GenerationRecord& r);
GenerationRecord generation_record_from_json(const nlohmann::json& j);

/// Seconds on a monotonic clock.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

struct GenerateOptions {
    RetryPolicy retry;
    Clock clock = steady_clock_seconds();
    bool measure_latency = true;
};

/// Sends the prompt as the system message and the images in one user message.
/// Latency spans the whole round trip including retries. Throws InputMissing,
/// VlmUnavailable (after retries) or EmptyGeneration.
GenerationRecord generate(const GenerationRequest& req, ChatClient& vlm, const std::string& model_id,
                          const GenerateOptions& opts = {});

/// Builds an in-memory request from attachments already loaded.
ChatRequest build_generation_request(const GenerationRequest& req, const std::string& model_id,
                                     std::vector<ImageAttachment> images);

struct GenerationStats {
    std::string model_id;
    MeanStd word_count;
    std::optional<MeanStd> latency_s;  ///< only when every record carries a latency
};

/// One entry per model, in first-seen order. Throws EmptyInput.
std::vector<GenerationStats> generation_stats(const std::vector<GenerationRecord>& records);
nlohmann::json to_json(const GenerationStats& s);
/// "Avg. Word Count" and "Avg. Gen Time (s)" rows, one column per model.
std::string format_generation_stats(const std::vector<GenerationStats>& stats);

/// Flat "key = value" document with the LoRA fine-tuning hyperparameters.
std::string emit_training_config();

}  // namespace vizpod
