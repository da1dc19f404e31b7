#include "vizpod/genclient.hpp"

#include <fmt/format.h>

#include <chrono>
#include <map>

#include "vizpod/error.hpp"
#include "vizpod/text.hpp"
#include "vizpod/transcript.hpp"
#include "vizpod/util.hpp"

namespace vizpod {
namespace {

std::string mime_for(const std::filesystem::path& p) {
    auto ext = text::lowercase(p.extension().string());
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    if (ext == ".ppm") return "image/x-portable-pixmap";
    return "image/png";
}

}  // namespace

const std::string& inference_prompt() {
    static const std::string prompt =
        "Generate a natural conversational podcast dialogue. Use the format Speaker 1:, Speaker 2:, Speaker 3:, "
        "etc. for multiple speakers. Do not reference the images or use phrases like 'our first image'. Write "
        "casual, authentic spoken dialogue without introductions or sign-offs. The word count should be around "
        "800 words.";
    return prompt;
}

Clock steady_clock_seconds() {
    return [] {
        using namespace std::chrono;
        return duration<double>(steady_clock::now().time_since_epoch()).count();
    };
}

nlohmann::json to_json(const GenerationRecord& r) {
    nlohmann::json j = {{"sample_id", r.sample_id},
                        {"model_id", r.model_id},
                        {"transcript_text", r.transcript_text},
                        {"word_count", r.word_count}};
    j["latency_s"] = r.latency_s ? nlohmann::json(*r.latency_s) : nlohmann::json(nullptr);
    return j;
}

GenerationRecord generation_record_from_json(const nlohmann::json& j) {
    GenerationRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.transcript_text = j.at("transcript_text").get<std::string>();
    r.word_count = j.at("word_count").get<std::size_t>();
    if (j.contains("latency_s") && !j["latency_s"].is_null()) r.latency_s = j["latency_s"].get<double>();
    return r;
}

ChatRequest build_generation_request(const GenerationRequest& req, const std::string& model_id,
                                     std::vector<ImageAttachment> images) {
    ChatRequest chat;
    chat.model = model_id;
    chat.temperature = req.temperature;
    chat.top_p = req.top_p;
    chat.max_tokens = req.max_new_tokens;
    chat.messages.push_back({"system", req.prompt_text, {}});
    chat.messages.push_back({"user", "", std::move(images)});
    return chat;
}

GenerationRecord generate(const GenerationRequest& req, ChatClient& vlm, const std::string& model_id,
                          const GenerateOptions& opts) {
    if (req.image_paths.empty()) throw Error(ErrorCode::InvalidArgument, req.sample_id + ": no images");
    std::vector<ImageAttachment> images;
    for (const auto& p : req.image_paths) images.push_back({mime_for(p), util::read_file(p)});
    const auto chat = build_generation_request(req, model_id, std::move(images));

    const double start = opts.clock();
    auto reply = with_retry(opts.retry, [&] { return vlm.complete(chat); }, "generate " + req.sample_id);
    const double elapsed = opts.clock() - start;

    if (text::trim(reply).empty()) throw Error(ErrorCode::EmptyGeneration, req.sample_id + ": empty reply");

    GenerationRecord rec;
    rec.sample_id = req.sample_id;
    rec.model_id = model_id;
    rec.word_count = word_count(reply);
    rec.transcript_text = std::move(reply);
    if (opts.measure_latency) rec.latency_s = elapsed;
    return rec;
}

std::vector<GenerationStats> generation_stats(const std::vector<GenerationRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no generation records");
    std::vector<std::string> order;
    std::map<std::string, std::vector<const GenerationRecord*>> by_model;
    for (const auto& r : records) {
        auto& bucket = by_model[r.model_id];
        if (bucket.empty()) order.push_back(r.model_id);
        bucket.push_back(&r);
    }
    std::vector<GenerationStats> out;
    for (const auto& model : order) {
        std::vector<double> words, latency;
        bool all_timed = true;
        for (const auto* r : by_model[model]) {
            words.push_back(static_cast<double>(r->word_count));
            if (r->latency_s) latency.push_back(*r->latency_s);
            else all_timed = false;
        }
        GenerationStats s{model, mean_std(words), std::nullopt};
        if (all_timed) s.latency_s = mean_std(latency);
        out.push_back(std::move(s));
    }
    return out;
}

nlohmann::json to_json(const GenerationStats& s) {
    nlohmann::json j = {{"model_id", s.model_id},
                        {"n", s.word_count.n},
                        {"word_count", {{"mean", s.word_count.mean}, {"std", s.word_count.std}}}};
    j["latency_s"] = s.latency_s ? nlohmann::json{{"mean", s.latency_s->mean}, {"std", s.latency_s->std}}
                                 : nlohmann::json(nullptr);
    return j;
}

std::string format_generation_stats(const std::vector<GenerationStats>& stats) {
    std::string out = fmt::format("{:<20}", "Metric");
    for (const auto& s : stats) out += fmt::format(" | {:>18}", s.model_id);
    out += "\n" + fmt::format("{:<20}", "Avg. Word Count");
    for (const auto& s : stats) out += fmt::format(" | {:>18}", format_mean_std(s.word_count));
    out += "\n" + fmt::format("{:<20}", "Avg. Gen Time (s)");
    for (const auto& s : stats) out += fmt::format(" | {:>18}", s.latency_s ? format_mean_std(*s.latency_s) : "n/a");
    out += "\n";
    return out;
}

std::string emit_training_config() {
    return "# LoRA fine-tuning configuration (emitted only; not executed by this tool)\n"
           "lora_rank = 16\n"
           "lora_alpha = 32\n"
           "lora_dropout = 0.05\n"
           "learning_rate = 4e-6\n"
           "batch_size_per_gpu = 1\n"
           "gradient_accumulation = 4\n"
           "effective_batch_size = 32\n"
           "epochs = 1\n"
           "weight_decay = 0.1\n"
           "warmup_ratio = 0.1\n"
           "max_grad_norm = 0.3\n"
           "lr_scheduler = Cosine\n"
           "neftune_noise_alpha = 5.0\n"
           "model_max_length = 8192\n"
           "precision = bf16\n"
           "deepspeed = ZeRO-3\n"
           "gradient_checkpointing = True\n";
}

}  // namespace vizpod
