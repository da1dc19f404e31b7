#include "vizpod/clients.hpp"

#include "vizpod/util.hpp"

namespace vizpod {

nlohmann::json ChatRequest::to_json() const {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        if (m.images.empty()) {
            msgs.push_back({{"role", m.role}, {"content", m.text}});
            continue;
        }
        nlohmann::json parts = nlohmann::json::array();
        for (const auto& img : m.images) {
            parts.push_back({{"type", "image_url"},
                             {"image_url", {{"url", "data:" + img.mime + ";base64," + util::base64_encode(img.bytes)}}}});
        }
        if (!m.text.empty()) parts.push_back({{"type", "text"}, {"text", m.text}});
        msgs.push_back({{"role", m.role}, {"content", std::move(parts)}});
    }
    nlohmann::json body = {{"model", model}, {"messages", std::move(msgs)}, {"temperature", temperature}};
    if (top_p) body["top_p"] = *top_p;
    if (max_tokens) body["max_tokens"] = *max_tokens;
    return body;
}

std::string ChatRequest::cache_key() const {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        nlohmann::json digests = nlohmann::json::array();
        for (const auto& img : m.images) digests.push_back(util::sha256_hex(img.bytes));
        msgs.push_back({{"role", m.role}, {"text", m.text}, {"images", std::move(digests)}});
    }
    nlohmann::json key = {{"model", model}, {"messages", std::move(msgs)}, {"temperature", temperature}};
    if (top_p) key["top_p"] = *top_p;
    if (max_tokens) key["max_tokens"] = *max_tokens;
    return key.dump();
}

nlohmann::json ImageResult::to_json() const {
    if (status == Status::Blocked) return {{"status", "blocked"}, {"reason", reason}};
    return {{"status", "ok"}, {"format", format}, {"image_base64", util::base64_encode(bytes)}};
}

ImageResult ImageResult::from_json(const nlohmann::json& j) {
    ImageResult r;
    const auto status = j.at("status").get<std::string>();
    if (status == "blocked") {
        r.status = Status::Blocked;
        r.reason = j.value("reason", std::string("content filter"));
    } else if (status == "ok") {
        r.format = j.value("format", std::string("png"));
        r.bytes = util::base64_decode(j.at("image_base64").get<std::string>());
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown image status '" + status + "'");
    }
    return r;
}

}  // namespace vizpod
