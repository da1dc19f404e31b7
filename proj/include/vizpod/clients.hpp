/// @file clients.hpp
/// @brief Provider-facing interfaces: chat completion and text-to-image.
///
/// Every model-backed stage talks to one of these. HTTP implementations live in
/// http_clients.cpp; deterministic stand-ins in stub_clients.hpp.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vizpod/error.hpp"

namespace vizpod {

struct ImageAttachment {
    std::string mime = "image/png";
    std::string bytes;
};

struct ChatMessage {
    std::string role;  ///< "system" | "user" | "assistant"
    std::string text;
    std::vector<ImageAttachment> images;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<double> top_p;
    std::optional<int> max_tokens;

    /// OpenAI-compatible body; images become base64 data URLs.
    nlohmann::json to_json() const;
    /// Stable serialization used as cache key material. Image bytes enter as digests.
    std::string cache_key() const;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the assistant text. Throws a retryable Error when unreachable.
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct ImageResult {
    enum class Status { Ok, Blocked };
    Status status = Status::Ok;
    std::string bytes;
    std::string format = "png";  ///< file extension for Ok results
    std::string reason;          ///< provider's rejection reason for Blocked results

    nlohmann::json to_json() const;  ///< bytes as base64
    static ImageResult from_json(const nlohmann::json& j);
};

class ImageClient {
public:
    virtual ~ImageClient() = default;
    /// Blocked is a normal, permanent result. Transient failures throw
    /// Error(ImageServiceUnavailable).
    virtual ImageResult generate(const std::string& prompt) = 0;
    virtual std::string name() const = 0;
};

struct EndpointConfig {
    std::string name;
    std::string base_url;  ///< scheme://host[:port][/prefix]
    std::string model;
    std::string api_key_env;  ///< environment variable holding the bearer token
    int timeout_s = 300;
};

/// OpenAI-compatible POST {base_url}/v1/chat/completions.
/// `unavailable` is the error raised on transport failure or 5xx/429.
std::unique_ptr<ChatClient> make_http_chat_client(EndpointConfig cfg, ErrorCode unavailable);

/// POST {base_url}/generate {"prompt", "model"}; the reply is either raw image
/// bytes (Content-Type image/*) or JSON {"status":"ok","image_base64","format"}
/// / {"status":"blocked","reason"}. HTTP 400/403/422 carrying a content-filter
/// marker are reported as Blocked.
std::unique_ptr<ImageClient> make_http_image_client(EndpointConfig cfg);

}  // namespace vizpod
