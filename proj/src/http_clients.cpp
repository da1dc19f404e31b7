// HTTP transports for the provider interfaces. The only translation unit that
// includes httplib.
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <regex>

#include "vizpod/clients.hpp"
#include "vizpod/error.hpp"
#include "vizpod/grounding.hpp"
#include "vizpod/util.hpp"

namespace vizpod {
namespace {

struct ParsedUrl {
    std::string scheme_host_port;
    std::string prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) {
        throw Error(ErrorCode::ConfigInvalid, "base_url must look like http(s)://host[:port][/prefix]: '" + url + "'");
    }
    std::string prefix = m[2].matched ? m[2].str() : std::string();
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {m[1].str(), prefix};
}

class Transport {
public:
    Transport(const EndpointConfig& cfg, ErrorCode unavailable)
        : cfg_(cfg), url_(parse_base_url(cfg.base_url)), unavailable_(unavailable) {
        if (!cfg_.api_key_env.empty()) {
            const char* key = std::getenv(cfg_.api_key_env.c_str());
            if (key == nullptr || *key == '\0') {
                throw Error(ErrorCode::ConfigInvalid, "environment variable " + cfg_.api_key_env + " is not set");
            }
            token_ = key;
        }
    }

    httplib::Result post(const std::string& path, const std::string& body) const {
        httplib::Client client(url_.scheme_host_port);
        client.set_connection_timeout(30);
        client.set_read_timeout(cfg_.timeout_s);
        client.set_write_timeout(60);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        auto res = client.Post(url_.prefix + path, headers, body, "application/json");
        if (!res) {
            throw Error(unavailable_, cfg_.name + ": transport error " + httplib::to_string(res.error()));
        }
        if (res->status == 429 || res->status >= 500) {
            throw Error(unavailable_, cfg_.name + ": HTTP " + std::to_string(res->status));
        }
        return res;
    }

    const EndpointConfig& config() const { return cfg_; }

private:
    EndpointConfig cfg_;
    ParsedUrl url_;
    ErrorCode unavailable_;
    std::string token_;
};

std::string content_text(const nlohmann::json& content) {
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    if (content.is_array()) {
        for (const auto& part : content) {
            if (part.value("type", std::string()) == "text") out += part.value("text", std::string());
        }
    }
    return out;
}

class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(EndpointConfig cfg, ErrorCode unavailable) : transport_(cfg, unavailable) {}

    std::string complete(const ChatRequest& request) override {
        ChatRequest req = request;
        if (req.model.empty()) req.model = transport_.config().model;
        auto res = transport_.post("/v1/chat/completions", req.to_json().dump());
        if (res->status != 200) {
            throw Error(ErrorCode::InvalidArgument,
                        name() + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
        }
        try {
            const auto j = nlohmann::json::parse(res->body);
            return content_text(j.at("choices").at(0).at("message").at("content"));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, name() + ": malformed completion body: " + e.what());
        }
    }

    std::string name() const override { return transport_.config().name; }

private:
    Transport transport_;
};

bool looks_like_content_filter(const std::string& body) {
    static const std::regex re(R"(content[_ -]?(filter|policy|moderation)|safety|blocked|filter reason)",
                               std::regex::icase);
    return std::regex_search(body, re);
}

class HttpImageClient final : public ImageClient {
public:
    explicit HttpImageClient(EndpointConfig cfg) : transport_(cfg, ErrorCode::ImageServiceUnavailable) {}

    ImageResult generate(const std::string& prompt) override {
        const nlohmann::json body = {{"prompt", prompt}, {"model", transport_.config().model}};
        auto res = transport_.post("/generate", body.dump());
        const auto content_type = res->get_header_value("Content-Type");
        if (res->status == 200 && content_type.rfind("image/", 0) == 0) {
            ImageResult r;
            r.bytes = res->body;
            r.format = content_type.substr(6);
            if (r.format == "jpeg") r.format = "jpg";
            return r;
        }
        if (res->status == 200) {
            try {
                return ImageResult::from_json(nlohmann::json::parse(res->body));
            } catch (const std::exception& e) {
                throw Error(ErrorCode::InvalidArgument, name() + ": malformed image reply: " + e.what());
            }
        }
        if ((res->status == 400 || res->status == 403 || res->status == 422) && looks_like_content_filter(res->body)) {
            ImageResult r;
            r.status = ImageResult::Status::Blocked;
            r.reason = res->body.substr(0, 200);
            return r;
        }
        throw Error(ErrorCode::InvalidArgument, name() + ": HTTP " + std::to_string(res->status));
    }

    std::string name() const override { return transport_.config().name; }

private:
    Transport transport_;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(EndpointConfig cfg) : transport_(cfg, ErrorCode::ProviderUnavailable) {}

    EmbeddingVector embed_text(std::string_view text) override { return call("text", std::string(text)); }
    EmbeddingVector embed_image(std::string_view bytes) override { return call("image", util::base64_encode(bytes)); }
    std::string name() const override { return transport_.config().name; }

private:
    EmbeddingVector call(const char* kind, std::string payload) {
        const nlohmann::json body = {{"kind", kind}, {"payload", std::move(payload)}};
        auto res = transport_.post("/embed", body.dump());
        if (res->status != 200) {
            throw Error(ErrorCode::InvalidArgument, name() + ": HTTP " + std::to_string(res->status) + ": " +
                                                        res->body.substr(0, 200));
        }
        try {
            const auto j = nlohmann::json::parse(res->body);
            EmbeddingVector v{j.at("values").get<std::vector<double>>()};
            if (j.at("dim").get<std::size_t>() != v.dim()) {
                throw Error(ErrorCode::EmbeddingDimMismatch, name() + ": dim field disagrees with values length");
            }
            return v;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, name() + ": malformed embedding body: " + e.what());
        }
    }

    Transport transport_;
};

}  // namespace

std::unique_ptr<ChatClient> make_http_chat_client(EndpointConfig cfg, ErrorCode unavailable) {
    return std::make_unique<HttpChatClient>(std::move(cfg), unavailable);
}

std::unique_ptr<ImageClient> make_http_image_client(EndpointConfig cfg) {
    return std::make_unique<HttpImageClient>(std::move(cfg));
}

std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(EndpointConfig cfg) {
    return std::make_unique<HttpEmbeddingProvider>(std::move(cfg));
}

}  // namespace vizpod
