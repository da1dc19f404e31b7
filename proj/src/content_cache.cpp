#include "vizpod/content_cache.hpp"

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "vizpod/error.hpp"
#include "vizpod/util.hpp"

namespace vizpod {
namespace {
constexpr int kMaxProbes = 8;
}

ContentCache::ContentCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ContentCache::content_hash(std::string_view request) { return util::sha256_hex(request); }

std::filesystem::path ContentCache::slot_path(const std::string& hash, int probe) const {
    std::string name = hash;
    if (probe > 0) name += "." + std::to_string(probe);
    return dir_ / hash.substr(0, 2) / (name + ".json");
}

std::optional<std::string> ContentCache::lookup(std::string_view request) {
    const std::string hash = content_hash(request);
    for (int probe = 0; probe < kMaxProbes; ++probe) {
        const auto path = slot_path(hash, probe);
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) break;
        try {
            const auto entry = nlohmann::json::parse(util::read_file(path));
            const auto payload = entry.at("payload").get<std::string>();
            if (entry.at("payload_sha256").get<std::string>() != util::sha256_hex(payload)) {
                throw Error(ErrorCode::CacheCorrupt, "payload digest mismatch");
            }
            if (entry.at("request").get<std::string>() != request) continue;  // collision
            ++hits_;
            return payload;
        } catch (const std::exception& e) {
            ++corrupt_;
            spdlog::warn("CacheCorrupt: discarding {} ({})", path.string(), e.what());
            std::filesystem::remove(path, ec);
            break;
        }
    }
    ++misses_;
    return std::nullopt;
}

void ContentCache::store(std::string_view request, std::string_view payload) {
    const std::string hash = content_hash(request);
    for (int probe = 0; probe < kMaxProbes; ++probe) {
        const auto path = slot_path(hash, probe);
        std::error_code ec;
        if (std::filesystem::exists(path, ec)) {
            try {
                const auto entry = nlohmann::json::parse(util::read_file(path));
                if (entry.at("request").get<std::string>() != request) continue;
            } catch (const std::exception&) {
                // unreadable entry: overwrite it
            }
        }
        const nlohmann::json entry = {{"request_sha256", hash},
                                      {"request", std::string(request)},
                                      {"payload_sha256", util::sha256_hex(payload)},
                                      {"payload", std::string(payload)}};
        util::write_file_atomic(path, entry.dump());
        return;
    }
    spdlog::warn("cache slot chain full for {}; response not stored", hash);
}

std::string ContentCache::get_or_compute(std::string_view request, const std::function<std::string()>& compute) {
    if (auto hit = lookup(request)) return *hit;
    std::string payload = compute();
    store(request, payload);
    return payload;
}

std::string cached_call(ContentCache* cache, std::string_view request, const std::function<std::string()>& compute) {
    return cache ? cache->get_or_compute(request, compute) : compute();
}

}  // namespace vizpod
