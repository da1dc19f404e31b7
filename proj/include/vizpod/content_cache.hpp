/// @file content_cache.hpp
/// @brief Content-addressed on-disk store for provider responses.
///
/// Entries live at `<dir>/<h[0:2]>/<h>.json`, h = sha256(request). Each entry
/// carries the full request so a hash collision is detected and probed past,
/// and a payload digest so truncated or edited entries are discarded.
#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace vizpod {

class ContentCache {
public:
    explicit ContentCache(std::filesystem::path dir);

    static std::string content_hash(std::string_view request);

    std::optional<std::string> lookup(std::string_view request);
    void store(std::string_view request, std::string_view payload);

    /// Returns the cached payload or computes, stores and returns it.
    std::string get_or_compute(std::string_view request, const std::function<std::string()>& compute);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }
    std::size_t corrupt() const noexcept { return corrupt_; }

private:
    std::filesystem::path slot_path(const std::string& hash, int probe) const;

    std::filesystem::path dir_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
    std::atomic<std::size_t> corrupt_{0};
};

/// Routes through the cache when one is given, otherwise calls compute directly.
std::string cached_call(ContentCache* cache, std::string_view request, const std::function<std::string()>& compute);

}  // namespace vizpod
