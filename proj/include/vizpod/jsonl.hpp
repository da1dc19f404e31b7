/// @file jsonl.hpp
/// @brief JSONL files and JSON objects embedded in model replies.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vizpod {

/// Blank lines are skipped. Throws Error(InputMissing) for a missing file and
/// Error(InvalidArgument) naming the line for malformed JSON.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

/// First balanced {...} in `text` that parses and satisfies `accept`.
/// Surrounding prose and code fences are ignored.
std::optional<nlohmann::json> first_json_object(std::string_view text,
                                                const std::function<bool(const nlohmann::json&)>& accept);

}  // namespace vizpod
