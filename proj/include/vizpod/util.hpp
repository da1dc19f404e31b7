/// @file util.hpp
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vizpod::util {

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view bytes);
/// Throws Error(InvalidArgument) on malformed input.
std::string base64_decode(std::string_view b64);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace vizpod::util
