#include "vizpod/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "vizpod/error.hpp"
#include "vizpod/util.hpp"

namespace vizpod {

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
    std::string buf;
    for (const auto& r : records) {
        buf += r.dump();
        buf += '\n';
    }
    util::write_file_atomic(path, buf);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    util::write_file_atomic(path, value.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
}

std::optional<nlohmann::json> first_json_object(std::string_view text,
                                                const std::function<bool(const nlohmann::json&)>& accept) {
    for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        int depth = 0;
        bool in_string = false;
        std::size_t close = std::string_view::npos;
        for (std::size_t i = open; i < text.size() && close == std::string_view::npos; ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                close = i;
            }
        }
        if (close == std::string_view::npos) return std::nullopt;
        auto j = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object() && accept(j)) return j;
    }
    return std::nullopt;
}

}  // namespace vizpod
