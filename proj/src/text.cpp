#include "vizpod/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace vizpod::text {
namespace {

// Walks code points, calling on_token(begin, end) for each maximal non-space run.
template <typename F>
void for_each_token(std::string_view s, F&& on_token) {
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    const int32_t len = static_cast<int32_t>(s.size());
    int32_t i = 0;
    int32_t start = -1;
    while (i < len) {
        const int32_t at = i;
        UChar32 c;
        U8_NEXT(bytes, i, len, c);
        const bool space = c >= 0 && u_isUWhiteSpace(c);
        if (space) {
            if (start >= 0) {
                on_token(static_cast<std::size_t>(start), static_cast<std::size_t>(at));
                start = -1;
            }
        } else if (start < 0) {
            start = at;
        }
    }
    if (start >= 0) on_token(static_cast<std::size_t>(start), s.size());
}

}  // namespace

std::string nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
    const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    if (norm->isNormalized(src, status) && U_SUCCESS(status)) {
        std::string out;
        src.toUTF8String(out);
        return out;
    }
    status = U_ZERO_ERROR;
    const icu::UnicodeString normalized = norm->normalize(src, status);
    if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

std::string lowercase(std::string_view utf8) {
    bool ascii = true;
    for (unsigned char c : utf8) {
        if (c >= 0x80) {
            ascii = false;
            break;
        }
    }
    if (ascii) {
        std::string out(utf8);
        for (char& c : out) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
        return out;
    }
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    u.toLower(icu::Locale::getRoot());
    std::string out;
    u.toUTF8String(out);
    return out;
}

std::vector<std::string> tokenize(std::string_view utf8) {
    std::vector<std::string> tokens;
    for_each_token(utf8, [&](std::size_t b, std::size_t e) { tokens.emplace_back(utf8.substr(b, e - b)); });
    return tokens;
}

std::size_t count_tokens(std::string_view utf8) {
    std::size_t n = 0;
    for_each_token(utf8, [&](std::size_t, std::size_t) { ++n; });
    return n;
}

std::string collapse_whitespace(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    for_each_token(utf8, [&](std::size_t b, std::size_t e) {
        if (!out.empty()) out.push_back(' ');
        out.append(utf8.substr(b, e - b));
    });
    return out;
}

std::string strip_stage_directions(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    int depth = 0;
    char closer = 0;
    for (char c : utf8) {
        if (depth == 0 && (c == '(' || c == '[')) {
            closer = c == '(' ? ')' : ']';
            depth = 1;
            // keep neighbours separated: "word(laughs)word" must not fuse
            out.push_back(' ');
            continue;
        }
        if (depth > 0) {
            if (c == (closer == ')' ? '(' : '[')) ++depth;
            else if (c == closer && --depth == 0) out.push_back(' ');
            continue;
        }
        out.push_back(c);
    }
    // an unbalanced opener is treated as ordinary text
    if (depth > 0) return std::string(utf8);
    return out;
}

std::string trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace vizpod::text
