#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sq::text {

/// A token and its byte offsets [begin, end) in the source string.
struct token_span {
    std::string_view text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

inline bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and count as word characters.
inline bool is_word_byte(char c)
{
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
}

inline bool is_ascii_punct(char c)
{
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

inline char ascii_lower(char c)
{
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

inline bool is_upper_initial(std::string_view s)
{
    return !s.empty() && s.front() >= 'A' && s.front() <= 'Z';
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

/// Whitespace tokenization with byte offsets.
inline std::vector<token_span> split_ws_spans(std::string_view s)
{
    std::vector<token_span> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        out.push_back({s.substr(i, j - i), i, j});
        i = j;
    }
    return out;
}

inline std::vector<std::string> split_ws(std::string_view s)
{
    std::vector<std::string> out;
    for (auto const& t : split_ws_spans(s)) out.emplace_back(t.text);
    return out;
}

inline std::size_t count_ws_tokens(std::string_view s) { return split_ws_spans(s).size(); }

/// Whitespace split, then leading and trailing ASCII punctuation detached
/// one character at a time ("rose." -> "rose", ".").
inline std::vector<token_span> split_detached_spans(std::string_view s)
{
    std::vector<token_span> out;
    for (auto const& w : split_ws_spans(s)) {
        std::size_t b = w.begin;
        std::size_t e = w.end;
        std::vector<token_span> trailing;
        while (b < e && is_ascii_punct(s[b])) {
            out.push_back({s.substr(b, 1), b, b + 1});
            ++b;
        }
        while (e > b && is_ascii_punct(s[e - 1])) {
            trailing.push_back({s.substr(e - 1, 1), e - 1, e});
            --e;
        }
        if (b < e) out.push_back({s.substr(b, e - b), b, e});
        out.insert(out.end(), trailing.rbegin(), trailing.rend());
    }
    return out;
}

/// Lowercased token with leading/trailing ASCII punctuation removed.
inline std::string normalize_token(std::string_view t)
{
    while (!t.empty() && is_ascii_punct(t.front())) t.remove_prefix(1);
    while (!t.empty() && is_ascii_punct(t.back())) t.remove_suffix(1);
    return to_lower(t);
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace sq::text
