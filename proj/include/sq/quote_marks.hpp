#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sq/text.hpp"

namespace sq {

enum class QuoteType { direct, indirect, mixed };

inline std::string_view to_string(QuoteType t)
{
    switch (t) {
        case QuoteType::direct: return "direct";
        case QuoteType::indirect: return "indirect";
        case QuoteType::mixed: return "mixed";
    }
    return "indirect";
}

inline std::optional<QuoteType> quote_type_from_string(std::string_view s)
{
    if (s == "direct") return QuoteType::direct;
    if (s == "indirect") return QuoteType::indirect;
    if (s == "mixed") return QuoteType::mixed;
    return std::nullopt;
}

namespace marks {

inline constexpr std::string_view left_curly = "\xE2\x80\x9C";   // U+201C
inline constexpr std::string_view right_curly = "\xE2\x80\x9D";  // U+201D

enum class kind { straight, open_curly, close_curly };

struct mark {
    std::size_t pos;
    std::size_t len;
    kind k;
};

inline std::vector<mark> scan(std::string_view s)
{
    std::vector<mark> out;
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] == '"') {
            out.push_back({i, 1, kind::straight});
            ++i;
        } else if (s.substr(i, 3) == left_curly) {
            out.push_back({i, 3, kind::open_curly});
            i += 3;
        } else if (s.substr(i, 3) == right_curly) {
            out.push_back({i, 3, kind::close_curly});
            i += 3;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace marks

/// A quoted region [begin, end) in bytes, including its delimiting marks.
struct quoted_segment {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const quoted_segment&, const quoted_segment&) = default;
};

inline bool has_quote_marks(std::string_view s) { return !marks::scan(s).empty(); }

/// True iff straight double quotes occur an even number of times and curly
/// quotes nest as open/close pairs.
inline bool paired_quotes_check(std::string_view sentence)
{
    std::size_t straight = 0;
    long depth = 0;
    for (auto const& m : marks::scan(sentence)) {
        switch (m.k) {
            case marks::kind::straight: ++straight; break;
            case marks::kind::open_curly: ++depth; break;
            case marks::kind::close_curly:
                if (--depth < 0) return false;
                break;
        }
    }
    return depth == 0 && straight % 2 == 0;
}

/// Outermost quoted regions in order of appearance. Straight quotes pair
/// sequentially; curly quotes pair by nesting. Overlapping regions of the two
/// styles are merged. Precondition: paired_quotes_check(s).
inline std::vector<quoted_segment> quoted_segments(std::string_view s)
{
    std::vector<quoted_segment> raw;
    std::optional<std::size_t> straight_open;
    std::vector<std::size_t> curly_stack;
    for (auto const& m : marks::scan(s)) {
        switch (m.k) {
            case marks::kind::straight:
                if (straight_open) {
                    raw.push_back({*straight_open, m.pos + m.len});
                    straight_open.reset();
                } else {
                    straight_open = m.pos;
                }
                break;
            case marks::kind::open_curly: curly_stack.push_back(m.pos); break;
            case marks::kind::close_curly:
                if (!curly_stack.empty()) {
                    auto open = curly_stack.back();
                    curly_stack.pop_back();
                    if (curly_stack.empty()) raw.push_back({open, m.pos + m.len});
                }
                break;
        }
    }
    std::sort(raw.begin(), raw.end(),
              [](auto const& a, auto const& b) { return a.begin < b.begin; });
    std::vector<quoted_segment> merged;
    for (auto const& seg : raw) {
        if (!merged.empty() && seg.begin < merged.back().end)
            merged.back().end = std::max(merged.back().end, seg.end);
        else
            merged.push_back(seg);
    }
    return merged;
}

/// direct: every non-space, non-punctuation byte lies inside quotation marks.
/// indirect: no quotation marks at all. mixed: anything else.
inline QuoteType classify_quote_text(std::string_view quote)
{
    if (!has_quote_marks(quote)) return QuoteType::indirect;
    if (!paired_quotes_check(quote)) return QuoteType::mixed;
    auto segs = quoted_segments(quote);
    std::size_t next = 0;
    std::size_t pos = 0;
    while (pos < quote.size()) {
        if (next < segs.size() && pos == segs[next].begin) {
            pos = segs[next++].end;
            continue;
        }
        char c = quote[pos];
        if (!text::is_space(c) && !text::is_ascii_punct(c)) return QuoteType::mixed;
        ++pos;
    }
    return QuoteType::direct;
}

}  // namespace sq
