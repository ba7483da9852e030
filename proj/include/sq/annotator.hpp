#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/error.hpp"
#include "sq/pipeline.hpp"
#include "sq/quote_marks.hpp"
#include "sq/text.hpp"

namespace sq {

/// Byte range [begin, end) in a sentence.
struct text_span {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool overlaps(const text_span& o) const { return begin < o.end && o.begin < end; }
    friend bool operator==(const text_span&, const text_span&) = default;
};

struct DirectQuote {
    text_span source;
    std::vector<quoted_segment> quote_segments;
    std::string source_text;
    std::string quote_text;  // quoted segments joined by single spaces
};

namespace detail {

struct outside_token {
    std::size_t begin;  // byte offsets of the whole whitespace token
    std::size_t end;
    std::size_t core_begin;  // offsets with edge punctuation removed
    std::size_t core_end;
    std::size_t region;  // index of the unquoted region holding the token
    bool ends_clause;    // trailing punctuation that is not an abbreviation period
    bool leading_punct;
};

inline const std::set<std::string>& abbreviations()
{
    static const std::set<std::string> s{"dr", "mr", "mrs", "ms", "prof", "gen", "sen", "rep", "gov",
                                         "st", "jr", "sr", "lt", "col", "capt", "sgt", "rev", "hon"};
    return s;
}

inline const std::set<std::string>& pronouns()
{
    static const std::set<std::string> s{"he", "she", "they", "we", "i", "it"};
    return s;
}

inline const std::set<std::string>& capitalized_function_words()
{
    static const std::set<std::string> s{"the", "a", "an", "but", "and", "or", "in", "on", "at", "however",
                                         "meanwhile", "also", "then", "this", "that", "still", "yet",
                                         "so", "now", "later", "earlier", "when", "while", "after",
                                         "before", "as", "if", "last", "on", "according"};
    return s;
}

inline const std::set<std::string>& name_connectors()
{
    static const std::set<std::string> s{"of", "de", "der", "den", "van", "von", "al", "bin", "da", "del", "di", "du", "la", "le"};
    return s;
}

inline const std::set<std::string>& determiners()
{
    static const std::set<std::string> s{"the", "a", "an", "this", "that", "its", "their", "his", "her"};
    return s;
}

inline std::vector<outside_token> outside_tokens(std::string_view s, const std::vector<quoted_segment>& segs)
{
    std::vector<outside_token> out;
    std::size_t region_begin = 0;
    for (std::size_t r = 0; r <= segs.size(); ++r) {
        std::size_t region_end = r < segs.size() ? segs[r].begin : s.size();
        auto region = s.substr(region_begin, region_end - region_begin);
        for (auto const& w : text::split_ws_spans(region)) {
            outside_token t{};
            t.begin = region_begin + w.begin;
            t.end = region_begin + w.end;
            std::size_t cb = t.begin, ce = t.end;
            while (cb < ce && text::is_ascii_punct(s[cb])) ++cb;
            t.leading_punct = cb != t.begin;
            while (ce > cb && text::is_ascii_punct(s[ce - 1])) --ce;
            t.core_begin = cb;
            t.core_end = ce;
            t.region = r;
            auto core = text::to_lower(s.substr(cb, ce - cb));
            bool abbrev_period = ce < t.end && s[ce] == '.' && ce + 1 == t.end &&
                                 (abbreviations().count(core) || core.size() == 1);
            if (abbrev_period) t.core_end = ce + 1;
            t.ends_clause = ce < t.end && !abbrev_period;
            out.push_back(t);
        }
        if (r < segs.size()) region_begin = segs[r].end;
    }
    return out;
}

}  // namespace detail

/// Rule-based direct quote extraction. Quoted segments are the quote; the
/// source is a capitalized-token run (or pronoun) next to the first trigger
/// verb found outside the quotes. Returns nullopt when the sentence has no
/// quotation marks, no trigger verb outside them, or no source candidate.
inline std::optional<DirectQuote> extract_direct(std::string_view sentence, const TriggerLexicon& lexicon)
{
    if (!paired_quotes_check(sentence)) throw UnbalancedQuotes("quotation marks are not paired");
    auto segs = quoted_segments(sentence);
    if (segs.empty()) return std::nullopt;
    auto toks = detail::outside_tokens(sentence, segs);

    auto core = [&](const detail::outside_token& t) {
        return std::string(sentence.substr(t.core_begin, t.core_end - t.core_begin));
    };
    auto lower_core = [&](const detail::outside_token& t) { return text::normalize_token(core(t)); };
    auto is_cap = [&](const detail::outside_token& t) {
        auto c = core(t);
        return text::is_upper_initial(c) && !detail::capitalized_function_words().count(text::to_lower(c));
    };
    auto is_pronoun = [&](const detail::outside_token& t) { return detail::pronouns().count(lower_core(t)) > 0; };
    // tokens i and i+1 are adjacent inside one region with no punctuation between them
    auto joined = [&](std::size_t i) {
        return i + 1 < toks.size() && toks[i].region == toks[i + 1].region && !toks[i].ends_clause &&
               !toks[i + 1].leading_punct;
    };

    std::optional<std::size_t> verb;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].core_end > toks[i].core_begin && lexicon.contains(lower_core(toks[i]))) {
            verb = i;
            break;
        }
    }
    if (!verb) return std::nullopt;
    const std::size_t v = *verb;

    std::optional<std::pair<std::size_t, std::size_t>> run;  // inclusive token indices
    auto is_connector = [&](std::size_t i) { return detail::name_connectors().count(lower_core(toks[i])) > 0; };
    // up to two connectors ("von der") may sit between capitalized tokens
    auto extend_forward = [&](std::size_t first) {
        std::size_t last = first;
        while (joined(last)) {
            std::size_t j = last + 1;
            while (j - last <= 2 && is_connector(j) && joined(j)) ++j;
            if (!is_cap(toks[j])) break;
            last = j;
        }
        return last;
    };
    auto extend_backward = [&](std::size_t last) {
        std::size_t first = last;
        while (first > 0 && joined(first - 1)) {
            std::size_t j = first - 1;
            while (first - j <= 2 && j > 0 && is_connector(j) && joined(j - 1)) --j;
            if (!is_cap(toks[j])) break;
            first = j;
        }
        return first;
    };

    // inverted order: "..., said John Smith."
    if (joined(v)) {
        auto const& nxt = toks[v + 1];
        if (is_cap(nxt))
            run = std::make_pair(v + 1, extend_forward(v + 1));
        else if (is_pronoun(nxt))
            run = std::make_pair(v + 1, v + 1);
    }
    // determiner phrase right before the verb: "the minister said"
    if (!run && v > 0 && joined(v - 1) && !is_cap(toks[v - 1]) && !is_pronoun(toks[v - 1])) {
        for (std::size_t back = 1; back <= 3 && back <= v; ++back) {
            std::size_t i = v - back;
            if (back > 1 && !joined(i)) break;
            if (detail::determiners().count(lower_core(toks[i]))) {
                bool has_cap_before = i > 0 && joined(i - 1) && is_cap(toks[i - 1]);
                if (!has_cap_before) run = std::make_pair(i, v - 1);
                break;
            }
        }
    }
    // nearest capitalized run or pronoun before the verb
    if (!run) {
        for (std::size_t i = v; i-- > 0;) {
            if (is_pronoun(toks[i])) {
                run = std::make_pair(i, i);
                break;
            }
            if (is_cap(toks[i])) {
                run = std::make_pair(extend_backward(i), i);
                break;
            }
        }
    }
    // first capitalized run after the verb
    if (!run) {
        for (std::size_t i = v + 1; i < toks.size(); ++i) {
            if (is_cap(toks[i])) {
                run = std::make_pair(i, extend_forward(i));
                break;
            }
        }
    }
    if (!run) return std::nullopt;

    DirectQuote q;
    q.source = {toks[run->first].core_begin, toks[run->second].core_end};
    q.source_text = std::string(sentence.substr(q.source.begin, q.source.end - q.source.begin));
    q.quote_segments = segs;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (i) q.quote_text += ' ';
        q.quote_text += sentence.substr(segs[i].begin, segs[i].end - segs[i].begin);
    }
    return q;
}

inline QuoteType classify_quote_type(const QuoteRecord& record) { return classify_quote_text(record.quote); }

enum class BioTag { B_S, I_S, B_Q, I_Q, O };

inline std::string_view to_string(BioTag t)
{
    switch (t) {
        case BioTag::B_S: return "B-S";
        case BioTag::I_S: return "I-S";
        case BioTag::B_Q: return "B-Q";
        case BioTag::I_Q: return "I-Q";
        case BioTag::O: return "O";
    }
    return "O";
}

struct BioSequence {
    std::vector<std::string> tokens;
    std::vector<BioTag> tags;
    std::vector<text_span> offsets;  // byte offsets of each token in the sentence
};

/// I-S only after B-S/I-S, I-Q only after B-Q/I-Q, equal lengths.
inline bool is_well_formed(const BioSequence& seq)
{
    if (seq.tokens.size() != seq.tags.size()) return false;
    BioTag prev = BioTag::O;
    for (auto t : seq.tags) {
        if (t == BioTag::I_S && prev != BioTag::B_S && prev != BioTag::I_S) return false;
        if (t == BioTag::I_Q && prev != BioTag::B_Q && prev != BioTag::I_Q) return false;
        prev = t;
    }
    return true;
}

/// Locates the quote and a non-overlapping occurrence of the source in the
/// main sentence.
inline std::pair<text_span, text_span> locate_source_and_quote(const QuoteRecord& r)
{
    auto const& s = r.main_sentence;
    if (r.quote.empty()) throw SpanNotFound("quote is empty");
    auto qpos = s.find(r.quote);
    if (qpos == std::string::npos) throw SpanNotFound("quote not found in main_sentence");
    text_span quote{qpos, qpos + r.quote.size()};
    if (r.source_surface.empty()) throw SpanNotFound("source_surface is empty");
    for (auto pos = s.find(r.source_surface); pos != std::string::npos; pos = s.find(r.source_surface, pos + 1)) {
        text_span src{pos, pos + r.source_surface.size()};
        if (!src.overlaps(quote)) return {src, quote};
    }
    throw SpanNotFound("source_surface not found outside the quote in main_sentence");
}

/// Tags main-sentence tokens (whitespace split, punctuation detached) with
/// the source and quote spans.
inline BioSequence to_bio(const QuoteRecord& r)
{
    auto [src, quote] = locate_source_and_quote(r);
    BioSequence seq;
    bool in_src = false, in_quote = false;
    for (auto const& t : text::split_detached_spans(r.main_sentence)) {
        text_span ts{t.begin, t.end};
        seq.tokens.emplace_back(t.text);
        seq.offsets.push_back(ts);
        if (ts.overlaps(src)) {
            seq.tags.push_back(in_src ? BioTag::I_S : BioTag::B_S);
            in_src = true;
            in_quote = false;
        } else if (ts.overlaps(quote)) {
            seq.tags.push_back(in_quote ? BioTag::I_Q : BioTag::B_Q);
            in_quote = true;
            in_src = false;
        } else {
            seq.tags.push_back(BioTag::O);
            in_src = in_quote = false;
        }
    }
    return seq;
}

/// Recovers the first source and first quote span from a tag sequence.
inline std::pair<std::optional<text_span>, std::optional<text_span>> decode_bio(const BioSequence& seq)
{
    std::optional<text_span> src, quote;
    bool src_open = false, quote_open = false;  // still extending the first span
    for (std::size_t i = 0; i < seq.tags.size(); ++i) {
        auto t = seq.tags[i];
        if (t != BioTag::I_S) src_open = false;
        if (t != BioTag::I_Q) quote_open = false;
        if (t == BioTag::B_S && !src) {
            src = seq.offsets[i];
            src_open = true;
        } else if (t == BioTag::I_S && src_open) {
            src->end = seq.offsets[i].end;
        } else if (t == BioTag::B_Q && !quote) {
            quote = seq.offsets[i];
            quote_open = true;
        } else if (t == BioTag::I_Q && quote_open) {
            quote->end = seq.offsets[i].end;
        }
    }
    return {src, quote};
}

/// token<TAB>tag lines followed by a blank line.
inline void write_bio(std::ostream& out, const BioSequence& seq)
{
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) out << seq.tokens[i] << '\t' << to_string(seq.tags[i]) << '\n';
    out << '\n';
}

enum class SourceMode { true_source, predicted_source, masked };

struct QaExample {
    std::string question;
    std::string context_l;
    std::string context_s;
    std::string context_r;
    std::size_t answer_start = 0;  // in code points of qa_context()
    std::string answer_text;
    SourceMode source_mode = SourceMode::true_source;
};

/// Non-empty context segments joined by single spaces.
inline std::string qa_context(std::string_view l, std::string_view s, std::string_view r)
{
    std::string out;
    for (auto part : {l, s, r}) {
        if (part.empty()) continue;
        if (!out.empty()) out += ' ';
        out += part;
    }
    return out;
}

inline std::size_t utf8_length(std::string_view s)
{
    std::size_t n = 0;
    for (char c : s)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    return n;
}

inline const std::string& source_question()
{
    static const std::string q = "Who is the source?";
    return q;
}

inline std::string quote_question(std::string_view source) { return "What did " + std::string(source) + " say?"; }

/// Builds the source question and the quote question for one record. The
/// quote question names the gold source, a supplied prediction, or "they".
inline std::pair<QaExample, QaExample> to_qa(const QuoteRecord& r, SourceMode mode,
                                             const std::optional<std::string>& predicted_source = std::nullopt)
{
    if (mode == SourceMode::predicted_source && !predicted_source)
        throw MissingPrediction("predicted_source mode requires a predicted source for '" + r.record_id + "'");
    auto [src, quote] = locate_source_and_quote(r);
    std::size_t s_offset = r.left_sentence.empty() ? 0 : utf8_length(r.left_sentence) + 1;
    std::string_view main = r.main_sentence;

    QaExample source_ex;
    source_ex.question = source_question();
    source_ex.context_l = r.left_sentence;
    source_ex.context_s = r.main_sentence;
    source_ex.context_r = r.right_sentence;
    source_ex.answer_start = s_offset + utf8_length(main.substr(0, src.begin));
    source_ex.answer_text = r.source_surface;
    source_ex.source_mode = mode;

    QaExample quote_ex = source_ex;
    std::string_view who = mode == SourceMode::true_source ? std::string_view(r.source_surface)
                           : mode == SourceMode::masked    ? std::string_view("they")
                                                           : std::string_view(*predicted_source);
    quote_ex.question = quote_question(who);
    quote_ex.answer_start = s_offset + utf8_length(main.substr(0, quote.begin));
    quote_ex.answer_text = r.quote;
    return {source_ex, quote_ex};
}

inline json qa_to_json(const QaExample& ex)
{
    return json{{"question", ex.question},   {"context_l", ex.context_l},       {"context_s", ex.context_s},
                {"context_r", ex.context_r}, {"answer_start", ex.answer_start}, {"answer_text", ex.answer_text}};
}

}  // namespace sq
