#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/error.hpp"
#include "sq/quote_marks.hpp"
#include "sq/text.hpp"
#include "sq/timestamp.hpp"

namespace sq {

/// Half-open range of whitespace-token indices into a sentence.
struct token_range {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end > begin ? end - begin : 0; }
    bool contains(const token_range& o) const { return begin <= o.begin && o.end <= end; }
    friend bool operator==(const token_range&, const token_range&) = default;
};

struct SrlFrame {
    token_range verb;
    std::optional<std::string> lemma;
    std::optional<token_range> subject;
    std::optional<token_range> object;

    friend bool operator==(const SrlFrame&, const SrlFrame&) = default;
};

struct EntityAnnotation {
    token_range span;
    std::string entity;
    std::vector<std::string> ontology_classes;
};

/// A sentence with semantic-role frames and entity links, as produced by an
/// upstream annotator.
struct SrlSentence {
    std::string article_id;
    std::size_t sentence_index = 0;
    std::string sentence_text;
    std::vector<SrlFrame> frames;
    std::vector<EntityAnnotation> entity_annotations;
    std::string published_at;
    timestamp published{};
    std::string title;
    // article metadata carried through to records when present
    std::string summary_first_sentence;
    std::vector<std::string> keywords;
    std::vector<std::string> categories;
    std::string news_source;
};

struct TriggerLexicon {
    std::set<std::string> verbs;

    explicit TriggerLexicon(const std::vector<std::string>& entries)
    {
        for (auto const& e : entries) {
            auto v = text::to_lower(text::trim(e));
            if (!v.empty()) verbs.insert(std::move(v));
        }
        if (verbs.empty()) throw ParameterError("trigger lexicon is empty");
    }

    bool contains(std::string_view lemma) const { return verbs.count(text::to_lower(lemma)) > 0; }
};

/// Ontology allow-list plus the occurrence threshold for source entities.
struct SourcePolicy {
    std::set<std::string> allowed_classes;
    std::size_t min_count = 2;
};

struct SplitBoundaries {
    timestamp train_end;
    timestamp valid_test_start;
    double valid_fraction = 0.5;

    /// Train through 2020-05-31, valid/test from 2020-06-21.
    static SplitBoundaries release_default()
    {
        return {*parse_timestamp("2020-05-31T23:59:59Z"), *parse_timestamp("2020-06-21T00:00:00Z"),
                0.5};
    }
};

inline const std::set<std::string>& excluded_source_classes()
{
    static const std::set<std::string> s{"Location", "Place", "Country"};
    return s;
}

/// "http://dbpedia.org/ontology/Person" and "dbo:Person" both reduce to "Person".
inline std::string ontology_class_name(std::string_view c)
{
    auto pos = c.find_last_of("/:#");
    if (pos != std::string_view::npos) c.remove_prefix(pos + 1);
    return std::string(text::trim(c));
}

/// One entry per line; blank lines and `#` comments are skipped. For CSV
/// input only the first column is used.
inline std::vector<std::string> read_list_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto comma = t.find(',');
        if (comma != std::string_view::npos) t = text::trim(t.substr(0, comma));
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

inline TriggerLexicon load_lexicon(const std::string& path) { return TriggerLexicon(read_list_file(path)); }

inline SourcePolicy load_source_policy(const std::string& path, std::size_t min_count = 2)
{
    SourcePolicy p;
    for (auto const& c : read_list_file(path)) p.allowed_classes.insert(ontology_class_name(c));
    p.min_count = min_count;
    return p;
}

namespace detail {

inline token_range read_range(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned())
        throw SchemaError(std::string(what) + " must be a [begin, end] pair of token indices");
    token_range r{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
    if (r.end < r.begin) throw SchemaError(std::string(what) + " has end < begin");
    return r;
}

inline std::optional<token_range> read_optional_range(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return read_range(*it, key);
}

inline json range_json(const token_range& r) { return json::array({r.begin, r.end}); }

}  // namespace detail

inline SrlSentence parse_srl_sentence(std::string_view line)
{
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError("line is not a well-formed serialized object");
    SrlSentence s;
    s.article_id = detail::get_string(j, "article_id");
    s.sentence_text = detail::get_string(j, "sentence_text");
    s.published_at = detail::get_string(j, "published_at");
    s.title = detail::get_string(j, "title");
    if (auto it = j.find("sentence_index"); it != j.end()) {
        if (!it->is_number_unsigned()) throw SchemaError("field 'sentence_index' must be a non-negative integer");
        s.sentence_index = it->get<std::size_t>();
    }
    if (auto it = j.find("summary_first_sentence"); it != j.end() && it->is_string())
        s.summary_first_sentence = it->get<std::string>();
    if (auto it = j.find("news_source"); it != j.end() && it->is_string()) s.news_source = it->get<std::string>();
    if (j.contains("keywords")) s.keywords = detail::get_string_list(j, "keywords");
    if (j.contains("categories")) s.categories = detail::get_string_list(j, "categories");
    auto ts = parse_timestamp(s.published_at);
    if (!ts) throw SchemaError("field 'published_at' is not a valid timestamp");
    s.published = *ts;

    auto n_tokens = text::count_ws_tokens(s.sentence_text);
    auto check = [&](const token_range& r, const char* what) {
        if (r.end > n_tokens) throw InvariantError(std::string(what) + " span lies outside the sentence");
    };
    auto frames = j.find("frames");
    if (frames == j.end() || !frames->is_array()) throw SchemaError("missing field 'frames'");
    for (auto const& f : *frames) {
        if (!f.is_object() || !f.contains("verb")) throw SchemaError("frame is missing 'verb'");
        SrlFrame fr;
        fr.verb = detail::read_range(f["verb"], "verb");
        check(fr.verb, "verb");
        if (auto it = f.find("lemma"); it != f.end() && it->is_string()) fr.lemma = it->get<std::string>();
        fr.subject = detail::read_optional_range(f, "subject");
        fr.object = detail::read_optional_range(f, "object");
        if (fr.subject) check(*fr.subject, "subject");
        if (fr.object) check(*fr.object, "object");
        s.frames.push_back(std::move(fr));
    }
    if (auto ents = j.find("entity_annotations"); ents != j.end()) {
        if (!ents->is_array()) throw SchemaError("field 'entity_annotations' must be a list");
        for (auto const& e : *ents) {
            if (!e.is_object() || !e.contains("span")) throw SchemaError("entity annotation is missing 'span'");
            EntityAnnotation a;
            a.span = detail::read_range(e["span"], "entity span");
            check(a.span, "entity");
            a.entity = detail::get_string(e, "entity");
            a.ontology_classes = detail::get_string_list(e, "ontology_classes");
            s.entity_annotations.push_back(std::move(a));
        }
    }
    return s;
}

inline std::vector<SrlSentence> load_srl_sentences(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<SrlSentence> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(parse_srl_sentence(line));
        } catch (const error& e) {
            throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

/// Text of a token range, taken verbatim from the sentence (original spacing kept).
inline std::string span_text(std::string_view sentence, const token_range& r)
{
    auto toks = text::split_ws_spans(sentence);
    if (r.size() == 0 || r.end > toks.size()) return {};
    return std::string(sentence.substr(toks[r.begin].begin, toks[r.end - 1].end - toks[r.begin].begin));
}

/// Lemma if supplied, else the lowercased surface form of the verb span.
inline std::string frame_verb_key(const SrlSentence& s, const SrlFrame& f)
{
    if (f.lemma && !f.lemma->empty()) return text::to_lower(*f.lemma);
    return text::to_lower(span_text(s.sentence_text, f.verb));
}

/// Keeps frames with a lexicon verb, a subject, and an object longer than three tokens.
inline std::vector<SrlFrame> srl_filter(const SrlSentence& s, const std::vector<SrlFrame>& candidates,
                                        const TriggerLexicon& lexicon)
{
    std::vector<SrlFrame> out;
    for (auto const& f : candidates) {
        if (!lexicon.contains(frame_verb_key(s, f))) continue;
        if (!f.subject || f.subject->size() == 0) continue;
        if (!f.object || f.object->size() <= 3) continue;
        out.push_back(f);
    }
    return out;
}

inline std::vector<SrlFrame> srl_filter(const SrlSentence& s, const TriggerLexicon& lexicon)
{
    return srl_filter(s, s.frames, lexicon);
}

/// The entity linked inside a frame's subject: the longest annotation whose
/// span lies within the subject span (earliest on ties).
inline const EntityAnnotation* subject_entity(const SrlSentence& s, const SrlFrame& f)
{
    if (!f.subject) return nullptr;
    const EntityAnnotation* best = nullptr;
    for (auto const& a : s.entity_annotations) {
        if (a.span.size() == 0 || !f.subject->contains(a.span)) continue;
        if (!best || a.span.size() > best->span.size()) best = &a;
    }
    return best;
}

using source_counts = std::unordered_map<std::string, std::size_t>;

/// Entity-as-source occurrences over a pool of frames.
inline source_counts count_sources(const std::vector<SrlSentence>& sentences,
                                   const std::vector<std::vector<SrlFrame>>& pool)
{
    source_counts counts;
    for (std::size_t i = 0; i < sentences.size(); ++i)
        for (auto const& f : pool[i])
            if (auto const* e = subject_entity(sentences[i], f)) ++counts[e->entity];
    return counts;
}

inline source_counts count_sources(const std::vector<SrlSentence>& sentences)
{
    std::vector<std::vector<SrlFrame>> pool;
    pool.reserve(sentences.size());
    for (auto const& s : sentences) pool.push_back(s.frames);
    return count_sources(sentences, pool);
}

inline bool is_allowed_source(const EntityAnnotation& a, const SourcePolicy& policy)
{
    bool allowed = false;
    for (auto const& c : a.ontology_classes) {
        auto name = ontology_class_name(c);
        if (excluded_source_classes().count(name)) return false;
        if (policy.allowed_classes.count(name)) allowed = true;
    }
    return allowed;
}

/// Keeps frames whose subject links to an allowed, non-location entity seen
/// at least `policy.min_count` times in `counts`.
inline std::vector<SrlFrame> source_filter(const SrlSentence& s, const std::vector<SrlFrame>& candidates,
                                           const SourcePolicy& policy, const source_counts& counts)
{
    std::vector<SrlFrame> out;
    for (auto const& f : candidates) {
        auto const* e = subject_entity(s, f);
        if (!e || !is_allowed_source(*e, policy)) continue;
        auto it = counts.find(e->entity);
        if (it == counts.end() || it->second < policy.min_count) continue;
        out.push_back(f);
    }
    return out;
}

struct Article {
    std::string article_id;
    std::string title;
    std::string summary_first_sentence;
    timestamp published{};
};

namespace detail {

inline std::unordered_set<std::string> char_shingles(std::string_view s, std::size_t n = 4)
{
    std::unordered_set<std::string> out;
    if (s.size() < n) {
        out.emplace(s);
        return out;
    }
    for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace(s.substr(i, n));
    return out;
}

}  // namespace detail

/// Character 4-gram Jaccard similarity of two strings (lowercased).
inline double shingle_jaccard(std::string_view a, std::string_view b)
{
    auto sa = detail::char_shingles(text::to_lower(a));
    auto sb = detail::char_shingles(text::to_lower(b));
    std::size_t inter = 0;
    for (auto const& x : sa) inter += sb.count(x);
    std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::string dedup_key(const Article& a) { return a.title + " " + a.summary_first_sentence; }

/// Drops every article whose title + first summary sentence is at least
/// `threshold` similar to an earlier retained article. Input must be sorted
/// by timestamp; the output is a subsequence of the input.
inline std::vector<Article> dedup_stream(const std::vector<Article>& articles, double threshold = 0.8)
{
    for (std::size_t i = 1; i < articles.size(); ++i)
        if (articles[i].published < articles[i - 1].published)
            throw UnsortedStream("article '" + articles[i].article_id + "' is earlier than its predecessor");
    std::vector<Article> kept;
    std::vector<std::unordered_set<std::string>> kept_shingles;
    for (auto const& a : articles) {
        auto sh = detail::char_shingles(text::to_lower(dedup_key(a)));
        bool duplicate = false;
        for (auto const& ks : kept_shingles) {
            std::size_t inter = 0;
            for (auto const& x : sh) inter += ks.count(x);
            std::size_t uni = sh.size() + ks.size() - inter;
            double sim = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            if (sim >= threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            kept.push_back(a);
            kept_shingles.push_back(std::move(sh));
        }
    }
    return kept;
}

struct SplitResult {
    Corpus train;
    Corpus valid;
    Corpus test;
};

/// Uniform draw in [0, 1) that depends only on (seed, record_id).
inline double split_draw(std::uint64_t seed, std::string_view record_id)
{
    auto h = text::splitmix64(seed ^ text::fnv1a(record_id));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline SplitResult chronological_split(const std::vector<QuoteRecord>& records, const SplitBoundaries& b,
                                       std::uint64_t seed)
{
    if (b.train_end > b.valid_test_start) throw ParameterError("train_end is after valid_test_start");
    if (!(b.valid_fraction > 0.0 && b.valid_fraction < 1.0))
        throw ParameterError("valid_fraction must lie in (0, 1)");
    SplitResult out;
    out.train.split_label = SplitLabel::train;
    out.valid.split_label = SplitLabel::valid;
    out.test.split_label = SplitLabel::test;
    for (auto const& r : records) {
        if (r.published <= b.train_end) {
            out.train.records.push_back(r);
        } else if (r.published >= b.valid_test_start) {
            (split_draw(seed, r.record_id) < b.valid_fraction ? out.valid : out.test).records.push_back(r);
        } else {
            throw BoundaryError("record '" + r.record_id + "' (" + r.published_at +
                                ") falls between the train and valid/test periods");
        }
    }
    return out;
}

/// Runs the trigger, source, and quote-pairing filters over annotated
/// sentences and assembles quote records with their neighbouring sentences.
/// Source occurrence counts are taken over the trigger-filtered pool.
inline std::vector<QuoteRecord> construct_records(const std::vector<SrlSentence>& sentences,
                                                  const TriggerLexicon& lexicon, const SourcePolicy& policy)
{
    std::vector<std::vector<SrlFrame>> pool;
    pool.reserve(sentences.size());
    for (auto const& s : sentences) pool.push_back(srl_filter(s, lexicon));
    auto counts = count_sources(sentences, pool);

    std::map<std::string, std::map<std::size_t, const SrlSentence*>> by_article;
    for (auto const& s : sentences) by_article[s.article_id][s.sentence_index] = &s;
    auto neighbour = [&](const SrlSentence& s, long delta) -> std::string {
        auto const& doc = by_article[s.article_id];
        if (delta < 0 && s.sentence_index == 0) return {};
        auto it = doc.find(s.sentence_index + delta);
        return it == doc.end() ? std::string{} : it->second->sentence_text;
    };

    std::vector<QuoteRecord> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        auto const& s = sentences[i];
        if (!paired_quotes_check(s.sentence_text)) continue;
        auto kept = source_filter(s, pool[i], policy, counts);
        for (std::size_t k = 0; k < kept.size(); ++k) {
            auto const& f = kept[k];
            auto const* ent = subject_entity(s, f);
            QuoteRecord r;
            r.record_id = s.article_id + "#" + std::to_string(s.sentence_index) + "#" + std::to_string(k);
            r.left_sentence = neighbour(s, -1);
            r.main_sentence = s.sentence_text;
            r.right_sentence = neighbour(s, 1);
            r.quote = span_text(s.sentence_text, *f.object);
            r.source_surface = span_text(s.sentence_text, *f.subject);
            r.source_entity = ent->entity;
            r.ontology_classes = ent->ontology_classes;
            r.keywords = s.keywords;
            r.title = s.title;
            r.summary_first_sentence = s.summary_first_sentence;
            r.categories = s.categories;
            r.news_source = s.news_source;
            r.published_at = s.published_at;
            r.published = s.published;
            r.quote_type = classify_quote_text(r.quote);
            validate_record(r);
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace sq
