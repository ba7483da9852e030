#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sq/error.hpp"
#include "sq/quote_marks.hpp"
#include "sq/text.hpp"
#include "sq/timestamp.hpp"

namespace sq {

using json = nlohmann::json;

/// One quote sample: a three-sentence context, the quote and its source,
/// and article-level metadata.
struct QuoteRecord {
    std::string record_id;
    std::string left_sentence;
    std::string main_sentence;
    std::string right_sentence;
    std::string quote;
    std::string source_surface;
    std::string source_entity;
    std::vector<std::string> ontology_classes;
    std::vector<std::string> keywords;
    std::string title;
    std::string summary_first_sentence;
    std::vector<std::string> categories;
    std::string news_source;
    std::string published_at;  // as serialized; `published` is the parsed value
    timestamp published{};
    std::optional<QuoteType> quote_type;
    json extra = json::object();  // unknown fields, preserved on round-trip

    friend bool operator==(const QuoteRecord&, const QuoteRecord&) = default;
};

enum class SplitLabel { train, valid, test, unsplit };

struct Corpus {
    std::vector<QuoteRecord> records;
    SplitLabel split_label = SplitLabel::unsplit;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

struct StatsReport {
    std::size_t n_samples = 0;
    std::size_t n_articles = 0;
    std::size_t n_source_entities = 0;
    double avg_quote_length = 0.0;
    std::size_t n_news_sources = 0;
    std::size_t n_categories = 0;
    double avg_keywords_per_article = 0.0;
    // indexed by QuoteType: direct, indirect, mixed
    std::array<double, 3> quote_type_proportions{0.0, 0.0, 0.0};
};

namespace detail {

inline const std::array<const char*, 14> known_fields = {
    "record_id", "left_sentence", "main_sentence", "right_sentence", "quote",
    "source_surface", "source_entity", "title", "summary_first_sentence", "news_source",
    "published_at", "ontology_classes", "keywords", "categories"};

inline std::string get_string(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

inline std::vector<std::string> get_string_list(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
    if (!it->is_array()) throw SchemaError(std::string("field '") + key + "' must be a list");
    std::vector<std::string> out;
    for (auto const& v : *it) {
        if (!v.is_string())
            throw SchemaError(std::string("field '") + key + "' must contain only strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace detail

/// Checks the record invariants, throwing InvariantError on the first failure.
inline void validate_record(const QuoteRecord& r)
{
    if (r.source_entity.empty()) throw InvariantError("source_entity is empty");
    if (!parse_timestamp(r.published_at))
        throw InvariantError("published_at is not a valid timestamp: '" + r.published_at + "'");
    if (text::count_ws_tokens(r.quote) <= 3)
        throw InvariantError("quote must have more than three tokens");
    if (r.main_sentence.find(r.quote) == std::string::npos)
        throw InvariantError("quote is not a substring of main_sentence");
    if (r.source_surface.empty() || r.main_sentence.find(r.source_surface) == std::string::npos)
        throw InvariantError("source_surface is not a substring of main_sentence");
}

inline QuoteRecord record_from_json(const json& j)
{
    if (!j.is_object()) throw SchemaError("record must be an object");
    QuoteRecord r;
    r.record_id = detail::get_string(j, "record_id");
    r.left_sentence = detail::get_string(j, "left_sentence");
    r.main_sentence = detail::get_string(j, "main_sentence");
    r.right_sentence = detail::get_string(j, "right_sentence");
    r.quote = detail::get_string(j, "quote");
    r.source_surface = detail::get_string(j, "source_surface");
    r.source_entity = detail::get_string(j, "source_entity");
    r.ontology_classes = detail::get_string_list(j, "ontology_classes");
    r.keywords = detail::get_string_list(j, "keywords");
    r.title = detail::get_string(j, "title");
    r.summary_first_sentence = detail::get_string(j, "summary_first_sentence");
    r.categories = detail::get_string_list(j, "categories");
    r.news_source = detail::get_string(j, "news_source");
    r.published_at = detail::get_string(j, "published_at");
    if (auto it = j.find("quote_type"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw SchemaError("field 'quote_type' must be a string");
        auto t = quote_type_from_string(it->get<std::string>());
        if (!t) throw SchemaError("field 'quote_type' must be one of direct|indirect|mixed");
        r.quote_type = t;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "quote_type") continue;
        auto const& known = detail::known_fields;
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            r.extra[it.key()] = it.value();
    }
    validate_record(r);
    r.published = *parse_timestamp(r.published_at);
    return r;
}

/// Parses and validates one serialized record line.
inline QuoteRecord parse_record(std::string_view line)
{
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError("line is not a well-formed serialized object");
    return record_from_json(j);
}

inline json record_to_json(const QuoteRecord& r)
{
    json j = r.extra.is_object() ? r.extra : json::object();
    j["record_id"] = r.record_id;
    j["left_sentence"] = r.left_sentence;
    j["main_sentence"] = r.main_sentence;
    j["right_sentence"] = r.right_sentence;
    j["quote"] = r.quote;
    j["source_surface"] = r.source_surface;
    j["source_entity"] = r.source_entity;
    j["ontology_classes"] = r.ontology_classes;
    j["keywords"] = r.keywords;
    j["title"] = r.title;
    j["summary_first_sentence"] = r.summary_first_sentence;
    j["categories"] = r.categories;
    j["news_source"] = r.news_source;
    j["published_at"] = r.published_at;
    if (r.quote_type) j["quote_type"] = std::string(to_string(*r.quote_type));
    return j;
}

inline std::string serialize_record(const QuoteRecord& r) { return record_to_json(r).dump(); }

inline Corpus parse_corpus(std::istream& in, SplitLabel label = SplitLabel::unsplit)
{
    Corpus c;
    c.split_label = label;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            c.records.push_back(parse_record(line));
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const InvariantError& e) {
            throw InvariantError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(c.records.back().record_id).second)
            throw DuplicateRecordId("line " + std::to_string(lineno) + ": '" +
                                    c.records.back().record_id + "'");
    }
    return c;
}

inline Corpus load_corpus(const std::string& path, SplitLabel label = SplitLabel::unsplit)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus " + path);
    return parse_corpus(in, label);
}

inline void write_corpus(std::ostream& out, const Corpus& c)
{
    for (auto const& r : c.records) out << serialize_record(r) << '\n';
}

inline void save_corpus(const std::string& path, const Corpus& c)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_corpus(out, c);
}

inline QuoteType effective_quote_type(const QuoteRecord& r)
{
    return r.quote_type ? *r.quote_type : classify_quote_text(r.quote);
}

/// Dataset statistics. Articles are identified by (title, published_at);
/// keyword averages are taken per article (largest keyword list among its
/// records), quote lengths per sample.
inline StatsReport corpus_stats(const Corpus& corpus)
{
    if (corpus.empty()) throw EmptyCorpus("cannot compute statistics of an empty corpus");
    StatsReport s;
    s.n_samples = corpus.size();
    std::map<std::pair<std::string, std::string>, std::size_t> articles;
    std::set<std::string> entities, news_sources, categories;
    std::array<std::size_t, 3> type_counts{0, 0, 0};
    double quote_tokens = 0.0;
    for (auto const& r : corpus.records) {
        auto& kw = articles[std::make_pair(r.title, r.published_at)];
        kw = std::max(kw, r.keywords.size());
        entities.insert(r.source_entity);
        news_sources.insert(r.news_source);
        categories.insert(r.categories.begin(), r.categories.end());
        quote_tokens += static_cast<double>(text::count_ws_tokens(r.quote));
        ++type_counts[static_cast<std::size_t>(effective_quote_type(r))];
    }
    s.n_articles = articles.size();
    s.n_source_entities = entities.size();
    s.n_news_sources = news_sources.size();
    s.n_categories = categories.size();
    s.avg_quote_length = quote_tokens / static_cast<double>(s.n_samples);
    // map iteration order makes the sum independent of record order
    double kw = 0.0;
    for (auto const& [key, n] : articles) kw += static_cast<double>(n);
    s.avg_keywords_per_article = kw / static_cast<double>(s.n_articles);
    for (std::size_t i = 0; i < 3; ++i)
        s.quote_type_proportions[i] =
            static_cast<double>(type_counts[i]) / static_cast<double>(s.n_samples);
    return s;
}

inline json stats_to_json(const StatsReport& s)
{
    return json{{"n_samples", s.n_samples},
                {"n_articles", s.n_articles},
                {"n_source_entities", s.n_source_entities},
                {"avg_quote_length", s.avg_quote_length},
                {"n_news_sources", s.n_news_sources},
                {"n_categories", s.n_categories},
                {"avg_keywords_per_article", s.avg_keywords_per_article},
                {"quote_type_proportions",
                 {{"direct", s.quote_type_proportions[0]},
                  {"indirect", s.quote_type_proportions[1]},
                  {"mixed", s.quote_type_proportions[2]}}}};
}

/// record_id -> position lookup over a corpus.
inline std::unordered_map<std::string, std::size_t> index_by_id(const Corpus& c)
{
    std::unordered_map<std::string, std::size_t> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < c.records.size(); ++i) out.emplace(c.records[i].record_id, i);
    return out;
}

}  // namespace sq
