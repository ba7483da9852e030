#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/dense.hpp"
#include "sq/error.hpp"
#include "sq/expert_lm.hpp"
#include "sq/sparse.hpp"
#include "sq/text.hpp"

namespace sq {

enum class QueryMode { title, keywords, summary };
enum class DocMode { sentence, context };
enum class Method { dr_sparse, dr_flat, dr_hnsw, er_candidate, er_document };

inline constexpr std::size_t dr_document_depth = 10;

struct QuerySpec {
    QueryMode mode = QueryMode::keywords;
    std::optional<std::size_t> w;  // word cap, expert retrieval only
    bool strip_source = true;
};

struct DocSpec {
    DocMode mode = DocMode::context;
};

inline std::string_view to_string(QueryMode m)
{
    switch (m) {
        case QueryMode::title: return "title";
        case QueryMode::keywords: return "keywords";
        case QueryMode::summary: return "summary";
    }
    return "keywords";
}

inline std::string_view to_string(DocMode m) { return m == DocMode::sentence ? "sentence" : "context"; }

inline std::string_view to_string(Method m)
{
    switch (m) {
        case Method::dr_sparse: return "dr_sparse";
        case Method::dr_flat: return "dr_flat";
        case Method::dr_hnsw: return "dr_hnsw";
        case Method::er_candidate: return "er_candidate";
        case Method::er_document: return "er_document";
    }
    return "dr_sparse";
}

inline std::optional<QueryMode> parse_query_mode(std::string_view s)
{
    if (s == "title") return QueryMode::title;
    if (s == "keywords" || s == "keyword") return QueryMode::keywords;
    if (s == "summary") return QueryMode::summary;
    return std::nullopt;
}

inline std::optional<DocMode> parse_doc_mode(std::string_view s)
{
    if (s == "sentence" || s == "quote") return DocMode::sentence;
    if (s == "context") return DocMode::context;
    return std::nullopt;
}

inline std::optional<Method> parse_method(std::string_view s)
{
    for (auto m : {Method::dr_sparse, Method::dr_flat, Method::dr_hnsw, Method::er_candidate, Method::er_document})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

inline bool is_document_retrieval(Method m) { return m == Method::dr_sparse || m == Method::dr_flat || m == Method::dr_hnsw; }

/// "http://dbpedia.org/resource/Anthony_Fauci" -> "Anthony Fauci"
inline std::string entity_display_name(std::string_view entity)
{
    auto pos = entity.find_last_of('/');
    if (pos != std::string_view::npos) entity.remove_prefix(pos + 1);
    std::string out(entity);
    for (auto& c : out)
        if (c == '_') c = ' ';
    return out;
}

/// Builds the query text for a record. Source stripping removes every
/// whitespace token matching (case-insensitively, edge punctuation ignored) a
/// token of the source surface or the entity's display name; `w` then keeps
/// the first w words.
inline std::string form_query(const QuoteRecord& r, const QuerySpec& spec)
{
    std::vector<std::string> words;
    switch (spec.mode) {
        case QueryMode::title:
            if (text::trim(r.title).empty()) throw EmptyField("title is empty");
            words = text::split_ws(r.title);
            break;
        case QueryMode::keywords:
            for (auto const& k : r.keywords)
                for (auto& w : text::split_ws(k)) words.push_back(std::move(w));
            if (words.empty()) throw EmptyField("keywords are empty");
            break;
        case QueryMode::summary:
            if (text::trim(r.summary_first_sentence).empty()) throw EmptyField("summary_first_sentence is empty");
            words = text::split_ws(r.summary_first_sentence);
            break;
    }
    if (spec.strip_source) {
        std::unordered_set<std::string> banned;
        for (auto const& t : text::split_ws(r.source_surface))
            if (auto n = text::normalize_token(t); !n.empty()) banned.insert(n);
        for (auto const& t : text::split_ws(entity_display_name(r.source_entity)))
            if (auto n = text::normalize_token(t); !n.empty()) banned.insert(n);
        std::vector<std::string> kept;
        for (auto& w : words)
            if (!banned.count(text::normalize_token(w))) kept.push_back(std::move(w));
        words = std::move(kept);
    }
    if (spec.w) {
        if (*spec.w < 1) throw ParameterError("w must be at least 1");
        if (words.size() > *spec.w) words.resize(*spec.w);
    }
    return text::join(words, " ");
}

inline Document form_document(const QuoteRecord& r, const DocSpec& spec)
{
    if (spec.mode == DocMode::sentence) return {r.record_id, r.main_sentence};
    std::string out;
    for (auto const* part : {&r.left_sentence, &r.main_sentence, &r.right_sentence}) {
        if (part->empty()) continue;
        if (!out.empty()) out += ' ';
        out += *part;
    }
    return {r.record_id, out};
}

/// Corpus records addressable by record_id, with the document formation used
/// to build the indexes over them.
class DocumentCatalog {
  public:
    DocumentCatalog() = default;
    DocumentCatalog(Corpus corpus, DocSpec spec) : m_corpus(std::move(corpus)), m_spec(spec)
    {
        m_by_id = index_by_id(m_corpus);
    }

    const Corpus& corpus() const { return m_corpus; }
    const DocSpec& doc_spec() const { return m_spec; }

    const QuoteRecord* find(std::string_view id) const
    {
        auto it = m_by_id.find(std::string(id));
        return it == m_by_id.end() ? nullptr : &m_corpus.records[it->second];
    }

    const QuoteRecord& at(std::string_view id) const
    {
        if (auto const* r = find(id)) return *r;
        throw UnknownDocId("'" + std::string(id) + "'");
    }

    std::vector<Document> documents() const
    {
        std::vector<Document> out;
        out.reserve(m_corpus.size());
        for (auto const& r : m_corpus.records) out.push_back(form_document(r, m_spec));
        return out;
    }

    std::vector<AttributedDocument> attributed_documents() const
    {
        std::vector<AttributedDocument> out;
        out.reserve(m_corpus.size());
        for (auto const& r : m_corpus.records) {
            auto d = form_document(r, m_spec);
            out.push_back({std::move(d.doc_id), std::move(d.text), r.source_entity});
        }
        return out;
    }

  private:
    Corpus m_corpus;
    DocSpec m_spec;
    std::unordered_map<std::string, std::size_t> m_by_id;
};

/// Collapses a ranked document list into experts ordered by their best
/// document; each expert takes its best document's score.
inline ExpertRanking experts_from_documents(const std::vector<ScoredDoc>& ranked_docs, const DocumentCatalog& catalog)
{
    ExpertRanking out;
    std::unordered_set<std::string> seen;
    for (auto const& d : ranked_docs) {
        auto const& rec = catalog.at(d.doc_id);
        if (seen.insert(rec.source_entity).second) out.push_back({rec.source_entity, d.score});
    }
    return out;
}

/// Everything a recommendation may need. Unset members mean "not loaded".
struct IndexSet {
    std::shared_ptr<const DocumentCatalog> catalog;
    std::shared_ptr<const SparseIndex> sparse;
    std::shared_ptr<const VectorStore> vectors;
    std::shared_ptr<const HnswIndex> hnsw;
    std::shared_ptr<const LmStats> lm;
    std::size_t ef_search = 100;

    bool ready(Method m) const
    {
        switch (m) {
            case Method::dr_sparse: return catalog && sparse;
            case Method::dr_flat: return catalog && vectors;
            case Method::dr_hnsw: return catalog && hnsw;
            case Method::er_candidate:
            case Method::er_document: return static_cast<bool>(lm);
        }
        return false;
    }
};

struct RecommendResult {
    ExpertRanking experts;
    std::vector<ScoredDoc> documents;  // retrieved documents (document retrieval only)
};

inline void require_ready(const IndexSet& idx, Method m)
{
    if (!idx.ready(m)) throw IndexMissing(std::string(to_string(m)) + " requires an index that is not loaded");
}

/// Runs one query. Document retrieval takes the top dr_document_depth
/// documents and collapses them to experts; expert retrieval ranks experts
/// directly. Dense methods need a query embedding.
inline RecommendResult recommend_query(const IndexSet& idx, std::string_view query_text, Method method,
                                       std::size_t k = 10, std::span<const float> embedding = {})
{
    require_ready(idx, method);
    if (k < 1) throw ParameterError("k must be at least 1");
    RecommendResult out;
    switch (method) {
        case Method::dr_sparse: out.documents = search_sparse(*idx.sparse, query_text, dr_document_depth); break;
        case Method::dr_flat:
            if (embedding.empty()) throw EmptyQuery("dense retrieval requires a query embedding");
            out.documents = search_flat(*idx.vectors, embedding, dr_document_depth);
            break;
        case Method::dr_hnsw:
            if (embedding.empty()) throw EmptyQuery("dense retrieval requires a query embedding");
            out.documents = search_hnsw(*idx.hnsw, embedding, dr_document_depth,
                                        std::max(idx.ef_search, dr_document_depth));
            break;
        case Method::er_candidate:
        case Method::er_document: {
            auto terms = lm_query_terms(*idx.lm, query_text);
            if (terms.empty()) throw EmptyQuery("query has no terms after tokenization");
            auto model = method == Method::er_candidate ? ExpertModel::candidate : ExpertModel::document;
            out.experts = rank_experts(*idx.lm, terms, model, k);
            return out;
        }
    }
    out.experts = experts_from_documents(out.documents, *idx.catalog);
    if (out.experts.size() > k) out.experts.resize(k);
    return out;
}

/// Forms the query from a record (word cap applied to expert retrieval only)
/// and runs it.
inline RecommendResult recommend(const IndexSet& idx, const QuoteRecord& record, Method method,
                                 const QuerySpec& spec, std::size_t k = 10, std::span<const float> embedding = {})
{
    require_ready(idx, method);
    QuerySpec effective = spec;
    if (is_document_retrieval(method)) effective.w.reset();
    auto query = form_query(record, effective);
    if (text::trim(query).empty() && !(embedding.size() && is_document_retrieval(method) && method != Method::dr_sparse))
        throw EmptyQuery("query for '" + record.record_id + "' is empty after source stripping");
    return recommend_query(idx, query, method, k, embedding);
}

/// One line per ranked expert: `query_id expert_id rank score tag`.
inline void write_run_lines(std::ostream& out, std::string_view query_id, const ExpertRanking& ranking,
                            std::string_view tag)
{
    for (std::size_t i = 0; i < ranking.size(); ++i)
        out << query_id << ' ' << ranking[i].expert << ' ' << (i + 1) << ' ' << ranking[i].score << ' ' << tag
            << '\n';
}

}  // namespace sq
