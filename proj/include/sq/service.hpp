#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/error.hpp"
#include "sq/recommender.hpp"

namespace sq {

inline constexpr std::size_t max_search_k = 100;
inline constexpr std::size_t supporting_quotes_per_expert = 3;

struct SearchRequest {
    std::string query;
    std::string method = "dr_sparse";
    std::size_t k = 10;
    std::vector<float> embedding;  // dense methods only
};

struct SupportingQuote {
    std::string doc_id;
    std::string quote;
    double score = 0.0;
};

struct RecommendedExpert {
    std::string expert;
    double score = 0.0;
    std::vector<SupportingQuote> supporting;
};

struct SearchResponse {
    int status = 200;
    std::string error;
    std::string query;
    std::string method;
    std::vector<RecommendedExpert> experts;
    double took_ms = 0.0;
};

namespace detail {

inline SupportingQuote make_support(const IndexSet& idx, const ScoredDoc& d)
{
    SupportingQuote s{d.doc_id, {}, d.score};
    if (idx.catalog)
        if (auto const* r = idx.catalog->find(d.doc_id)) s.quote = r->quote;
    return s;
}

inline SearchResponse fail(SearchResponse r, int status, std::string msg)
{
    r.status = status;
    r.error = std::move(msg);
    r.experts.clear();
    return r;
}

}  // namespace detail

/// Read-only search over a loaded index set. Supporting quotes are the
/// expert's best retrieved documents (document retrieval) or its best
/// query-likelihood documents (expert retrieval).
inline SearchResponse handle_search(const SearchRequest& req, const IndexSet& idx)
{
    auto t0 = std::chrono::steady_clock::now();
    SearchResponse resp;
    resp.query = req.query;
    resp.method = req.method;
    auto finish = [&](SearchResponse r) {
        r.took_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };

    auto method = parse_method(req.method);
    if (!method) return finish(detail::fail(resp, 400, "unknown method '" + req.method + "'"));
    if (req.k < 1 || req.k > max_search_k)
        return finish(detail::fail(resp, 400, "k must be in [1, " + std::to_string(max_search_k) + "]"));
    if (text::trim(req.query).empty()) return finish(detail::fail(resp, 400, "empty query"));
    if (!idx.ready(*method)) return finish(detail::fail(resp, 503, std::string(to_string(*method)) + " index not loaded"));
    if ((*method == Method::dr_flat || *method == Method::dr_hnsw) && req.embedding.empty())
        return finish(detail::fail(resp, 400, "dense methods need a query vector"));

    try {
        auto result = recommend_query(idx, req.query, *method, req.k, req.embedding);
        if (is_document_retrieval(*method)) {
            std::unordered_map<std::string, std::vector<SupportingQuote>> by_expert;
            for (auto const& d : result.documents) {
                auto const& rec = idx.catalog->at(d.doc_id);
                auto& v = by_expert[rec.source_entity];
                if (v.size() < supporting_quotes_per_expert) v.push_back(detail::make_support(idx, d));
            }
            for (auto const& e : result.experts) resp.experts.push_back({e.expert, e.score, by_expert[e.expert]});
        } else {
            auto terms = lm_query_terms(*idx.lm, req.query);
            for (auto const& e : result.experts) {
                RecommendedExpert re{e.expert, e.score, {}};
                for (auto const& d : rank_expert_documents(*idx.lm, terms, e.expert, supporting_quotes_per_expert))
                    re.supporting.push_back(detail::make_support(idx, d));
                resp.experts.push_back(std::move(re));
            }
        }
    } catch (const EmptyQuery& e) {
        return finish(detail::fail(resp, 400, e.what()));
    } catch (const DimMismatch& e) {
        return finish(detail::fail(resp, 400, e.what()));
    } catch (const ParameterError& e) {
        return finish(detail::fail(resp, 400, e.what()));
    } catch (const IndexMissing& e) {
        return finish(detail::fail(resp, 503, e.what()));
    }
    return finish(std::move(resp));
}

inline json response_to_json(const SearchResponse& r)
{
    json j{{"status", r.status}, {"query", r.query}, {"method", r.method}, {"took_ms", r.took_ms}};
    if (r.status != 200) {
        j["error"] = r.error;
        return j;
    }
    j["experts"] = json::array();
    for (std::size_t i = 0; i < r.experts.size(); ++i) {
        auto const& e = r.experts[i];
        json quotes = json::array();
        for (auto const& s : e.supporting) quotes.push_back({{"doc_id", s.doc_id}, {"quote", s.quote}, {"score", s.score}});
        j["experts"].push_back({{"rank", i + 1}, {"expert", e.expert}, {"score", e.score}, {"supporting_quotes", quotes}});
    }
    return j;
}

/// Shares one immutable index set between request handlers; replace() swaps
/// in a whole new set while in-flight requests keep the old one alive.
class IndexHolder {
  public:
    explicit IndexHolder(std::shared_ptr<const IndexSet> set = std::make_shared<IndexSet>()) : m_set(std::move(set)) {}

    std::shared_ptr<const IndexSet> get() const
    {
        std::lock_guard lock(m_mutex);
        return m_set;
    }

    void replace(std::shared_ptr<const IndexSet> set)
    {
        std::lock_guard lock(m_mutex);
        m_set = std::move(set);
    }

  private:
    mutable std::mutex m_mutex;
    std::shared_ptr<const IndexSet> m_set;
};

inline json readiness_json(const IndexSet& idx)
{
    json j = json::object();
    for (auto m : {Method::dr_sparse, Method::dr_flat, Method::dr_hnsw, Method::er_candidate, Method::er_document})
        j[std::string(to_string(m))] = idx.ready(m);
    return j;
}

}  // namespace sq
