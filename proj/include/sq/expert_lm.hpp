#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string_view>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sq/binary_io.hpp"
#include "sq/error.hpp"
#include "sq/sparse.hpp"
#include "sq/tokenizer.hpp"

namespace sq {

/// A document attributed to one expert (the quote's source entity).
struct AttributedDocument {
    std::string doc_id;
    std::string text;
    std::string expert;
};

struct ExpertScore {
    std::string expert;
    double score = 0.0;  // log-score, or retrieval score for document-derived rankings

    friend bool operator==(const ExpertScore&, const ExpertScore&) = default;
};

using ExpertRanking = std::vector<ExpertScore>;

enum class ExpertModel { candidate, document };

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// Maximum-likelihood term statistics and Boolean expert-document
/// associations. Each document carries exactly one expert, so n(e,d) is 1
/// for that expert and n(e) counts the expert's documents.
struct LmStats {
    TokenizerConfig tokenizer = TokenizerConfig::plain();
    std::vector<std::string> doc_ids;          // ascending
    std::vector<std::uint32_t> doc_lengths;    // n(d)
    std::vector<std::uint32_t> doc_expert;     // index into experts
    std::vector<std::string> experts;          // ascending
    std::map<std::string, std::vector<Posting>> postings;  // n(t,d), sorted by doc
    std::map<std::string, std::uint64_t> background_counts;
    std::uint64_t total_tokens = 0;
    std::vector<std::vector<std::uint32_t>> associations;  // expert -> docs
    std::vector<std::uint64_t> expert_occurrences;         // n(e)
    double avg_doc_length = 0.0;
    double beta_candidate = 0.0;

    std::size_t n_docs() const { return doc_ids.size(); }
    std::size_t n_experts() const { return experts.size(); }

    friend bool operator==(const LmStats&, const LmStats&) = default;

    std::optional<std::size_t> expert_index(std::string_view e) const
    {
        auto it = std::lower_bound(experts.begin(), experts.end(), e);
        if (it == experts.end() || *it != e) return std::nullopt;
        return static_cast<std::size_t>(it - experts.begin());
    }

    std::size_t require_expert(std::string_view e) const
    {
        auto i = expert_index(e);
        if (!i) throw UnknownExpert("'" + std::string(e) + "'");
        return *i;
    }

    /// p(t) = corpus count / total tokens
    double p_term(const std::string& t) const
    {
        auto it = background_counts.find(t);
        if (it == background_counts.end() || total_tokens == 0) return 0.0;
        return static_cast<double>(it->second) / static_cast<double>(total_tokens);
    }

    std::uint32_t term_count(const std::string& t, std::uint32_t doc) const
    {
        auto it = postings.find(t);
        if (it == postings.end()) return 0;
        auto p = std::lower_bound(it->second.begin(), it->second.end(), doc,
                                  [](const Posting& a, std::uint32_t d) { return a.doc < d; });
        return (p != it->second.end() && p->doc == doc) ? p->tf : 0;
    }

    /// p(t|d) = n(t,d) / n(d)
    double p_term_given_doc(const std::string& t, std::uint32_t doc) const
    {
        if (doc_lengths[doc] == 0) return 0.0;
        return static_cast<double>(term_count(t, doc)) / static_cast<double>(doc_lengths[doc]);
    }

    /// lambda = beta / (beta + n(e))
    double lambda_candidate(std::size_t expert) const
    {
        return beta_candidate / (beta_candidate + static_cast<double>(expert_occurrences[expert]));
    }

    /// lambda_d = avg|d| / (avg|d| + n(d))
    double lambda_document(std::uint32_t doc) const
    {
        return avg_doc_length / (avg_doc_length + static_cast<double>(doc_lengths[doc]));
    }
};

namespace detail {

/// Fills the derived fields (background model, associations, beta) from
/// doc_lengths, doc_expert, experts, and postings.
inline void finalize_lm(LmStats& s)
{
    s.background_counts.clear();
    s.total_tokens = 0;
    for (auto const& [term, list] : s.postings) {
        std::uint64_t c = 0;
        for (auto const& p : list) c += p.tf;
        s.background_counts.emplace(term, c);
    }
    for (auto len : s.doc_lengths) s.total_tokens += len;
    s.associations.assign(s.experts.size(), {});
    s.expert_occurrences.assign(s.experts.size(), 0);
    for (std::uint32_t d = 0; d < s.doc_ids.size(); ++d) {
        s.associations[s.doc_expert[d]].push_back(d);
        ++s.expert_occurrences[s.doc_expert[d]];
    }
    s.avg_doc_length = s.doc_ids.empty() ? 0.0
                                         : static_cast<double>(s.total_tokens) / static_cast<double>(s.doc_ids.size());
    // beta = (sum_e |{d : n(e,d) > 0}| * avg|d|) / |E|
    double assoc_total = 0.0;
    for (auto const& a : s.associations) assoc_total += static_cast<double>(a.size());
    s.beta_candidate = s.experts.empty() ? 0.0 : assoc_total * s.avg_doc_length / static_cast<double>(s.experts.size());
}

}  // namespace detail

inline LmStats build_lm_stats(const std::vector<AttributedDocument>& corpus,
                              const TokenizerConfig& config = TokenizerConfig::plain())
{
    std::vector<const AttributedDocument*> order;
    order.reserve(corpus.size());
    for (auto const& d : corpus) order.push_back(&d);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->doc_id < b->doc_id; });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (order[i]->doc_id == order[i - 1]->doc_id) throw DuplicateDocId("'" + order[i]->doc_id + "'");

    LmStats s;
    s.tokenizer = config;
    for (auto* d : order) s.experts.push_back(d->expert);
    std::sort(s.experts.begin(), s.experts.end());
    s.experts.erase(std::unique(s.experts.begin(), s.experts.end()), s.experts.end());
    for (std::uint32_t n = 0; n < order.size(); ++n) {
        auto terms = tokenize(order[n]->text, config);
        s.doc_ids.push_back(order[n]->doc_id);
        s.doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
        s.doc_expert.push_back(static_cast<std::uint32_t>(*s.expert_index(order[n]->expert)));
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : terms) ++tf[std::move(t)];
        for (auto const& [term, count] : tf) s.postings[term].push_back({n, count});
    }
    detail::finalize_lm(s);
    return s;
}

inline std::vector<std::string> lm_query_terms(const LmStats& stats, std::string_view query)
{
    return tokenize(query, stats.tokenizer);
}

namespace detail {

inline std::map<std::string, std::size_t> query_counts(const std::vector<std::string>& terms)
{
    std::map<std::string, std::size_t> q;
    for (auto const& t : terms) ++q[t];
    return q;
}

inline double log_sum_exp(const std::vector<double>& xs)
{
    double m = neg_inf;
    for (double x : xs) m = std::max(m, x);
    if (m == neg_inf) return neg_inf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : neg_inf; }

}  // namespace detail

/// sum_t n(t,q) ln[(1 - lambda) sum_d p(t|d) p(d|e) + lambda p(t)]
inline double score_candidate_based(const LmStats& stats, const std::vector<std::string>& query_terms,
                                    std::string_view expert)
{
    auto e = stats.require_expert(expert);
    if (query_terms.empty()) throw EmptyQuery("no query terms");
    double lambda = stats.lambda_candidate(e);
    double score = 0.0;
    for (auto const& [t, nq] : detail::query_counts(query_terms)) {
        double assoc = 0.0;
        for (auto d : stats.associations[e]) assoc += stats.p_term_given_doc(t, d);
        score += static_cast<double>(nq) * detail::safe_log((1.0 - lambda) * assoc + lambda * stats.p_term(t));
    }
    return score;
}

/// Log-score of one document under the smoothed document model.
inline double document_log_likelihood(const LmStats& stats, const std::map<std::string, std::size_t>& query,
                                      std::uint32_t doc)
{
    double lambda = stats.lambda_document(doc);
    double ll = 0.0;
    for (auto const& [t, nq] : query)
        ll += static_cast<double>(nq) *
              detail::safe_log((1.0 - lambda) * stats.p_term_given_doc(t, doc) + lambda * stats.p_term(t));
    return ll;
}

/// ln sum_{d in assoc(e)} prod_t [(1 - lambda_d) p(t|d) + lambda_d p(t)]^n(t,q), via log-sum-exp.
inline double score_document_based(const LmStats& stats, const std::vector<std::string>& query_terms,
                                   std::string_view expert)
{
    auto e = stats.require_expert(expert);
    if (query_terms.empty()) throw EmptyQuery("no query terms");
    auto q = detail::query_counts(query_terms);
    std::vector<double> per_doc;
    for (auto d : stats.associations[e]) per_doc.push_back(document_log_likelihood(stats, q, d));
    return detail::log_sum_exp(per_doc);
}

/// The expert's documents ranked by document log-likelihood (best first).
inline std::vector<ScoredDoc> rank_expert_documents(const LmStats& stats, const std::vector<std::string>& query_terms,
                                                    std::string_view expert, std::size_t k)
{
    auto e = stats.require_expert(expert);
    auto q = detail::query_counts(query_terms);
    std::vector<ScoredDoc> out;
    for (auto d : stats.associations[e]) out.push_back({stats.doc_ids[d], document_log_likelihood(stats, q, d)});
    std::sort(out.begin(), out.end(), ranks_before);
    if (out.size() > k) out.resize(k);
    return out;
}

inline bool expert_ranks_before(const ExpertScore& a, const ExpertScore& b)
{
    if (a.score != b.score) return a.score > b.score;
    return a.expert < b.expert;
}

/// Scores every expert and returns the top k with finite log-score.
inline ExpertRanking rank_experts(const LmStats& stats, const std::vector<std::string>& query_terms,
                                  ExpertModel method, std::size_t k)
{
    if (k < 1) throw ParameterError("k must be at least 1");
    if (query_terms.empty()) throw EmptyQuery("no query terms");
    auto q = detail::query_counts(query_terms);
    const std::size_t n_docs = stats.n_docs();
    const std::size_t n_exp = stats.n_experts();

    std::vector<double> scores(n_exp, 0.0);
    if (method == ExpertModel::candidate) {
        for (auto const& [t, nq] : q) {
            double pt = stats.p_term(t);
            std::vector<double> assoc(n_exp, 0.0);
            if (auto it = stats.postings.find(t); it != stats.postings.end())
                for (auto const& p : it->second)
                    assoc[stats.doc_expert[p.doc]] +=
                        static_cast<double>(p.tf) / static_cast<double>(stats.doc_lengths[p.doc]);
            for (std::size_t e = 0; e < n_exp; ++e) {
                double lambda = stats.lambda_candidate(e);
                scores[e] += static_cast<double>(nq) * detail::safe_log((1.0 - lambda) * assoc[e] + lambda * pt);
            }
        }
    } else {
        // dense per-term counts so each document is scored directly
        std::vector<std::pair<std::vector<std::uint32_t>, std::pair<double, double>>> cols;
        for (auto const& [t, nq] : q) {
            std::vector<std::uint32_t> tf(n_docs, 0);
            if (auto it = stats.postings.find(t); it != stats.postings.end())
                for (auto const& p : it->second) tf[p.doc] = p.tf;
            cols.push_back({std::move(tf), {static_cast<double>(nq), stats.p_term(t)}});
        }
        std::vector<std::vector<double>> per_expert(n_exp);
        for (std::uint32_t d = 0; d < n_docs; ++d) {
            double lambda = stats.lambda_document(d);
            double len = static_cast<double>(stats.doc_lengths[d]);
            double ll = 0.0;
            for (auto const& [tf, w] : cols) {
                double ptd = len > 0.0 ? static_cast<double>(tf[d]) / len : 0.0;
                ll += w.first * detail::safe_log((1.0 - lambda) * ptd + lambda * w.second);
            }
            per_expert[stats.doc_expert[d]].push_back(ll);
        }
        for (std::size_t e = 0; e < n_exp; ++e) scores[e] = detail::log_sum_exp(per_expert[e]);
    }

    ExpertRanking out;
    for (std::size_t e = 0; e < n_exp; ++e)
        if (scores[e] != neg_inf) out.push_back({stats.experts[e], scores[e]});
    std::size_t n = std::min(k, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), expert_ranks_before);
    out.resize(n);
    return out;
}

// Snapshot layout (little-endian), see docs/formats.md:
//   "SQL1" u32 version=1
//   u8 lowercase u8 stemming u32 n_stop {str}*
//   u64 n_experts {str}*
//   u64 n_docs {str doc_id, u32 length, u32 expert}*
//   u64 n_terms {str term, u64 n_postings {u32 doc, u32 tf}*}*
inline constexpr std::uint32_t lm_format_version = 1;

inline std::string serialize_lm(const LmStats& s)
{
    io::binary_writer w;
    w.magic("SQL1");
    w.u32(lm_format_version);
    w.u8(s.tokenizer.lowercase ? 1 : 0);
    w.u8(s.tokenizer.stemming ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(s.tokenizer.stopword_list.size()));
    for (auto const& sw : s.tokenizer.stopword_list) w.str(sw);
    w.u64(s.experts.size());
    for (auto const& e : s.experts) w.str(e);
    w.u64(s.doc_ids.size());
    for (std::size_t d = 0; d < s.doc_ids.size(); ++d) {
        w.str(s.doc_ids[d]);
        w.u32(s.doc_lengths[d]);
        w.u32(s.doc_expert[d]);
    }
    w.u64(s.postings.size());
    for (auto const& [term, list] : s.postings) {
        w.str(term);
        w.u64(list.size());
        for (auto const& p : list) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    return w.bytes();
}

inline LmStats deserialize_lm(std::string bytes)
{
    io::binary_reader r(std::move(bytes));
    r.expect_magic("SQL1");
    if (auto v = r.u32(); v != lm_format_version) throw BadMagic("unsupported SQL1 version " + std::to_string(v));
    LmStats s;
    s.tokenizer.lowercase = r.u8() != 0;
    s.tokenizer.stemming = r.u8() != 0;
    s.tokenizer.stopword_list.clear();
    for (auto n = r.u32(); n > 0; --n) s.tokenizer.stopword_list.insert(r.str());
    for (auto n = r.u64(); n > 0; --n) s.experts.push_back(r.str());
    auto n_docs = r.u64();
    r.need(n_docs * 12);
    for (std::uint64_t d = 0; d < n_docs; ++d) {
        s.doc_ids.push_back(r.str());
        s.doc_lengths.push_back(r.u32());
        s.doc_expert.push_back(r.u32());
        if (s.doc_expert.back() >= s.experts.size()) throw TruncatedFile("document references unknown expert");
    }
    for (auto n_terms = r.u64(); n_terms > 0; --n_terms) {
        auto term = r.str();
        auto n = r.u64();
        r.need(n * 8);
        std::vector<Posting> list(n);
        for (auto& p : list) {
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= n_docs) throw TruncatedFile("posting references unknown document");
        }
        s.postings.emplace(std::move(term), std::move(list));
    }
    if (!r.at_end()) throw BadMagic("trailing bytes after SQL1 payload");
    detail::finalize_lm(s);
    return s;
}

inline void save_lm(const std::string& path, const LmStats& s) { io::write_file(path, serialize_lm(s)); }
inline LmStats load_lm(const std::string& path) { return deserialize_lm(io::read_file(path)); }

}  // namespace sq
