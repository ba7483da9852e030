#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sq/binary_io.hpp"
#include "sq/error.hpp"
#include "sq/tokenizer.hpp"

namespace sq {

struct Document {
    std::string doc_id;
    std::string text;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Descending score, ascending id on ties.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b)
{
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

struct Posting {
    std::uint32_t doc = 0;  // internal number; numbers follow ascending doc_id
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

/// Inverted index for BM25 ranking. Documents are numbered in ascending
/// doc_id order, so posting lists sorted by number are sorted by doc_id.
struct SparseIndex {
    std::map<std::string, std::vector<Posting>> postings;
    std::vector<std::string> doc_ids;
    std::vector<std::uint32_t> doc_lengths;
    std::size_t n_docs = 0;
    double avg_doc_length = 0.0;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    TokenizerConfig tokenizer = TokenizerConfig::analyzer_default();

    friend bool operator==(const SparseIndex&, const SparseIndex&) = default;

    /// ln(1 + (N - df + 0.5) / (df + 0.5))
    double idf(std::size_t df) const
    {
        auto n = static_cast<double>(n_docs);
        auto d = static_cast<double>(df);
        return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
    }

    double term_weight(std::uint32_t tf, std::uint32_t doc_length) const
    {
        auto f = static_cast<double>(tf);
        double norm = 1.0 - bm25_b + bm25_b * static_cast<double>(doc_length) / avg_doc_length;
        return f * (bm25_k1 + 1.0) / (f + bm25_k1 * norm);
    }
};

inline SparseIndex build_sparse(const std::vector<Document>& docs,
                                const TokenizerConfig& config = TokenizerConfig::analyzer_default(),
                                Bm25Params params = {})
{
    std::vector<const Document*> order;
    order.reserve(docs.size());
    for (auto const& d : docs) order.push_back(&d);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->doc_id < b->doc_id; });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (order[i]->doc_id == order[i - 1]->doc_id) throw DuplicateDocId("'" + order[i]->doc_id + "'");

    SparseIndex idx;
    idx.bm25_k1 = params.k1;
    idx.bm25_b = params.b;
    idx.tokenizer = config;
    idx.n_docs = order.size();
    double total = 0.0;
    for (std::uint32_t n = 0; n < order.size(); ++n) {
        auto terms = tokenize(order[n]->text, config);
        idx.doc_ids.push_back(order[n]->doc_id);
        idx.doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
        total += static_cast<double>(terms.size());
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : terms) ++tf[std::move(t)];
        for (auto const& [term, count] : tf) idx.postings[term].push_back({n, count});
    }
    idx.avg_doc_length = idx.n_docs ? total / static_cast<double>(idx.n_docs) : 0.0;
    return idx;
}

/// Top-k BM25 results with score > 0. Repeated query terms weight their term
/// by the repetition count.
inline std::vector<ScoredDoc> search_sparse(const SparseIndex& index, std::string_view query, std::size_t k = 10)
{
    auto terms = tokenize(query, index.tokenizer);
    if (terms.empty()) throw EmptyQuery("query has no terms after tokenization");
    std::map<std::string, std::size_t> qtf;
    for (auto const& t : terms) ++qtf[t];

    std::unordered_map<std::uint32_t, double> acc;
    for (auto const& [term, weight] : qtf) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        double idf = index.idf(it->second.size());
        for (auto const& p : it->second)
            acc[p.doc] += static_cast<double>(weight) * idf * index.term_weight(p.tf, index.doc_lengths[p.doc]);
    }
    std::vector<ScoredDoc> out;
    out.reserve(acc.size());
    for (auto const& [doc, score] : acc)
        if (score > 0.0) out.push_back({index.doc_ids[doc], score});
    std::size_t n = std::min(k, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), ranks_before);
    out.resize(n);
    return out;
}

// Snapshot layout (little-endian), see docs/formats.md:
//   "SQI1" u32 version=1 f64 k1 f64 b
//   u8 lowercase u8 stemming u32 n_stop {str}*
//   u64 n_docs {str doc_id, u32 length}*
//   u64 n_terms {str term, u64 n_postings {u32 doc, u32 tf}*}*
// where str = u32 byte length + UTF-8 bytes.
inline constexpr std::uint32_t sparse_format_version = 1;

inline std::string serialize_sparse(const SparseIndex& idx)
{
    io::binary_writer w;
    w.magic("SQI1");
    w.u32(sparse_format_version);
    w.f64(idx.bm25_k1);
    w.f64(idx.bm25_b);
    w.u8(idx.tokenizer.lowercase ? 1 : 0);
    w.u8(idx.tokenizer.stemming ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(idx.tokenizer.stopword_list.size()));
    for (auto const& s : idx.tokenizer.stopword_list) w.str(s);
    w.u64(idx.n_docs);
    for (std::size_t i = 0; i < idx.n_docs; ++i) {
        w.str(idx.doc_ids[i]);
        w.u32(idx.doc_lengths[i]);
    }
    w.u64(idx.postings.size());
    for (auto const& [term, list] : idx.postings) {
        w.str(term);
        w.u64(list.size());
        for (auto const& p : list) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    return w.bytes();
}

inline SparseIndex deserialize_sparse(std::string bytes)
{
    io::binary_reader r(std::move(bytes));
    r.expect_magic("SQI1");
    if (auto v = r.u32(); v != sparse_format_version)
        throw BadMagic("unsupported SQI1 version " + std::to_string(v));
    SparseIndex idx;
    idx.bm25_k1 = r.f64();
    idx.bm25_b = r.f64();
    idx.tokenizer.lowercase = r.u8() != 0;
    idx.tokenizer.stemming = r.u8() != 0;
    idx.tokenizer.stopword_list.clear();
    for (auto n = r.u32(); n > 0; --n) idx.tokenizer.stopword_list.insert(r.str());
    idx.n_docs = r.u64();
    r.need(idx.n_docs * 8);
    double total = 0.0;
    for (std::size_t i = 0; i < idx.n_docs; ++i) {
        idx.doc_ids.push_back(r.str());
        idx.doc_lengths.push_back(r.u32());
        total += idx.doc_lengths.back();
    }
    idx.avg_doc_length = idx.n_docs ? total / static_cast<double>(idx.n_docs) : 0.0;
    for (auto n_terms = r.u64(); n_terms > 0; --n_terms) {
        auto term = r.str();
        auto n = r.u64();
        r.need(n * 8);
        std::vector<Posting> list(n);
        for (auto& p : list) {
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= idx.n_docs) throw TruncatedFile("posting references unknown document");
        }
        idx.postings.emplace(std::move(term), std::move(list));
    }
    if (!r.at_end()) throw BadMagic("trailing bytes after SQI1 payload");
    return idx;
}

inline void save_sparse(const std::string& path, const SparseIndex& idx)
{
    io::write_file(path, serialize_sparse(idx));
}

inline SparseIndex load_sparse(const std::string& path) { return deserialize_sparse(io::read_file(path)); }

}  // namespace sq
