#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sq/binary_io.hpp"
#include "sq/error.hpp"
#include "sq/sparse.hpp"

namespace sq {

/// Row-major n x dim float32 matrix with one identifier per row.
struct VectorStore {
    std::uint32_t dim = 0;
    std::vector<float> vectors;
    std::vector<std::string> doc_ids;
    bool normalized = false;
    std::string model_id;

    std::size_t size() const { return doc_ids.size(); }

    std::span<const float> row(std::size_t i) const
    {
        return {vectors.data() + i * dim, static_cast<std::size_t>(dim)};
    }
};

inline double inner_product(std::span<const float> a, std::span<const float> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

inline void l2_normalize(std::span<float> v)
{
    double norm = std::sqrt(inner_product(v, v));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NormalizationError("cannot normalize a zero or non-finite vector");
    for (auto& x : v) x = static_cast<float>(x / norm);
}

inline void normalize_store(VectorStore& store)
{
    for (std::size_t i = 0; i < store.size(); ++i)
        l2_normalize({store.vectors.data() + i * store.dim, static_cast<std::size_t>(store.dim)});
    store.normalized = true;
}

inline VectorStore make_store(std::uint32_t dim, std::vector<float> vectors, std::vector<std::string> doc_ids,
                              bool normalize = false)
{
    if (dim == 0) throw DimMismatch("dimension must be positive");
    if (vectors.size() != static_cast<std::size_t>(dim) * doc_ids.size())
        throw DimMismatch("vector payload does not match dim x count");
    VectorStore s{dim, std::move(vectors), std::move(doc_ids), false, {}};
    if (normalize) normalize_store(s);
    return s;
}

// Vector file layout (little-endian), see docs/formats.md:
//   "SQV1" u32 dim u64 count u64 name_table_offset (0 = no table)
//   f32 vectors[count * dim]
//   name table: str model_id, then count x str doc_id
// When the table is absent doc ids are the decimal row numbers.
inline std::string serialize_vectors(const VectorStore& s)
{
    io::binary_writer w;
    w.magic("SQV1");
    w.u32(s.dim);
    w.u64(s.size());
    auto offset_pos = w.size();
    w.u64(0);
    for (float x : s.vectors) w.f32(x);
    w.patch_u64(offset_pos, w.size());
    w.str(s.model_id);
    for (auto const& id : s.doc_ids) w.str(id);
    return w.bytes();
}

inline void save_vectors(const std::string& path, const VectorStore& s) { io::write_file(path, serialize_vectors(s)); }

struct VectorLoadOptions {
    bool normalize = false;
    std::optional<std::uint32_t> expected_dim;
};

inline VectorStore deserialize_vectors(std::string bytes, const VectorLoadOptions& opts = {})
{
    io::binary_reader r(std::move(bytes));
    r.expect_magic("SQV1");
    VectorStore s;
    s.dim = r.u32();
    auto count = r.u64();
    auto table = r.u64();
    if (s.dim == 0) throw DimMismatch("header declares dim = 0");
    if (opts.expected_dim && *opts.expected_dim != s.dim)
        throw DimMismatch("file dim " + std::to_string(s.dim) + " != expected " + std::to_string(*opts.expected_dim));
    std::size_t payload = static_cast<std::size_t>(count) * s.dim;
    if (count != 0 && payload / count != s.dim) throw TruncatedFile("header count overflows");
    r.need(payload * 4);
    s.vectors.resize(payload);
    for (auto& x : s.vectors) x = r.f32();
    if (table != 0) {
        if (table < r.position()) throw DimMismatch("name table overlaps the vector payload");
        r.seek(table);
        s.model_id = r.str();
        s.doc_ids.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) s.doc_ids.push_back(r.str());
    } else {
        for (std::uint64_t i = 0; i < count; ++i) s.doc_ids.push_back(std::to_string(i));
    }
    if (opts.normalize) normalize_store(s);
    return s;
}

inline VectorStore load_vectors(const std::string& path, const VectorLoadOptions& opts = {})
{
    return deserialize_vectors(io::read_file(path), opts);
}

/// Exact top-k by inner product; descending similarity, ascending doc_id on ties.
inline std::vector<ScoredDoc> search_flat(const VectorStore& store, std::span<const float> query, std::size_t k)
{
    if (query.size() != store.dim)
        throw DimMismatch("query dim " + std::to_string(query.size()) + " != store dim " + std::to_string(store.dim));
    std::vector<ScoredDoc> all;
    all.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) all.push_back({store.doc_ids[i], inner_product(store.row(i), query)});
    std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), ranks_before);
    all.resize(n);
    return all;
}

struct HnswParams {
    std::size_t M = 16;
    std::size_t ef_construction = 200;
    std::uint64_t seed = 42;
};

/// Hierarchical navigable small-world graph over a vector store, using
/// inner-product similarity.
class HnswIndex {
  public:
    using node_id = std::uint32_t;

    HnswIndex(std::shared_ptr<const VectorStore> store, HnswParams params)
        : m_store(std::move(store)), m_params(params)
    {
        if (!m_store) throw EmptyStore("no vector store");
        if (m_params.M < 2) throw ParameterError("M must be at least 2");
        if (m_params.ef_construction < 1) throw ParameterError("ef_construction must be positive");
        if (m_store->size() == 0) throw EmptyStore("cannot build an index over an empty store");
        m_level_mult = 1.0 / std::log(static_cast<double>(m_params.M));
        std::mt19937_64 rng(m_params.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        m_links.resize(m_store->size());
        m_visited.assign(m_store->size(), 0);
        for (node_id n = 0; n < m_store->size(); ++n) {
            double u = 1.0 - unif(rng);  // (0, 1]
            auto level = static_cast<int>(std::floor(-std::log(u) * m_level_mult));
            insert(n, level);
        }
        m_visited.clear();
        m_visited.shrink_to_fit();
    }

    const VectorStore& store() const { return *m_store; }
    std::shared_ptr<const VectorStore> store_ptr() const { return m_store; }
    const HnswParams& params() const { return m_params; }
    node_id entry_point() const { return m_entry; }
    int max_level() const { return m_max_level; }
    std::size_t size() const { return m_links.size(); }
    int level_of(node_id n) const { return static_cast<int>(m_links[n].size()) - 1; }
    const std::vector<node_id>& neighbours(node_id n, int level) const { return m_links[n][level]; }
    std::size_t max_degree(int level) const { return level == 0 ? 2 * m_params.M : m_params.M; }

    bool operator==(const HnswIndex& o) const { return m_entry == o.m_entry && m_links == o.m_links; }

    /// Greedy descent through the upper layers, then a best-first beam of
    /// width ef_search on layer 0.
    std::vector<ScoredDoc> search(std::span<const float> query, std::size_t k, std::size_t ef_search = 100) const
    {
        if (query.size() != m_store->dim)
            throw DimMismatch("query dim " + std::to_string(query.size()) + " != store dim " +
                              std::to_string(m_store->dim));
        if (k < 1) throw ParameterError("k must be at least 1");
        if (ef_search < k) throw ParameterError("ef_search must be >= k");
        std::vector<std::uint32_t> visited(m_links.size(), 0);
        std::uint32_t tag = 0;
        node_id cur = m_entry;
        double cur_d = distance(query, cur);
        for (int level = m_max_level; level > 0; --level) cur = greedy(query, cur, cur_d, level);
        auto found = search_layer(query, {{cur_d, cur}}, ef_search, 0, visited, ++tag);
        std::vector<ScoredDoc> out;
        out.reserve(found.size());
        for (auto const& [d, n] : found) out.push_back({m_store->doc_ids[n], inner_product(m_store->row(n), query)});
        std::sort(out.begin(), out.end(), ranks_before);
        if (out.size() > k) out.resize(k);
        return out;
    }

  private:
    using candidate = std::pair<double, node_id>;  // (distance, node)

    double distance(std::span<const float> q, node_id n) const { return -inner_product(m_store->row(n), q); }
    double distance(node_id a, node_id b) const { return -inner_product(m_store->row(a), m_store->row(b)); }

    node_id greedy(std::span<const float> q, node_id cur, double& cur_d, int level) const
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto nb : m_links[cur][level]) {
                double d = distance(q, nb);
                if (d < cur_d || (d == cur_d && nb < cur)) {
                    cur_d = d;
                    cur = nb;
                    changed = true;
                }
            }
        }
        return cur;
    }

    /// Returns up to ef nearest nodes found on `level`, ascending by distance.
    std::vector<candidate> search_layer(std::span<const float> q, const std::vector<candidate>& entries,
                                        std::size_t ef, int level, std::vector<std::uint32_t>& visited,
                                        std::uint32_t tag) const
    {
        std::priority_queue<candidate, std::vector<candidate>, std::greater<>> frontier;
        std::priority_queue<candidate> best;  // max-heap: worst on top
        for (auto const& e : entries) {
            visited[e.second] = tag;
            frontier.push(e);
            best.push(e);
        }
        while (best.size() > ef) best.pop();
        while (!frontier.empty()) {
            auto [d, n] = frontier.top();
            if (d > best.top().first && best.size() >= ef) break;
            frontier.pop();
            for (auto nb : m_links[n][level]) {
                if (visited[nb] == tag) continue;
                visited[nb] = tag;
                double dn = distance(q, nb);
                if (best.size() < ef || candidate{dn, nb} < best.top()) {
                    frontier.push({dn, nb});
                    best.push({dn, nb});
                    if (best.size() > ef) best.pop();
                }
            }
        }
        std::vector<candidate> out;
        out.reserve(best.size());
        while (!best.empty()) {
            out.push_back(best.top());
            best.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// than to every neighbour already kept. Input ascending by distance.
    std::vector<node_id> select_neighbours(const std::vector<candidate>& sorted, std::size_t m) const
    {
        std::vector<node_id> kept;
        for (auto const& [d, c] : sorted) {
            if (kept.size() >= m) break;
            bool good = true;
            for (auto s : kept) {
                if (distance(c, s) < d) {
                    good = false;
                    break;
                }
            }
            if (good) kept.push_back(c);
        }
        return kept;
    }

    void connect(node_id from, node_id to, int level)
    {
        auto& list = m_links[from][level];
        list.push_back(to);
        auto cap = max_degree(level);
        if (list.size() <= cap) return;
        std::vector<candidate> cands;
        cands.reserve(list.size());
        for (auto nb : list) cands.push_back({distance(from, nb), nb});
        std::sort(cands.begin(), cands.end());
        list = select_neighbours(cands, cap);
    }

    void insert(node_id n, int level)
    {
        m_links[n].assign(static_cast<std::size_t>(level) + 1, {});
        if (n == 0) {
            m_entry = 0;
            m_max_level = level;
            return;
        }
        auto q = m_store->row(n);
        node_id cur = m_entry;
        double cur_d = distance(q, cur);
        for (int l = m_max_level; l > level; --l) cur = greedy(q, cur, cur_d, l);
        std::vector<candidate> entries{{cur_d, cur}};
        for (int l = std::min(level, m_max_level); l >= 0; --l) {
            auto found = search_layer(q, entries, m_params.ef_construction, l, m_visited, ++m_tag);
            auto chosen = select_neighbours(found, m_params.M);
            for (auto c : chosen) {
                m_links[n][l].push_back(c);
                connect(c, n, l);
            }
            entries = std::move(found);
        }
        if (level > m_max_level) {
            m_max_level = level;
            m_entry = n;
        }
    }

    std::shared_ptr<const VectorStore> m_store;
    HnswParams m_params;
    double m_level_mult = 0.0;
    node_id m_entry = 0;
    int m_max_level = 0;
    // m_links[node][level] = neighbour ids
    std::vector<std::vector<std::vector<node_id>>> m_links;
    std::vector<std::uint32_t> m_visited;
    std::uint32_t m_tag = 0;
};

inline HnswIndex build_hnsw(std::shared_ptr<const VectorStore> store, HnswParams params = {})
{
    return HnswIndex(std::move(store), params);
}

inline std::vector<ScoredDoc> search_hnsw(const HnswIndex& index, std::span<const float> query, std::size_t k,
                                          std::size_t ef_search = 100)
{
    return index.search(query, k, ef_search);
}

}  // namespace sq
