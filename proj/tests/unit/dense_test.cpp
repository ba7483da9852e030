#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "sq/dense.hpp"

using namespace sq;

namespace {

std::shared_ptr<VectorStore> random_store(std::size_t n, std::uint32_t dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    std::vector<float> v(n * dim);
    for (auto& x : v) x = g(rng);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
    auto s = std::make_shared<VectorStore>(make_store(dim, std::move(v), std::move(ids)));
    normalize_store(*s);
    return s;
}

std::vector<float> random_unit(std::mt19937_64& rng, std::uint32_t dim)
{
    std::normal_distribution<float> g;
    std::vector<float> q(dim);
    for (auto& x : q) x = g(rng);
    l2_normalize(q);
    return q;
}

}  // namespace

TEST(VectorFile, LoadsTwoByFour)
{
    auto s = load_vectors(test::data_path("two_by_four.sqv"));
    EXPECT_EQ(s.dim, 4u);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.doc_ids, (std::vector<std::string>{"r1", "r2"}));
    EXPECT_EQ(s.model_id, "fixture-model");
    EXPECT_EQ(s.vectors, (std::vector<float>{1, 2, 3, 4, 0.5f, -1, 0, 2}));
}

TEST(VectorFile, RowNumbersWithoutNameTable)
{
    auto s = load_vectors(test::data_path("no_names.sqv"));
    EXPECT_EQ(s.dim, 2u);
    EXPECT_EQ(s.doc_ids, (std::vector<std::string>{"0", "1", "2"}));
    EXPECT_TRUE(s.model_id.empty());
}

TEST(VectorFile, Errors)
{
    EXPECT_THROW(load_vectors(test::data_path("truncated.sqv")), TruncatedFile);
    EXPECT_THROW(load_vectors(test::data_path("bad_magic.sqv")), BadMagic);
    EXPECT_THROW(load_vectors(test::data_path("zero_row.sqv"), {true, std::nullopt}), NormalizationError);
    EXPECT_NO_THROW(load_vectors(test::data_path("zero_row.sqv")));
    EXPECT_THROW(load_vectors(test::data_path("two_by_four.sqv"), {false, 8u}), DimMismatch);
    EXPECT_THROW(load_vectors(test::data_path("does_not_exist.sqv")), IoError);
}

TEST(VectorFile, NormalizedRowsHaveUnitNorm)
{
    auto s = load_vectors(test::data_path("two_by_four.sqv"), {true, 4u});
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(inner_product(s.row(i), s.row(i)), 1.0, 1e-6);
}

TEST(VectorFile, SerializeRoundTrip)
{
    auto s = load_vectors(test::data_path("unit_rows.sqv"));
    EXPECT_EQ(s.size(), 16u);
    EXPECT_EQ(s.model_id, "lcg");
    auto back = deserialize_vectors(serialize_vectors(s));
    EXPECT_EQ(back.vectors, s.vectors);
    EXPECT_EQ(back.doc_ids, s.doc_ids);
    EXPECT_EQ(back.model_id, s.model_id);
}

TEST(SearchFlat, DominantCoordinate)
{
    auto s = make_store(2, {1, 0, 0, 1}, {"e1", "e2"});
    std::vector<float> q{0.9f, 0.1f};
    auto r = search_flat(s, q, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].doc_id, "e1");
    EXPECT_EQ(search_flat(s, q, 10).size(), 2u);
    std::vector<float> bad{1, 0, 0};
    EXPECT_THROW(search_flat(s, bad, 1), DimMismatch);
}

TEST(SearchFlat, IdentityQuery)
{
    auto s = load_vectors(test::data_path("unit_rows.sqv"), {true, std::nullopt});
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::vector<float> q(s.row(i).begin(), s.row(i).end());
        auto r = search_flat(s, q, 3);
        EXPECT_EQ(r[0].doc_id, s.doc_ids[i]);
        EXPECT_NEAR(r[0].score, 1.0, 1e-6);
    }
}

TEST(SearchFlat, EqualsNaiveScan)
{
    auto s = random_store(300, 12, 4);
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        auto q = random_unit(rng, 12);
        std::vector<std::pair<double, std::string>> naive;
        for (std::size_t i = 0; i < s->size(); ++i) {
            double d = 0;
            for (std::size_t j = 0; j < 12; ++j) d += static_cast<double>(s->vectors[i * 12 + j]) * q[j];
            naive.push_back({-d, s->doc_ids[i]});
        }
        std::sort(naive.begin(), naive.end());
        auto r = search_flat(*s, q, 15);
        ASSERT_EQ(r.size(), 15u);
        for (std::size_t i = 0; i < 15; ++i) {
            EXPECT_EQ(r[i].doc_id, naive[i].second);
            EXPECT_NEAR(r[i].score, -naive[i].first, 1e-9);
        }
    }
}

TEST(Hnsw, SingleNode)
{
    auto s = std::make_shared<VectorStore>(make_store(3, {0, 1, 0}, {"only"}));
    auto h = build_hnsw(s);
    EXPECT_EQ(h.size(), 1u);
    EXPECT_EQ(h.entry_point(), 0u);
    std::vector<float> q{1, 0, 0};
    auto r = search_hnsw(h, q, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].doc_id, "only");
}

TEST(Hnsw, ParameterErrors)
{
    auto s = random_store(10, 4, 1);
    EXPECT_THROW(build_hnsw(s, {0, 200, 42}), ParameterError);
    EXPECT_THROW(build_hnsw(std::make_shared<VectorStore>()), EmptyStore);
    auto h = build_hnsw(s);
    std::vector<float> q{1, 0, 0, 0};
    EXPECT_THROW(search_hnsw(h, q, 10, 5), ParameterError);
    EXPECT_THROW(search_hnsw(h, q, 0), ParameterError);
    std::vector<float> bad{1, 0};
    EXPECT_THROW(search_hnsw(h, bad, 1), DimMismatch);
}

TEST(Hnsw, DeterministicAdjacency)
{
    auto s = random_store(1000, 64, 2);
    auto a = build_hnsw(s, {16, 200, 7});
    auto b = build_hnsw(s, {16, 200, 7});
    EXPECT_TRUE(a == b);
}

TEST(Hnsw, GraphInvariants)
{
    auto s = random_store(800, 16, 3);
    auto h = build_hnsw(s);
    for (HnswIndex::node_id n = 0; n < h.size(); ++n) {
        ASSERT_LE(h.level_of(n), h.max_level());
        for (int l = 0; l <= h.level_of(n); ++l) {
            auto const& nb = h.neighbours(n, l);
            EXPECT_LE(nb.size(), h.max_degree(l));
            std::set<HnswIndex::node_id> uniq(nb.begin(), nb.end());
            EXPECT_EQ(uniq.size(), nb.size());
            EXPECT_FALSE(uniq.count(n));
            for (auto m : nb) EXPECT_GE(h.level_of(m), l);
        }
    }
    EXPECT_EQ(h.level_of(h.entry_point()), h.max_level());
}

TEST(Hnsw, ResultsAreDistinctStoreIds)
{
    auto s = random_store(500, 8, 5);
    auto h = build_hnsw(s);
    std::set<std::string> ids(s->doc_ids.begin(), s->doc_ids.end());
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        auto q = random_unit(rng, 8);
        auto r = search_hnsw(h, q, 20, 40);
        EXPECT_EQ(r.size(), 20u);
        std::set<std::string> seen;
        for (auto const& d : r) {
            EXPECT_TRUE(ids.count(d.doc_id));
            EXPECT_TRUE(seen.insert(d.doc_id).second);
        }
        EXPECT_TRUE(std::is_sorted(r.begin(), r.end(), ranks_before));
    }
}

TEST(Hnsw, RecallAgainstFlat)
{
    auto s = random_store(3000, 32, 9);
    auto h = build_hnsw(s);
    std::mt19937_64 rng(10);
    double recall = 0;
    const int n_queries = 100;
    for (int t = 0; t < n_queries; ++t) {
        auto q = random_unit(rng, 32);
        auto exact = search_flat(*s, q, 10);
        auto approx = search_hnsw(h, q, 10, 100);
        std::set<std::string> truth;
        for (auto const& d : exact) truth.insert(d.doc_id);
        int hit = 0;
        for (auto const& d : approx) hit += truth.count(d.doc_id) ? 1 : 0;
        recall += hit / 10.0;
    }
    EXPECT_GE(recall / n_queries, 0.9);
}
