#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sq/recommender.hpp"
#include "sq/synthetic.hpp"

using namespace sq;
using sq::test::make_record;

namespace {

QuoteRecord keyword_record()
{
    auto r = make_record("k1", "Dr. Lee", "http://dbpedia.org/resource/Anna_Lee", "the second wave is coming");
    r.keywords = {"covid", "vaccine", "fda", "trial", "efficacy", "approval"};
    r.title = "Dr. Lee warns of second wave";
    return r;
}

IndexSet sparse_only(Corpus corpus, DocMode mode = DocMode::context)
{
    IndexSet idx;
    auto catalog = std::make_shared<DocumentCatalog>(std::move(corpus), DocSpec{mode});
    idx.sparse = std::make_shared<SparseIndex>(build_sparse(catalog->documents()));
    idx.lm = std::make_shared<LmStats>(build_lm_stats(catalog->attributed_documents()));
    idx.catalog = catalog;
    return idx;
}

}  // namespace

TEST(FormQuery, KeywordsCappedAtW)
{
    QuerySpec spec{QueryMode::keywords, 5, true};
    EXPECT_EQ(form_query(keyword_record(), spec), "covid vaccine fda trial efficacy");
    spec.w.reset();
    EXPECT_EQ(form_query(keyword_record(), spec), "covid vaccine fda trial efficacy approval");
}

TEST(FormQuery, TitleWithSourceStripped)
{
    QuerySpec spec{QueryMode::title, std::nullopt, true};
    EXPECT_EQ(form_query(keyword_record(), spec), "warns of second wave");
    spec.strip_source = false;
    EXPECT_EQ(form_query(keyword_record(), spec), "Dr. Lee warns of second wave");
}

TEST(FormQuery, EntityNameTokensStrippedToo)
{
    auto r = keyword_record();
    r.summary_first_sentence = "Anna LEE's team expects a second wave.";
    QuerySpec spec{QueryMode::summary, std::nullopt, true};
    EXPECT_EQ(form_query(r, spec), "LEE's team expects a second wave.");
    r.summary_first_sentence = "Anna Lee, the expert, expects a second wave.";
    EXPECT_EQ(form_query(r, spec), "the expert, expects a second wave.");
}

TEST(FormQuery, Errors)
{
    auto r = keyword_record();
    r.title = "";
    EXPECT_THROW(form_query(r, {QueryMode::title, std::nullopt, true}), EmptyField);
    r.keywords.clear();
    EXPECT_THROW(form_query(r, {QueryMode::keywords, std::nullopt, true}), EmptyField);
    EXPECT_THROW(form_query(keyword_record(), {QueryMode::keywords, 0, true}), ParameterError);
}

TEST(FormDocument, Modes)
{
    auto r = make_record("d1", "Lee", "E", "prices will rise again");
    r.right_sentence = "Markets fell.";
    EXPECT_EQ(form_document(r, {DocMode::sentence}).text, r.main_sentence);
    EXPECT_EQ(form_document(r, {DocMode::context}).text, r.main_sentence + " Markets fell.");
    r.left_sentence = "Earlier news.";
    auto d = form_document(r, {DocMode::context});
    EXPECT_EQ(d.text, "Earlier news. " + r.main_sentence + " Markets fell.");
    EXPECT_EQ(d.doc_id, "d1");
}

TEST(ExpertsFromDocuments, Examples)
{
    Corpus c;
    c.records = {make_record("d1", "Ann", "A", "one two three four"), make_record("d2", "Bob", "B", "one two three five"),
                 make_record("d3", "Ann", "A", "one two three six")};
    DocumentCatalog cat(c, {DocMode::sentence});
    auto r = experts_from_documents({{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}}, cat);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0], (ExpertScore{"A", 3.0}));
    EXPECT_EQ(r[1], (ExpertScore{"B", 2.0}));
    EXPECT_EQ(experts_from_documents({{"d3", 5.0}, {"d1", 4.0}}, cat).size(), 1u);
    EXPECT_TRUE(experts_from_documents({}, cat).empty());
    EXPECT_THROW(experts_from_documents({{"nope", 1.0}}, cat), UnknownDocId);
}

TEST(ExpertsFromDocuments, OrderFollowsBestDocument)
{
    Corpus c;
    for (int i = 0; i < 40; ++i)
        c.records.push_back(make_record("d" + std::to_string(i), "Ann", "E" + std::to_string(i % 7), "one two three four"));
    DocumentCatalog cat(c, {DocMode::sentence});
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        std::vector<ScoredDoc> docs;
        for (int i = 0; i < 10; ++i) docs.push_back({"d" + std::to_string(rng() % 40), 10.0 - i});
        auto r = experts_from_documents(docs, cat);
        EXPECT_LE(r.size(), docs.size());
        std::vector<std::string> expected;
        for (auto const& d : docs) {
            auto e = cat.at(d.doc_id).source_entity;
            if (std::find(expected.begin(), expected.end(), e) == expected.end()) expected.push_back(e);
        }
        ASSERT_EQ(r.size(), expected.size());
        for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].expert, expected[i]);
    }
}

TEST(Recommend, SingleDocumentCorpus)
{
    Corpus c;
    c.records = {make_record("only", "Ann", "E1", "vaccines are safe today")};
    auto idx = sparse_only(c);
    auto q = make_record("q", "Bob", "E2", "vaccines are really safe");
    q.keywords = {"vaccines", "safe"};
    auto r = recommend(idx, q, Method::dr_sparse, {});
    ASSERT_EQ(r.experts.size(), 1u);
    EXPECT_EQ(r.experts[0].expert, "E1");

    auto store = std::make_shared<VectorStore>(make_store(2, {1, 0}, {"only"}));
    idx.vectors = store;
    idx.hnsw = std::make_shared<HnswIndex>(build_hnsw(store));
    std::vector<float> qv{0.6f, 0.8f};
    EXPECT_EQ(recommend(idx, q, Method::dr_flat, {}, 10, qv).experts.at(0).expert, "E1");
    EXPECT_EQ(recommend(idx, q, Method::dr_hnsw, {}, 10, qv).experts.at(0).expert, "E1");
    EXPECT_THROW(recommend(idx, q, Method::dr_flat, {}), EmptyQuery);
}

TEST(Recommend, MissingIndex)
{
    Corpus c;
    c.records = {make_record("only", "Ann", "E1", "vaccines are safe today")};
    auto idx = sparse_only(c);
    auto q = make_record("q", "Bob", "E2", "vaccines are really safe");
    std::vector<float> qv{1, 0};
    EXPECT_THROW(recommend(idx, q, Method::dr_flat, {}, 10, qv), IndexMissing);
    EXPECT_THROW(recommend(idx, q, Method::dr_hnsw, {}, 10, qv), IndexMissing);
    idx.lm.reset();
    EXPECT_THROW(recommend(idx, q, Method::er_candidate, {}), IndexMissing);
}

TEST(Recommend, WordCapOnlyForExpertRetrieval)
{
    Corpus c;
    c.records = {make_record("a", "Ann", "EA", "alpha bravo charlie delta"),
                 make_record("b", "Bob", "EB", "zulu yankee xray whiskey")};
    auto idx = sparse_only(c, DocMode::sentence);
    auto q = make_record("q", "Cat", "EC", "nothing to see here");
    q.keywords = {"alpha", "zulu", "zulu"};
    QuerySpec spec{QueryMode::keywords, 1, true};
    auto er = recommend(idx, q, Method::er_candidate, spec);
    ASSERT_FALSE(er.experts.empty());
    EXPECT_EQ(er.experts[0].expert, "EA");
    auto dr = recommend(idx, q, Method::dr_sparse, spec);
    ASSERT_EQ(dr.experts.size(), 2u);
    EXPECT_EQ(dr.experts[0].expert, "EB");
}

TEST(Recommend, PlantedQueriesRankTrueExpertFirst)
{
    auto ds = synthetic::generate();
    auto idx = sparse_only(ds.train, DocMode::sentence);
    std::size_t hits = 0;
    // The planted signal is the article keywords: topic terms plus the expert's own terms.
    for (auto const& r : ds.test.records) {
        auto res = recommend(idx, r, Method::dr_sparse, QuerySpec{});
        if (!res.experts.empty() && res.experts[0].expert == r.source_entity) ++hits;
    }
    double rate = static_cast<double>(hits) / static_cast<double>(ds.test.size());
    EXPECT_GE(rate, 0.9) << hits << " of " << ds.test.size();
}

TEST(Recommend, Deterministic)
{
    auto ds = synthetic::generate({.n_topics = 4, .experts_per_topic = 5});
    auto a = sparse_only(ds.train);
    auto b = sparse_only(ds.train);
    for (auto const& r : ds.test.records)
        for (auto m : {Method::dr_sparse, Method::er_candidate, Method::er_document}) {
            QuerySpec spec{QueryMode::keywords, 5, true};
            EXPECT_EQ(recommend(a, r, m, spec).experts, recommend(b, r, m, spec).experts);
        }
}

TEST(RunLines, Format)
{
    std::ostringstream out;
    write_run_lines(out, "q1", {{"A", 2.5}, {"B", 1.0}}, "bm25");
    EXPECT_EQ(out.str(), "q1 A 1 2.5 bm25\nq1 B 2 1 bm25\n");
}

TEST(Parsing, NamesRoundTrip)
{
    for (auto m : {Method::dr_sparse, Method::dr_flat, Method::dr_hnsw, Method::er_candidate, Method::er_document})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_FALSE(parse_method("bm99"));
    EXPECT_EQ(parse_query_mode("keyword"), QueryMode::keywords);
    EXPECT_EQ(parse_doc_mode("quote"), DocMode::sentence);
    EXPECT_EQ(entity_display_name("http://dbpedia.org/resource/Anthony_Fauci"), "Anthony Fauci");
}
