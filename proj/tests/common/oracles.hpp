#pragma once

// Independent reference implementations used as test oracles. They work from
// raw token lists and the textbook formulas, sharing no code with the library
// beyond the tokenizer.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/pipeline.hpp"

namespace sq::oracle {

// ---- BM25 ----------------------------------------------------------------------

/// Score of every document for a bag-of-words query, evaluated term by term.
inline std::vector<double> bm25_scores(const std::vector<std::vector<std::string>>& docs,
                                       const std::vector<std::string>& query, double k1 = 0.9, double b = 0.4)
{
    const double n = static_cast<double>(docs.size());
    double avg = 0.0;
    for (auto const& d : docs) avg += static_cast<double>(d.size());
    avg /= n;
    std::vector<double> out(docs.size(), 0.0);
    for (auto const& t : query) {
        double df = 0.0;
        for (auto const& d : docs) df += std::count(d.begin(), d.end(), t) > 0 ? 1.0 : 0.0;
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
            double len = static_cast<double>(docs[i].size());
            if (tf > 0) out[i] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
        }
    }
    return out;
}

// ---- expert language models -----------------------------------------------------

struct LmCorpus {
    std::vector<std::vector<std::string>> docs;
    std::vector<std::string> expert_of;  // per doc
};

struct LmMoments {
    std::map<std::string, double> p_background;
    double avg_len = 0.0;
    std::set<std::string> experts;
};

inline LmMoments moments(const LmCorpus& c)
{
    LmMoments m;
    double total = 0.0;
    std::map<std::string, double> counts;
    for (auto const& d : c.docs) {
        total += static_cast<double>(d.size());
        for (auto const& t : d) counts[t] += 1.0;
    }
    for (auto const& [t, n] : counts) m.p_background[t] = n / total;
    m.avg_len = total / static_cast<double>(c.docs.size());
    m.experts.insert(c.expert_of.begin(), c.expert_of.end());
    return m;
}

inline double p_doc(const std::vector<std::string>& d, const std::string& t)
{
    if (d.empty()) return 0.0;
    return static_cast<double>(std::count(d.begin(), d.end(), t)) / static_cast<double>(d.size());
}

inline double p_bg(const LmMoments& m, const std::string& t)
{
    auto it = m.p_background.find(t);
    return it == m.p_background.end() ? 0.0 : it->second;
}

/// Product over query tokens (repeats multiply again) of the smoothed
/// candidate model; returned as a plain probability.
inline double candidate_probability(const LmCorpus& c, const std::vector<std::string>& query, const std::string& e)
{
    auto m = moments(c);
    double assoc_total = static_cast<double>(c.docs.size());  // one expert per document
    double beta = assoc_total * m.avg_len / static_cast<double>(m.experts.size());
    double n_e = static_cast<double>(std::count(c.expert_of.begin(), c.expert_of.end(), e));
    double lambda = beta / (beta + n_e);
    double prod = 1.0;
    for (auto const& t : query) {
        double sum = 0.0;
        for (std::size_t i = 0; i < c.docs.size(); ++i)
            if (c.expert_of[i] == e) sum += p_doc(c.docs[i], t);
        prod *= (1.0 - lambda) * sum + lambda * p_bg(m, t);
    }
    return prod;
}

inline double document_probability(const LmCorpus& c, const std::vector<std::string>& query, const std::string& e)
{
    auto m = moments(c);
    double total = 0.0;
    for (std::size_t i = 0; i < c.docs.size(); ++i) {
        if (c.expert_of[i] != e) continue;
        double lambda = m.avg_len / (m.avg_len + static_cast<double>(c.docs[i].size()));
        double prod = 1.0;
        for (auto const& t : query) prod *= (1.0 - lambda) * p_doc(c.docs[i], t) + lambda * p_bg(m, t);
        total += prod;
    }
    return total;
}

inline LmCorpus random_lm_corpus(std::mt19937_64& rng, std::size_t max_docs = 20, std::size_t max_vocab = 15)
{
    LmCorpus c;
    auto n_docs = 1 + rng() % max_docs;
    auto vocab = 1 + rng() % max_vocab;
    auto n_experts = 1 + rng() % std::max<std::size_t>(1, n_docs / 2 + 1);
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::vector<std::string> doc;
        auto len = 1 + rng() % 12;
        for (std::size_t i = 0; i < len; ++i) doc.push_back("t" + std::to_string(rng() % vocab));
        c.docs.push_back(std::move(doc));
        c.expert_of.push_back("e" + std::to_string(rng() % n_experts));
    }
    return c;
}

// ---- ranking metrics -----------------------------------------------------------------

/// Single-relevant AP and NDCG straight from the rank of the hit.
struct SingleRelevantScores {
    double ap = 0.0, ndcg5 = 0.0, ndcg10 = 0.0;
};

inline SingleRelevantScores score_single_relevant(const std::vector<std::string>& ranked, const std::string& truth,
                                                  std::size_t depth = 10)
{
    SingleRelevantScores s;
    for (std::size_t i = 0; i < std::min(ranked.size(), depth); ++i) {
        if (ranked[i] != truth) continue;
        double rank = static_cast<double>(i + 1);
        s.ap = 1.0 / rank;
        double gain = rank < 2.0 ? 1.0 : 1.0 / std::log2(rank);
        if (rank <= 5) s.ndcg5 = gain;
        if (rank <= 10) s.ndcg10 = gain;
        break;
    }
    return s;
}

// ---- pipeline generators -------------------------------------------------------------

inline std::string random_words(std::mt19937_64& rng, std::size_t n)
{
    static const char* pool[] = {"vaccine", "market", "policy", "said", "risk", "growth", "virus", "trade",
                                 "rates", "school", "health", "jobs", "study", "court", "energy"};
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += std::string(i ? " " : "") + pool[rng() % std::size(pool)];
    return out;
}

/// Records spread over the train period and the valid/test period of the
/// default boundaries.
inline std::vector<QuoteRecord> random_split_records(std::mt19937_64& rng, std::size_t n)
{
    auto b = SplitBoundaries::release_default();
    auto train_start = b.train_end - std::chrono::days(120);
    std::vector<QuoteRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        QuoteRecord r;
        r.record_id = "rec" + std::to_string(i) + "#" + std::to_string(rng() % 1000);
        r.quote = random_words(rng, 4 + rng() % 5);
        r.source_surface = "Ann Bee";
        r.main_sentence = r.source_surface + " said " + r.quote + ".";
        r.source_entity = "E" + std::to_string(rng() % 50);
        bool late = rng() % 2;
        auto base = late ? b.valid_test_start : train_start;
        auto span = late ? std::chrono::days(100) : (b.train_end - train_start);
        auto offset = std::chrono::seconds(rng() % static_cast<std::uint64_t>(
                                               std::chrono::duration_cast<std::chrono::seconds>(span).count() + 1));
        r.published = base + offset;
        r.published_at = format_timestamp(r.published);
        out.push_back(std::move(r));
    }
    return out;
}

/// Annotated sentences with random frames: random verbs from a small set,
/// subject/object spans of random length, and entity links of mixed classes.
inline std::vector<SrlSentence> random_srl_sentences(std::mt19937_64& rng, std::size_t n)
{
    static const char* verbs[] = {"said", "warned", "walked", "added", "ate", "claimed"};
    static const std::vector<std::vector<std::string>> class_sets = {
        {"Person"}, {"Person", "Scientist"}, {"Organisation"}, {"Organisation", "Country"}, {"Place"}, {"Agent"}};
    std::vector<SrlSentence> out;
    for (std::size_t i = 0; i < n; ++i) {
        SrlSentence s;
        s.article_id = "art" + std::to_string(i / 3);
        s.sentence_index = i % 3;
        std::size_t subj_len = 1 + rng() % 2;
        std::size_t obj_len = 1 + rng() % 7;
        std::string subj;
        for (std::size_t t = 0; t < subj_len; ++t) subj += std::string(t ? " " : "") + "Name" + std::to_string(rng() % 6);
        s.sentence_text = subj + " " + verbs[rng() % std::size(verbs)] + " " + random_words(rng, obj_len) + " today";
        s.published_at = "2020-03-01T00:00:00Z";
        s.published = *parse_timestamp(s.published_at);
        s.title = "T" + std::to_string(i / 3);
        SrlFrame f;
        f.verb = {subj_len, subj_len + 1};
        if (rng() % 5) f.subject = token_range{0, subj_len};
        if (rng() % 5) f.object = token_range{subj_len + 1, subj_len + 1 + obj_len};
        s.frames.push_back(f);
        if (rng() % 4) {
            EntityAnnotation a;
            a.span = {0, subj_len};
            a.entity = "ent" + std::to_string(rng() % 12);
            a.ontology_classes = class_sets[rng() % class_sets.size()];
            s.entity_annotations.push_back(a);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace sq::oracle
