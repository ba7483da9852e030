#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/evaluation.hpp"
#include "sq/timestamp.hpp"
#include "sq/tokenizer.hpp"

namespace sq::synthetic {

/// Planted-topic corpus: every expert belongs to one topic, talks with that
/// topic's vocabulary plus a few signature words of its own, and carries the
/// topic's ontology classes. Article keywords are stored by salience: topic
/// terms first, then the expert-specific terms.
struct Config {
    std::size_t n_topics = 20;
    std::size_t experts_per_topic = 10;
    std::size_t train_quotes_per_expert = 8;
    std::size_t test_quotes_per_expert = 2;
    std::size_t topic_vocab = 30;
    std::size_t signature_words = 6;
    std::size_t generic_vocab = 200;
    std::size_t topic_classes = 3;
    std::size_t noise_classes = 30;
    std::uint64_t seed = 7;
};

struct Expert {
    std::string entity;
    std::string name;
    std::size_t topic = 0;
    std::vector<std::string> signature;
    std::vector<std::string> classes;
};

struct Dataset {
    Corpus train;
    Corpus test;
    std::vector<Expert> experts;
    std::vector<std::vector<std::string>> topic_words;
};

namespace detail {

class word_factory {
  public:
    explicit word_factory(std::mt19937_64& rng) : m_rng(rng) {}

    // Pseudo-words whose surface and Porter stem are both unique.
    std::string next()
    {
        static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                       "br", "dr", "gr", "kl", "pr", "st", "tr", "sk"};
        static const char* vowels[] = {"a", "o", "u", "i", "e"};
        static const char* codas[] = {"k", "p", "t", "m", "n", "x", "b", "g", "d"};
        for (;;) {
            std::string w;
            auto syllables = 2 + pick(2);
            for (std::size_t s = 0; s < syllables; ++s) {
                w += onsets[pick(std::size(onsets))];
                w += vowels[pick(std::size(vowels))];
            }
            w += codas[pick(std::size(codas))];
            auto stem = m_stemmer.stem(w);
            if (english_stopwords().count(w) || m_used.count(w) || m_stems.count(stem)) continue;
            m_used.insert(w);
            m_stems.insert(stem);
            return w;
        }
    }

    std::vector<std::string> next_n(std::size_t n)
    {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(next());
        return out;
    }

  private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(m_rng); }

    std::mt19937_64& m_rng;
    porter_stemmer m_stemmer;
    std::set<std::string> m_used, m_stems;
};

inline std::string capitalize(std::string s)
{
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

template <typename T>
std::vector<T> sample(const std::vector<T>& pool, std::size_t n, std::mt19937_64& rng)
{
    std::vector<T> out;
    std::sample(pool.begin(), pool.end(), std::back_inserter(out), std::min(n, pool.size()), rng);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

}  // namespace detail

inline Dataset generate(const Config& cfg = {})
{
    std::mt19937_64 rng(cfg.seed);
    detail::word_factory words(rng);
    Dataset ds;

    auto generic = words.next_n(cfg.generic_vocab);
    std::vector<std::string> noise_classes;
    for (std::size_t i = 0; i < cfg.noise_classes; ++i) noise_classes.push_back("Trait" + std::to_string(i));
    std::vector<std::vector<std::string>> topic_classes(cfg.n_topics);
    for (std::size_t t = 0; t < cfg.n_topics; ++t) {
        ds.topic_words.push_back(words.next_n(cfg.topic_vocab));
        for (std::size_t c = 0; c < cfg.topic_classes; ++c)
            topic_classes[t].push_back("Field" + std::to_string(t) + "_" + std::to_string(c));
    }

    for (std::size_t t = 0; t < cfg.n_topics; ++t)
        for (std::size_t e = 0; e < cfg.experts_per_topic; ++e) {
            Expert ex;
            ex.topic = t;
            auto first = detail::capitalize(words.next());
            auto last = detail::capitalize(words.next());
            ex.name = first + " " + last;
            ex.entity = "http://dbpedia.org/resource/" + first + "_" + last;
            ex.signature = words.next_n(cfg.signature_words);
            ex.classes = {"Person"};
            ex.classes.insert(ex.classes.end(), topic_classes[t].begin(), topic_classes[t].end());
            ex.classes.push_back(noise_classes[std::uniform_int_distribution<std::size_t>(0, noise_classes.size() - 1)(rng)]);
            ds.experts.push_back(std::move(ex));
        }

    auto train_start = *parse_timestamp("2020-01-01T00:00:00Z");
    auto test_start = *parse_timestamp("2020-06-21T00:00:00Z");
    auto coin = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };
    auto sentence = [&](std::vector<std::string> ws) {
        std::shuffle(ws.begin(), ws.end(), rng);
        return text::join(ws, " ");
    };

    std::size_t article = 0;
    for (std::size_t xi = 0; xi < ds.experts.size(); ++xi) {
        auto const& ex = ds.experts[xi];
        auto const& tw = ds.topic_words[ex.topic];
        std::size_t n_total = cfg.train_quotes_per_expert + cfg.test_quotes_per_expert;
        for (std::size_t qi = 0; qi < n_total; ++qi, ++article) {
            bool is_test = qi >= cfg.train_quotes_per_expert;
            QuoteRecord r;
            r.record_id = "syn" + std::to_string(article) + "#0#0";

            std::vector<std::string> body = detail::sample(ex.signature, 2, rng);
            for (auto& w : detail::sample(tw, 3, rng)) body.push_back(w);
            for (auto& w : detail::sample(generic, 4, rng)) body.push_back(w);
            auto spoken = sentence(body);

            double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            if (roll < 0.8) {
                r.quote = spoken;
                r.main_sentence = ex.name + " said " + spoken + ".";
                r.quote_type = QuoteType::indirect;
            } else if (roll < 0.9) {
                r.quote = "\"" + spoken + "\"";
                r.main_sentence = r.quote + " " + ex.name + " said.";
                r.quote_type = QuoteType::direct;
            } else {
                auto toks = text::split_ws(spoken);
                auto head = std::vector<std::string>(toks.begin(), toks.begin() + 3);
                auto tail = std::vector<std::string>(toks.begin() + 3, toks.end());
                r.quote = text::join(head, " ") + " \"" + text::join(tail, " ") + "\"";
                r.main_sentence = ex.name + " said " + r.quote + ".";
                r.quote_type = QuoteType::mixed;
            }
            r.source_surface = ex.name;
            r.source_entity = ex.entity;
            r.ontology_classes = ex.classes;

            auto ctx = [&] {
                auto ws = detail::sample(tw, 3, rng);
                for (auto& w : detail::sample(generic, 4, rng)) ws.push_back(w);
                return detail::capitalize(sentence(ws)) + ".";
            };
            if (coin(0.9)) r.left_sentence = ctx();
            if (coin(0.9)) r.right_sentence = ctx();

            auto topic_kw = detail::sample(tw, 5, rng);
            auto expert_kw = detail::sample(ex.signature, 3, rng);
            r.keywords = topic_kw;
            r.keywords.insert(r.keywords.end(), expert_kw.begin(), expert_kw.end());

            auto title_words = detail::sample(tw, 3, rng);
            title_words.push_back(expert_kw.front());
            title_words.push_back(ex.name);
            r.title = detail::capitalize(sentence(title_words));
            auto summary_words = detail::sample(tw, 4, rng);
            summary_words.push_back(expert_kw.back());
            for (auto& w : detail::sample(generic, 3, rng)) summary_words.push_back(w);
            r.summary_first_sentence = detail::capitalize(sentence(summary_words)) + ".";

            r.categories = {"IAB" + std::to_string(ex.topic % 26 + 1)};
            r.news_source = "wire" + std::to_string(article % 12);
            auto base = is_test ? test_start : train_start;
            r.published = base + std::chrono::seconds(static_cast<long long>(article) * 3600);
            r.published_at = format_timestamp(r.published);
            (is_test ? ds.test : ds.train).records.push_back(std::move(r));
        }
    }
    ds.train.split_label = SplitLabel::train;
    ds.test.split_label = SplitLabel::test;
    return ds;
}

/// One query per test record: the record id and its true source.
inline Qrels qrels_for(const Corpus& test)
{
    Qrels q;
    for (auto const& r : test.records) q.emplace(r.record_id, r.source_entity);
    return q;
}

}  // namespace sq::synthetic
