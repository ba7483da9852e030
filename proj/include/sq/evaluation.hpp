#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sq/corpus.hpp"
#include "sq/error.hpp"
#include "sq/text.hpp"

namespace sq {

// ---- extraction metrics ----------------------------------------------------

/// Lowercase, drop ASCII punctuation and the articles a/an/the, collapse
/// whitespace.
inline std::vector<std::string> squad_tokens(std::string_view s)
{
    std::string cleaned;
    cleaned.reserve(s.size());
    for (char c : s)
        if (!text::is_ascii_punct(c)) cleaned.push_back(text::ascii_lower(c));
    std::vector<std::string> out;
    for (auto& t : text::split_ws(cleaned))
        if (t != "a" && t != "an" && t != "the") out.push_back(std::move(t));
    return out;
}

struct SpanScore {
    int exact_match = 0;
    double f1 = 0.0;
};

inline SpanScore span_scores(std::string_view prediction, std::string_view gold)
{
    auto p = squad_tokens(prediction);
    auto g = squad_tokens(gold);
    SpanScore s;
    s.exact_match = p == g ? 1 : 0;
    if (p.empty() || g.empty()) {
        s.f1 = p == g ? 1.0 : 0.0;
        return s;
    }
    std::map<std::string, int> gold_counts;
    for (auto const& t : g) ++gold_counts[t];
    int common = 0;
    for (auto const& t : p)
        if (auto it = gold_counts.find(t); it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    if (common == 0) return s;
    double precision = static_cast<double>(common) / static_cast<double>(p.size());
    double recall = static_cast<double>(common) / static_cast<double>(g.size());
    s.f1 = 2.0 * precision * recall / (precision + recall);
    return s;
}

struct ExtractionReport {
    std::size_t n = 0;
    double exact_match = 0.0;
    double macro_f1 = 0.0;
};

inline ExtractionReport score_extractions(const std::vector<std::pair<std::string, std::string>>& predicted_gold)
{
    ExtractionReport r;
    r.n = predicted_gold.size();
    if (r.n == 0) return r;
    for (auto const& [p, g] : predicted_gold) {
        auto s = span_scores(p, g);
        r.exact_match += s.exact_match;
        r.macro_f1 += s.f1;
    }
    r.exact_match /= static_cast<double>(r.n);
    r.macro_f1 /= static_cast<double>(r.n);
    return r;
}

// ---- ranking metrics -------------------------------------------------------

/// Precision averaged at the ranks of relevant items, divided by |relevant|.
/// `denominator_cap` bounds the divisor for relevant sets larger than the
/// ranking (relaxed judgments).
inline double average_precision(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                                std::optional<std::size_t> denominator_cap = std::nullopt)
{
    if (relevant.empty()) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (!relevant.count(ranked[i])) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    std::size_t denom = relevant.size();
    if (denominator_cap) denom = std::min(denom, std::max<std::size_t>(*denominator_cap, 1));
    return sum / static_cast<double>(denom);
}

inline double rank_discount(std::size_t rank)
{
    return rank <= 1 ? 1.0 : 1.0 / std::log2(static_cast<double>(rank));
}

/// DCG with gain 1 per relevant item and discount 1/max(1, log2 i).
inline double ndcg_at_k(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t k)
{
    if (k < 1) throw ParameterError("k must be at least 1");
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
        if (relevant.count(ranked[i])) dcg += rank_discount(i + 1);
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i) idcg += rank_discount(i + 1);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

// ---- relaxed relevance ------------------------------------------------------

/// k-means over binary category indicators. Sources without any vocabulary
/// category sit in the overflow cluster (id == k) and match only themselves.
struct ClusterModel {
    std::vector<std::string> category_vocab;
    std::size_t k = 0;
    std::vector<std::vector<double>> centroids;
    std::map<std::string, std::size_t> assignment;
    std::uint64_t seed = 0;
    std::vector<double> objective_history;  // after each Lloyd assignment step of the kept run
    std::size_t iterations = 0;

    std::size_t overflow_cluster() const { return k; }

    std::optional<std::size_t> cluster_of(const std::string& source) const
    {
        auto it = assignment.find(source);
        if (it == assignment.end()) return std::nullopt;
        return it->second;
    }

    bool same_cluster(const std::string& a, const std::string& b) const
    {
        if (a == b) return true;
        auto ca = cluster_of(a), cb = cluster_of(b);
        return ca && cb && *ca == *cb && *ca != overflow_cluster();
    }

    std::set<std::string> members(const std::string& source) const
    {
        std::set<std::string> out{source};
        auto c = cluster_of(source);
        if (!c || *c == overflow_cluster()) return out;
        for (auto const& [s, id] : assignment)
            if (id == *c) out.insert(s);
        return out;
    }
};

struct ClusterParams {
    std::size_t m = 100;
    std::size_t k = 40;
    std::uint64_t seed = 42;
    std::size_t max_iterations = 300;
    double tolerance = 1e-6;
    std::size_t restarts = 10;  // independent seedings; the lowest objective wins
};

/// The m categories attached to the most sources, ties broken
/// lexicographically.
inline std::vector<std::string> category_vocabulary(const std::map<std::string, std::vector<std::string>>& sources,
                                                    std::size_t m)
{
    std::map<std::string, std::size_t> freq;
    for (auto const& [src, cats] : sources)
        for (auto const& c : std::set<std::string>(cats.begin(), cats.end())) ++freq[c];
    std::vector<std::pair<std::string, std::size_t>> v(freq.begin(), freq.end());
    std::stable_sort(v.begin(), v.end(), [](auto const& a, auto const& b) { return a.second > b.second; });
    if (v.size() > m) v.resize(m);
    std::vector<std::string> out;
    for (auto& [c, n] : v) out.push_back(c);
    return out;
}

/// 0/1 vector over the vocabulary marking the categories present in `cats`.
inline std::vector<double> category_indicator(const std::vector<std::string>& vocab,
                                              const std::vector<std::string>& cats)
{
    std::vector<double> x(vocab.size(), 0.0);
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (std::find(cats.begin(), cats.end(), vocab[i]) != cats.end()) x[i] = 1.0;
    return x;
}

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline std::size_t nearest(const std::vector<double>& x, const std::vector<std::vector<double>>& centroids)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c)
        if (double d = sq_dist(x, centroids[c]); d < best_d) {
            best_d = d;
            best = c;
        }
    return best;
}

inline std::size_t sample_by_weight(const std::vector<double>& w, double total, std::mt19937_64& rng)
{
    double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        last = i;
        acc += w[i];
        if (r < acc) return i;
    }
    return last;
}

/// Greedy k-means++: each step draws 2 + floor(ln k) candidates by squared
/// distance and keeps the one giving the lowest potential.
inline std::vector<std::vector<double>> kmeanspp_seed(const std::vector<std::vector<double>>& xs, std::size_t k,
                                                      std::mt19937_64& rng)
{
    std::vector<std::vector<double>> centroids;
    std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
    centroids.push_back(xs[pick(rng)]);
    std::vector<double> d2(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d2[i] = sq_dist(xs[i], centroids[0]);
    const auto trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
    while (centroids.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (total <= 0.0) {
            centroids.push_back(xs[pick(rng)]);
            continue;
        }
        std::size_t best = 0;
        double best_pot = std::numeric_limits<double>::infinity();
        std::vector<double> best_d2;
        for (std::size_t t = 0; t < trials; ++t) {
            auto c = sample_by_weight(d2, total, rng);
            std::vector<double> nd(xs.size());
            double pot = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                nd[i] = std::min(d2[i], sq_dist(xs[i], xs[c]));
                pot += nd[i];
            }
            if (pot < best_pot) {
                best_pot = pot;
                best = c;
                best_d2 = std::move(nd);
            }
        }
        centroids.push_back(xs[best]);
        d2 = std::move(best_d2);
    }
    return centroids;
}

struct lloyd_result {
    std::vector<std::vector<double>> centroids;
    std::vector<double> history;  // objective after each assignment step
    double objective = 0.0;
};

inline lloyd_result lloyd(const std::vector<std::vector<double>>& xs, std::vector<std::vector<double>> centroids,
                          const ClusterParams& params)
{
    lloyd_result out;
    const std::size_t k = centroids.size();
    const std::size_t dim = xs.empty() ? 0 : xs[0].size();
    std::vector<std::size_t> assign(xs.size(), 0);
    for (std::size_t it = 0; it < params.max_iterations; ++it) {
        double objective = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            assign[i] = nearest(xs[i], centroids);
            objective += sq_dist(xs[i], centroids[assign[i]]);
        }
        out.history.push_back(objective);

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ++counts[assign[i]];
            for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += xs[i][j];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (auto& v : sums[c]) v /= static_cast<double>(counts[c]);
            shift = std::max(shift, std::sqrt(sq_dist(sums[c], centroids[c])));
            centroids[c] = std::move(sums[c]);
        }
        if (shift < params.tolerance) break;
    }
    out.objective = 0.0;
    for (auto const& x : xs) out.objective += sq_dist(x, centroids[nearest(x, centroids)]);
    out.centroids = std::move(centroids);
    return out;
}

}  // namespace detail

inline ClusterModel build_cluster_model(const std::map<std::string, std::vector<std::string>>& sources,
                                        const ClusterParams& params = {})
{
    if (params.k < 1 || params.m < 1) throw ParameterError("k and m must be positive");
    ClusterModel model;
    model.k = params.k;
    model.seed = params.seed;
    model.category_vocab = category_vocabulary(sources, params.m);
    std::vector<std::string> names;
    std::vector<std::vector<double>> xs;
    for (auto const& [src, cats] : sources) {
        auto x = category_indicator(model.category_vocab, cats);
        if (std::find(x.begin(), x.end(), 1.0) == x.end()) {
            model.assignment[src] = model.overflow_cluster();
            continue;
        }
        names.push_back(src);
        xs.push_back(std::move(x));
    }
    if (xs.size() < params.k)
        throw TooFewSources(std::to_string(xs.size()) + " embeddable sources for k=" + std::to_string(params.k));

    std::mt19937_64 rng(params.seed);
    std::optional<detail::lloyd_result> best;
    for (std::size_t r = 0; r < std::max<std::size_t>(params.restarts, 1); ++r) {
        auto run = detail::lloyd(xs, detail::kmeanspp_seed(xs, params.k, rng), params);
        if (!best || run.objective < best->objective) best = std::move(run);
    }
    model.centroids = std::move(best->centroids);
    model.objective_history = std::move(best->history);
    model.iterations = model.objective_history.size();
    for (std::size_t i = 0; i < xs.size(); ++i) model.assignment[names[i]] = detail::nearest(xs[i], model.centroids);
    return model;
}

/// Source entity -> union of the ontology classes recorded with its quotes.
inline std::map<std::string, std::vector<std::string>> source_categories(const Corpus& corpus)
{
    std::map<std::string, std::set<std::string>> acc;
    for (auto const& r : corpus.records)
        acc[r.source_entity].insert(r.ontology_classes.begin(), r.ontology_classes.end());
    std::map<std::string, std::vector<std::string>> out;
    for (auto& [s, cats] : acc) out.emplace(s, std::vector<std::string>(cats.begin(), cats.end()));
    return out;
}

inline json cluster_model_to_json(const ClusterModel& m)
{
    return json{{"k", m.k},
                {"seed", m.seed},
                {"category_vocab", m.category_vocab},
                {"centroids", m.centroids},
                {"assignment", m.assignment},
                {"iterations", m.iterations},
                {"objective_history", m.objective_history}};
}

inline ClusterModel cluster_model_from_json(const json& j)
{
    ClusterModel m;
    try {
        m.k = j.at("k").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.category_vocab = j.at("category_vocab").get<std::vector<std::string>>();
        m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
        m.assignment = j.at("assignment").get<std::map<std::string, std::size_t>>();
        m.iterations = j.value("iterations", std::size_t{0});
        m.objective_history = j.value("objective_history", std::vector<double>{});
    } catch (const json::exception& e) {
        throw SchemaError(std::string("cluster model: ") + e.what());
    }
    return m;
}

// ---- runs and qrels ----------------------------------------------------------

using Qrels = std::map<std::string, std::string>;            // query -> true source
using Run = std::map<std::string, std::vector<std::string>>;  // query -> ranked experts

inline Qrels read_qrels(std::istream& in)
{
    Qrels q;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto f = text::split_ws(line);
        if (f.empty()) continue;
        if (f.size() != 4) throw SchemaError("qrels line " + std::to_string(n) + ": expected 4 fields");
        if (f[3] == "0") continue;
        if (!q.emplace(f[0], f[2]).second)
            throw InvariantError("qrels line " + std::to_string(n) + ": query '" + f[0] +
                                 "' has more than one relevant expert");
    }
    return q;
}

inline void write_qrels(std::ostream& out, const Qrels& q)
{
    for (auto const& [qid, expert] : q) out << qid << " 0 " << expert << " 1\n";
}

/// Reads `query_id expert_id rank score tag` lines, ordering each query's
/// experts by rank.
inline Run read_run(std::istream& in)
{
    std::map<std::string, std::vector<std::pair<long, std::string>>> acc;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto f = text::split_ws(line);
        if (f.empty()) continue;
        if (f.size() < 3) throw SchemaError("run line " + std::to_string(n) + ": expected at least 3 fields");
        long rank = 0;
        try {
            rank = std::stol(f[2]);
        } catch (const std::exception&) {
            throw SchemaError("run line " + std::to_string(n) + ": bad rank '" + f[2] + "'");
        }
        acc[f[0]].emplace_back(rank, f[1]);
    }
    Run run;
    for (auto& [qid, v] : acc) {
        std::stable_sort(v.begin(), v.end(), [](auto const& a, auto const& b) { return a.first < b.first; });
        auto& ranked = run[qid];
        for (auto& [r, e] : v) ranked.push_back(std::move(e));
    }
    return run;
}

// ---- run evaluation ----------------------------------------------------------

struct Judgment {
    bool strict = false;
    bool relaxed = false;
};

inline std::vector<Judgment> judge(const std::vector<std::string>& ranked, const std::string& truth,
                                   const ClusterModel* model)
{
    std::vector<Judgment> out;
    out.reserve(ranked.size());
    for (auto const& e : ranked) out.push_back({e == truth, model ? model->same_cluster(e, truth) : e == truth});
    return out;
}

struct QueryMetrics {
    std::string query_id;
    double ap_strict = 0.0, ndcg5_strict = 0.0, ndcg10_strict = 0.0;
    double ap_relaxed = 0.0, ndcg5_relaxed = 0.0, ndcg10_relaxed = 0.0;
};

struct MetricsReport {
    std::size_t n_queries = 0;
    bool has_relaxed = false;
    double map_strict = 0.0, ndcg5_strict = 0.0, ndcg10_strict = 0.0;
    double map_relaxed = 0.0, ndcg5_relaxed = 0.0, ndcg10_relaxed = 0.0;
    std::vector<QueryMetrics> per_query;
};

struct EvalOptions {
    std::size_t depth = 10;  // rankings are cut here before scoring
    bool relaxed = false;
};

/// Scores every query in the qrels; queries missing from the run score 0.
/// Relaxed relevance counts any expert in the true source's cluster.
inline MetricsReport evaluate_run(const Run& run, const Qrels& qrels, const ClusterModel* model = nullptr,
                                  const EvalOptions& opts = {})
{
    if (opts.relaxed && !model) throw MissingClusterModel("relaxed metrics need a cluster model");
    if (opts.depth < 1) throw ParameterError("depth must be at least 1");
    for (auto const& [qid, ranked] : run)
        if (!qrels.count(qid)) throw UnknownQuery("'" + qid + "' is not in the qrels");

    MetricsReport rep;
    rep.has_relaxed = opts.relaxed;
    static const std::vector<std::string> empty;
    for (auto const& [qid, truth] : qrels) {
        auto it = run.find(qid);
        const auto& full = it == run.end() ? empty : it->second;
        std::vector<std::string> ranked(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(std::min(full.size(), opts.depth)));
        QueryMetrics q;
        q.query_id = qid;
        std::set<std::string> strict{truth};
        q.ap_strict = average_precision(ranked, strict);
        q.ndcg5_strict = ndcg_at_k(ranked, strict, 5);
        q.ndcg10_strict = ndcg_at_k(ranked, strict, 10);
        if (opts.relaxed) {
            auto relaxed = model->members(truth);
            q.ap_relaxed = average_precision(ranked, relaxed, ranked.size());
            q.ndcg5_relaxed = ndcg_at_k(ranked, relaxed, 5);
            q.ndcg10_relaxed = ndcg_at_k(ranked, relaxed, 10);
        }
        rep.per_query.push_back(q);
    }
    rep.n_queries = rep.per_query.size();
    if (rep.n_queries == 0) return rep;
    for (auto const& q : rep.per_query) {
        rep.map_strict += q.ap_strict;
        rep.ndcg5_strict += q.ndcg5_strict;
        rep.ndcg10_strict += q.ndcg10_strict;
        rep.map_relaxed += q.ap_relaxed;
        rep.ndcg5_relaxed += q.ndcg5_relaxed;
        rep.ndcg10_relaxed += q.ndcg10_relaxed;
    }
    auto n = static_cast<double>(rep.n_queries);
    for (auto* v : {&rep.map_strict, &rep.ndcg5_strict, &rep.ndcg10_strict, &rep.map_relaxed, &rep.ndcg5_relaxed,
                    &rep.ndcg10_relaxed})
        *v /= n;
    return rep;
}

inline json metrics_to_json(const MetricsReport& r, bool per_query = false)
{
    json j{{"n_queries", r.n_queries},
           {"strict", {{"map", r.map_strict}, {"ndcg@5", r.ndcg5_strict}, {"ndcg@10", r.ndcg10_strict}}}};
    if (r.has_relaxed)
        j["relaxed"] = {{"map", r.map_relaxed}, {"ndcg@5", r.ndcg5_relaxed}, {"ndcg@10", r.ndcg10_relaxed}};
    if (per_query) {
        j["per_query"] = json::array();
        for (auto const& q : r.per_query) {
            json e{{"query_id", q.query_id}, {"ap", q.ap_strict}, {"ndcg@5", q.ndcg5_strict}, {"ndcg@10", q.ndcg10_strict}};
            if (r.has_relaxed) {
                e["ap_relaxed"] = q.ap_relaxed;
                e["ndcg@5_relaxed"] = q.ndcg5_relaxed;
                e["ndcg@10_relaxed"] = q.ndcg10_relaxed;
            }
            j["per_query"].push_back(std::move(e));
        }
    }
    return j;
}

/// One aligned row per labelled report.
inline std::string metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows)
{
    std::size_t w = 6;
    for (auto const& [label, r] : rows) w = std::max(w, label.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w)) << "run" << std::right;
    for (auto const* h : {"MAP", "NDCG@5", "NDCG@10", "rMAP", "rNDCG@5", "rNDCG@10", "n"})
        os << std::setw(10) << h;
    os << '\n' << std::fixed << std::setprecision(4);
    for (auto const& [label, r] : rows) {
        os << std::left << std::setw(static_cast<int>(w)) << label << std::right;
        os << std::setw(10) << r.map_strict << std::setw(10) << r.ndcg5_strict << std::setw(10) << r.ndcg10_strict;
        if (r.has_relaxed)
            os << std::setw(10) << r.map_relaxed << std::setw(10) << r.ndcg5_relaxed << std::setw(10)
               << r.ndcg10_relaxed;
        else
            os << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(10) << "-";
        os << std::setw(10) << r.n_queries << '\n';
    }
    return os.str();
}

}  // namespace sq
