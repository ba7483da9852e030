#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sq/annotator.hpp"
#include "sq/evaluation.hpp"
#include "sq/service.hpp"
#include "sq/synthetic.hpp"

namespace fs = std::filesystem;
using namespace sq;

namespace {

// Index directory layout. Every build step copies the corpus it indexed so
// that recommend and serve can resolve doc ids back to records.
constexpr const char* manifest_file = "manifest.json";
constexpr const char* corpus_file = "corpus.jsonl";
constexpr const char* sparse_file = "sparse.sqi";
constexpr const char* lm_file = "lm.sql";
constexpr const char* vectors_file = "vectors.sqv";

struct Common {
    std::string corpus;
    std::string index_dir;
    std::string method = "dr_sparse";
    std::string query_mode = "keywords";
    std::string doc_mode = "context";
    std::optional<std::size_t> w;
    std::size_t k = 10;
    std::uint64_t seed = 42;
};

Method method_arg(const std::string& s)
{
    if (auto m = parse_method(s)) return *m;
    throw ParameterError("unknown method '" + s + "'");
}

QueryMode query_mode_arg(const std::string& s)
{
    if (auto m = parse_query_mode(s)) return *m;
    throw ParameterError("unknown query mode '" + s + "'");
}

DocMode doc_mode_arg(const std::string& s)
{
    if (auto m = parse_doc_mode(s)) return *m;
    throw ParameterError("unknown doc mode '" + s + "'");
}

Corpus require_corpus(const std::string& path)
{
    if (path.empty()) throw ParameterError("--corpus is required");
    return load_corpus(path);
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

// Writes the manifest and corpus copy, refusing to mix doc modes in one directory.
void prepare_index_dir(const Common& c, const Corpus& corpus)
{
    if (c.index_dir.empty()) throw ParameterError("--index-dir is required");
    fs::path dir(c.index_dir);
    fs::create_directories(dir);
    auto mode = std::string(to_string(doc_mode_arg(c.doc_mode)));
    if (fs::exists(dir / manifest_file)) {
        auto m = json::parse(io::read_file((dir / manifest_file).string()));
        if (m.value("doc_mode", mode) != mode)
            throw ParameterError(c.index_dir + " holds indexes built with doc mode '" + m.value("doc_mode", "") + "'");
        if (m.value("n_docs", corpus.size()) != corpus.size())
            throw ParameterError(c.index_dir + " holds indexes over a different corpus");
    }
    save_corpus((dir / corpus_file).string(), corpus);
    io::write_file((dir / manifest_file).string(), json{{"doc_mode", mode}, {"n_docs", corpus.size()}}.dump(2) + "\n");
}

IndexSet load_index_set(const std::string& index_dir, std::size_t ef_search = 100)
{
    if (index_dir.empty()) throw ParameterError("--index-dir is required");
    fs::path dir(index_dir);
    if (!fs::exists(dir / manifest_file)) throw IoError(index_dir + " has no " + manifest_file);
    auto m = json::parse(io::read_file((dir / manifest_file).string()));
    IndexSet idx;
    idx.ef_search = ef_search;
    idx.catalog = std::make_shared<DocumentCatalog>(load_corpus((dir / corpus_file).string()),
                                                    DocSpec{doc_mode_arg(m.at("doc_mode").get<std::string>())});
    if (fs::exists(dir / sparse_file)) idx.sparse = std::make_shared<SparseIndex>(load_sparse((dir / sparse_file).string()));
    if (fs::exists(dir / lm_file)) idx.lm = std::make_shared<LmStats>(load_lm((dir / lm_file).string()));
    if (fs::exists(dir / vectors_file)) {
        auto store = std::make_shared<VectorStore>(load_vectors((dir / vectors_file).string()));
        idx.vectors = store;
        idx.hnsw = std::make_shared<HnswIndex>(build_hnsw(store));
    }
    return idx;
}

// query_id -> vector, from an SQV1 file of query embeddings
std::unordered_map<std::string, std::vector<float>> load_query_vectors(const std::string& path)
{
    std::unordered_map<std::string, std::vector<float>> out;
    if (path.empty()) return out;
    auto s = load_vectors(path, {true, std::nullopt});
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto row = s.row(i);
        out.emplace(s.doc_ids[i], std::vector<float>(row.begin(), row.end()));
    }
    return out;
}

std::vector<float> parse_vector(std::string_view s)
{
    std::vector<float> v;
    std::string cur;
    std::istringstream in{std::string(s)};
    while (std::getline(in, cur, ',')) {
        try {
            v.push_back(std::stof(cur));
        } catch (const std::exception&) {
            throw ParameterError("bad vector component '" + cur + "'");
        }
    }
    return v;
}

// ---- subcommands --------------------------------------------------------------

int cmd_ingest(const std::string& in_path, const std::string& out_path, double threshold)
{
    auto sentences = load_srl_sentences(in_path);
    std::map<std::string, Article> by_id;
    for (auto const& s : sentences) by_id.try_emplace(s.article_id, Article{s.article_id, s.title, s.summary_first_sentence, s.published});
    std::vector<Article> articles;
    for (auto& [id, a] : by_id) articles.push_back(a);
    std::stable_sort(articles.begin(), articles.end(), [](auto const& a, auto const& b) { return a.published < b.published; });
    std::set<std::string> kept;
    for (auto const& a : dedup_stream(articles, threshold)) kept.insert(a.article_id);

    std::ifstream in(in_path);
    auto out = open_out(out_path);
    std::string line;
    std::size_t i = 0, written = 0;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        if (kept.count(sentences[i++].article_id)) {
            out << line << '\n';
            ++written;
        }
    }
    std::cerr << "kept " << kept.size() << " of " << articles.size() << " articles, " << written << " of "
              << sentences.size() << " sentences\n";
    return 0;
}

int cmd_filter(const std::string& in_path, const std::string& out_path, const std::string& lexicon_path,
               const std::string& classes_path, std::size_t min_count)
{
    auto sentences = load_srl_sentences(in_path);
    auto records = construct_records(sentences, load_lexicon(lexicon_path), load_source_policy(classes_path, min_count));
    Corpus c;
    c.records = std::move(records);
    save_corpus(out_path, c);
    std::cerr << "wrote " << c.size() << " records from " << sentences.size() << " sentences\n";
    return 0;
}

int cmd_split(const Common& c, const std::string& out_dir, const std::string& train_end, const std::string& test_start)
{
    auto corpus = require_corpus(c.corpus);
    auto b = SplitBoundaries::release_default();
    if (!train_end.empty()) {
        auto t = parse_timestamp(train_end);
        if (!t) throw ParameterError("bad --train-end '" + train_end + "'");
        b.train_end = *t;
    }
    if (!test_start.empty()) {
        auto t = parse_timestamp(test_start);
        if (!t) throw ParameterError("bad --test-start '" + test_start + "'");
        b.valid_test_start = *t;
    }
    auto r = chronological_split(corpus.records, b, c.seed);
    fs::create_directories(out_dir);
    save_corpus((fs::path(out_dir) / "train.jsonl").string(), r.train);
    save_corpus((fs::path(out_dir) / "valid.jsonl").string(), r.valid);
    save_corpus((fs::path(out_dir) / "test.jsonl").string(), r.test);
    std::cerr << "train " << r.train.size() << ", valid " << r.valid.size() << ", test " << r.test.size() << '\n';
    return 0;
}

int cmd_stats(const Common& c)
{
    std::cout << stats_to_json(corpus_stats(require_corpus(c.corpus))).dump(2) << '\n';
    return 0;
}

int cmd_build_sparse(const Common& c)
{
    auto corpus = require_corpus(c.corpus);
    prepare_index_dir(c, corpus);
    DocumentCatalog cat(corpus, {doc_mode_arg(c.doc_mode)});
    auto idx = build_sparse(cat.documents());
    save_sparse((fs::path(c.index_dir) / sparse_file).string(), idx);
    std::cerr << "indexed " << idx.n_docs << " documents, " << idx.postings.size() << " terms\n";
    return 0;
}

int cmd_build_lm(const Common& c)
{
    auto corpus = require_corpus(c.corpus);
    prepare_index_dir(c, corpus);
    DocumentCatalog cat(corpus, {doc_mode_arg(c.doc_mode)});
    auto s = build_lm_stats(cat.attributed_documents());
    save_lm((fs::path(c.index_dir) / lm_file).string(), s);
    std::cerr << "language model over " << s.n_experts() << " experts\n";
    return 0;
}

// Checks an exported vector file against the corpus and stores it with the
// other indexes; the HNSW graph is rebuilt whenever the directory is loaded.
int cmd_build_dense(const Common& c, const std::string& vectors_path, bool normalize)
{
    auto corpus = require_corpus(c.corpus);
    auto store = load_vectors(vectors_path, {normalize, std::nullopt});
    if (store.size() != corpus.size())
        throw DimMismatch("vector file has " + std::to_string(store.size()) + " rows, corpus has " +
                          std::to_string(corpus.size()) + " records");
    for (std::size_t i = 0; i < store.size(); ++i)
        if (store.doc_ids[i] != corpus.records[i].record_id && store.doc_ids[i] != std::to_string(i))
            throw UnknownDocId("row " + std::to_string(i) + " is '" + store.doc_ids[i] + "', expected '" +
                               corpus.records[i].record_id + "'");
    for (std::size_t i = 0; i < store.size(); ++i) store.doc_ids[i] = corpus.records[i].record_id;
    prepare_index_dir(c, corpus);
    save_vectors((fs::path(c.index_dir) / vectors_file).string(), store);
    std::cerr << "stored " << store.size() << " vectors of dim " << store.dim << '\n';
    return 0;
}

int cmd_annotate(const Common& c, const std::string& sentences_path, const std::string& lexicon_path)
{
    auto lex = load_lexicon(lexicon_path);
    auto emit = [&](const std::string& id, const std::string& sentence) {
        json j{{"id", id}, {"sentence", sentence}};
        if (auto q = extract_direct(sentence, lex)) {
            j["source"] = q->source_text;
            j["quote"] = q->quote_text;
            j["source_span"] = {q->source.begin, q->source.end};
        } else {
            j["source"] = nullptr;
            j["quote"] = nullptr;
        }
        std::cout << j.dump() << '\n';
    };
    if (!sentences_path.empty()) {
        std::ifstream in(sentences_path);
        if (!in) throw IoError("cannot open " + sentences_path);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line))
            if (!text::trim(line).empty()) emit(std::to_string(n++), line);
        return 0;
    }
    for (auto const& r : require_corpus(c.corpus).records) {
        emit(r.record_id, r.main_sentence);
    }
    return 0;
}

int cmd_export_bio(const Common& c, const std::string& out_path)
{
    auto out = open_out(out_path);
    std::size_t skipped = 0, written = 0;
    for (auto const& r : require_corpus(c.corpus).records) {
        try {
            write_bio(out, to_bio(r));
            ++written;
        } catch (const SpanNotFound& e) {
            ++skipped;
            std::cerr << r.record_id << ": " << e.what() << '\n';
        }
    }
    std::cerr << "wrote " << written << " sequences, skipped " << skipped << '\n';
    return 0;
}

int cmd_export_qa(const Common& c, const std::string& out_path, const std::string& mode_name,
                  const std::string& predictions_path)
{
    SourceMode mode;
    if (mode_name == "true") mode = SourceMode::true_source;
    else if (mode_name == "masked") mode = SourceMode::masked;
    else if (mode_name == "predicted") mode = SourceMode::predicted_source;
    else throw ParameterError("unknown source mode '" + mode_name + "'");

    std::unordered_map<std::string, std::string> predicted;
    if (!predictions_path.empty()) {
        std::ifstream in(predictions_path);
        if (!in) throw IoError("cannot open " + predictions_path);
        std::string line;
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) continue;
            auto j = json::parse(line);
            predicted[j.at("id").get<std::string>()] = j.at("source").get<std::string>();
        }
    }
    auto out = open_out(out_path);
    for (auto const& r : require_corpus(c.corpus).records) {
        std::optional<std::string> p;
        if (auto it = predicted.find(r.record_id); it != predicted.end()) p = it->second;
        auto [src, quote] = to_qa(r, mode, p);
        for (auto const* ex : {&src, &quote}) {
            auto j = qa_to_json(*ex);
            j["id"] = r.record_id + (ex == &src ? "#source" : "#quote");
            out << j.dump() << '\n';
        }
    }
    return 0;
}

int cmd_recommend(const Common& c, const std::optional<std::string>& query, const std::string& qvec, const std::string& run_out,
                  const std::string& qrels_out, const std::string& query_vectors, const std::string& tag)
{
    auto idx = load_index_set(c.index_dir);
    auto method = method_arg(c.method);
    if (query) {
        SearchRequest req{*query, c.method, c.k, parse_vector(qvec)};
        auto resp = handle_search(req, idx);
        std::cout << response_to_json(resp).dump(2) << '\n';
        return resp.status == 200 ? 0 : 1;
    }
    auto queries = require_corpus(c.corpus);
    QuerySpec spec{query_mode_arg(c.query_mode), c.w, true};
    auto vectors = load_query_vectors(query_vectors);
    std::ofstream file;
    if (!run_out.empty()) file = open_out(run_out);
    std::ostream& out = run_out.empty() ? std::cout : file;
    std::size_t empty = 0;
    for (auto const& r : queries.records) {
        std::span<const float> emb;
        if (auto it = vectors.find(r.record_id); it != vectors.end()) emb = it->second;
        try {
            write_run_lines(out, r.record_id, recommend(idx, r, method, spec, c.k, emb).experts,
                            tag.empty() ? to_string(method) : tag);
        } catch (const EmptyQuery&) {
            ++empty;
        } catch (const EmptyField&) {
            ++empty;
        }
    }
    if (empty) std::cerr << empty << " queries were empty and have no ranking\n";
    if (!qrels_out.empty()) {
        auto q = open_out(qrels_out);
        write_qrels(q, synthetic::qrels_for(queries));
    }
    return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const Common& c, const std::string& host, int port, std::size_t ef_search)
{
    IndexHolder holder(std::make_shared<IndexSet>(load_index_set(c.index_dir, ef_search)));
    httplib::Server server;
    server.Get("/healthz", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"ready", readiness_json(*holder.get())}}.dump(), "application/json");
    });
    server.Get("/experts", [&](const httplib::Request& req, httplib::Response& res) {
        SearchRequest sr;
        sr.query = req.get_param_value("q");
        if (req.has_param("method")) sr.method = req.get_param_value("method");
        SearchResponse resp;
        try {
            if (req.has_param("k")) sr.k = std::stoul(req.get_param_value("k"));
            if (req.has_param("qvec")) sr.embedding = parse_vector(req.get_param_value("qvec"));
            resp = handle_search(sr, *holder.get());
        } catch (const std::exception& e) {
            resp = {400, std::string("bad parameter: ") + e.what(), sr.query, sr.method, {}, 0.0};
        }
        res.status = resp.status;
        res.set_content(response_to_json(resp).dump(), "application/json");
    });
    g_server = &server;
    std::signal(SIGINT, [](int) { g_server->stop(); });
    std::signal(SIGTERM, [](int) { g_server->stop(); });
    std::cerr << "listening on " << host << ":" << port << '\n';
    if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
    return 0;
}

// Sources come from the corpora; their categories default to the recorded
// ontology classes unless a JSON map entity -> [category] is given.
int cmd_cluster(const Common& c, const std::vector<std::string>& extra, const std::string& categories_path,
                const std::string& out_path, std::size_t m, std::size_t k)
{
    auto corpus = require_corpus(c.corpus);
    for (auto const& p : extra) {
        auto more = load_corpus(p);
        corpus.records.insert(corpus.records.end(), more.records.begin(), more.records.end());
    }
    auto sources = source_categories(corpus);
    if (!categories_path.empty()) {
        auto given = json::parse(io::read_file(categories_path)).get<std::map<std::string, std::vector<std::string>>>();
        for (auto& [src, cats] : sources) {
            auto it = given.find(src);
            cats = it == given.end() ? std::vector<std::string>{} : it->second;
        }
    }
    auto model = build_cluster_model(sources, {m, k, c.seed});
    auto out = open_out(out_path);
    out << cluster_model_to_json(model).dump() << '\n';
    std::cerr << model.assignment.size() << " sources in " << k << " clusters after " << model.iterations
              << " iterations\n";
    return 0;
}

ClusterModel load_clusters(const std::string& path)
{
    return cluster_model_from_json(json::parse(io::read_file(path)));
}

int cmd_eval(const std::vector<std::string>& runs, const std::string& qrels_path, const std::string& clusters_path,
             std::size_t depth, bool as_json, bool per_query)
{
    std::ifstream qin(qrels_path);
    if (!qin) throw IoError("cannot open " + qrels_path);
    auto qrels = read_qrels(qin);
    std::optional<ClusterModel> clusters;
    if (!clusters_path.empty()) clusters = load_clusters(clusters_path);
    std::vector<std::pair<std::string, MetricsReport>> rows;
    for (auto const& p : runs) {
        std::ifstream in(p);
        if (!in) throw IoError("cannot open " + p);
        rows.emplace_back(fs::path(p).stem().string(),
                          evaluate_run(read_run(in), qrels, clusters ? &*clusters : nullptr, {depth, clusters.has_value()}));
    }
    if (as_json) {
        json j = json::object();
        for (auto const& [name, r] : rows) j[name] = metrics_to_json(r, per_query);
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << metrics_table(rows);
    }
    return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t seed)
{
    synthetic::Config cfg;
    cfg.seed = seed;
    auto ds = synthetic::generate(cfg);
    fs::path dir(out_dir);
    fs::create_directories(dir);
    save_corpus((dir / "train.jsonl").string(), ds.train);
    save_corpus((dir / "test.jsonl").string(), ds.test);
    auto q = open_out((dir / "qrels.txt").string());
    write_qrels(q, synthetic::qrels_for(ds.test));
    std::cerr << "train " << ds.train.size() << ", test " << ds.test.size() << ", experts " << ds.experts.size() << '\n';
    return 0;
}

void add_common(CLI::App* sub, Common& c, std::initializer_list<const char*> which)
{
    for (std::string_view f : which) {
        if (f == "corpus") sub->add_option("--corpus", c.corpus, "Corpus JSONL");
        else if (f == "index-dir") sub->add_option("--index-dir", c.index_dir, "Index directory");
        else if (f == "method") sub->add_option("--method", c.method, "dr_sparse|dr_flat|dr_hnsw|er_candidate|er_document")->capture_default_str();
        else if (f == "query-mode") sub->add_option("--query-mode", c.query_mode, "title|keywords|summary")->capture_default_str();
        else if (f == "doc-mode") sub->add_option("--doc-mode", c.doc_mode, "sentence|context")->capture_default_str();
        else if (f == "w") sub->add_option("--w", c.w, "Query word cap (expert retrieval only)");
        else if (f == "k") sub->add_option("--k", c.k, "Experts to return")->capture_default_str();
        else if (f == "seed") sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sq: quote-source retrieval and expert recommendation"};
    app.require_subcommand(1);
    Common c;
    std::function<int()> action;

    std::string in, out, lexicon, classes, train_end, test_start, vectors, sentences, qa_mode = "true", predictions,
                qvec, qrels_out, query_vectors, tag, qrels, clusters, host = "127.0.0.1";
    std::optional<std::string> query;
    std::vector<std::string> runs, extra;
    double threshold = 0.8;
    std::size_t min_count = 2, depth = 10, ef_search = 100, m = 100, k_clusters = 40;
    int port = 8080;
    bool normalize = false, as_json = false, per_query = false;

    auto* ingest = app.add_subcommand("ingest", "Drop near-duplicate articles from an annotated sentence stream");
    ingest->add_option("--input", in, "Annotated sentences JSONL")->required();
    ingest->add_option("--out", out, "Output JSONL")->required();
    ingest->add_option("--threshold", threshold, "Title+summary 4-gram Jaccard threshold")->capture_default_str();
    ingest->callback([&] { action = [&] { return cmd_ingest(in, out, threshold); }; });

    auto* filter = app.add_subcommand("filter", "Build quote records from annotated sentences");
    filter->add_option("--input", in, "Annotated sentences JSONL")->required();
    filter->add_option("--out", out, "Corpus JSONL")->required();
    filter->add_option("--lexicon", lexicon, "Trigger verb list, one per line")->required();
    filter->add_option("--source-classes", classes, "Allowed ontology classes, one per line")->required();
    filter->add_option("--min-count", min_count, "Minimum source occurrences")->capture_default_str();
    filter->callback([&] { action = [&] { return cmd_filter(in, out, lexicon, classes, min_count); }; });

    auto* split = app.add_subcommand("split", "Chronological train/valid/test split");
    add_common(split, c, {"corpus", "seed"});
    split->add_option("--out-dir", out, "Directory for train/valid/test.jsonl")->required();
    split->add_option("--train-end", train_end, "Last train timestamp");
    split->add_option("--test-start", test_start, "First valid/test timestamp");
    split->callback([&] { action = [&] { return cmd_split(c, out, train_end, test_start); }; });

    auto* stats = app.add_subcommand("stats", "Corpus statistics as JSON");
    add_common(stats, c, {"corpus"});
    stats->callback([&] { action = [&] { return cmd_stats(c); }; });

    auto* bsparse = app.add_subcommand("build-sparse", "Build the BM25 index");
    add_common(bsparse, c, {"corpus", "index-dir", "doc-mode"});
    bsparse->callback([&] { action = [&] { return cmd_build_sparse(c); }; });

    auto* bdense = app.add_subcommand("build-dense", "Attach exported document vectors to an index directory");
    add_common(bdense, c, {"corpus", "index-dir", "doc-mode"});
    bdense->add_option("--vectors", vectors, "SQV1 file, one row per corpus record")->required();
    bdense->add_flag("--normalize", normalize, "L2-normalize rows on load");
    bdense->callback([&] { action = [&] { return cmd_build_dense(c, vectors, normalize); }; });

    auto* blm = app.add_subcommand("build-lm", "Build the expert language-model statistics");
    add_common(blm, c, {"corpus", "index-dir", "doc-mode"});
    blm->callback([&] { action = [&] { return cmd_build_lm(c); }; });

    auto* annotate = app.add_subcommand("annotate", "Rule-based direct quote extraction");
    add_common(annotate, c, {"corpus"});
    annotate->add_option("--sentences", sentences, "Plain text, one sentence per line (instead of --corpus)");
    annotate->add_option("--lexicon", lexicon, "Trigger verb list")->required();
    annotate->callback([&] { action = [&] { return cmd_annotate(c, sentences, lexicon); }; });

    auto* ebio = app.add_subcommand("export-bio", "Token/tag sequences for sequence labelling");
    add_common(ebio, c, {"corpus"});
    ebio->add_option("--out", out, "Output file")->required();
    ebio->callback([&] { action = [&] { return cmd_export_bio(c, out); }; });

    auto* eqa = app.add_subcommand("export-qa", "Question answering examples as JSONL");
    add_common(eqa, c, {"corpus"});
    eqa->add_option("--out", out, "Output JSONL")->required();
    eqa->add_option("--source-mode", qa_mode, "true|masked|predicted")->capture_default_str();
    eqa->add_option("--predictions", predictions, "JSONL of {id, source} for predicted mode");
    eqa->callback([&] { action = [&] { return cmd_export_qa(c, out, qa_mode, predictions); }; });

    auto* rec = app.add_subcommand("recommend", "Rank experts for a query or for every record of a query corpus");
    add_common(rec, c, {"corpus", "index-dir", "method", "query-mode", "w", "k"});
    rec->add_option("--query", query, "Free-text query (prints a JSON response)");
    rec->add_option("--qvec", qvec, "Comma-separated query vector for dense methods");
    rec->add_option("--query-vectors", query_vectors, "SQV1 query vectors keyed by record id");
    rec->add_option("--run-out", out, "Run file (default stdout)");
    rec->add_option("--qrels-out", qrels_out, "Also write qrels for the query corpus");
    rec->add_option("--tag", tag, "Run tag (default: method name)");
    rec->callback([&] { action = [&] { return cmd_recommend(c, query, qvec, out, qrels_out, query_vectors, tag); }; });

    auto* serve = app.add_subcommand("serve", "HTTP search over a built index directory");
    add_common(serve, c, {"index-dir"});
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--ef-search", ef_search)->capture_default_str();
    serve->callback([&] { action = [&] { return cmd_serve(c, host, port, ef_search); }; });

    auto* cluster = app.add_subcommand("cluster", "Cluster sources by category for relaxed evaluation");
    add_common(cluster, c, {"corpus", "seed"});
    cluster->add_option("--also", extra, "More corpora whose sources join the clustering");
    cluster->add_option("--source-categories", classes, "JSON map of entity to category list");
    cluster->add_option("--out", out, "Cluster model JSON")->required();
    cluster->add_option("--m", m, "Category vocabulary size")->capture_default_str();
    cluster->add_option("--clusters", k_clusters, "Number of clusters")->capture_default_str();
    cluster->callback([&] { action = [&] { return cmd_cluster(c, extra, classes, out, m, k_clusters); }; });

    auto* eval = app.add_subcommand("eval", "Score one or more run files");
    eval->add_option("--run", runs, "Run file(s)")->required();
    eval->add_option("--qrels", qrels, "Qrels file")->required();
    eval->add_option("--cluster-model", clusters, "Cluster model JSON (enables relaxed metrics)");
    eval->add_option("--depth", depth, "Ranking cut-off")->capture_default_str();
    eval->add_flag("--json", as_json, "JSON output");
    eval->add_flag("--per-query", per_query, "Include per-query scores (JSON only)");
    eval->callback([&] { action = [&] { return cmd_eval(runs, qrels, clusters, depth, as_json, per_query); }; });

    auto* synth = app.add_subcommand("synth", "Write the planted-topic synthetic corpus");
    synth->add_option("--out-dir", out, "Output directory")->required();
    std::uint64_t synth_seed = synthetic::Config{}.seed;
    synth->add_option("--seed", synth_seed)->capture_default_str();
    synth->callback([&] { action = [&] { return cmd_synth(out, synth_seed); }; });

    CLI11_PARSE(app, argc, argv);
    try {
        return action();
    } catch (const sq::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
