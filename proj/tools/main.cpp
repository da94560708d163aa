#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ragkit/bench.hpp"
#include "ragkit/corpus.hpp"
#include "ragkit/dense.hpp"
#include "ragkit/lora.hpp"
#include "ragkit/metrics.hpp"
#include "ragkit/sparse.hpp"
#include "ragkit/textkit.hpp"

namespace {

using namespace ragkit;

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

std::vector<std::string> split_csv(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::unique_ptr<dense::EmbeddingProvider> make_provider(std::size_t hashed_dim,
                                                        const std::string& embeddings_path) {
    if (!embeddings_path.empty()) {
        return std::make_unique<dense::FileBackedProvider>(
            dense::FileBackedProvider::load(embeddings_path));
    }
    return std::make_unique<dense::HashedNGramProvider>(hashed_dim);
}

std::vector<metrics::ScorePair> load_pairs(const std::string& path,
                                           std::vector<std::string>* ids = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pairs file: " + path);
    std::vector<metrics::ScorePair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("prediction") || !rec.contains("reference") ||
            !rec["prediction"].is_string() || !rec["reference"].is_string()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected {\"id\", \"prediction\", \"reference\"}");
        }
        if (ids != nullptr) {
            ids->push_back(rec.contains("id") && rec["id"].is_string()
                               ? rec["id"].get<std::string>()
                               : "p" + std::to_string(lineno - 1));
        }
        pairs.push_back({rec["prediction"].get<std::string>(), rec["reference"].get<std::string>()});
    }
    return pairs;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

std::string format6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------

struct IndexArgs {
    std::string cqa_path;
    std::string text_path;
    std::string out_path;
    std::string stopword_path;
    std::size_t chunk_words = 200;
    std::size_t overlap_words = 0;
    bool no_stem = false;
    bool no_lowercase = false;
    bool no_dedupe = false;
};

int cmd_index(const IndexArgs& args) {
    if (!args.text_path.empty() && args.overlap_words >= args.chunk_words) {
        std::cerr << "error: --overlap-words must be smaller than --chunk-words\n";
        return kUsageError;
    }
    corpus::Corpus corpus;
    if (!args.cqa_path.empty()) {
        auto triplets = corpus::load_cqa(args.cqa_path);
        auto [kept, dropped] = corpus::clean(triplets);
        for (const auto& [id, reason] : dropped) {
            std::cerr << "warning: dropped triplet " << id << ": " << reason << "\n";
        }
        if (kept.empty()) {
            std::cerr << "error: no usable triplets in " << args.cqa_path << "\n";
            return kRuntimeError;
        }
        corpus = corpus::corpus_from_contexts(kept, !args.no_dedupe);
    } else {
        corpus = corpus::corpus_from_text(args.text_path, args.chunk_words, args.overlap_words);
    }
    text::AnalysisChain chain{!args.no_lowercase, !args.no_stem, {}};
    if (!args.stopword_path.empty()) {
        chain.stopwords = text::load_stopwords(args.stopword_path);
    }
    auto index = sparse::InvertedIndex::build(corpus, std::move(chain));
    for (const auto& w : index.warnings()) std::cerr << "warning: " << w << "\n";
    index.save_file(args.out_path);
    std::cout << "chunks: " << index.doc_count() << "\n"
              << "avg_len: " << format6(index.avg_length()) << "\n"
              << "vocabulary: " << index.vocabulary_size() << "\n";
    return kOk;
}

struct SearchArgs {
    std::string index_path;
    std::string query;
    std::size_t k = 10;
    std::string scorer = "bm25";
    bool phrase = false;
    double k1 = 1.2;
    double b = 0.75;
    std::string idf = "lucene";
};

int cmd_search(const SearchArgs& args) {
    sparse::Bm25Params params;
    params.k1 = args.k1;
    params.b = args.b;
    params.idf_variant =
        args.idf == "paper" ? sparse::IdfVariant::PaperEq3 : sparse::IdfVariant::RobertsonLucene;
    auto index = sparse::InvertedIndex::load_file(args.index_path);
    RankedList ranked;
    try {
        if (args.phrase) {
            ranked = sparse::phrase_search(index, args.query, args.k, params);
        } else if (args.scorer == "tfidf") {
            ranked = sparse::search(index, args.query, args.k, sparse::Scorer::tfidf());
        } else {
            ranked = sparse::search(index, args.query, args.k, sparse::Scorer::bm25_with(params));
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    for (std::size_t i = 0; i < ranked.hits.size(); ++i) {
        std::cout << (i + 1) << "\t" << ranked.hits[i].first << "\t"
                  << format6(ranked.hits[i].second) << "\n";
    }
    return kOk;
}

int cmd_stats(const std::string& cqa_path) {
    auto triplets = corpus::load_cqa(cqa_path);
    auto [kept, dropped] = corpus::clean(triplets);
    for (const auto& [id, reason] : dropped) {
        std::cerr << "warning: dropped triplet " << id << ": " << reason << "\n";
    }
    if (kept.empty()) {
        std::cerr << "error: no usable triplets in " << cqa_path << "\n";
        return kUsageError;
    }
    auto stats = corpus::dataset_stats(kept);
    auto summarize = [](const std::map<std::size_t, std::size_t>& hist) {
        std::size_t lo = hist.begin()->first;
        std::size_t hi = hist.rbegin()->first;
        double total = 0.0;
        double n = 0.0;
        for (const auto& [len, count] : hist) {
            total += static_cast<double>(len * count);
            n += static_cast<double>(count);
        }
        std::ostringstream os;
        os << "min=" << lo << " mean=" << format6(total / n) << " max=" << hi;
        return os.str();
    };
    std::cout << "triplets: " << stats.triplet_count << "\n"
              << "extractive: " << stats.extractive_count << "\n"
              << "abstractive: " << stats.abstractive_count << "\n"
              << "context words: " << summarize(stats.context_length_hist) << "\n"
              << "question words: " << summarize(stats.question_length_hist) << "\n"
              << "answer words: " << summarize(stats.answer_length_hist) << "\n"
              << "top trigrams:\n";
    std::size_t shown = 0;
    for (const auto& [trigram, count] : stats.top_trigrams) {
        if (shown++ == 20) break;
        std::cout << "  " << trigram << "\t" << count << "\n";
    }
    return kOk;
}

struct ScoreArgs {
    std::string prediction;
    std::string reference;
    std::string pairs_path;
    std::string metric = "all";
    std::string out_path;
    std::size_t hashed_dim = 256;
    std::string embeddings_path;
};

int cmd_score(const ScoreArgs& args) {
    auto provider = make_provider(args.hashed_dim, args.embeddings_path);
    std::vector<std::string> wanted = args.metric == "all"
                                          ? bench::known_metric_ids()
                                          : split_csv(args.metric);
    for (const auto& id : wanted) {
        const auto& known = bench::known_metric_ids();
        if (std::find(known.begin(), known.end(), id) == known.end()) {
            std::cerr << "error: unknown metric \"" << id << "\"\n";
            return kUsageError;
        }
    }
    auto score_one = [&](const metrics::ScorePair& pair, const std::string& id) {
        if (id == "token_f1") return metrics::token_f1(pair);
        if (id == "bleu") return metrics::bleu(pair);
        if (id == "rouge1") return metrics::rouge1(pair);
        if (id == "sms") return metrics::sms(pair, *provider);
        if (id == "meteor") return metrics::meteor(pair);
        return metrics::bert_style_score(pair, *provider);
    };
    if (args.pairs_path.empty()) {
        metrics::ScorePair pair{args.prediction, args.reference};
        for (const auto& id : wanted) {
            try {
                auto mv = score_one(pair, id);
                std::cout << mv.name << "\t" << format6(mv.value) << "\n";
                for (const auto& [key, val] : mv.components) {
                    std::cout << mv.name << "." << key << "\t" << format6(val) << "\n";
                }
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << id << ": " << e.what() << "\n";
                return kUsageError;
            }
        }
        return kOk;
    }
    std::vector<std::string> ids;
    auto pairs = load_pairs(args.pairs_path, &ids);
    if (pairs.empty()) {
        std::cerr << "error: no pairs in " << args.pairs_path << "\n";
        return kUsageError;
    }
    std::string csv = "id,metric,value,components\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (const auto& id : wanted) {
            std::string value = "error";
            std::string components;
            try {
                auto mv = score_one(pairs[i], id);
                value = format6(mv.value);
                for (const auto& [key, val] : mv.components) {
                    if (!components.empty()) components += ";";
                    components += key + "=" + format6(val);
                }
            } catch (const std::invalid_argument&) {
            }
            csv += ids[i] + "," + id + "," + value + "," + components + "\n";
        }
    }
    write_output(args.out_path, csv);
    return kOk;
}

struct BenchRetrievalArgs {
    std::string cqa_path;
    std::string retrievers = "tfidf,bm25,engine,flat_dot,flat_cosine,forest";
    std::string k_list = "1,3,5,10";
    std::string metric = "bert";
    std::string format = "csv";
    std::string out_path;
    std::size_t hashed_dim = 256;
    std::string embeddings_path;
    double k1 = 1.2;
    double b = 0.75;
    std::size_t trees = dense::RpForest::kDefaultTrees;
    std::size_t leaf_size = dense::RpForest::kDefaultLeafSize;
    std::int64_t search_k = -1;
    std::uint64_t seed = 42;
    unsigned threads = 0;
};

int cmd_bench_retrieval(const BenchRetrievalArgs& args) {
    bench::RetrievalBenchConfig config;
    config.retrievers.clear();
    for (const auto& name : split_csv(args.retrievers)) {
        auto r = bench::retriever_from_name(name);
        if (!r) {
            std::cerr << "error: unknown retriever \"" << name << "\"\n";
            return kUsageError;
        }
        config.retrievers.push_back(*r);
    }
    if (config.retrievers.empty()) {
        std::cerr << "error: no retrievers selected\n";
        return kUsageError;
    }
    config.k_values.clear();
    for (const auto& ks : split_csv(args.k_list)) {
        long v = std::strtol(ks.c_str(), nullptr, 10);
        if (v <= 0) {
            std::cerr << "error: k values must be positive integers\n";
            return kUsageError;
        }
        config.k_values.push_back(static_cast<std::size_t>(v));
    }
    if (args.metric != "bert" && args.metric != "token_f1") {
        std::cerr << "error: retrieval bench metric must be \"bert\" or \"token_f1\"\n";
        return kUsageError;
    }
    config.metric = args.metric;
    config.bm25.k1 = args.k1;
    config.bm25.b = args.b;
    config.n_trees = args.trees;
    config.leaf_size = args.leaf_size;
    config.search_k = args.search_k;
    config.seed = args.seed;
    config.threads = args.threads;

    auto triplets = corpus::load_cqa(args.cqa_path);
    auto [kept, dropped] = corpus::clean(triplets);
    for (const auto& [id, reason] : dropped) {
        std::cerr << "warning: dropped triplet " << id << ": " << reason << "\n";
    }
    if (kept.empty()) {
        std::cerr << "error: no usable triplets in " << args.cqa_path << "\n";
        return kUsageError;
    }
    auto corpus = corpus::corpus_from_contexts(kept, /*dedupe=*/true);
    std::vector<bench::BenchQuery> queries;
    queries.reserve(kept.size());
    for (const auto& t : kept) queries.push_back({t.question, t.context});

    auto provider = make_provider(args.hashed_dim, args.embeddings_path);
    auto report = bench::run_retrieval_bench(corpus, queries, config, *provider);
    for (const auto& s : report.stats) {
        std::cerr << bench::retriever_name(s.retriever) << ": " << format6(s.seconds)
                  << "s, zero-score queries: " << s.zero_score_queries << "\n";
    }
    auto format = args.format == "markdown" ? bench::ReportFormat::Markdown
                                            : bench::ReportFormat::Csv;
    std::string rendered = bench::render_report(report, format);
    std::string preamble = format == bench::ReportFormat::Csv
                               ? "# seed=" + std::to_string(report.seed) + "\n"
                               : "seed: " + std::to_string(report.seed) + "\n\n";
    write_output(args.out_path, preamble + rendered);
    return kOk;
}

struct BenchGenerationArgs {
    std::string pairs_path;
    std::string post_path;
    std::string metric_list = "token_f1,bleu,rouge1,sms,meteor,bert";
    std::string format = "csv";
    std::string out_path;
    std::size_t hashed_dim = 256;
    std::string embeddings_path;
};

int cmd_bench_generation(const BenchGenerationArgs& args) {
    auto metric_ids = split_csv(args.metric_list);
    const auto& known = bench::known_metric_ids();
    for (const auto& id : metric_ids) {
        if (std::find(known.begin(), known.end(), id) == known.end()) {
            std::cerr << "error: unknown metric \"" << id << "\"\n";
            return kUsageError;
        }
    }
    auto provider = make_provider(args.hashed_dim, args.embeddings_path);
    auto pairs = load_pairs(args.pairs_path);
    if (pairs.empty()) {
        std::cerr << "error: no pairs in " << args.pairs_path << "\n";
        return kUsageError;
    }
    auto format = args.format == "markdown" ? bench::ReportFormat::Markdown
                                            : bench::ReportFormat::Csv;
    auto result = bench::run_generation_eval(pairs, metric_ids, *provider);
    if (args.post_path.empty()) {
        write_output(args.out_path, bench::render_report(result, format));
        return kOk;
    }
    auto post_pairs = load_pairs(args.post_path);
    if (post_pairs.empty()) {
        std::cerr << "error: no pairs in " << args.post_path << "\n";
        return kUsageError;
    }
    auto post = bench::run_generation_eval(post_pairs, metric_ids, *provider);
    write_output(args.out_path, bench::render_report(bench::compare_runs(result, post), format));
    return kOk;
}

struct LoraDemoArgs {
    long d_in = 8;
    long d_out = 8;
    long rank = 2;
    long steps = 1000;
    double lr = 0.1;
    std::uint64_t seed = 42;
};

int cmd_lora_demo(const LoraDemoArgs& args) {
    std::mt19937_64 rng(args.seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0; };  // [-1, 1)
    lora::Matrix base(args.d_out, args.d_in);
    for (long i = 0; i < args.d_out; ++i) {
        for (long j = 0; j < args.d_in; ++j) base(i, j) = uniform();
    }
    // target = base + a low-rank perturbation the adapter can represent
    lora::Matrix true_a(args.d_out, args.rank);
    lora::Matrix true_b(args.rank, args.d_in);
    for (long i = 0; i < args.d_out; ++i) {
        for (long j = 0; j < args.rank; ++j) true_a(i, j) = uniform();
    }
    for (long i = 0; i < args.rank; ++i) {
        for (long j = 0; j < args.d_in; ++j) true_b(i, j) = uniform();
    }
    lora::Matrix target = base + true_a * true_b;

    lora::LoraLinear layer(base, args.rank, args.seed);
    auto probe_loss = [&] {
        std::mt19937_64 probe_rng(args.seed ^ 0xabcdef);
        double loss = 0.0;
        const int batch = 64;
        for (int s = 0; s < batch; ++s) {
            lora::Vector x(args.d_in);
            for (long j = 0; j < args.d_in; ++j) {
                x(j) = static_cast<double>(probe_rng() >> 11) * 0x1.0p-52 - 1.0;
            }
            loss += (layer.forward(x) - target * x).squaredNorm() /
                    static_cast<double>(args.d_out);
        }
        return loss / batch;
    };
    double initial = probe_loss();
    for (long step = 0; step < args.steps; ++step) {
        lora::Vector x(args.d_in);
        for (long j = 0; j < args.d_in; ++j) x(j) = uniform();
        lora::Vector err = layer.forward(x) - target * x;
        lora::Vector upstream = 2.0 * err / static_cast<double>(args.d_out);
        layer.apply_update(layer.grad(x, upstream), args.lr);
    }
    double final_loss = probe_loss();

    auto count = lora::param_count({{args.d_out, args.d_in}}, args.rank);
    std::cout << "adapter: " << args.d_out << "x" << args.d_in << " rank " << args.rank << "\n"
              << "trainable parameters: " << count.trainable << " of "
              << args.d_out * args.d_in << " base ("
              << format6(lora::trainable_percentage(static_cast<double>(count.trainable),
                                                    static_cast<double>(args.d_out * args.d_in)))
              << "%)\n"
              << "initial loss: " << format6(initial) << "\n"
              << "final loss: " << format6(final_loss) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ragkit: retrieval and text-evaluation toolkit for regulatory QA corpora"};
    app.require_subcommand(1);

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "Build a sparse index from a corpus");
    auto* opt_cqa = index_cmd->add_option("--cqa", index_args.cqa_path, "CQA JSON dataset")
                        ->check(CLI::ExistingFile);
    auto* opt_text = index_cmd->add_option("--text", index_args.text_path, "Raw UTF-8 text file")
                         ->check(CLI::ExistingFile);
    opt_cqa->excludes(opt_text);
    opt_text->excludes(opt_cqa);
    index_cmd->add_option("--chunk-words", index_args.chunk_words, "Words per chunk (text mode)")
        ->check(CLI::PositiveNumber);
    index_cmd->add_option("--overlap-words", index_args.overlap_words,
                          "Overlapping words between chunks (text mode)");
    index_cmd->add_option("--out", index_args.out_path, "Index output path")->required();
    index_cmd->add_option("--stopwords", index_args.stopword_path, "Stopword file, one per line")
        ->check(CLI::ExistingFile);
    index_cmd->add_flag("--no-stem", index_args.no_stem, "Disable stemming");
    index_cmd->add_flag("--no-lowercase", index_args.no_lowercase, "Disable case folding");
    index_cmd->add_flag("--no-dedupe", index_args.no_dedupe, "Keep duplicate contexts");

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "Query a sparse index");
    search_cmd->add_option("--index", search_args.index_path, "Index file")
        ->required()
        ->check(CLI::ExistingFile);
    search_cmd->add_option("--query", search_args.query, "Query text")->required();
    search_cmd->add_option("--k", search_args.k, "Results to return")->check(CLI::PositiveNumber);
    search_cmd->add_option("--scorer", search_args.scorer, "bm25 or tfidf")
        ->check(CLI::IsMember({"bm25", "tfidf"}));
    search_cmd->add_flag("--phrase", search_args.phrase, "Require consecutive phrase positions");
    search_cmd->add_option("--k1", search_args.k1, "BM25 k1")->check(CLI::NonNegativeNumber);
    search_cmd->add_option("--b", search_args.b, "BM25 b")->check(CLI::Range(0.0, 1.0));
    search_cmd->add_option("--idf", search_args.idf, "IDF variant: lucene or paper")
        ->check(CLI::IsMember({"lucene", "paper"}));

    std::string stats_path;
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics for a CQA file");
    stats_cmd->add_option("--cqa", stats_path, "CQA JSON dataset")
        ->required()
        ->check(CLI::ExistingFile);

    ScoreArgs score_args;
    auto* score_cmd = app.add_subcommand("score", "Score prediction/reference pairs");
    auto* opt_pred = score_cmd->add_option("--prediction", score_args.prediction, "Prediction text");
    auto* opt_ref = score_cmd->add_option("--reference", score_args.reference, "Reference text");
    auto* opt_pairs = score_cmd->add_option("--pairs", score_args.pairs_path,
                                            "JSONL file of {id, prediction, reference}")
                          ->check(CLI::ExistingFile);
    opt_pairs->excludes(opt_pred)->excludes(opt_ref);
    opt_pred->needs(opt_ref);
    score_cmd->add_option("--metric", score_args.metric,
                          "Comma-separated metric ids, or \"all\"");
    score_cmd->add_option("--out", score_args.out_path, "Output CSV (batch mode); default stdout");
    auto* score_dim = score_cmd->add_option("--hashed-dim", score_args.hashed_dim,
                                            "Hashed n-gram embedding dimension")
                          ->check(CLI::PositiveNumber);
    auto* score_emb = score_cmd->add_option("--embeddings", score_args.embeddings_path,
                                            "File-backed embeddings (JSONL)")
                          ->check(CLI::ExistingFile);
    score_dim->excludes(score_emb);
    score_emb->excludes(score_dim);

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark harnesses");
    bench_cmd->require_subcommand(1);

    BenchRetrievalArgs br;
    auto* bench_ret = bench_cmd->add_subcommand("retrieval", "Top-k retrieval benchmark");
    bench_ret->add_option("--cqa", br.cqa_path, "CQA JSON dataset")
        ->required()
        ->check(CLI::ExistingFile);
    bench_ret->add_option("--retrievers", br.retrievers, "Comma-separated retriever names");
    bench_ret->add_option("--k", br.k_list, "Comma-separated top-k cutoffs");
    bench_ret->add_option("--metric", br.metric, "bert or token_f1");
    bench_ret->add_option("--format", br.format, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    bench_ret->add_option("--out", br.out_path, "Report path; default stdout");
    auto* br_dim = bench_ret->add_option("--hashed-dim", br.hashed_dim,
                                         "Hashed n-gram embedding dimension")
                       ->check(CLI::PositiveNumber);
    auto* br_emb = bench_ret->add_option("--embeddings", br.embeddings_path,
                                         "File-backed embeddings (JSONL)")
                       ->check(CLI::ExistingFile);
    br_dim->excludes(br_emb);
    br_emb->excludes(br_dim);
    bench_ret->add_option("--k1", br.k1, "BM25 k1")->check(CLI::NonNegativeNumber);
    bench_ret->add_option("--b", br.b, "BM25 b")->check(CLI::Range(0.0, 1.0));
    bench_ret->add_option("--trees", br.trees, "Forest tree count")->check(CLI::PositiveNumber);
    bench_ret->add_option("--leaf-size", br.leaf_size, "Forest leaf size")
        ->check(CLI::Range(static_cast<std::size_t>(2), std::numeric_limits<std::size_t>::max()));
    bench_ret->add_option("--search-k", br.search_k, "Candidates to pool; default trees*k");
    bench_ret->add_option("--seed", br.seed, "Seed for all randomness");
    bench_ret->add_option("--threads", br.threads, "Worker threads; 0 = all cores");

    BenchGenerationArgs bg;
    auto* bench_gen = bench_cmd->add_subcommand("generation", "Average metrics over pairs");
    bench_gen->add_option("--pairs", bg.pairs_path, "JSONL pairs file")
        ->required()
        ->check(CLI::ExistingFile);
    bench_gen->add_option("--post", bg.post_path,
                          "Second JSONL pairs file; renders a pre/post comparison")
        ->check(CLI::ExistingFile);
    bench_gen->add_option("--metrics", bg.metric_list, "Comma-separated metric ids");
    bench_gen->add_option("--format", bg.format, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    bench_gen->add_option("--out", bg.out_path, "Report path; default stdout");
    auto* bg_dim = bench_gen->add_option("--hashed-dim", bg.hashed_dim,
                                         "Hashed n-gram embedding dimension")
                       ->check(CLI::PositiveNumber);
    auto* bg_emb = bench_gen->add_option("--embeddings", bg.embeddings_path,
                                         "File-backed embeddings (JSONL)")
                       ->check(CLI::ExistingFile);
    bg_dim->excludes(bg_emb);
    bg_emb->excludes(bg_dim);

    LoraDemoArgs ld;
    auto* lora_cmd = app.add_subcommand("lora-demo", "Train a toy low-rank adapter");
    lora_cmd->add_option("--d-in", ld.d_in, "Input width")->check(CLI::PositiveNumber);
    lora_cmd->add_option("--d-out", ld.d_out, "Output width")->check(CLI::PositiveNumber);
    lora_cmd->add_option("--rank", ld.rank, "Adapter rank")->check(CLI::PositiveNumber);
    lora_cmd->add_option("--steps", ld.steps, "Training steps")->check(CLI::PositiveNumber);
    lora_cmd->add_option("--lr", ld.lr, "Learning rate")->check(CLI::PositiveNumber);
    lora_cmd->add_option("--seed", ld.seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (index_cmd->parsed()) {
            if (index_args.cqa_path.empty() && index_args.text_path.empty()) {
                std::cerr << "error: one of --cqa or --text is required\n";
                return kUsageError;
            }
            return cmd_index(index_args);
        }
        if (search_cmd->parsed()) return cmd_search(search_args);
        if (stats_cmd->parsed()) return cmd_stats(stats_path);
        if (score_cmd->parsed()) {
            if (score_args.pairs_path.empty() && opt_ref->count() == 0) {
                std::cerr << "error: provide --prediction/--reference or --pairs\n";
                return kUsageError;
            }
            return cmd_score(score_args);
        }
        if (bench_ret->parsed()) return cmd_bench_retrieval(br);
        if (bench_gen->parsed()) return cmd_bench_generation(bg);
        if (lora_cmd->parsed()) return cmd_lora_demo(ld);
    } catch (const corpus::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const corpus::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kOk;
}
