#include "ragkit/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace ragkit::bench {

namespace {

struct ScoreTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool zero = false;
};

ScoreTriple score_prediction(const std::string& metric, const std::string& prediction,
                             const std::string& reference,
                             const dense::EmbeddingProvider& provider) {
    ScoreTriple out;
    if (prediction.empty()) {
        out.zero = true;
        return out;
    }
    try {
        metrics::MetricValue mv;
        if (metric == "token_f1") {
            mv = metrics::token_f1({prediction, reference});
        } else if (metric == "bert") {
            mv = metrics::bert_style_score({prediction, reference}, provider);
        } else {
            throw std::invalid_argument("unsupported retrieval-bench metric: " + metric);
        }
        out.precision = mv.components.at("precision");
        out.recall = mv.components.at("recall");
        out.f1 = mv.value;
    } catch (const std::invalid_argument&) {
        out = ScoreTriple{};
        out.zero = true;
    } catch (const std::out_of_range&) {  // file-backed provider miss
        out = ScoreTriple{};
        out.zero = true;
    }
    return out;
}

// Token vectors with hoisted norms, cached so the bert metric embeds
// every chunk and reference exactly once per bench run.
struct CachedSet {
    std::vector<dense::Embedding> vectors;
    std::vector<double> norms;

    static CachedSet from_text(const std::string& text, const dense::EmbeddingProvider& provider) {
        CachedSet set;
        try {
            auto built = metrics::make_token_embedding_set(text, provider);
            set.vectors = std::move(built.vectors);
        } catch (const std::invalid_argument&) {
            return set;  // no usable tokens
        } catch (const std::out_of_range&) {
            return set;  // file-backed provider miss
        }
        set.norms.reserve(set.vectors.size());
        for (const auto& v : set.vectors) set.norms.push_back(dense::l2_norm(v));
        return set;
    }
};

// Greedy-matching scores of every ranked prefix against one reference,
// arithmetically identical to bert_style_score of the concatenated
// prefix text: each token pair is visited once, precision sums run in
// token order and recall maxima accumulate monotonically with k.
std::vector<ScoreTriple> bert_prefix_scores(const std::vector<const CachedSet*>& ranked_chunks,
                                            const CachedSet& ref,
                                            const std::vector<std::size_t>& k_values) {
    std::vector<ScoreTriple> out;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> ref_best(ref.vectors.size(), neg_inf);
    double precision_sum = 0.0;
    std::size_t pred_tokens = 0;
    std::size_t chunk_idx = 0;
    for (std::size_t k : k_values) {
        for (; chunk_idx < std::min(k, ranked_chunks.size()); ++chunk_idx) {
            const CachedSet& chunk = *ranked_chunks[chunk_idx];
            for (std::size_t i = 0; i < chunk.vectors.size(); ++i) {
                double best = neg_inf;
                for (std::size_t j = 0; j < ref.vectors.size(); ++j) {
                    double cos = dense::dot(chunk.vectors[i], ref.vectors[j]) /
                                 (chunk.norms[i] * ref.norms[j]);
                    best = std::max(best, cos);
                    ref_best[j] = std::max(ref_best[j], cos);
                }
                precision_sum += best;
            }
            pred_tokens += chunk.vectors.size();
        }
        ScoreTriple st;
        if (pred_tokens == 0 || ref.vectors.empty()) {
            st.zero = true;
        } else {
            st.precision = precision_sum / static_cast<double>(pred_tokens);
            double recall_sum = 0.0;
            for (double best : ref_best) recall_sum += best;
            st.recall = recall_sum / static_cast<double>(ref.vectors.size());
            st.f1 = st.precision + st.recall > 0.0
                        ? 2.0 * st.precision * st.recall / (st.precision + st.recall)
                        : 0.0;
        }
        out.push_back(st);
    }
    return out;
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string format_general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    unsigned n = threads != 0 ? threads : std::thread::hardware_concurrency();
    if (n <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) break;
            fn(i);
        }
    };
    unsigned spawn = std::min<std::size_t>(n, count);
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

std::string retriever_name(Retriever r) {
    switch (r) {
        case Retriever::TfIdf: return "tfidf";
        case Retriever::Bm25: return "bm25";
        case Retriever::Engine: return "engine";
        case Retriever::FlatDot: return "flat_dot";
        case Retriever::FlatCosine: return "flat_cosine";
        case Retriever::Forest: return "forest";
    }
    return "?";
}

std::optional<Retriever> retriever_from_name(std::string_view name) {
    for (Retriever r : {Retriever::TfIdf, Retriever::Bm25, Retriever::Engine, Retriever::FlatDot,
                        Retriever::FlatCosine, Retriever::Forest}) {
        if (retriever_name(r) == name) return r;
    }
    return std::nullopt;
}

const std::vector<std::string>& known_metric_ids() {
    static const std::vector<std::string> ids{"token_f1", "bleu", "rouge1", "sms", "meteor", "bert"};
    return ids;
}

RetrievalBenchReport run_retrieval_bench(const corpus::Corpus& corpus,
                                         const std::vector<BenchQuery>& queries,
                                         const RetrievalBenchConfig& config,
                                         const dense::EmbeddingProvider& provider) {
    if (queries.empty()) throw std::invalid_argument("run_retrieval_bench: no queries");
    for (std::size_t i = 0; i < config.k_values.size(); ++i) {
        if (config.k_values[i] == 0 ||
            (i > 0 && config.k_values[i] <= config.k_values[i - 1])) {
            throw std::invalid_argument("run_retrieval_bench: k values must be positive and strictly increasing");
        }
    }
    for (const auto& q : queries) {
        if (q.reference_context.empty()) {
            throw std::invalid_argument("run_retrieval_bench: query with empty reference context");
        }
    }

    std::unordered_map<std::string, const std::string*> text_of;
    for (const auto& chunk : corpus.chunks) text_of.emplace(chunk.id, &chunk.text);

    bool want_plain = false;
    bool want_engine = false;
    bool want_dense = false;
    bool want_forest = false;
    for (Retriever r : config.retrievers) {
        want_plain |= r == Retriever::TfIdf || r == Retriever::Bm25;
        want_engine |= r == Retriever::Engine;
        want_dense |= r == Retriever::FlatDot || r == Retriever::FlatCosine || r == Retriever::Forest;
        want_forest |= r == Retriever::Forest;
    }

    std::unique_ptr<sparse::InvertedIndex> plain_index;
    std::unique_ptr<sparse::InvertedIndex> engine_index;
    if (want_plain) {
        plain_index = std::make_unique<sparse::InvertedIndex>(
            sparse::InvertedIndex::build(corpus, text::AnalysisChain{true, false, {}}));
    }
    if (want_engine) {
        engine_index = std::make_unique<sparse::InvertedIndex>(
            sparse::InvertedIndex::build(corpus, text::AnalysisChain::for_index()));
    }
    std::unique_ptr<dense::FlatIndex> flat;
    std::unique_ptr<dense::RpForest> forest;
    if (want_dense) {
        flat = std::make_unique<dense::FlatIndex>(dense::FlatIndex::build(corpus, provider));
        if (flat->size() == 0) throw std::invalid_argument("run_retrieval_bench: every chunk embeds to zero");
        if (want_forest) {
            forest = std::make_unique<dense::RpForest>(
                dense::RpForest::build(*flat, config.n_trees, config.leaf_size, config.seed));
        }
    }

    const std::size_t k_max = config.k_values.back();

    std::unordered_map<std::string, CachedSet> chunk_cache;
    std::vector<CachedSet> ref_cache;
    if (config.metric == "bert") {
        for (const auto& chunk : corpus.chunks) {
            chunk_cache.emplace(chunk.id, CachedSet::from_text(chunk.text, provider));
        }
        ref_cache.reserve(queries.size());
        for (const auto& q : queries) {
            ref_cache.push_back(CachedSet::from_text(q.reference_context, provider));
        }
    }

    RetrievalBenchReport report;
    report.query_count = queries.size();
    report.seed = config.seed;

    for (Retriever retr : config.retrievers) {
        auto t0 = std::chrono::steady_clock::now();

        // per query, per k-slot: score triple
        std::vector<std::vector<ScoreTriple>> cells(queries.size());
        std::vector<char> zero_flags(queries.size(), 0);
        auto evaluate_query = [&](std::size_t qi) {
            const BenchQuery& q = queries[qi];
            RankedList ranked;
            try {
                switch (retr) {
                    case Retriever::TfIdf:
                        ranked = sparse::search(*plain_index, q.question, k_max,
                                                sparse::Scorer::tfidf());
                        break;
                    case Retriever::Bm25:
                        ranked = sparse::search(*plain_index, q.question, k_max,
                                                sparse::Scorer::bm25_with(config.bm25));
                        break;
                    case Retriever::Engine:
                        ranked = sparse::search(*engine_index, q.question, k_max,
                                                sparse::Scorer::bm25_with(config.bm25));
                        break;
                    case Retriever::FlatDot:
                        ranked = dense::flat_search(*flat, provider.embed(q.question), k_max,
                                                    dense::SimilarityMetric::Dot);
                        break;
                    case Retriever::FlatCosine:
                        ranked = dense::flat_search(*flat, provider.embed(q.question), k_max,
                                                    dense::SimilarityMetric::Cosine);
                        break;
                    case Retriever::Forest:
                        ranked = dense::forest_search(*forest, *flat, provider.embed(q.question),
                                                      k_max, config.search_k);
                        break;
                }
            } catch (const std::invalid_argument&) {
                ranked = RankedList{};  // query unusable for this retriever
            } catch (const std::out_of_range&) {
                ranked = RankedList{};  // file-backed provider miss
            }
            std::vector<ScoreTriple> row;
            if (config.metric == "bert") {
                std::vector<const CachedSet*> ranked_chunks;
                ranked_chunks.reserve(std::min(k_max, ranked.hits.size()));
                for (std::size_t i = 0; i < std::min(k_max, ranked.hits.size()); ++i) {
                    ranked_chunks.push_back(&chunk_cache.at(ranked.hits[i].first));
                }
                row = bert_prefix_scores(ranked_chunks, ref_cache[qi], config.k_values);
            } else {
                row.reserve(config.k_values.size());
                for (std::size_t k : config.k_values) {
                    std::string prediction;
                    std::size_t take = std::min(k, ranked.hits.size());
                    for (std::size_t i = 0; i < take; ++i) {
                        if (i > 0) prediction += "\n";
                        prediction += *text_of.at(ranked.hits[i].first);
                    }
                    row.push_back(score_prediction(config.metric, prediction,
                                                   q.reference_context, provider));
                }
            }
            bool any_zero = false;
            for (const auto& st : row) any_zero |= st.zero;
            cells[qi] = std::move(row);
            zero_flags[qi] = any_zero ? 1 : 0;
        };
        parallel_for(queries.size(), config.threads, evaluate_query);

        RetrieverStats stats{retr, 0.0, 0};
        for (char z : zero_flags) stats.zero_score_queries += z;
        for (std::size_t ki = 0; ki < config.k_values.size(); ++ki) {
            RetrievalRow row;
            row.retriever = retr;
            row.k = config.k_values[ki];
            for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                row.precision += cells[qi][ki].precision;
                row.recall += cells[qi][ki].recall;
                row.f1 += cells[qi][ki].f1;
            }
            auto n = static_cast<double>(queries.size());
            row.precision /= n;
            row.recall /= n;
            row.f1 /= n;
            report.rows.push_back(row);
        }
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.stats.push_back(stats);
    }
    return report;
}

GenerationEvalResult run_generation_eval(const std::vector<metrics::ScorePair>& pairs,
                                         const std::vector<std::string>& metric_ids,
                                         const dense::EmbeddingProvider& provider) {
    if (pairs.empty()) throw std::invalid_argument("run_generation_eval: no pairs");
    GenerationEvalResult result;
    result.pair_count = pairs.size();
    for (const auto& id : metric_ids) {
        std::vector<metrics::MetricValue> values;
        std::size_t excluded = 0;
        for (const auto& pair : pairs) {
            try {
                if (id == "token_f1") {
                    values.push_back(metrics::token_f1(pair));
                } else if (id == "bleu") {
                    values.push_back(metrics::bleu(pair));
                } else if (id == "rouge1") {
                    values.push_back(metrics::rouge1(pair));
                } else if (id == "sms") {
                    values.push_back(metrics::sms(pair, provider));
                } else if (id == "meteor") {
                    values.push_back(metrics::meteor(pair));
                } else if (id == "bert") {
                    values.push_back(metrics::bert_style_score(pair, provider));
                } else {
                    throw std::domain_error("unknown metric id: " + id);
                }
            } catch (const std::invalid_argument&) {
                ++excluded;
            } catch (const std::out_of_range&) {
                ++excluded;  // file-backed provider misses
            }
        }
        if (values.empty()) {
            throw std::runtime_error("metric " + id + " produced no scores (all " +
                                     std::to_string(excluded) + " pairs excluded)");
        }
        result.averages.emplace(id, metrics::average(values));
        result.excluded.emplace(id, excluded);
    }
    return result;
}

double improvement_pct(double pre, double post, Direction direction) {
    if (pre == 0.0) {
        throw std::invalid_argument("improvement_pct: undefined for pre == 0");
    }
    double delta = direction == Direction::HigherBetter ? post - pre : pre - post;
    return 100.0 * delta / pre;
}

Direction metric_direction(std::string_view metric_id) {
    return metric_id == "sms" ? Direction::LowerBetter : Direction::HigherBetter;
}

ComparisonReport compare_runs(const GenerationEvalResult& pre, const GenerationEvalResult& post) {
    ComparisonReport report;
    for (const auto& [id, pre_value] : pre.averages) {
        auto it = post.averages.find(id);
        if (it == post.averages.end()) {
            throw std::invalid_argument("compare_runs: metric " + id + " missing from post run");
        }
        ComparisonRow row;
        row.metric = id;
        row.pre = pre_value.value;
        row.post = it->second.value;
        row.improvement = improvement_pct(row.pre, row.post, metric_direction(id));
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string render_report(const RetrievalBenchReport& report, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::Csv) {
        out += "retriever,k,precision,recall,f1\n";
        for (const auto& row : report.rows) {
            out += retriever_name(row.retriever) + "," + std::to_string(row.k) + "," +
                   format_fixed(row.precision, 3) + "," + format_fixed(row.recall, 3) + "," +
                   format_fixed(row.f1, 3) + "\n";
        }
    } else {
        out += "| retriever | k | precision | recall | f1 |\n";
        out += "|---|---|---|---|---|\n";
        for (const auto& row : report.rows) {
            out += "| " + retriever_name(row.retriever) + " | " + std::to_string(row.k) + " | " +
                   format_fixed(row.precision, 3) + " | " + format_fixed(row.recall, 3) + " | " +
                   format_fixed(row.f1, 3) + " |\n";
        }
    }
    return out;
}

std::string render_report(const ComparisonReport& report, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::Csv) {
        out += "metric,pre,post,improvement_pct\n";
        for (const auto& row : report.rows) {
            out += row.metric + "," + format_general(row.pre) + "," + format_general(row.post) +
                   "," + format_fixed(row.improvement, 2) + "\n";
        }
    } else {
        out += "| metric | pre | post | improvement (%) |\n";
        out += "|---|---|---|---|\n";
        for (const auto& row : report.rows) {
            out += "| " + row.metric + " | " + format_general(row.pre) + " | " +
                   format_general(row.post) + " | " + format_fixed(row.improvement, 2) + " |\n";
        }
    }
    return out;
}

std::string render_report(const GenerationEvalResult& result, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::Csv) {
        out += "metric,average,excluded_pairs\n";
        for (const auto& [id, mv] : result.averages) {
            out += id + "," + format_general(mv.value) + "," +
                   std::to_string(result.excluded.at(id)) + "\n";
        }
    } else {
        out += "| metric | average | excluded pairs |\n";
        out += "|---|---|---|\n";
        for (const auto& [id, mv] : result.averages) {
            out += "| " + id + " | " + format_general(mv.value) + " | " +
                   std::to_string(result.excluded.at(id)) + " |\n";
        }
    }
    return out;
}

}  // namespace ragkit::bench
