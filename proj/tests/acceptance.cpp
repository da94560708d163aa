// Acceptance suite: one self-contained check per shipping criterion,
// printed as a pass/fail line. Returns the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "ragkit/bench.hpp"
#include "ragkit/corpus.hpp"
#include "ragkit/dense.hpp"
#include "ragkit/lora.hpp"
#include "ragkit/metrics.hpp"
#include "ragkit/sparse.hpp"
#include "ragkit/textkit.hpp"

using namespace ragkit;

namespace {

const std::string kFixtures = RAGKIT_FIXTURE_DIR;
const std::string kCli = RAGKIT_CLI_PATH;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args) {
    std::string cmd = kCli + " " + args + " >/dev/null 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Deterministic standard normal, independent of library distributions.
double gaussian(std::mt19937_64& rng) {
    double u1;
    do {
        u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    } while (u1 == 0.0);
    double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

dense::Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
    dense::Embedding v(dim);
    double norm = 0.0;
    do {
        for (auto& x : v) x = gaussian(rng);
        norm = dense::l2_norm(v);
    } while (norm == 0.0);
    for (auto& x : v) x /= norm;
    return v;
}

// ---------------------------------------------------------------------------
// 1. Metric oracle suite. Expected values mirror docs/metrics_worksheet.md.

Outcome criterion_metric_oracles() {
    struct Row {
        const char* pred;
        const char* ref;
        double f1;
        double bleu;
        double rouge;
        double meteor;
    };
    const Row rows[] = {
        {"the fire door", "the fire door", 1.0, 1.0, 1.0, 53.0 / 54.0},
        {"a b c", "a b c d", 6.0 / 7.0, 0.75, 0.75, (6.0 / 7.0) * (53.0 / 54.0)},
        {"the the door", "the door", 0.8, std::sqrt(1.0 / 3.0), 1.0, 0.4},
        {"fire door", "fire exit", 0.5, 0.0, 0.5, 0.25},
        {"doors", "door", 0.0, 0.0, 0.0, 0.5},
        {"", "door", 0.0, 0.0, 0.0, 0.0},
        {"exit stairs lead outside", "exit stairs lead outside quickly", 8.0 / 9.0, 0.8, 0.8,
         (8.0 / 9.0) * (127.0 / 128.0)},
        {"b a", "a b", 1.0, 0.0, 1.0, 0.5},
        {"fire resistance rating required", "required fire resistance rating", 1.0,
         std::sqrt(2.0 / 3.0), 1.0, 0.9375},
        {"a a a", "a", 0.5, 0.0, 1.0, 0.25},
        {"main exit door", "fire exit", 0.4, 0.0, 0.5, 0.2},
        {"stairways require handrails", "stairways require handrails on both sides", 2.0 / 3.0,
         0.5, 0.5, (2.0 / 3.0) * (53.0 / 54.0)},
    };
    Outcome out;
    int i = 0;
    for (const auto& row : rows) {
        metrics::ScorePair pair{row.pred, row.ref};
        auto tag = [&](const char* metric) {
            return "pair " + std::to_string(i) + " " + metric;
        };
        out.require(std::abs(metrics::token_f1(pair).value - row.f1) < 1e-9, tag("token_f1"));
        out.require(std::abs(metrics::bleu(pair).value - row.bleu) < 1e-9, tag("bleu"));
        out.require(std::abs(metrics::rouge1(pair).value - row.rouge) < 1e-9, tag("rouge1"));
        out.require(std::abs(metrics::meteor(pair).value - row.meteor) < 1e-9, tag("meteor"));
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// 2. SMS equals a brute-force transport oracle on short sentences.

double transport_oracle(const std::vector<std::vector<double>>& cost) {
    std::size_t m = cost.size();
    std::size_t n = cost[0].size();
    std::vector<long> col_left(n, static_cast<long>(m));
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, long, double)> fill =
        [&](std::size_t row, std::size_t col, long remaining, double acc) {
            if (acc >= best) return;
            if (row == m) {
                best = acc;
                return;
            }
            if (col == n) {
                if (remaining == 0) fill(row + 1, 0, static_cast<long>(n), acc);
                return;
            }
            long max_here = std::min(remaining, col_left[col]);
            for (long put = 0; put <= max_here; ++put) {
                col_left[col] -= put;
                fill(row, col + 1, remaining - put, acc + static_cast<double>(put) * cost[row][col]);
                col_left[col] += put;
            }
        };
    fill(0, 0, static_cast<long>(n), 0.0);
    return best / static_cast<double>(m * n);
}

Outcome criterion_sms_exactness() {
    static const std::vector<std::string> vocab = {
        "fire", "door", "doors", "exit", "stair", "guard", "rating",
        "width", "minimum", "shall", "building", "storey", "ramp", "roof",
    };
    std::mt19937_64 rng(2024);
    dense::HashedNGramProvider provider(256);
    auto sentence = [&] {
        std::size_t len = rng() % 4 + 1;
        std::string s;
        for (std::size_t i = 0; i < len; ++i) {
            if (i > 0) s += " ";
            s += vocab[rng() % vocab.size()];
        }
        return s;
    };
    Outcome out;
    for (int trial = 0; trial < 200; ++trial) {
        std::string pred = sentence();
        std::string ref = sentence();
        auto pred_set = metrics::make_token_embedding_set(pred, provider);
        auto ref_set = metrics::make_token_embedding_set(ref, provider);
        std::vector<std::vector<double>> cost(pred_set.vectors.size(),
                                              std::vector<double>(ref_set.vectors.size()));
        for (std::size_t i = 0; i < pred_set.vectors.size(); ++i) {
            for (std::size_t j = 0; j < ref_set.vectors.size(); ++j) {
                cost[i][j] = std::max(0.0, 1.0 - dense::cosine(pred_set.vectors[i],
                                                               ref_set.vectors[j]));
            }
        }
        double got = metrics::sms({pred, ref}, provider).value;
        double want = transport_oracle(cost);
        out.require(std::abs(got - want) < 1e-6,
                    "trial " + std::to_string(trial) + ": got " + std::to_string(got) +
                        " want " + std::to_string(want));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 3. Sparse search equals exhaustive score-and-sort, exactly.

Outcome criterion_sparse_equivalence() {
    static const std::vector<std::string> vocab = {
        "fire", "door", "exit", "stair", "wall", "roof", "ramp", "guard", "floor",
        "width", "rating", "minimum", "storey", "building", "assembly", "article",
        "access", "rail", "smoke", "alarm", "corridor", "window", "lux", "load",
    };
    std::mt19937_64 rng(20240);
    Outcome out;
    for (int trial = 0; trial < 100; ++trial) {
        corpus::Corpus corpus;
        std::size_t n = rng() % 200 + 1;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            std::size_t len = rng() % 30 + 1;
            for (std::size_t t = 0; t < len; ++t) {
                if (t > 0) text += " ";
                text += vocab[rng() % vocab.size()];
            }
            char id[16];
            std::snprintf(id, sizeof(id), "c%04zu", i);
            corpus.chunks.push_back({id, text});
        }
        auto index = sparse::InvertedIndex::build(corpus, text::AnalysisChain::for_index());
        for (int q = 0; q < 10; ++q) {
            std::string query;
            std::size_t len = rng() % 5 + 1;
            for (std::size_t t = 0; t < len; ++t) {
                if (t > 0) query += " ";
                query += vocab[rng() % vocab.size()];
            }
            std::size_t k = rng() % 15 + 1;
            for (auto scorer : {sparse::Scorer::tfidf(), sparse::Scorer::bm25_default()}) {
                auto fast = sparse::search(index, query, k, scorer);
                std::vector<std::pair<std::string, double>> scored;
                for (const auto& doc : index.docs()) {
                    double s = scorer.kind == sparse::Scorer::Kind::TfIdf
                                   ? sparse::tfidf_score(index, query, doc.chunk_id)
                                   : sparse::bm25_score(index, query, doc.chunk_id, scorer.bm25);
                    bool eligible =
                        scorer.kind == sparse::Scorer::Kind::TfIdf ? s != 0.0 : s > 0.0;
                    if (eligible) scored.emplace_back(doc.chunk_id, s);
                }
                auto slow = make_ranked_list(std::move(scored), k);
                bool equal = fast.hits.size() == slow.hits.size();
                for (std::size_t i = 0; equal && i < fast.hits.size(); ++i) {
                    equal = fast.hits[i].first == slow.hits[i].first &&
                            fast.hits[i].second == slow.hits[i].second;
                }
                out.require(equal, "trial " + std::to_string(trial) + " query \"" + query + "\"");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 4. Forest sanity: exhaustive fallback equals flat search; default
//    parameters reach the recall target on random unit vectors.

Outcome criterion_forest() {
    Outcome out;
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = rng() % 80 + 1;
        std::vector<std::string> ids;
        std::vector<dense::Embedding> vectors;
        for (std::size_t i = 0; i < n; ++i) {
            char id[16];
            std::snprintf(id, sizeof(id), "v%04zu", i);
            ids.emplace_back(id);
            vectors.push_back(random_unit(rng, 8));
        }
        auto index = dense::FlatIndex::from_vectors(std::move(ids), std::move(vectors));
        auto forest = dense::RpForest::build(index, 5, 4, trial);
        auto q = random_unit(rng, 8);
        auto approx = dense::forest_search(forest, index, q, 5, static_cast<std::int64_t>(n));
        auto exact = dense::flat_search(index, q, 5, dense::SimilarityMetric::Dot);
        bool equal = approx.hits.size() == exact.hits.size();
        for (std::size_t i = 0; equal && i < approx.hits.size(); ++i) {
            equal = approx.hits[i] == exact.hits[i];
        }
        out.require(equal, "exhaustive fallback trial " + std::to_string(trial));
    }

    // recall target: 1000 unit vectors in 32 dims, 10 trees, search_k = 10 * k
    std::mt19937_64 data_rng(4242);
    std::vector<std::string> ids;
    std::vector<dense::Embedding> vectors;
    for (std::size_t i = 0; i < 1000; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "v%04zu", i);
        ids.emplace_back(id);
        vectors.push_back(random_unit(data_rng, 32));
    }
    auto index = dense::FlatIndex::from_vectors(std::move(ids), std::move(vectors));
    auto forest = dense::RpForest::build(index, 10, 16, 42);
    double recall_sum = 0.0;
    for (int q = 0; q < 100; ++q) {
        auto query = random_unit(data_rng, 32);
        auto truth = dense::flat_search(index, query, 10, dense::SimilarityMetric::Dot);
        auto got = dense::forest_search(forest, index, query, 10, 100);
        std::size_t hits = 0;
        for (const auto& [id, score] : got.hits) {
            for (const auto& [tid, tscore] : truth.hits) {
                if (id == tid) {
                    ++hits;
                    break;
                }
            }
        }
        recall_sum += static_cast<double>(hits) / 10.0;
    }
    double recall = recall_sum / 100.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "exhaustive fallback exact; recall@10 = %.3f vs the 0.80 target",
                  recall);
    out.require(recall >= 0.80, buf);
    if (out.pass) out.detail = buf;
    return out;
}

// ---------------------------------------------------------------------------
// 5. Every improvement cell of the pre/post comparison table reproduces
//    from its pre and post columns.

Outcome criterion_improvement_table() {
    struct Cell {
        const char* model;
        const char* metric;
        double pre;
        double post;
        double expected;
    };
    // model, metric, pre, post, published improvement (%)
    const Cell cells[] = {
        {"qwen", "f1", 0.402, 0.465, 15.67},
        {"qwen", "bleu", 0.239, 0.314, 31.38},
        {"qwen", "rouge1", 0.420, 0.481, 14.52},
        {"qwen", "sms", 3.988, 3.298, 17.30},
        {"qwen", "meteor", 0.529, 0.552, 4.35},
        {"qwen", "bert_p", 0.865, 0.872, 0.81},
        {"qwen", "bert_r", 0.924, 0.917, -0.76},
        {"qwen", "bert_f1", 0.892, 0.893, 0.11},
        {"llama2", "f1", 0.271, 0.387, 42.80},
        {"llama2", "bleu", 0.127, 0.228, 79.53},
        {"llama2", "rouge1", 0.286, 0.411, 43.71},
        {"llama2", "sms", 4.092, 3.578, 12.56},
        {"llama2", "meteor", 0.346, 0.484, 39.88},
        {"llama2", "bert_p", 0.818, 0.860, 5.13},
        {"llama2", "bert_r", 0.861, 0.908, 5.46},
        {"llama2", "bert_f1", 0.838, 0.882, 5.25},
        {"llama31", "f1", 0.326, 0.517, 58.59},
        {"llama31", "bleu", 0.176, 0.354, 101.14},
        {"llama31", "rouge1", 0.345, 0.529, 53.33},
        {"llama31", "sms", 4.207, 3.488, 17.09},
        {"llama31", "meteor", 0.353, 0.534, 51.28},
        {"llama31", "bert_p", 0.844, 0.905, 7.23},
        {"llama31", "bert_r", 0.856, 0.910, 6.31},
        {"llama31", "bert_f1", 0.849, 0.907, 6.83},
        {"llama32", "f1", 0.269, 0.384, 42.75},
        {"llama32", "bleu", 0.123, 0.221, 79.68},
        {"llama32", "rouge1", 0.286, 0.406, 41.96},
        {"llama32", "sms", 4.067, 3.639, 10.52},
        {"llama32", "meteor", 0.347, 0.479, 38.04},
        {"llama32", "bert_p", 0.823, 0.860, 4.50},
        {"llama32", "bert_r", 0.873, 0.907, 3.90},
        {"llama32", "bert_f1", 0.846, 0.882, 4.26},
        {"phi3", "f1", 0.290, 0.481, 65.86},
        {"phi3", "bleu", 0.131, 0.322, 145.80},
        {"phi3", "rouge1", 0.303, 0.497, 64.03},
        {"phi3", "sms", 3.903, 3.872, 0.79},
        {"phi3", "meteor", 0.352, 0.477, 35.51},
        {"phi3", "bert_p", 0.828, 0.840, 1.45},
        {"phi3", "bert_r", 0.871, 0.837, -3.90},
        {"phi3", "bert_f1", 0.848, 0.838, -1.18},
        {"mistral", "f1", 0.648, 0.688, 6.17},
        {"mistral", "bleu", 0.493, 0.549, 11.36},
        {"mistral", "rouge1", 0.671, 0.701, 4.47},
        {"mistral", "sms", 2.790, 2.486, 10.90},
        {"mistral", "meteor", 0.631, 0.662, 4.91},
        {"mistral", "bert_p", 0.938, 0.948, 1.07},
        {"mistral", "bert_r", 0.927, 0.936, 0.97},
        {"mistral", "bert_f1", 0.932, 0.941, 0.97},
    };
    Outcome out;
    std::size_t count = 0;
    for (const auto& cell : cells) {
        auto direction = std::strcmp(cell.metric, "sms") == 0 ? bench::Direction::LowerBetter
                                                              : bench::Direction::HigherBetter;
        double got = bench::improvement_pct(cell.pre, cell.post, direction);
        out.require(std::abs(got - cell.expected) <= 0.02,
                    std::string(cell.model) + " " + cell.metric + ": got " + std::to_string(got));
        ++count;
    }
    out.require(count == 48, "expected 48 cells");
    return out;
}

// ---------------------------------------------------------------------------
// 6. Low-rank adapter checks.

Outcome criterion_lora() {
    Outcome out;
    std::mt19937_64 rng(55);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    auto fill = [&](lora::Matrix& m, double lo, double hi) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform(lo, hi);
        }
    };
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        auto d_out = static_cast<Eigen::Index>(rng() % 30 + 3);
        auto d_in = static_cast<Eigen::Index>(rng() % 30 + 3);
        auto r = static_cast<Eigen::Index>(rng() % std::min<Eigen::Index>(8, std::min(d_out, d_in))) + 1;
        lora::Matrix base(d_out, d_in), a(d_out, r), b(r, d_in);
        fill(base, -1.0, 1.0);
        fill(a, 0.5, 1.5);
        fill(b, 0.5, 1.5);
        lora::LoraLinear layer(base, a, b);
        lora::Vector x(d_in), g(d_out);
        for (Eigen::Index i = 0; i < d_in; ++i) x(i) = uniform(0.5, 1.5);
        for (Eigen::Index i = 0; i < d_out; ++i) g(i) = uniform(0.5, 1.5);
        auto analytic = layer.grad(x, g);
        auto loss_with = [&](const lora::Matrix& aa, const lora::Matrix& bb) {
            lora::Vector y = base * x + aa * (bb * x);
            return g.dot(y);
        };
        for (Eigen::Index i = 0; i < d_out && out.pass; ++i) {
            for (Eigen::Index j = 0; j < r; ++j) {
                lora::Matrix up = a, down = a;
                up(i, j) += h;
                down(i, j) -= h;
                double fd = (loss_with(up, b) - loss_with(down, b)) / (2.0 * h);
                double rel = std::abs(fd - analytic.d_a(i, j)) / std::abs(analytic.d_a(i, j));
                out.require(rel < 1e-4, "dA finite differences, trial " + std::to_string(trial));
            }
        }
        for (Eigen::Index i = 0; i < r && out.pass; ++i) {
            for (Eigen::Index j = 0; j < d_in; ++j) {
                lora::Matrix up = b, down = b;
                up(i, j) += h;
                down(i, j) -= h;
                double fd = (loss_with(a, up) - loss_with(a, down)) / (2.0 * h);
                double rel = std::abs(fd - analytic.d_b(i, j)) / std::abs(analytic.d_b(i, j));
                out.require(rel < 1e-4, "dB finite differences, trial " + std::to_string(trial));
            }
        }
        // merge equivalence
        lora::Matrix merged = layer.merge();
        lora::Vector diff = merged * x - layer.forward(x);
        out.require(diff.lpNorm<Eigen::Infinity>() < 1e-10, "merge, trial " + std::to_string(trial));
    }

    // frozen base through 100 update steps
    lora::Matrix base(16, 12);
    fill(base, -1.0, 1.0);
    std::vector<double> snapshot(base.data(), base.data() + base.size());
    lora::LoraLinear layer(base, 4, 7);
    for (int step = 0; step < 100; ++step) {
        lora::Vector x(12), g(16);
        for (Eigen::Index i = 0; i < 12; ++i) x(i) = uniform(-1.0, 1.0);
        for (Eigen::Index i = 0; i < 16; ++i) g(i) = uniform(-1.0, 1.0);
        layer.apply_update(layer.grad(x, g), 0.01);
    }
    out.require(std::memcmp(snapshot.data(), layer.base().data(),
                            snapshot.size() * sizeof(double)) == 0,
                "base matrix changed during training");

    // parameter accounting: 40.37M of 7B trains 0.58 percent
    double pct = lora::trainable_percentage(40.37e6, 7e9);
    char rounded[16];
    std::snprintf(rounded, sizeof(rounded), "%.2f", pct);
    out.require(std::string(rounded) == "0.58", "percentage helper: got " + std::string(rounded));
    return out;
}

// ---------------------------------------------------------------------------
// 7. Token recall is non-decreasing in k for every retriever.

Outcome criterion_bench_monotonicity() {
    Outcome out;
    auto triplets = corpus::load_cqa(kFixtures + "/bench_cqa50.json");
    out.require(triplets.size() == 50, "fixture should hold 50 triplets");
    auto pooled = corpus::corpus_from_contexts(triplets, true);
    std::vector<bench::BenchQuery> queries;
    for (const auto& t : triplets) queries.push_back({t.question, t.context});

    bench::RetrievalBenchConfig config;
    config.k_values = {1, 3, 5, 10};
    config.metric = "token_f1";
    config.seed = 42;
    dense::HashedNGramProvider provider(256);
    auto report = bench::run_retrieval_bench(pooled, queries, config, provider);
    out.require(report.rows.size() == config.retrievers.size() * 4, "row count");
    for (std::size_t r = 0; r < config.retrievers.size(); ++r) {
        for (std::size_t ki = 1; ki < 4; ++ki) {
            const auto& prev = report.rows[r * 4 + ki - 1];
            const auto& cur = report.rows[r * 4 + ki];
            out.require(cur.recall >= prev.recall - 1e-12,
                        bench::retriever_name(cur.retriever) + ": recall fell from k=" +
                            std::to_string(prev.k) + " to k=" + std::to_string(cur.k));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 8. Dataset pipeline agrees with the hand-labeled fixture.

Outcome criterion_dataset_pipeline() {
    Outcome out;
    auto triplets = corpus::load_cqa(kFixtures + "/cqa_labeled.json");
    auto [kept, dropped] = corpus::clean(triplets);
    out.require(kept.size() == 20, "expected 20 kept triplets");
    out.require(dropped.size() == 3, "expected 3 planted incomplete records");
    std::vector<std::string> drop_ids;
    for (const auto& [id, reason] : dropped) drop_ids.push_back(id);
    std::sort(drop_ids.begin(), drop_ids.end());
    out.require(drop_ids == std::vector<std::string>{"bad0", "bad1", "bad2"},
                "dropped the wrong records");

    std::size_t agree = 0;
    for (const auto& t : kept) {
        bool expect_extractive = t.id.rfind("ext", 0) == 0;
        auto cls = corpus::classify_answer(t.answer, t.context);
        if ((cls.kind == corpus::AnswerKind::Extractive) == expect_extractive) ++agree;
    }
    out.require(agree == kept.size(),
                "classification agreed on " + std::to_string(agree) + "/20");

    auto stats = corpus::dataset_stats(kept);
    out.require(stats.extractive_count == 10 && stats.abstractive_count == 10,
                "stats counted " + std::to_string(stats.extractive_count) + "/" +
                    std::to_string(stats.abstractive_count));
    out.require(stats.extractive_count + stats.abstractive_count == stats.triplet_count,
                "count consistency");

    // conditional check: only runs when the full dataset has been obtained
    std::ifstream full(kFixtures + "/nbcc_full.json");
    if (full) {
        auto full_triplets = corpus::load_cqa(kFixtures + "/nbcc_full.json");
        out.require(full_triplets.size() == 1436, "full dataset triplet count");
        auto full_stats = corpus::dataset_stats(full_triplets);
        out.require(full_stats.extractive_count == 1354 && full_stats.abstractive_count == 82,
                    "full dataset extractive/abstractive split");
        out.detail = "full dataset checked";
    } else if (out.pass) {
        out.detail = "full dataset not present; conditional part skipped";
    }
    return out;
}

// ---------------------------------------------------------------------------
// 9. Golden report bytes and index round-tripping.

Outcome criterion_determinism() {
    Outcome out;
    std::string args = "bench retrieval --cqa " + kFixtures +
                       "/bench_cqa50.json --k 1,3,5,10 --metric token_f1 --seed 42";
    out.require(run_cli(args + " --threads 2 --out acc_bench_a.csv") == 0, "first bench run");
    out.require(run_cli(args + " --threads 4 --out acc_bench_b.csv") == 0, "second bench run");
    std::string a = slurp("acc_bench_a.csv");
    std::string b = slurp("acc_bench_b.csv");
    out.require(!a.empty() && a == b, "reports differ between identical runs");
    std::string golden = slurp(kFixtures + "/bench_golden.csv");
    out.require(a == golden, "report differs from the committed golden file");
    std::remove("acc_bench_a.csv");
    std::remove("acc_bench_b.csv");

    // serialize/deserialize keeps every search result
    auto triplets = corpus::load_cqa(kFixtures + "/bench_cqa50.json");
    auto pooled = corpus::corpus_from_contexts(triplets, true);
    auto index = sparse::InvertedIndex::build(pooled, text::AnalysisChain::for_index());
    std::stringstream buffer;
    index.save(buffer);
    auto loaded = sparse::InvertedIndex::load(buffer);
    std::mt19937_64 rng(99);
    static const std::vector<std::string> vocab = {
        "fire", "doors", "exit", "stairs", "guard", "rails", "minutes", "width",
        "load", "lux", "article", "storm", "parking", "walls",
    };
    for (int q = 0; q < 20; ++q) {
        std::string query;
        std::size_t len = rng() % 4 + 1;
        for (std::size_t t = 0; t < len; ++t) {
            if (t > 0) query += " ";
            query += vocab[rng() % vocab.size()];
        }
        for (auto scorer : {sparse::Scorer::tfidf(), sparse::Scorer::bm25_default()}) {
            auto before = sparse::search(index, query, 10, scorer);
            auto after = sparse::search(loaded, query, 10, scorer);
            bool equal = before.hits.size() == after.hits.size();
            for (std::size_t i = 0; equal && i < before.hits.size(); ++i) {
                equal = before.hits[i] == after.hits[i];
            }
            out.require(equal, "round-trip changed results for \"" + query + "\"");
        }
    }
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        double time_limit_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "metric oracle suite", 1.0, criterion_metric_oracles},
        {2, "SMS transport exactness", 30.0, criterion_sms_exactness},
        {3, "sparse retriever equivalence", 60.0, criterion_sparse_equivalence},
        {4, "forest fallback and recall", 60.0, criterion_forest},
        {5, "improvement table arithmetic", 1.0, criterion_improvement_table},
        {6, "low-rank adapter checks", 10.0, criterion_lora},
        {7, "bench recall monotonicity", 30.0, criterion_bench_monotonicity},
        {8, "dataset pipeline agreement", 5.0, criterion_dataset_pipeline},
        {9, "determinism and golden files", 30.0, criterion_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (seconds >= c.time_limit_s) {
            outcome.pass = false;
            outcome.detail = "exceeded time limit";
        }
        std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", outcome.pass ? "PASS" : "FAIL",
                    c.number, c.name, seconds, outcome.detail.empty() ? "" : " - ",
                    outcome.detail.c_str());
        if (!outcome.pass) ++failures;
    }
    return failures;
}
