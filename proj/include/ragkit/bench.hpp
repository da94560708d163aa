#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragkit/corpus.hpp"
#include "ragkit/dense.hpp"
#include "ragkit/metrics.hpp"
#include "ragkit/sparse.hpp"

namespace ragkit::bench {

/// The six retrieval methods under comparison. TfIdf and Bm25 rank over a
/// lowercase-only index; Engine is the embedded search engine (analysis
/// chain with stemming + BM25 relevance); the dense three share one
/// provider-built vector index.
enum class Retriever { TfIdf, Bm25, Engine, FlatDot, FlatCosine, Forest };

std::string retriever_name(Retriever r);
std::optional<Retriever> retriever_from_name(std::string_view name);

struct RetrievalBenchConfig {
    std::vector<Retriever> retrievers{Retriever::TfIdf,   Retriever::Bm25,
                                      Retriever::Engine,  Retriever::FlatDot,
                                      Retriever::FlatCosine, Retriever::Forest};
    std::vector<std::size_t> k_values{1, 3, 5, 10};  // strictly increasing
    std::string metric = "bert";                     // "bert" or "token_f1"
    sparse::Bm25Params bm25;
    std::size_t n_trees = dense::RpForest::kDefaultTrees;
    std::size_t leaf_size = dense::RpForest::kDefaultLeafSize;
    std::int64_t search_k = -1;  // <= 0: n_trees * k
    std::uint64_t seed = 42;
    unsigned threads = 0;  // 0: available parallelism
};

struct BenchQuery {
    std::string question;
    std::string reference_context;
};

struct RetrievalRow {
    Retriever retriever;
    std::size_t k = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct RetrieverStats {
    Retriever retriever;
    double seconds = 0.0;             // wall time for the full evaluation pass
    std::size_t zero_score_queries = 0;  // queries scored as empty predictions
};

struct RetrievalBenchReport {
    std::vector<RetrievalRow> rows;  // config order: retriever-major, k-minor
    std::vector<RetrieverStats> stats;
    std::size_t query_count = 0;
    std::uint64_t seed = 0;
};

/// Runs every configured retriever over every query: retrieve top-k,
/// concatenate the retrieved chunk texts in rank order with single
/// newlines, score the concatenation against the reference, average.
RetrievalBenchReport run_retrieval_bench(const corpus::Corpus& corpus,
                                         const std::vector<BenchQuery>& queries,
                                         const RetrievalBenchConfig& config,
                                         const dense::EmbeddingProvider& provider);

struct GenerationEvalResult {
    // metric id -> averaged value with averaged shared components
    std::map<std::string, metrics::MetricValue> averages;
    // metric id -> pairs excluded because the metric raised an error
    std::map<std::string, std::size_t> excluded;
    std::size_t pair_count = 0;
};

/// Applies each metric to each pair and averages. Per-pair metric errors
/// are excluded from the mean and counted.
GenerationEvalResult run_generation_eval(const std::vector<metrics::ScorePair>& pairs,
                                         const std::vector<std::string>& metric_ids,
                                         const dense::EmbeddingProvider& provider);

enum class Direction { HigherBetter, LowerBetter };

/// Relative improvement in percent. HigherBetter: 100 (post - pre) / pre;
/// LowerBetter: 100 (pre - post) / pre. pre must be nonzero.
double improvement_pct(double pre, double post, Direction direction);

/// sms improves downward; every other metric improves upward.
Direction metric_direction(std::string_view metric_id);

struct ComparisonRow {
    std::string metric;
    double pre = 0.0;
    double post = 0.0;
    double improvement = 0.0;  // percent, sign per metric direction
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
};

/// Pairs up two evaluation runs metric-by-metric.
ComparisonReport compare_runs(const GenerationEvalResult& pre, const GenerationEvalResult& post);

enum class ReportFormat { Csv, Markdown };

/// Deterministic renders; values at fixed precision so golden-file tests
/// can compare bytes.
std::string render_report(const RetrievalBenchReport& report, ReportFormat format);
std::string render_report(const ComparisonReport& report, ReportFormat format);
std::string render_report(const GenerationEvalResult& result, ReportFormat format);

/// Metric ids understood by run_generation_eval.
const std::vector<std::string>& known_metric_ids();

}  // namespace ragkit::bench
