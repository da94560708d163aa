#pragma once

#include <map>
#include <string>
#include <vector>

#include "ragkit/dense.hpp"
#include "ragkit/textkit.hpp"

namespace ragkit::metrics {

/// A prediction/reference text pair to score.
struct ScorePair {
    std::string prediction;
    std::string reference;
};

/// A named metric result. `value` is the headline number; components hold
/// the pieces it was assembled from (precision, recall, brevity penalty,
/// ...), keyed deterministically.
struct MetricValue {
    std::string name;
    double value = 0.0;
    std::map<std::string, double> components;
};

/// Tokens paired with one embedding each.
struct TokenEmbeddingSet {
    std::vector<text::Token> tokens;
    std::vector<dense::Embedding> vectors;
};

/// Unigram F1 with multiset (clipped) overlap. Empty predictions score 0;
/// an empty reference is an error.
MetricValue token_f1(const ScorePair& pair);

/// Sentence BLEU over n-grams up to weights.size(), clipped precision,
/// brevity penalty min(1, |P|/|R|). Without smoothing any zero n-gram
/// precision zeroes the score; smooth_eps substitutes a tiny positive
/// precision instead when > 0.
MetricValue bleu(const ScorePair& pair, const std::vector<double>& weights = {0.5, 0.5},
                 double smooth_eps = 0.0);

/// Unigram recall with clipping: sum over reference unigrams of
/// min(count_ref, count_pred) over the reference length.
MetricValue rouge1(const ScorePair& pair);

/// Sentence mover's similarity: minimal cost of transporting the uniform
/// distribution on prediction token embeddings onto the uniform
/// distribution on reference token embeddings, with cosine distance as
/// ground cost. Solved exactly; lower is more similar.
MetricValue sms(const ScorePair& pair, const dense::EmbeddingProvider& provider);

/// METEOR with exact then Porter-stem matching passes, harmonic F-mean
/// and fragmentation penalty 0.5 * (chunks / matches)^3.
MetricValue meteor(const ScorePair& pair);

/// Greedy embedding matching: precision is the mean over prediction
/// tokens of the best cosine against the reference tokens, recall the
/// mirror image, f1 their harmonic mean (0 when P + R <= 0).
MetricValue bert_style_score(const TokenEmbeddingSet& pred, const TokenEmbeddingSet& ref);

/// Analyzes text (lowercase, no stem) and embeds each token, dropping
/// tokens that embed to the zero vector. Throws when nothing is left.
TokenEmbeddingSet make_token_embedding_set(const std::string& text,
                                           const dense::EmbeddingProvider& provider);

/// bert_style_score over two texts via make_token_embedding_set.
MetricValue bert_style_score(const ScorePair& pair, const dense::EmbeddingProvider& provider);

/// Arithmetic mean of same-named metric values and of every component
/// they all share.
MetricValue average(const std::vector<MetricValue>& values);

/// Exact discrete optimal transport with uniform marginals (1/rows on
/// the sources, 1/cols on the targets): min sum T_ij * cost[i][j] over
/// feasible transport plans. Solved by min-cost flow on integer-scaled
/// masses, so the optimum is exact up to cost summation rounding.
double optimal_transport_cost(const std::vector<std::vector<double>>& cost);

}  // namespace ragkit::metrics
