#include "ragkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace ragkit::metrics {

namespace {

const text::AnalysisChain& metric_chain() {
    static const auto chain = text::AnalysisChain::for_metrics();
    return chain;
}

std::map<std::string, std::size_t> counts(const std::vector<text::Token>& tokens) {
    std::map<std::string, std::size_t> c;
    for (const auto& t : tokens) c[t] += 1;
    return c;
}

std::size_t clipped_overlap(const std::map<std::string, std::size_t>& pred,
                            const std::map<std::string, std::size_t>& ref) {
    std::size_t overlap = 0;
    for (const auto& [tok, n] : pred) {
        auto it = ref.find(tok);
        if (it != ref.end()) overlap += std::min(n, it->second);
    }
    return overlap;
}

double harmonic(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::string join_ngram(const std::vector<text::Token>& gram) {
    std::string s = gram[0];
    for (std::size_t i = 1; i < gram.size(); ++i) s += " " + gram[i];
    return s;
}

// ---------------------------------------------------------------------------
// Min-cost flow (successive shortest paths with potentials) for the
// transportation problem. Capacities are integers; costs are reals >= 0.

class MinCostFlow {
public:
    explicit MinCostFlow(std::size_t n_nodes) : head_(n_nodes, -1) {}

    void add_edge(std::size_t from, std::size_t to, long long cap, double cost) {
        edges_.push_back({static_cast<int>(to), head_[from], cap, cost});
        head_[from] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({static_cast<int>(from), head_[to], 0, -cost});
        head_[to] = static_cast<int>(edges_.size()) - 1;
    }

    // Pushes as much flow as possible from s to t; returns total cost.
    double solve(std::size_t s, std::size_t t) {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> potential(head_.size(), 0.0);
        double total_cost = 0.0;
        while (true) {
            std::vector<double> dist(head_.size(), inf);
            std::vector<int> prev_edge(head_.size(), -1);
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            dist[s] = 0.0;
            pq.emplace(0.0, s);
            while (!pq.empty()) {
                auto [d, u] = pq.top();
                pq.pop();
                if (d > dist[u]) continue;
                for (int e = head_[u]; e != -1; e = edges_[static_cast<std::size_t>(e)].next) {
                    const Edge& ed = edges_[static_cast<std::size_t>(e)];
                    if (ed.cap <= 0) continue;
                    // rounding can push a reduced cost epsilon-negative
                    double rc = std::max(0.0, ed.cost + potential[u] - potential[static_cast<std::size_t>(ed.to)]);
                    if (dist[u] + rc < dist[static_cast<std::size_t>(ed.to)]) {
                        dist[static_cast<std::size_t>(ed.to)] = dist[u] + rc;
                        prev_edge[static_cast<std::size_t>(ed.to)] = e;
                        pq.emplace(dist[static_cast<std::size_t>(ed.to)], static_cast<std::size_t>(ed.to));
                    }
                }
            }
            if (prev_edge[t] == -1) break;
            for (std::size_t u = 0; u < head_.size(); ++u) {
                if (dist[u] < inf) potential[u] += dist[u];
            }
            long long push = std::numeric_limits<long long>::max();
            for (std::size_t u = t; u != s;) {
                const Edge& ed = edges_[static_cast<std::size_t>(prev_edge[u])];
                push = std::min(push, ed.cap);
                u = static_cast<std::size_t>(edges_[static_cast<std::size_t>(prev_edge[u]) ^ 1].to);
            }
            for (std::size_t u = t; u != s;) {
                int e = prev_edge[u];
                edges_[static_cast<std::size_t>(e)].cap -= push;
                edges_[static_cast<std::size_t>(e) ^ 1].cap += push;
                total_cost += static_cast<double>(push) * edges_[static_cast<std::size_t>(e)].cost;
                u = static_cast<std::size_t>(edges_[static_cast<std::size_t>(e) ^ 1].to);
            }
        }
        return total_cost;
    }

private:
    struct Edge {
        int to;
        int next;
        long long cap;
        double cost;
    };
    std::vector<Edge> edges_;
    std::vector<int> head_;
};

}  // namespace

double optimal_transport_cost(const std::vector<std::vector<double>>& cost) {
    const std::size_t m = cost.size();
    if (m == 0) throw std::invalid_argument("transport: empty cost matrix");
    const std::size_t n = cost[0].size();
    if (n == 0) throw std::invalid_argument("transport: empty cost matrix");
    for (const auto& row : cost) {
        if (row.size() != n) throw std::invalid_argument("transport: ragged cost matrix");
        for (double c : row) {
            if (!(c >= 0.0)) throw std::invalid_argument("transport: costs must be >= 0");
        }
    }
    // Scale the uniform masses 1/m and 1/n by m*n: every source supplies n
    // units, every target demands m units.
    MinCostFlow flow(m + n + 2);
    const std::size_t source = m + n;
    const std::size_t sink = m + n + 1;
    for (std::size_t i = 0; i < m; ++i) {
        flow.add_edge(source, i, static_cast<long long>(n), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            flow.add_edge(i, m + j, static_cast<long long>(n), cost[i][j]);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        flow.add_edge(m + j, sink, static_cast<long long>(m), 0.0);
    }
    return flow.solve(source, sink) / static_cast<double>(m * n);
}

MetricValue token_f1(const ScorePair& pair) {
    auto ref_tokens = text::analyze(pair.reference, metric_chain());
    if (ref_tokens.empty()) {
        throw std::invalid_argument("token_f1: reference has no tokens");
    }
    auto pred_tokens = text::analyze(pair.prediction, metric_chain());
    MetricValue mv{"token_f1", 0.0, {}};
    double precision = 0.0;
    double recall = 0.0;
    if (!pred_tokens.empty()) {
        auto overlap = static_cast<double>(clipped_overlap(counts(pred_tokens), counts(ref_tokens)));
        precision = overlap / static_cast<double>(pred_tokens.size());
        recall = overlap / static_cast<double>(ref_tokens.size());
    }
    mv.components["precision"] = precision;
    mv.components["recall"] = recall;
    mv.value = harmonic(precision, recall);
    return mv;
}

MetricValue bleu(const ScorePair& pair, const std::vector<double>& weights, double smooth_eps) {
    if (weights.empty()) throw std::invalid_argument("bleu: need at least one n-gram weight");
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw std::invalid_argument("bleu: weights must sum to 1");
    }
    auto ref_tokens = text::analyze(pair.reference, metric_chain());
    if (ref_tokens.empty()) {
        throw std::invalid_argument("bleu: reference has no tokens");
    }
    auto pred_tokens = text::analyze(pair.prediction, metric_chain());

    MetricValue mv{"bleu", 0.0, {}};
    double bp = std::min(1.0, static_cast<double>(pred_tokens.size()) /
                                  static_cast<double>(ref_tokens.size()));
    mv.components["bp"] = bp;

    double log_sum = 0.0;
    bool zero_precision = false;
    for (std::size_t order = 1; order <= weights.size(); ++order) {
        std::map<std::string, std::size_t> pred_grams;
        std::map<std::string, std::size_t> ref_grams;
        for (const auto& g : text::ngrams(pred_tokens, order)) pred_grams[join_ngram(g)] += 1;
        for (const auto& g : text::ngrams(ref_tokens, order)) ref_grams[join_ngram(g)] += 1;
        std::size_t total = 0;
        for (const auto& [g, c] : pred_grams) total += c;
        double p_n = total == 0 ? 0.0
                                : static_cast<double>(clipped_overlap(pred_grams, ref_grams)) /
                                      static_cast<double>(total);
        mv.components["p" + std::to_string(order)] = p_n;
        if (p_n == 0.0) {
            if (smooth_eps > 0.0) {
                p_n = smooth_eps;
            } else {
                zero_precision = true;
                continue;
            }
        }
        log_sum += weights[order - 1] * std::log(p_n);
    }
    mv.value = zero_precision ? 0.0 : bp * std::exp(log_sum);
    return mv;
}

MetricValue rouge1(const ScorePair& pair) {
    auto ref_tokens = text::analyze(pair.reference, metric_chain());
    if (ref_tokens.empty()) {
        throw std::invalid_argument("rouge1: reference has no tokens");
    }
    auto pred_tokens = text::analyze(pair.prediction, metric_chain());
    auto overlap = static_cast<double>(clipped_overlap(counts(ref_tokens), counts(pred_tokens)));
    return {"rouge1", overlap / static_cast<double>(ref_tokens.size()), {}};
}

TokenEmbeddingSet make_token_embedding_set(const std::string& text,
                                           const dense::EmbeddingProvider& provider) {
    TokenEmbeddingSet set;
    for (auto& tok : text::analyze(text, metric_chain())) {
        dense::Embedding v = provider.embed(tok);
        if (dense::l2_norm(v) == 0.0) continue;
        set.tokens.push_back(std::move(tok));
        set.vectors.push_back(std::move(v));
    }
    if (set.tokens.empty()) {
        throw std::invalid_argument("no tokens with nonzero embeddings in: \"" + text + "\"");
    }
    return set;
}

MetricValue sms(const ScorePair& pair, const dense::EmbeddingProvider& provider) {
    TokenEmbeddingSet pred = make_token_embedding_set(pair.prediction, provider);
    TokenEmbeddingSet ref = make_token_embedding_set(pair.reference, provider);
    std::vector<std::vector<double>> cost(pred.vectors.size(),
                                          std::vector<double>(ref.vectors.size()));
    for (std::size_t i = 0; i < pred.vectors.size(); ++i) {
        for (std::size_t j = 0; j < ref.vectors.size(); ++j) {
            // rounding can nudge cosine(v, v) a hair past 1
            cost[i][j] = std::max(0.0, 1.0 - dense::cosine(pred.vectors[i], ref.vectors[j]));
        }
    }
    return {"sms", optimal_transport_cost(cost), {}};
}

MetricValue meteor(const ScorePair& pair) {
    auto ref_tokens = text::analyze(pair.reference, metric_chain());
    if (ref_tokens.empty()) {
        throw std::invalid_argument("meteor: reference has no tokens");
    }
    auto pred_tokens = text::analyze(pair.prediction, metric_chain());

    MetricValue mv{"meteor", 0.0, {}};
    mv.components["precision"] = 0.0;
    mv.components["recall"] = 0.0;
    mv.components["f_mean"] = 0.0;
    mv.components["penalty"] = 0.0;
    if (pred_tokens.empty()) return mv;

    // One-to-one leftmost-first alignment: exact surface pass, then a
    // Porter-stem pass over the residue.
    std::vector<bool> pred_used(pred_tokens.size(), false);
    std::vector<bool> ref_used(ref_tokens.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> alignment;
    auto run_pass = [&](auto key) {
        for (std::size_t i = 0; i < pred_tokens.size(); ++i) {
            if (pred_used[i]) continue;
            for (std::size_t j = 0; j < ref_tokens.size(); ++j) {
                if (ref_used[j]) continue;
                if (key(pred_tokens[i]) == key(ref_tokens[j])) {
                    pred_used[i] = true;
                    ref_used[j] = true;
                    alignment.emplace_back(i, j);
                    break;
                }
            }
        }
    };
    run_pass([](const text::Token& t) { return t; });
    run_pass([](const text::Token& t) { return text::porter_stem(t); });

    const double m = static_cast<double>(alignment.size());
    if (m == 0.0) return mv;
    double precision = m / static_cast<double>(pred_tokens.size());
    double recall = m / static_cast<double>(ref_tokens.size());
    double f_mean = harmonic(precision, recall);

    std::sort(alignment.begin(), alignment.end());
    std::size_t chunks = 1;
    for (std::size_t a = 1; a < alignment.size(); ++a) {
        bool contiguous = alignment[a].first == alignment[a - 1].first + 1 &&
                          alignment[a].second == alignment[a - 1].second + 1;
        if (!contiguous) ++chunks;
    }
    double penalty = 0.5 * std::pow(static_cast<double>(chunks) / m, 3.0);

    mv.components["precision"] = precision;
    mv.components["recall"] = recall;
    mv.components["f_mean"] = f_mean;
    mv.components["penalty"] = penalty;
    mv.value = f_mean * (1.0 - penalty);
    return mv;
}

MetricValue bert_style_score(const TokenEmbeddingSet& pred, const TokenEmbeddingSet& ref) {
    if (pred.vectors.empty() || ref.vectors.empty()) {
        throw std::invalid_argument("bert_style_score: empty token set");
    }
    // norms hoisted out of the pairwise loop; cosine(p, r) = dot / (np * nr)
    auto norms_of = [](const std::vector<dense::Embedding>& vs) {
        std::vector<double> norms(vs.size());
        for (std::size_t i = 0; i < vs.size(); ++i) {
            norms[i] = dense::l2_norm(vs[i]);
            if (norms[i] == 0.0) throw std::invalid_argument("bert_style_score: zero vector");
        }
        return norms;
    };
    std::vector<double> pred_norms = norms_of(pred.vectors);
    std::vector<double> ref_norms = norms_of(ref.vectors);

    double precision = 0.0;
    std::vector<double> ref_best(ref.vectors.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pred.vectors.size(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < ref.vectors.size(); ++j) {
            double cos = dense::dot(pred.vectors[i], ref.vectors[j]) /
                         (pred_norms[i] * ref_norms[j]);
            best = std::max(best, cos);
            ref_best[j] = std::max(ref_best[j], cos);
        }
        precision += best;
    }
    precision /= static_cast<double>(pred.vectors.size());
    double recall = 0.0;
    for (double best : ref_best) recall += best;
    recall /= static_cast<double>(ref.vectors.size());

    MetricValue mv{"bert", 0.0, {}};
    mv.components["precision"] = precision;
    mv.components["recall"] = recall;
    mv.value = harmonic(precision, recall);
    return mv;
}

MetricValue bert_style_score(const ScorePair& pair, const dense::EmbeddingProvider& provider) {
    return bert_style_score(make_token_embedding_set(pair.prediction, provider),
                            make_token_embedding_set(pair.reference, provider));
}

MetricValue average(const std::vector<MetricValue>& values) {
    if (values.empty()) throw std::invalid_argument("average: no values");
    const std::string& name = values[0].name;
    for (const auto& v : values) {
        if (v.name != name) {
            throw std::invalid_argument("average: mixed metric names (" + name + " vs " + v.name + ")");
        }
    }
    MetricValue out{name, 0.0, {}};
    for (const auto& v : values) out.value += v.value;
    out.value /= static_cast<double>(values.size());
    for (const auto& [key, first_val] : values[0].components) {
        bool shared = true;
        double sum = 0.0;
        for (const auto& v : values) {
            auto it = v.components.find(key);
            if (it == v.components.end()) {
                shared = false;
                break;
            }
            sum += it->second;
        }
        if (shared) out.components[key] = sum / static_cast<double>(values.size());
        (void)first_val;
    }
    return out;
}

}  // namespace ragkit::metrics
