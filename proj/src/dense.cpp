#include "ragkit/dense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "ragkit/textkit.hpp"

namespace ragkit::dense {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void check_dims(const Embedding& q, const Embedding& p) {
    if (q.size() != p.size()) {
        throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(q.size()) +
                                    " vs " + std::to_string(p.size()));
    }
}

// splitmix64, used to derive independent per-tree seeds.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Unbiased pick in [0, n) from a standard-specified generator, so builds
// are reproducible across platforms.
std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
}

}  // namespace

HashedNGramProvider::HashedNGramProvider(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("provider dimension must be >= 1");
}

Embedding HashedNGramProvider::embed(const std::string& text) const {
    static const auto chain = text::AnalysisChain::for_metrics();
    Embedding v(dim_, 0.0);
    for (const auto& token : text::analyze(text, chain)) {
        // Character 3-grams over the codepoints of '#token#'.
        std::vector<std::string> chars;
        chars.emplace_back("#");
        std::size_t i = 0;
        while (i < token.size()) {
            std::size_t start = i;
            unsigned char b = static_cast<unsigned char>(token[i]);
            std::size_t len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
            i = std::min(token.size(), start + len);
            chars.push_back(token.substr(start, i - start));
        }
        chars.emplace_back("#");
        for (std::size_t g = 0; g + 3 <= chars.size(); ++g) {
            std::uint64_t h = fnv1a64(chars[g] + chars[g + 1] + chars[g + 2]);
            double sign = (h >> 63) == 0 ? 1.0 : -1.0;
            v[h % dim_] += sign;
        }
    }
    double norm = l2_norm(v);
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
    return v;
}

FileBackedProvider::FileBackedProvider(std::unordered_map<std::string, Embedding> vectors)
    : vectors_(std::move(vectors)) {
    if (vectors_.empty()) throw std::invalid_argument("embedding map is empty");
    dim_ = vectors_.begin()->second.size();
    for (const auto& [id, v] : vectors_) {
        if (v.size() != dim_) {
            throw std::invalid_argument("inconsistent embedding dimension for id \"" + id + "\"");
        }
    }
}

FileBackedProvider FileBackedProvider::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
    std::unordered_map<std::string, Embedding> vectors;
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
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("vector") ||
            !rec["id"].is_string() || !rec["vector"].is_array()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected {\"id\": string, \"vector\": [numbers]}");
        }
        std::string id = rec["id"].get<std::string>();
        Embedding v;
        v.reserve(rec["vector"].size());
        for (const auto& x : rec["vector"]) {
            if (!x.is_number()) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": vector entries must be numbers");
            }
            v.push_back(x.get<double>());
        }
        if (!vectors.emplace(std::move(id), std::move(v)).second) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate id \"" +
                                     rec["id"].get<std::string>() + "\"");
        }
    }
    return FileBackedProvider(std::move(vectors));
}

Embedding FileBackedProvider::embed(const std::string& text) const {
    auto it = vectors_.find(text);
    if (it == vectors_.end()) {
        throw std::out_of_range("no embedding for id \"" + text + "\"");
    }
    return it->second;
}

double dot(const Embedding& q, const Embedding& p) {
    check_dims(q, p);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * p[i];
    return s;
}

double l2_norm(const Embedding& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine(const Embedding& q, const Embedding& p) {
    check_dims(q, p);
    double nq = l2_norm(q);
    double np = l2_norm(p);
    if (nq == 0.0 || np == 0.0) {
        throw std::invalid_argument("cosine undefined for zero-norm vector");
    }
    return dot(q, p) / (nq * np);
}

FlatIndex FlatIndex::build(const corpus::Corpus& corpus, const EmbeddingProvider& provider) {
    FlatIndex index;
    index.dim_ = provider.dim();
    for (const auto& chunk : corpus.chunks) {
        Embedding v = provider.embed(chunk.text);
        if (l2_norm(v) == 0.0) {
            index.skipped_.push_back(chunk.id);
            continue;
        }
        index.ids_.push_back(chunk.id);
        index.vectors_.push_back(std::move(v));
    }
    return index;
}

FlatIndex FlatIndex::from_vectors(std::vector<std::string> ids, std::vector<Embedding> vectors) {
    if (ids.size() != vectors.size()) {
        throw std::invalid_argument("ids and vectors differ in length");
    }
    FlatIndex index;
    index.ids_ = std::move(ids);
    index.vectors_ = std::move(vectors);
    index.dim_ = index.vectors_.empty() ? 0 : index.vectors_[0].size();
    for (const auto& v : index.vectors_) {
        if (v.size() != index.dim_) {
            throw std::invalid_argument("inconsistent vector dimensions");
        }
    }
    return index;
}

RankedList flat_search(const FlatIndex& index, const Embedding& query, std::size_t k,
                       SimilarityMetric metric) {
    if (k == 0) throw std::invalid_argument("flat_search: k must be >= 1");
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        double s = metric == SimilarityMetric::Dot ? dot(query, index.vector(i))
                                                   : cosine(query, index.vector(i));
        scored.emplace_back(index.ids()[i], s);
    }
    return make_ranked_list(std::move(scored), k);
}

RpForest RpForest::build(const FlatIndex& index, std::size_t n_trees, std::size_t leaf_size,
                         std::uint64_t seed) {
    if (index.size() == 0) throw std::invalid_argument("build: empty index");
    if (n_trees == 0) throw std::invalid_argument("build: need at least one tree");
    if (leaf_size < 2) throw std::invalid_argument("build: leaf_size must be >= 2");

    RpForest forest;
    forest.leaf_size_ = leaf_size;
    forest.seed_ = seed;

    // Recursive splitter; returns the arena index of the built node.
    auto split = [&](auto&& self, std::vector<std::uint32_t> items,
                     std::mt19937_64& rng) -> std::int32_t {
        if (items.size() <= leaf_size) {
            forest.nodes_.push_back(Node{{}, 0.0, -1, -1, std::move(items)});
            return static_cast<std::int32_t>(forest.nodes_.size() - 1);
        }
        for (int attempt = 0; attempt < 20; ++attempt) {
            std::size_t a = pick_index(rng, items.size());
            std::size_t b = pick_index(rng, items.size() - 1);
            if (b >= a) ++b;
            const Embedding& va = index.vector(items[a]);
            const Embedding& vb = index.vector(items[b]);
            Embedding normal(va.size());
            for (std::size_t i = 0; i < va.size(); ++i) normal[i] = va[i] - vb[i];
            double norm = l2_norm(normal);
            if (norm == 0.0) continue;  // identical points
            // unit normal, so query margins are true distances and stay
            // comparable across nodes and trees during traversal
            for (double& x : normal) x /= norm;
            double offset = 0.0;
            for (std::size_t i = 0; i < normal.size(); ++i) {
                offset += normal[i] * 0.5 * (va[i] + vb[i]);
            }
            std::vector<std::uint32_t> left_items, right_items;
            for (auto item : items) {
                double margin = dot(index.vector(item), normal) - offset;
                (margin < 0.0 ? left_items : right_items).push_back(item);
            }
            if (left_items.empty() || right_items.empty()) continue;
            Node node;
            node.normal = std::move(normal);
            node.offset = offset;
            forest.nodes_.push_back(std::move(node));
            std::size_t at = forest.nodes_.size() - 1;
            std::int32_t left = self(self, std::move(left_items), rng);
            std::int32_t right = self(self, std::move(right_items), rng);
            forest.nodes_[at].left = left;
            forest.nodes_[at].right = right;
            return static_cast<std::int32_t>(at);
        }
        // Degenerate point set; store everything in one leaf.
        forest.nodes_.push_back(Node{{}, 0.0, -1, -1, std::move(items)});
        return static_cast<std::int32_t>(forest.nodes_.size() - 1);
    };

    std::vector<std::uint32_t> all(index.size());
    for (std::uint32_t i = 0; i < index.size(); ++i) all[i] = i;
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::mt19937_64 rng(mix64(seed ^ (0x517cc1b727220a95ULL * (t + 1))));
        forest.roots_.push_back(split(split, all, rng));
    }
    return forest;
}

RankedList forest_search(const RpForest& forest, const FlatIndex& index, const Embedding& query,
                         std::size_t k, std::int64_t search_k) {
    if (k == 0) throw std::invalid_argument("forest_search: k must be >= 1");
    if (query.size() != index.dim()) {
        throw std::invalid_argument("forest_search: query dimension mismatch");
    }
    std::size_t want = search_k > 0 ? static_cast<std::size_t>(search_k)
                                    : forest.tree_count() * k;
    if (want < k) want = k;

    // Max-heap on (margin priority, node); ties resolved by node index so
    // traversal order is deterministic.
    using Entry = std::pair<double, std::int32_t>;
    std::priority_queue<Entry> queue;
    for (std::size_t t = 0; t < forest.tree_count(); ++t) {
        queue.emplace(std::numeric_limits<double>::infinity(), forest.root(t));
    }
    std::vector<bool> seen(index.size(), false);
    std::vector<std::uint32_t> candidates;
    while (!queue.empty() && candidates.size() < want) {
        auto [priority, node_id] = queue.top();
        queue.pop();
        const auto& node = forest.nodes()[static_cast<std::size_t>(node_id)];
        if (node.left < 0) {
            for (auto item : node.items) {
                if (!seen[item]) {
                    seen[item] = true;
                    candidates.push_back(item);
                }
            }
            continue;
        }
        double margin = dot(query, node.normal) - node.offset;
        std::int32_t near = margin < 0.0 ? node.left : node.right;
        std::int32_t far = margin < 0.0 ? node.right : node.left;
        queue.emplace(std::min(priority, std::abs(margin)), near);
        queue.emplace(std::min(priority, -std::abs(margin)), far);
    }
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(candidates.size());
    for (auto item : candidates) {
        scored.emplace_back(index.ids()[item], dot(query, index.vector(item)));
    }
    return make_ranked_list(std::move(scored), k);
}

}  // namespace ragkit::dense
