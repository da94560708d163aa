#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragkit/corpus.hpp"
#include "ragkit/ranked_list.hpp"

namespace ragkit::dense {

/// A fixed-length vector of finite reals.
using Embedding = std::vector<double>;

/// Deterministic text -> vector mapping. Implementations are immutable
/// and safe for concurrent use.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual Embedding embed(const std::string& text) const = 0;
};

/// Hash-based character-trigram embedding: analyze (lowercase, no stem),
/// pad each token with '#' on both ends, FNV-1a hash every 3-gram,
/// accumulate +-1 into hash mod dim, L2-normalize. Seedless and
/// deterministic; the empty string maps to the zero vector.
class HashedNGramProvider final : public EmbeddingProvider {
public:
    explicit HashedNGramProvider(std::size_t dim = 256);
    std::size_t dim() const override { return dim_; }
    Embedding embed(const std::string& text) const override;

private:
    std::size_t dim_;
};

/// Looks vectors up by exact text. Backed by a JSON Lines file of
/// {"id": string, "vector": [numbers]} objects.
class FileBackedProvider final : public EmbeddingProvider {
public:
    static FileBackedProvider load(const std::string& path);
    explicit FileBackedProvider(std::unordered_map<std::string, Embedding> vectors);

    std::size_t dim() const override { return dim_; }
    /// Throws std::out_of_range naming the id on a miss.
    Embedding embed(const std::string& text) const override;

private:
    std::unordered_map<std::string, Embedding> vectors_;
    std::size_t dim_ = 0;
};

double dot(const Embedding& q, const Embedding& p);

/// Cosine of the angle between two nonzero vectors, in [-1, 1].
double cosine(const Embedding& q, const Embedding& p);

double l2_norm(const Embedding& v);

enum class SimilarityMetric { Dot, Cosine };

/// Exact vector store: one embedding per chunk id.
class FlatIndex {
public:
    /// Embeds every chunk. Chunks mapping to the zero vector are skipped
    /// and reported via skipped().
    static FlatIndex build(const corpus::Corpus& corpus, const EmbeddingProvider& provider);
    static FlatIndex from_vectors(std::vector<std::string> ids, std::vector<Embedding> vectors);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const Embedding& vector(std::size_t row) const { return vectors_[row]; }
    const std::vector<std::string>& skipped() const { return skipped_; }

private:
    std::vector<std::string> ids_;
    std::vector<Embedding> vectors_;
    std::vector<std::string> skipped_;
    std::size_t dim_ = 0;
};

/// Exact top-k scan under dot or cosine similarity.
RankedList flat_search(const FlatIndex& index, const Embedding& query, std::size_t k,
                       SimilarityMetric metric);

/// Annoy-style forest of random-hyperplane trees. Internal nodes hold a
/// splitting hyperplane; leaves hold at most leaf_size row indexes.
class RpForest {
public:
    struct Node {
        Embedding normal;            // empty for leaves
        double offset = 0.0;
        std::int32_t left = -1;      // children < 0 for leaves
        std::int32_t right = -1;
        std::vector<std::uint32_t> items;
    };

    static constexpr std::size_t kDefaultTrees = 10;
    static constexpr std::size_t kDefaultLeafSize = 16;

    /// Deterministic build: hyperplanes come from two random distinct
    /// items (normal = difference, offset = midpoint projection). A split
    /// leaving one side empty is retried up to 20 times, then the node
    /// becomes a leaf.
    static RpForest build(const FlatIndex& index, std::size_t n_trees = kDefaultTrees,
                          std::size_t leaf_size = kDefaultLeafSize, std::uint64_t seed = 42);

    std::size_t tree_count() const { return roots_.size(); }
    std::size_t leaf_size() const { return leaf_size_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::int32_t root(std::size_t tree) const { return roots_[tree]; }

private:
    std::vector<Node> nodes_;           // shared arena for all trees
    std::vector<std::int32_t> roots_;
    std::size_t leaf_size_ = kDefaultLeafSize;
    std::uint64_t seed_ = 0;
};

/// Approximate top-k: traverse all trees with a shared priority queue
/// keyed by hyperplane margin, pool at least search_k distinct candidate
/// rows (or exhaust), then rank candidates by dot product.
/// search_k <= 0 means the default n_trees * k.
RankedList forest_search(const RpForest& forest, const FlatIndex& index, const Embedding& query,
                         std::size_t k, std::int64_t search_k = -1);

}  // namespace ragkit::dense
