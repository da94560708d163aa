#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragkit/corpus.hpp"
#include "ragkit/ranked_list.hpp"
#include "ragkit/textkit.hpp"

namespace ragkit::sparse {

/// One (chunk, frequency, positions) entry of a postings list.
struct Posting {
    std::uint32_t doc = 0;                  // index into docs()
    std::uint32_t term_freq = 0;            // == positions.size()
    std::vector<std::uint32_t> positions;   // strictly increasing token offsets
};

struct DocEntry {
    std::string chunk_id;
    std::uint32_t length = 0;  // analyzed token count, >= 1
};

enum class IdfVariant {
    PaperEq3,         // ln(N / (n_t + 1)); can go negative for common terms
    RobertsonLucene,  // ln(1 + (N - n_t + 0.5) / (n_t + 0.5)); always positive
};

struct Bm25Params {
    double k1 = 1.2;   // term saturation, valid [0, inf)
    double b = 0.75;   // length normalization, valid [0, 1]
    IdfVariant idf_variant = IdfVariant::RobertsonLucene;
};

/// Term -> postings index over an analyzed corpus, with the statistics
/// the scorers need: per-chunk analyzed length, chunk count N and mean
/// chunk length. Immutable after build; safe for concurrent searches.
class InvertedIndex {
public:
    /// Builds from a corpus. Chunks that analyze to zero tokens are
    /// excluded and reported via warnings().
    static InvertedIndex build(const corpus::Corpus& corpus, text::AnalysisChain chain);

    const text::AnalysisChain& chain() const { return chain_; }
    const std::vector<DocEntry>& docs() const { return docs_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    std::size_t doc_count() const { return docs_.size(); }
    double avg_length() const { return avg_length_; }
    std::size_t vocabulary_size() const { return postings_.size(); }

    /// Number of chunks containing term (n_t); 0 for unseen terms.
    std::size_t doc_frequency(const std::string& term) const;

    bool contains(const std::string& chunk_id) const;

    /// Row of a chunk in docs(); throws std::out_of_range when unknown.
    std::uint32_t doc_index(const std::string& chunk_id) const;

    /// Serialized form: magic "SPIX", version, little-endian integers,
    /// length-prefixed UTF-8 strings. Layout documented in
    /// docs/index_format.md.
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static InvertedIndex load(std::istream& in);
    static InvertedIndex load_file(const std::string& path);

private:
    void rebuild_doc_lookup();

    text::AnalysisChain chain_;
    std::vector<DocEntry> docs_;
    std::map<std::string, std::vector<Posting>> postings_;  // postings in doc order
    std::unordered_map<std::string, std::uint32_t> doc_lookup_;
    std::vector<std::string> warnings_;
    double avg_length_ = 0.0;
};

/// Relevance of a chunk to a query: sum over shared terms of
/// (f / T) * ln(N / (n_t + 1)). Terms absent from the chunk contribute 0.
double tfidf_score(const InvertedIndex& index, const std::string& query,
                   const std::string& chunk_id);

/// Okapi BM25 with raw term counts; IDF per params.idf_variant.
double bm25_score(const InvertedIndex& index, const std::string& query,
                  const std::string& chunk_id, const Bm25Params& params = {});

struct Scorer {
    enum class Kind { TfIdf, Bm25 };
    Kind kind = Kind::Bm25;
    Bm25Params bm25;

    static Scorer tfidf() { return {Kind::TfIdf, {}}; }
    static Scorer bm25_default() { return {Kind::Bm25, {}}; }
    static Scorer bm25_with(Bm25Params p) { return {Kind::Bm25, p}; }
};

/// Top-k retrieval, equal to exhaustive score-then-sort under the shared
/// tie rule. BM25 keeps chunks scoring > 0; TF-IDF keeps chunks scoring
/// != 0 (Eq-3-style IDF can be negative). Throws std::invalid_argument
/// when the query analyzes to nothing.
RankedList search(const InvertedIndex& index, const std::string& query, std::size_t k,
                  const Scorer& scorer = Scorer::bm25_default());

/// Chunks containing all phrase terms at consecutive positions, ranked by
/// BM25 over the phrase terms.
RankedList phrase_search(const InvertedIndex& index, const std::string& phrase, std::size_t k,
                         const Bm25Params& params = {});

}  // namespace ragkit::sparse
