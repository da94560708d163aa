#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ragkit/textkit.hpp"

namespace ragkit::corpus {

/// One context-question-answer record.
struct CqaTriplet {
    std::string id;
    std::string context;
    std::string question;
    std::string answer;
};

/// One retrieval unit of corpus text.
struct Chunk {
    std::string id;
    std::string text;
};

/// The chunk collection retrieved over, with the corpus statistics the
/// term scorers need (chunk count and mean analyzed length).
struct Corpus {
    std::vector<Chunk> chunks;

    std::size_t size() const { return chunks.size(); }

    /// Mean analyzed token count per chunk. 0 for an empty corpus.
    double avg_token_length(const text::AnalysisChain& chain) const;
};

enum class AnswerKind { Extractive, Abstractive };

struct AnswerClassification {
    AnswerKind kind;
    double overlap_ratio;  // in [0, 1]
};

struct DatasetStats {
    std::size_t triplet_count = 0;
    // word count -> number of triplets whose field has that many words
    std::map<std::size_t, std::size_t> context_length_hist;
    std::map<std::size_t, std::size_t> question_length_hist;
    std::map<std::size_t, std::size_t> answer_length_hist;
    std::size_t extractive_count = 0;
    std::size_t abstractive_count = 0;
    // question trigrams joined with single spaces, ranked by frequency
    // descending then lexicographically ascending
    std::vector<std::pair<std::string, std::size_t>> top_trigrams;
};

/// Loads CQA records from a UTF-8 JSON file: a top-level array of objects
/// with string fields "Context", "Question", "Answer" and an optional
/// "Id". Records without an Id get a sequential "q<index>" one. Throws
/// std::runtime_error on I/O failure, ragkit::corpus::ParseError on
/// malformed JSON and ragkit::corpus::SchemaError on wrong shape.
std::vector<CqaTriplet> load_cqa(const std::string& path);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Drops triplets with any empty (after whitespace trimming) text field.
/// Keeps order; reports every drop as (id, reason).
std::pair<std::vector<CqaTriplet>, std::vector<std::pair<std::string, std::string>>>
clean(const std::vector<CqaTriplet>& triplets);

/// Classifies an answer as extractive when strictly more than half of its
/// distinct analyzed tokens (lowercased, unstemmed) occur in the context.
AnswerClassification classify_answer(const std::string& answer, const std::string& context);

/// Per-field length histograms, extractive/abstractive counts and ranked
/// question trigrams for a dataset.
DatasetStats dataset_stats(const std::vector<CqaTriplet>& triplets);

/// Builds a retrieval corpus by pooling triplet contexts. With dedupe on,
/// exact-duplicate contexts collapse into one chunk whose id joins the
/// source triplet ids with '+'.
Corpus corpus_from_contexts(const std::vector<CqaTriplet>& triplets, bool dedupe);

/// Sliding word-window chunking of a raw text file. Chunks start every
/// (chunk_words - overlap_words) words; the final short chunk is kept.
/// Chunk ids are "<file stem>:<word offset>".
Corpus corpus_from_text(const std::string& path, std::size_t chunk_words,
                        std::size_t overlap_words);

}  // namespace ragkit::corpus
