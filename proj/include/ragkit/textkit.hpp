#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ragkit::text {

/// A token is a UTF-8 string produced by the analysis pipeline. After
/// tokenization it contains only letters/digits, never separators.
using Token = std::string;

/// A token together with the byte range it occupies in the source text.
/// begin/end are byte offsets into the original string (end exclusive).
struct TokenSpan {
    Token token;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Immutable description of the per-token normalization applied after
/// tokenization: case folding, stopword removal, then Porter stemming.
struct AnalysisChain {
    bool lowercase = true;
    bool stem = true;
    std::unordered_set<std::string> stopwords;

    /// Chain used when building and querying term indexes.
    static AnalysisChain for_index() { return AnalysisChain{true, true, {}}; }

    /// Chain used by the text metrics: surface forms are kept (no stemming)
    /// so precision/recall compare what the model actually wrote.
    static AnalysisChain for_metrics() { return AnalysisChain{true, false, {}}; }
};

/// Splits text into maximal runs of letters/digits. Everything else
/// (punctuation, whitespace, symbols) is a separator. Total function:
/// empty input yields an empty sequence, order is preserved.
std::vector<Token> tokenize(std::string_view text);

/// tokenize, but each token carries the byte range it was cut from.
std::vector<TokenSpan> tokenize_spans(std::string_view text);

/// tokenize + per-token: fold case, drop stopwords, Porter-stem.
std::vector<Token> analyze(std::string_view text, const AnalysisChain& chain);

/// All contiguous windows of length n, in order. Empty when the input is
/// shorter than n. n == 0 is rejected.
std::vector<std::vector<Token>> ngrams(const std::vector<Token>& tokens, std::size_t n);

/// Simple (one-to-one) Unicode case folding of a UTF-8 string. Covers
/// ASCII, Latin-1/Extended-A, Greek, Cyrillic, Armenian and fullwidth
/// forms; other codepoints pass through. Idempotent.
std::string fold_case(std::string_view text);

/// Porter (1980) stemmer, steps 1a through 5b. Operates on lowercase
/// ASCII words; inputs of length <= 2 or containing anything but a-z are
/// returned unchanged.
std::string porter_stem(std::string_view word);

/// Loads a stopword set from a UTF-8 text file, one word per line.
/// Words are case-folded; blank lines are skipped.
std::unordered_set<std::string> load_stopwords(const std::string& path);

}  // namespace ragkit::text
