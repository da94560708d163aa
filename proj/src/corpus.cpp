#include "ragkit/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ragkit::corpus {

namespace {

std::string trim(const std::string& s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    std::size_t a = 0;
    std::size_t z = s.size();
    while (a < z && issp(static_cast<unsigned char>(s[a]))) ++a;
    while (z > a && issp(static_cast<unsigned char>(s[z - 1]))) --z;
    return s.substr(a, z - a);
}

std::string require_string_field(const nlohmann::json& rec, const char* name, std::size_t index) {
    auto it = rec.find(name);
    if (it == rec.end()) {
        throw SchemaError("record " + std::to_string(index) + ": missing field \"" + name + "\"");
    }
    if (!it->is_string()) {
        throw SchemaError("record " + std::to_string(index) + ": field \"" + name +
                          "\" is not a string");
    }
    return it->get<std::string>();
}

}  // namespace

double Corpus::avg_token_length(const text::AnalysisChain& chain) const {
    if (chunks.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& c : chunks) {
        total += text::analyze(c.text, chain).size();
    }
    return static_cast<double>(total) / static_cast<double>(chunks.size());
}

std::vector<CqaTriplet> load_cqa(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open CQA file: " + path);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/false);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON in ") + path + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw SchemaError("top-level JSON value must be an array of records");
    }
    std::vector<CqaTriplet> out;
    out.reserve(doc.size());
    std::unordered_set<std::string> seen_ids;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        if (!rec.is_object()) {
            throw SchemaError("record " + std::to_string(i) + ": not a JSON object");
        }
        CqaTriplet t;
        t.context = require_string_field(rec, "Context", i);
        t.question = require_string_field(rec, "Question", i);
        t.answer = require_string_field(rec, "Answer", i);
        if (auto it = rec.find("Id"); it != rec.end()) {
            if (!it->is_string()) {
                throw SchemaError("record " + std::to_string(i) + ": field \"Id\" is not a string");
            }
            t.id = it->get<std::string>();
        } else {
            t.id = "q" + std::to_string(i);
        }
        if (!seen_ids.insert(t.id).second) {
            throw SchemaError("record " + std::to_string(i) + ": duplicate id \"" + t.id + "\"");
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::pair<std::vector<CqaTriplet>, std::vector<std::pair<std::string, std::string>>>
clean(const std::vector<CqaTriplet>& triplets) {
    std::vector<CqaTriplet> kept;
    std::vector<std::pair<std::string, std::string>> dropped;
    for (const auto& t : triplets) {
        if (trim(t.context).empty()) {
            dropped.emplace_back(t.id, "empty context");
        } else if (trim(t.question).empty()) {
            dropped.emplace_back(t.id, "empty question");
        } else if (trim(t.answer).empty()) {
            dropped.emplace_back(t.id, "empty answer");
        } else {
            kept.push_back(t);
        }
    }
    return {std::move(kept), std::move(dropped)};
}

AnswerClassification classify_answer(const std::string& answer, const std::string& context) {
    const auto chain = text::AnalysisChain::for_metrics();
    auto answer_tokens = text::analyze(answer, chain);
    if (answer_tokens.empty()) {
        throw std::invalid_argument("classify_answer: answer has no tokens");
    }
    auto context_tokens = text::analyze(context, chain);
    std::unordered_set<std::string> context_set(context_tokens.begin(), context_tokens.end());
    std::unordered_set<std::string> distinct(answer_tokens.begin(), answer_tokens.end());
    std::size_t present = 0;
    for (const auto& tok : distinct) {
        if (context_set.count(tok) > 0) ++present;
    }
    double ratio = static_cast<double>(present) / static_cast<double>(distinct.size());
    return {ratio > 0.5 ? AnswerKind::Extractive : AnswerKind::Abstractive, ratio};
}

DatasetStats dataset_stats(const std::vector<CqaTriplet>& triplets) {
    if (triplets.empty()) {
        throw std::invalid_argument("dataset_stats: empty dataset");
    }
    DatasetStats stats;
    stats.triplet_count = triplets.size();
    const auto chain = text::AnalysisChain::for_metrics();
    std::map<std::string, std::size_t> trigram_counts;
    for (const auto& t : triplets) {
        stats.context_length_hist[text::tokenize(t.context).size()] += 1;
        stats.question_length_hist[text::tokenize(t.question).size()] += 1;
        stats.answer_length_hist[text::tokenize(t.answer).size()] += 1;
        auto cls = classify_answer(t.answer, t.context);
        if (cls.kind == AnswerKind::Extractive) {
            stats.extractive_count += 1;
        } else {
            stats.abstractive_count += 1;
        }
        auto question_tokens = text::analyze(t.question, chain);
        for (const auto& tri : text::ngrams(question_tokens, 3)) {
            trigram_counts[tri[0] + " " + tri[1] + " " + tri[2]] += 1;
        }
    }
    stats.top_trigrams.assign(trigram_counts.begin(), trigram_counts.end());
    std::stable_sort(stats.top_trigrams.begin(), stats.top_trigrams.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    return stats;
}

Corpus corpus_from_contexts(const std::vector<CqaTriplet>& triplets, bool dedupe) {
    if (triplets.empty()) {
        throw std::invalid_argument("corpus_from_contexts: empty dataset");
    }
    Corpus corpus;
    if (!dedupe) {
        for (const auto& t : triplets) {
            corpus.chunks.push_back({t.id, t.context});
        }
        return corpus;
    }
    std::unordered_map<std::string, std::size_t> index_of;
    std::vector<std::vector<std::string>> sources;
    for (const auto& t : triplets) {
        auto [it, inserted] = index_of.try_emplace(t.context, corpus.chunks.size());
        if (inserted) {
            corpus.chunks.push_back({t.id, t.context});
            sources.push_back({t.id});
        } else {
            sources[it->second].push_back(t.id);
        }
    }
    for (std::size_t i = 0; i < corpus.chunks.size(); ++i) {
        if (sources[i].size() > 1) {
            std::string joined = sources[i][0];
            for (std::size_t s = 1; s < sources[i].size(); ++s) {
                joined += "+" + sources[i][s];
            }
            corpus.chunks[i].id = std::move(joined);
        }
    }
    return corpus;
}

Corpus corpus_from_text(const std::string& path, std::size_t chunk_words,
                        std::size_t overlap_words) {
    if (chunk_words == 0 || overlap_words >= chunk_words) {
        throw std::invalid_argument("corpus_from_text: need chunk_words > overlap_words >= 0");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open text file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    auto spans = text::tokenize_spans(content);
    if (spans.empty()) {
        throw std::invalid_argument("corpus_from_text: file has no words: " + path);
    }
    const std::string stem = std::filesystem::path(path).stem().string();
    const std::size_t stride = chunk_words - overlap_words;
    Corpus corpus;
    for (std::size_t start = 0; start < spans.size(); start += stride) {
        std::size_t last = std::min(start + chunk_words, spans.size()) - 1;
        Chunk chunk;
        chunk.id = stem + ":" + std::to_string(start);
        chunk.text = content.substr(spans[start].begin, spans[last].end - spans[start].begin);
        corpus.chunks.push_back(std::move(chunk));
    }
    return corpus;
}

}  // namespace ragkit::corpus
